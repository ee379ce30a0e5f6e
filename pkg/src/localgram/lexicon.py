"""DELA-style domain lexicon with two-step inflection and a prefix index.

File format (UTF-8, line based)::

    // comment
    #POS N
    #TAG CLO_TY
    #PARADIGM ADJ_E PAST=었다 POL=어요
    #VARIANT ㅡ+ㅓ=>ㅓ
    자켓,INV.N+CLO_TY
    크다,ADJ_E.ADJ+VALUE

Inflection runs in two steps.  A variant rule may first fuse the end of the
stem with the start of the suffix (``크`` + ``었다`` gives ``컸다``); the
result is then concatenated.  A rule whose replacement is a single vowel jamo
merges the two syllables: the stem syllable keeps its initial consonant, takes
the replacement vowel and inherits the suffix syllable's final consonant.  Any
other rule is a plain string rewrite at the junction.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from typing import Collection, Iterable, Iterator

INV = "INV"
BASE = "BASE"

_CODE_RE = re.compile(r"^[A-Z][A-Z0-9_]*$")
_CELL_RE = re.compile(r"^([A-Za-z0-9_]+)=(.+)$")

# Hangul syllable arithmetic
_SBASE, _LCOUNT, _VCOUNT, _TCOUNT = 0xAC00, 19, 21, 28
_VOWELS = "ㅏㅐㅑㅒㅓㅔㅕㅖㅗㅘㅙㅚㅛㅜㅝㅞㅟㅠㅡㅢㅣ"


class LexiconError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def decompose_syllable(ch: str) -> tuple[int, int, int] | None:
    """(initial, vowel, final) indices of a precomposed Hangul syllable, else None."""
    code = ord(ch) - _SBASE
    if not 0 <= code < _LCOUNT * _VCOUNT * _TCOUNT:
        return None
    return code // (_VCOUNT * _TCOUNT), (code // _TCOUNT) % _VCOUNT, code % _TCOUNT


def compose_syllable(initial: int, vowel: int, final: int) -> str:
    return chr(_SBASE + (initial * _VCOUNT + vowel) * _TCOUNT + final)


def is_hangul_syllable(ch: str) -> bool:
    return decompose_syllable(ch) is not None


@dataclass(frozen=True)
class LexEntry:
    lemma: str
    pos: str
    tags: frozenset[str] = frozenset()
    infl_class: str = INV

    @property
    def stem(self) -> str:
        # Korean predicates are listed in the citation form ending in 다
        if self.infl_class != INV and len(self.lemma) > 1 and self.lemma.endswith("다"):
            return self.lemma[:-1]
        return self.lemma

    def to_line(self) -> str:
        return f"{self.lemma},{self.infl_class}.{self.pos}" + "".join(
            "+" + t for t in sorted(self.tags)
        )


@dataclass(frozen=True)
class SurfaceForm:
    surface: str
    lemma: str
    pos: str
    tags: frozenset[str] = frozenset()
    suffix_info: str = BASE


@dataclass(frozen=True)
class VariantRule:
    stem_pattern: str
    suffix_pattern: str
    replacement: str

    def __post_init__(self):
        if not self.stem_pattern or not self.suffix_pattern:
            raise LexiconError(f"empty pattern in variant rule {self.to_line()!r}")

    @property
    def merges_syllables(self) -> bool:
        return all(len(p) == 1 and p in _VOWELS
                   for p in (self.stem_pattern, self.suffix_pattern, self.replacement))

    def _vowel_match(self, pattern: str, syllable: str, need_open: bool) -> bool:
        parts = decompose_syllable(syllable)
        if parts is None:
            return False
        initial, vowel, final = parts
        if _VOWELS[vowel] != pattern:
            return False
        if need_open:
            return final == 0
        return initial == 11  # ㅇ, silent onset

    def apply(self, stem: str, suffix: str) -> str | None:
        """Fused stem+suffix if the rule fires, otherwise None."""
        if not stem or not suffix:
            return None
        if self.merges_syllables:
            if not (self._vowel_match(self.stem_pattern, stem[-1], True)
                    and self._vowel_match(self.suffix_pattern, suffix[0], False)):
                return None
            initial = decompose_syllable(stem[-1])[0]
            final = decompose_syllable(suffix[0])[2]
            fused = compose_syllable(initial, _VOWELS.index(self.replacement), final)
            return stem[:-1] + fused + suffix[1:]
        if stem.endswith(self.stem_pattern) and suffix.startswith(self.suffix_pattern):
            return (stem[: len(stem) - len(self.stem_pattern)] + self.replacement
                    + suffix[len(self.suffix_pattern):])
        return None

    def to_line(self) -> str:
        return f"#VARIANT {self.stem_pattern}+{self.suffix_pattern}=>{self.replacement}"


@dataclass
class InflectionRules:
    paradigms: dict[str, list[tuple[str, str]]] = field(default_factory=dict)
    variant_rules: list[VariantRule] = field(default_factory=list)

    def merged(self, other: "InflectionRules | None") -> "InflectionRules":
        if other is None:
            return self
        paradigms = dict(self.paradigms)
        for name, cells in other.paradigms.items():
            if name in paradigms and paradigms[name] != cells:
                raise LexiconError(f"paradigm {name} defined twice with different cells")
            paradigms[name] = cells
        return InflectionRules(paradigms, self.variant_rules + [
            r for r in other.variant_rules if r not in self.variant_rules])

    def fuse(self, stem: str, suffix: str) -> str:
        for rule in self.variant_rules:
            fused = rule.apply(stem, suffix)
            if fused is not None:
                return fused
        return stem + suffix

    def header_lines(self) -> list[str]:
        lines = [
            f"#PARADIGM {name} " + " ".join(f"{cell}={suf}" for cell, suf in cells)
            for name, cells in self.paradigms.items()
        ]
        lines.extend(rule.to_line() for rule in self.variant_rules)
        return lines


class PrefixIndex:
    """Character trie over surface forms.  Immutable once frozen."""

    def __init__(self):
        self._root: dict = {}
        self._frozen = False

    def add(self, form: SurfaceForm) -> None:
        if self._frozen:
            raise RuntimeError("index is frozen")
        node = self._root
        for ch in form.surface:
            node = node.setdefault(ch, {})
        node.setdefault(None, []).append(form)

    def freeze(self) -> None:
        self._frozen = True

    def lookup(self, surface: str) -> list[SurfaceForm]:
        node = self._root
        for ch in surface:
            node = node.get(ch)
            if node is None:
                return []
        return list(node.get(None, ()))

    def prefixes(self, text: str, start: int = 0) -> Iterator[tuple[int, list[SurfaceForm]]]:
        """Yield (end offset, analyses) for every surface that begins at ``start``."""
        node = self._root
        for i in range(start, len(text)):
            node = node.get(text[i])
            if node is None:
                return
            if None in node:
                yield i + 1, node[None]

    def __iter__(self) -> Iterator[SurfaceForm]:
        stack = [self._root]
        while stack:
            node = stack.pop()
            for key, child in node.items():
                if key is None:
                    yield from child
                else:
                    stack.append(child)


@dataclass
class Lexicon:
    pos_codes: list[str] = field(default_factory=list)
    tag_codes: list[str] = field(default_factory=list)
    entries: list[LexEntry] = field(default_factory=list)
    rules: InflectionRules = field(default_factory=InflectionRules)
    forms: PrefixIndex | None = field(default=None, compare=False, repr=False)

    @property
    def code_inventory(self) -> frozenset[str]:
        return frozenset(self.pos_codes) | frozenset(self.tag_codes)

    def lookup(self, surface: str) -> list[SurfaceForm]:
        if self.forms is None:
            raise LexiconError("lexicon index not built; call build_index first")
        return self.forms.lookup(normalize(surface))

    def longest_prefix(self, text: str, start: int = 0) -> tuple[str, int] | None:
        """Longest dictionary surface starting at ``start`` with its end offset."""
        if self.forms is None:
            raise LexiconError("lexicon index not built; call build_index first")
        best = None
        for end, _ in self.forms.prefixes(text, start):
            best = (text[start:end], end)
        return best


def _parse_rule_line(kind: str, rest: str, rules: InflectionRules, lineno: int) -> None:
    if kind == "#PARADIGM":
        parts = rest.split()
        if len(parts) < 2:
            raise LexiconError("paradigm needs a class and at least one cell", lineno)
        name, cells = parts[0], []
        if name == INV or not _CODE_RE.match(name):
            raise LexiconError(f"bad paradigm name {name!r}", lineno)
        seen = set()
        for spec in parts[1:]:
            m = _CELL_RE.match(spec)
            if not m:
                raise LexiconError(f"malformed paradigm cell {spec!r}", lineno)
            if m.group(1) in seen:
                raise LexiconError(f"duplicate cell {m.group(1)} in {name}", lineno)
            seen.add(m.group(1))
            cells.append((m.group(1), m.group(2)))
        if name in rules.paradigms:
            raise LexiconError(f"paradigm {name} declared twice", lineno)
        rules.paradigms[name] = cells
    else:
        m = re.fullmatch(r"(\S+)\+(\S+)=>(\S+)", rest.strip())
        if not m:
            raise LexiconError(f"malformed variant rule {rest!r}", lineno)
        try:
            rules.variant_rules.append(VariantRule(*m.groups()))
        except LexiconError as exc:
            raise LexiconError(str(exc), lineno) from None


def parse_rules(source: str) -> InflectionRules:
    """Parse a file holding only #PARADIGM / #VARIANT lines (and comments)."""
    rules = InflectionRules()
    for lineno, line in enumerate(normalize(source).splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("//"):
            continue
        kind, _, rest = line.partition(" ")
        if kind not in ("#PARADIGM", "#VARIANT"):
            raise LexiconError(f"unexpected line in rule file: {line!r}", lineno)
        _parse_rule_line(kind, rest, rules, lineno)
    return rules


def _split_class_pos(field_text: str, pos_codes: set[str], lineno: int) -> tuple[str, str]:
    left, dot, right = field_text.partition(".")
    if not dot or not left or not right:
        raise LexiconError(f"expected <class>.<POS>, got {field_text!r}", lineno)
    # also accept the reversed `N.INV` order
    if right == INV and left in pos_codes:
        return INV, left
    return left, right


def parse_lexicon(source: str) -> Lexicon:
    """Parse lexicon text into a Lexicon without expanded forms."""
    lex = Lexicon()
    seen: set[tuple[str, str]] = set()
    for lineno, raw in enumerate(normalize(source).splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        if line.startswith("#"):
            kind, _, rest = line.partition(" ")
            rest = rest.strip()
            if kind in ("#POS", "#TAG"):
                if not _CODE_RE.match(rest):
                    raise LexiconError(f"bad code {rest!r}", lineno)
                if rest in lex.code_inventory or rest == INV:
                    raise LexiconError(f"code {rest} declared twice", lineno)
                (lex.pos_codes if kind == "#POS" else lex.tag_codes).append(rest)
            elif kind in ("#PARADIGM", "#VARIANT"):
                _parse_rule_line(kind, rest, lex.rules, lineno)
            else:
                raise LexiconError(f"unknown header {kind!r}", lineno)
            continue
        lemma, comma, info = line.rpartition(",")
        if not comma or not lemma:
            raise LexiconError(f"malformed entry {line!r}", lineno)
        head, *tags = info.split("+")
        infl_class, pos = _split_class_pos(head, set(lex.pos_codes), lineno)
        if pos not in lex.pos_codes:
            raise LexiconError(f"undeclared POS code {pos!r}", lineno)
        for tag in tags:
            if tag not in lex.tag_codes:
                raise LexiconError(f"undeclared tag code {tag!r}", lineno)
        if infl_class != INV and not _CODE_RE.match(infl_class):
            raise LexiconError(f"bad inflection class {infl_class!r}", lineno)
        if (lemma, pos) in seen:
            raise LexiconError(f"duplicate entry {lemma},{pos}", lineno)
        seen.add((lemma, pos))
        lex.entries.append(LexEntry(lemma, pos, frozenset(tags), infl_class))
    return lex


def serialize_lexicon(lex: Lexicon) -> str:
    lines = [f"#POS {c}" for c in lex.pos_codes]
    lines += [f"#TAG {c}" for c in lex.tag_codes]
    lines += lex.rules.header_lines()
    lines += [e.to_line() for e in lex.entries]
    return "".join(line + "\n" for line in lines)


def inflect(entry: LexEntry, rules: InflectionRules) -> list[SurfaceForm]:
    if entry.infl_class == INV:
        return [SurfaceForm(entry.lemma, entry.lemma, entry.pos, entry.tags, BASE)]
    cells = rules.paradigms.get(entry.infl_class)
    if cells is None:
        raise LexiconError(f"no paradigm for inflection class {entry.infl_class!r} "
                           f"(entry {entry.lemma})")
    forms = []
    for cell, suffix in cells:
        surface = rules.fuse(entry.stem, suffix)
        if not surface:
            raise LexiconError(f"empty surface for {entry.lemma} cell {cell}")
        forms.append(SurfaceForm(surface, entry.lemma, entry.pos, entry.tags, cell))
    return forms


def build_index(lex: Lexicon, rules: InflectionRules | None = None) -> Lexicon:
    """Return a copy of ``lex`` with every inflected form indexed."""
    merged = lex.rules.merged(rules)
    index = PrefixIndex()
    for entry in lex.entries:
        for form in inflect(entry, merged):
            index.add(form)
    index.freeze()
    return Lexicon(list(lex.pos_codes), list(lex.tag_codes), list(lex.entries), merged, index)


def resolve_mask(mask, analyses: Iterable[SurfaceForm], codes: Collection[str] = ()) -> bool:
    """True iff some analysis satisfies every constraint of ``mask``.

    A bare ``<X>`` is a code constraint (POS or tag) when X is in ``codes``,
    otherwise a lemma constraint.
    """
    bare_is_code = mask.bare is not None and mask.bare in codes
    for a in analyses:
        if mask.bare is not None:
            if bare_is_code:
                if a.pos != mask.bare and mask.bare not in a.tags:
                    continue
            elif a.lemma != mask.bare:
                continue
        if mask.lemma is not None and a.lemma != mask.lemma:
            continue
        if mask.pos is not None and a.pos != mask.pos:
            continue
        if not mask.tags <= a.tags:
            continue
        return True
    return False


def iter_forms(lex: Lexicon) -> Iterable[SurfaceForm]:
    if lex.forms is None:
        return ()
    return iter(lex.forms)
