"""Leftmost-longest annotation of text with a compiled network."""
from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from itertools import islice
from typing import Iterable, Iterator, NamedTuple

from .compiler import CALL, LIT, MASK, Rtn
from .document import BOUNDARY, TAG_RE, AnnotatedDoc, Annotation, Token, tokenize
from .lexicon import Lexicon, normalize, resolve_mask

log = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 64


class AnnotationError(ValueError):
    def __init__(self, message: str, graph: str | None = None, line: int | None = None):
        self.graph = graph
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        if graph:
            prefix += f"graph {graph}: "
        super().__init__(prefix + message)


class FirstSet(NamedTuple):
    """What the first consumed token of a graph can be."""
    literals: frozenset
    masks: tuple
    any_token: bool
    nullable: bool


def _call_closure(auto, start: int, nullable: dict) -> list[int]:
    # states reachable without consuming: through calls to graphs that may accept nothing
    seen, stack = {start}, [start]
    while stack:
        for t in auto.transitions[stack.pop()]:
            if t.kind == CALL and nullable.get(t.arg) and t.target not in seen:
                seen.add(t.target)
                stack.append(t.target)
    return sorted(seen)


def first_sets(rtn: Rtn) -> dict[str, FirstSet]:
    cached = getattr(rtn, "_first_sets", None)
    if cached is not None:
        return cached
    nullable = {name: False for name in rtn.automata}
    changed = True
    while changed:
        changed = False
        for name, auto in rtn.automata.items():
            if not nullable[name] and any(
                    s in auto.finals for s in _call_closure(auto, auto.initial, nullable)):
                nullable[name] = changed = True
    lits = {name: set() for name in rtn.automata}
    masks: dict[str, list] = {name: [] for name in rtn.automata}
    wild = {name: False for name in rtn.automata}
    changed = True
    while changed:
        changed = False
        for name, auto in rtn.automata.items():
            before = (len(lits[name]), len(masks[name]), wild[name])
            for s in _call_closure(auto, auto.initial, nullable):
                for t in auto.transitions[s]:
                    if t.kind == LIT:
                        lits[name].add(t.arg)
                    elif t.kind == MASK:
                        if t.arg.special == "TOKEN":
                            wild[name] = True
                        elif t.arg not in masks[name]:
                            masks[name].append(t.arg)
                    elif t.kind == CALL and t.arg in rtn.automata:
                        lits[name] |= lits[t.arg]
                        masks[name].extend(m for m in masks[t.arg] if m not in masks[name])
                        wild[name] = wild[name] or wild[t.arg]
            if (len(lits[name]), len(masks[name]), wild[name]) != before:
                changed = True
    result = {name: FirstSet(frozenset(lits[name]), tuple(masks[name]), wild[name],
                             nullable[name]) for name in rtn.automata}
    rtn._first_sets = result
    return result


class _Context:
    """Per (network, lexicon) caches shared by every document of a run.

    Keys use object ids, so the context keeps both objects alive."""

    def __init__(self, rtn: Rtn, lexicon: Lexicon | None):
        self.rtn = rtn
        self.lexicon = lexicon
        self.codes = lexicon.code_inventory if lexicon is not None else frozenset()
        self.first = first_sets(rtn)
        self._resolved: dict = {}
        self._first_hit: dict = {}

    def resolves(self, mask, analyses) -> bool:
        key = (id(mask), id(analyses))
        hit = self._resolved.get(key)
        if hit is None:
            hit = self._resolved[key] = resolve_mask(mask, analyses, self.codes)
        return hit

    def first_hit(self, graph: str, analyses) -> bool:
        key = (graph, id(analyses))
        hit = self._first_hit.get(key)
        if hit is None:
            hit = self._first_hit[key] = any(
                self.resolves(m, analyses) for m in self.first[graph].masks)
        return hit


_contexts: dict = {}


def _context(rtn: Rtn, lexicon: Lexicon | None) -> _Context:
    key = (id(rtn), id(lexicon))
    ctx = _contexts.get(key)
    if ctx is None or ctx.rtn is not rtn or ctx.lexicon is not lexicon:
        if len(_contexts) >= 8:
            _contexts.clear()
        ctx = _contexts[key] = _Context(rtn, lexicon)
    return ctx


class _Scanner:
    """Per-document matching state: tokens plus a cache of lexicon lookups."""

    def __init__(self, text: str, tokens: list[Token], rtn: Rtn, lexicon: Lexicon | None,
                 max_depth: int):
        self.text = text
        self.tokens = tokens
        self.rtn = rtn
        self.lexicon = lexicon
        self.ctx = _context(rtn, lexicon)
        self.max_depth = max_depth
        self.end_at = {t.end: i + 1 for i, t in enumerate(tokens)}
        self.texts = [None if t.kind == BOUNDARY else t.text for t in tokens] + [None]
        self._surfaces: dict[int, list] = {}
        self._mask_cache: dict = {}
        self._can_start: dict = {}

    def _surfaces_at(self, p: int) -> list:
        found = self._surfaces.get(p)
        if found is None:
            found = []
            if self.lexicon is not None and self.lexicon.forms is not None:
                for end_char, analyses in self.lexicon.forms.prefixes(self.text,
                                                                      self.tokens[p].offset):
                    end_tok = self.end_at.get(end_char)
                    if end_tok is None:
                        continue
                    if any(self.tokens[k].kind == BOUNDARY for k in range(p, end_tok)):
                        break
                    found.append((end_tok, analyses))
            self._surfaces[p] = found
        return found

    def can_start(self, graph: str, p: int) -> bool:
        """False when ``graph`` certainly cannot match anything beginning at ``p``."""
        key = (graph, p)
        ok = self._can_start.get(key)
        if ok is None:
            first = self.ctx.first[graph]
            tokens = self.tokens
            if p < len(tokens) and tokens[p].kind == BOUNDARY:
                p += 1
            if first.nullable or first.any_token:
                ok = True
            elif p >= len(tokens) or tokens[p].kind == BOUNDARY:
                ok = False
            else:
                ok = tokens[p].text in first.literals or (
                    bool(first.masks)
                    and any(self.ctx.first_hit(graph, an) for _, an in self._surfaces_at(p)))
            self._can_start[key] = ok
        return ok

    def mask_ends(self, p: int, mask) -> list[int]:
        key = (p, id(mask))
        ends = self._mask_cache.get(key)
        if ends is None:
            if mask.special == "TOKEN":
                ends = [p + 1]
            else:
                surfaces = self._surfaces_at(p)
                ends = [e for e, analyses in surfaces
                        if self.ctx.resolves(mask, analyses)] if surfaces else []
            self._mask_cache[key] = ends
        return ends

    def match_at(self, start: int) -> tuple[int, tuple] | None:
        """Longest match from ``start``; ties go to the first path in declaration order.

        Depth-first search over (graph, state, call stack, position); a
        configuration is expanded only the first time it is reached, which is
        through the earliest path in transition order.
        """
        rtn, texts, n = self.rtn, self.texts, len(self.tokens)
        autos = rtn.automata
        main = rtn.main
        if not self.can_start(main, start):
            return None
        best: tuple[int, tuple] | None = None
        seen = set()
        stack = [(main, autos[main].initial, (), start, None)]
        while stack:
            graph, state, calls, pos, emits = stack.pop()
            key = (graph, state, calls, pos)
            if key in seen:
                continue
            seen.add(key)
            auto = autos[graph]
            pending = []
            for kind, arg, target, outputs, gap in auto.transitions[state]:
                if kind == CALL:
                    if len(calls) < self.max_depth and self.can_start(arg, pos):
                        pending.append((arg, autos[arg].initial, calls + ((graph, target),),
                                        pos, _emit(emits, pos, outputs)))
                    continue
                p = pos
                # texts[p] is None on whitespace and past the last token
                if texts[p] is None:
                    if not gap or p >= n:
                        continue
                    p += 1
                    if texts[p] is None:
                        continue
                if kind == LIT:
                    if texts[p] == arg:
                        pending.append((graph, target, calls, p + 1, _emit(emits, pos, outputs)))
                elif kind == MASK:
                    out = _emit(emits, pos, outputs)
                    for e in self.mask_ends(p, arg):
                        pending.append((graph, target, calls, e, out))
            if state in auto.finals:
                done = _emit(emits, pos, auto.finals[state])
                if calls:
                    (rgraph, rstate), rest = calls[-1], calls[:-1]
                    pending.insert(0, (rgraph, rstate, rest, pos, done))
                elif best is None or pos > best[0]:
                    best = (pos, done)
            stack.extend(reversed(pending))
        if best is None or best[0] == start:
            return None
        return best[0], _unwind(best[1])

    def annotations_for(self, emits: tuple) -> list[Annotation]:
        out: list[Annotation] = []
        open_: tuple | None = None
        for pos, text in emits:
            for m in TAG_RE.finditer(text):
                closing, label, attr = m.group(1) == "/", m.group(2), m.group(3)
                if not closing:
                    if open_ is not None:
                        raise AnnotationError(f"nested tag <{label}> inside <{open_[1]}>",
                                              self.rtn.main)
                    if pos < len(self.tokens) and self.tokens[pos].kind == BOUNDARY:
                        pos_open = pos + 1
                    else:
                        pos_open = pos
                    open_ = (pos_open, label, attr)
                    continue
                if open_ is None or open_[1] != label or attr is not None:
                    raise AnnotationError(f"unbalanced closing tag </{label}>", self.rtn.main)
                if pos - 1 >= open_[0]:
                    out.append(Annotation(open_[0], pos - 1, label, open_[2]))
                open_ = None
        if open_ is not None:
            raise AnnotationError(f"unclosed tag <{open_[1]}>", self.rtn.main)
        return out


def _emit(emits, pos: int, outputs: tuple[str, ...]):
    for o in outputs:
        emits = (pos, o, emits)
    return emits


def _unwind(emits) -> tuple:
    out = []
    while emits is not None:
        pos, text, emits = emits
        out.append((pos, text))
    return tuple(reversed(out))


def find_matches(text: str, rtn: Rtn, lexicon: Lexicon | None = None,
                 max_depth: int = DEFAULT_MAX_DEPTH) -> list[tuple[int, int, tuple]]:
    """Leftmost-longest matches as (start token, end token exclusive, emissions)."""
    text = normalize(text)
    tokens = tokenize(text)
    scanner = _Scanner(text, tokens, rtn, lexicon, max_depth)
    return _scan(scanner)


def _scan(scanner: _Scanner) -> list[tuple[int, int, tuple]]:
    tokens = scanner.tokens
    matches = []
    i = 0
    while i < len(tokens):
        if tokens[i].kind == BOUNDARY:
            i += 1
            continue
        m = scanner.match_at(i)
        if m is None:
            i += 1
            continue
        matches.append((i, m[0], m[1]))
        i = m[0]
    return matches


def annotate(doc_text: str, rtn: Rtn, lexicon: Lexicon | None = None,
             max_depth: int = DEFAULT_MAX_DEPTH) -> AnnotatedDoc:
    text = normalize(doc_text)
    tokens = tokenize(text)
    scanner = _Scanner(text, tokens, rtn, lexicon, max_depth)
    annotations: list[Annotation] = []
    for _, _, emits in _scan(scanner):
        annotations.extend(scanner.annotations_for(emits))
    doc = AnnotatedDoc(text, tokens, annotations)
    doc.check()
    return doc


def _annotate_line(line: str, rtn: Rtn, lexicon: Lexicon | None
                   ) -> tuple[AnnotatedDoc, str | None]:
    try:
        return annotate(line, rtn, lexicon), None
    except AnnotationError as exc:
        return AnnotatedDoc.plain(line), str(exc)


_worker_resources: tuple = ()


def _init_worker(rtn: Rtn, lexicon: Lexicon | None) -> None:
    global _worker_resources
    _worker_resources = (rtn, lexicon)


def _annotate_in_worker(line: str) -> tuple[AnnotatedDoc, str | None]:
    return _annotate_line(line, *_worker_resources)


def annotate_corpus(lines: Iterable[str], rtn: Rtn, lexicon: Lexicon | None = None,
                    errors: list | None = None, workers: int = 1,
                    chunk: int = 256) -> Iterator[AnnotatedDoc]:
    """Annotate one document per line, preserving order.

    A document that fails is yielded unannotated and (line number, message)
    is appended to ``errors``.
    """
    stripped = (line.rstrip("\r\n") for line in lines)
    if workers <= 1:
        for lineno, line in enumerate(stripped, 1):
            doc, err = _annotate_line(line, rtn, lexicon)
            _record(lineno, err, errors)
            yield doc
        return
    lineno = 0
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                             initargs=(rtn, lexicon)) as pool:
        while True:
            batch = list(islice(stripped, chunk * workers))
            if not batch:
                break
            for doc, err in pool.map(_annotate_in_worker, batch, chunksize=chunk):
                lineno += 1
                _record(lineno, err, errors)
                yield doc


def _record(lineno: int, err: str | None, errors: list | None) -> None:
    if err is None:
        return
    log.warning("line %d: %s", lineno, err)
    if errors is not None:
        errors.append((lineno, err))


def unannotated_stretches(doc: AnnotatedDoc) -> Iterator[list[Token]]:
    cursor = 0
    for ann in doc.annotations:
        yield doc.tokens[cursor:ann.start_token]
        cursor = ann.end_token + 1
    yield doc.tokens[cursor:]


def ngrams_outside(doc: AnnotatedDoc, n: int) -> Iterator[tuple[str, ...]]:
    for stretch in unannotated_stretches(doc):
        words = [t.text for t in stretch if t.kind != BOUNDARY]
        for i in range(len(words) - n + 1):
            yield tuple(words[i:i + n])


def suggest(corpus: Iterable[str], rtn: Rtn, lexicon: Lexicon | None, n: int = 2
            ) -> list[tuple[tuple[str, ...], int]]:
    """Frequency table of token n-grams outside every annotation.

    Whitespace tokens are dropped before forming n-grams.  Sorted by
    descending count, then lexicographically.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    counts: Counter = Counter()
    for doc in annotate_corpus(corpus, rtn, lexicon):
        counts.update(ngrams_outside(doc, n))
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
