"""Evaluation-triple vocabulary, annotated-text parsing and BIO export.

Schema config format::

    TOPIC CLO_TY Cloth type
    ASPECT LENGTH BINARY VALUES LONG,SHORT,GOOD,BAD
    ASPECT WATERPROOF UNARY VALUES GOOD,BAD POLARITY GOOD=POS BAD=NEG
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .document import BOUNDARY, TAG_RE, AnnotatedDoc, Annotation, tokenize
from .lexicon import normalize

ENTITY_LABEL = "ENT"
BOUNDARY_PLACEHOLDER = "⌴"

_IDENT = re.compile(r"^[A-Z][A-Z0-9_]*$")


class PairType(str, Enum):
    UNARY = "UNARY"
    BINARY = "BINARY"
    MULTIPLE = "MULTIPLE"


class Polarity(str, Enum):
    POS = "POS"
    NEG = "NEG"
    NONE = "NONE"


class SchemaError(ValueError):
    pass


class AnnotatedTextError(ValueError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"offset {offset}: {message}")


@dataclass(frozen=True)
class TopicCategory:
    code: str
    description: str = ""


@dataclass(frozen=True)
class AspectValuePair:
    aspect: str
    value: str
    pair_type: PairType

    @property
    def label(self) -> str:
        return f"{self.aspect}-{self.value}"


@dataclass
class AspectSpec:
    name: str
    pair_type: PairType
    values: list[str]
    polarity: dict[str, Polarity] = field(default_factory=dict)

    def to_line(self) -> str:
        line = f"ASPECT {self.name} {self.pair_type.value} VALUES {','.join(self.values)}"
        if self.polarity:
            line += " POLARITY " + " ".join(f"{v}={p.value}" for v, p in self.polarity.items())
        return line


@dataclass
class SchemaConfig:
    topics: dict[str, TopicCategory] = field(default_factory=dict)
    aspects: dict[str, AspectSpec] = field(default_factory=dict)

    def labels(self) -> list[str]:
        return [f"{a.name}-{v}" for a in self.aspects.values() for v in a.values]


def parse_schema(source: str) -> SchemaConfig:
    config = SchemaConfig()
    for lineno, raw in enumerate(normalize(source).splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        parts = line.split()
        try:
            if parts[0] == "TOPIC":
                code = parts[1]
                if not _IDENT.match(code) or code in config.topics:
                    raise SchemaError(f"bad or duplicate topic code {code!r}")
                desc = line.split(None, 2)[2] if len(parts) > 2 else ""
                config.topics[code] = TopicCategory(code, desc)
            elif parts[0] == "ASPECT":
                name, ptype = parts[1], PairType(parts[2])
                if parts[3] != "VALUES":
                    raise SchemaError("expected VALUES")
                values = parts[4].split(",")
                if not _IDENT.match(name) or name in config.aspects:
                    raise SchemaError(f"bad or duplicate aspect {name!r}")
                if any(not _IDENT.match(v) for v in values) or len(set(values)) != len(values):
                    raise SchemaError(f"bad value list {parts[4]!r}")
                polarity: dict[str, Polarity] = {}
                rest = parts[5:]
                if rest:
                    if rest[0] != "POLARITY":
                        raise SchemaError(f"unexpected {rest[0]!r}")
                    for item in rest[1:]:
                        v, _, p = item.partition("=")
                        if v not in values:
                            raise SchemaError(f"polarity for undeclared value {v!r}")
                        polarity[v] = Polarity(p)
                config.aspects[name] = AspectSpec(name, ptype, values, polarity)
            else:
                raise SchemaError(f"unknown directive {parts[0]!r}")
        except (IndexError, ValueError) as exc:
            raise SchemaError(f"line {lineno}: {exc}") from None
    return config


def serialize_schema(config: SchemaConfig) -> str:
    lines = []
    for t in config.topics.values():
        lines.append(f"TOPIC {t.code} {t.description}".rstrip())
    lines.extend(a.to_line() for a in config.aspects.values())
    return "".join(line + "\n" for line in lines)


def validate_label(label: str, config: SchemaConfig) -> AspectValuePair | TopicCategory:
    if label in config.topics:
        return config.topics[label]
    aspect, dash, value = label.partition("-")
    if not dash:
        raise SchemaError(f"unknown label {label!r}: neither a topic code nor ASPECT-VALUE")
    spec = config.aspects.get(aspect)
    if spec is None:
        raise SchemaError(f"unknown aspect {aspect!r} in {label!r}")
    if value not in spec.values:
        raise SchemaError(f"{value!r} is not a legal value of {aspect} in {label!r}")
    return AspectValuePair(aspect, value, spec.pair_type)


def validate_annotation(ann: Annotation, config: SchemaConfig):
    if ann.label == ENTITY_LABEL:
        if ann.attribute not in config.topics:
            raise SchemaError(f"unknown topic category {ann.attribute!r}")
        return config.topics[ann.attribute]
    if ann.attribute is not None:
        raise SchemaError(f"unexpected attribute on {ann.label}")
    return validate_label(ann.label, config)


def derive_sentiment(pair: AspectValuePair, config: SchemaConfig) -> Polarity:
    if pair.pair_type is PairType.UNARY:
        spec = config.aspects.get(pair.aspect)
        if spec is not None and pair.value in spec.polarity:
            return spec.polarity[pair.value]
    if pair.value == "GOOD":
        return Polarity.POS
    if pair.value == "BAD":
        return Polarity.NEG
    return Polarity.NONE


@dataclass(frozen=True)
class EvaluationTriple:
    topic: tuple[str, str] | None
    aspect_value: AspectValuePair
    surface: str
    sentiment: Polarity


def evaluation_triples(doc: AnnotatedDoc, config: SchemaConfig) -> list[EvaluationTriple]:
    """One triple per aspect-value span; the topic is the nearest preceding entity."""
    triples = []
    topic = None
    for ann in doc.annotations:
        item = validate_annotation(ann, config)
        if isinstance(item, TopicCategory):
            topic = (item.code, doc.span_text(ann))
            continue
        triples.append(EvaluationTriple(topic, item, doc.span_text(ann),
                                        derive_sentiment(item, config)))
    return triples


def _char_to_token(tokens, offset: int, is_start: bool, where: int) -> int:
    for i, t in enumerate(tokens):
        if is_start and t.offset == offset:
            return i
        if not is_start and t.end == offset:
            return i
    raise AnnotatedTextError("tag boundary falls inside a token", where)


def parse_annotated(text: str) -> AnnotatedDoc:
    """Recover raw text and flat annotations from inline ``<LABEL>…</LABEL>`` markup."""
    text = normalize(text)
    raw: list[str] = []
    raw_len = 0
    spans = []
    open_: tuple | None = None
    cursor = 0
    for m in TAG_RE.finditer(text):
        chunk = text[cursor:m.start()]
        raw.append(chunk)
        raw_len += len(chunk)
        cursor = m.end()
        closing, label, attr = m.group(1) == "/", m.group(2), m.group(3)
        if not closing:
            if open_ is not None:
                raise AnnotatedTextError(f"<{label}> opened inside <{open_[1]}>", m.start())
            open_ = (raw_len, label, attr, m.start())
            continue
        if attr is not None:
            raise AnnotatedTextError("closing tag with attribute", m.start())
        if open_ is None:
            raise AnnotatedTextError(f"</{label}> without opening tag", m.start())
        if open_[1] != label:
            raise AnnotatedTextError(f"</{label}> crosses <{open_[1]}>", m.start())
        spans.append((open_[0], raw_len, label, open_[2], open_[3]))
        open_ = None
    if open_ is not None:
        raise AnnotatedTextError(f"<{open_[1]}> never closed", open_[3])
    raw.append(text[cursor:])
    raw_text = "".join(raw)
    tokens = tokenize(raw_text)
    annotations = []
    for a, b, label, attr, where in spans:
        # leading/trailing whitespace inside a tag is not part of the span
        while a < b and raw_text[a].isspace():
            a += 1
        while b > a and raw_text[b - 1].isspace():
            b -= 1
        if a == b:
            continue
        start = _char_to_token(tokens, a, True, where)
        end = _char_to_token(tokens, b, False, where)
        annotations.append(Annotation(start, end, label, attr))
    doc = AnnotatedDoc(raw_text, tokens, annotations)
    doc.check()
    return doc


def export_bio(doc: AnnotatedDoc) -> str:
    labels = ["O"] * len(doc.tokens)
    for ann in doc.annotations:
        labels[ann.start_token] = "B-" + ann.label
        for i in range(ann.start_token + 1, ann.end_token + 1):
            labels[i] = "I-" + ann.label
    lines = []
    for tok, label in zip(doc.tokens, labels):
        if tok.kind == BOUNDARY:
            lines.append(f"{BOUNDARY_PLACEHOLDER}\tO")
        else:
            lines.append(f"{tok.text}\t{label}")
    return "\n".join(lines) + "\n\n" if lines else "\n"
