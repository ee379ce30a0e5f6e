"""Tokens, annotations and annotated documents."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .lexicon import is_hangul_syllable, normalize

SYLLABLE, LATIN, DIGITS, PUNCT, BOUNDARY = "syllable", "latin_word", "digit_run", "punct", "boundary"


class Token(NamedTuple):
    kind: str
    text: str
    offset: int

    @property
    def length(self) -> int:
        return len(self.text)

    @property
    def end(self) -> int:
        return self.offset + len(self.text)


def _is_single_unit(ch: str) -> bool:
    # Hangul syllables, compatibility jamo and CJK ideographs are one token each
    return (is_hangul_syllable(ch) or "ㄱ" <= ch <= "ㆎ"
            or "一" <= ch <= "鿿")


def tokenize(text: str) -> list[Token]:
    text = normalize(text)
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        j = i + 1
        if ch.isspace():
            while j < n and text[j].isspace():
                j += 1
            kind = BOUNDARY
        elif _is_single_unit(ch):
            kind = SYLLABLE
        elif ch.isdigit():
            while j < n and text[j].isdigit():
                j += 1
            kind = DIGITS
        elif ch.isalpha():
            while j < n and text[j].isalpha() and not _is_single_unit(text[j]):
                j += 1
            kind = LATIN
        else:
            kind = PUNCT
        tokens.append(Token(kind, text[i:j], i))
        i = j
    return tokens


@dataclass(frozen=True)
class Annotation:
    start_token: int
    end_token: int  # inclusive
    label: str
    attribute: str | None = None

    def __post_init__(self):
        if self.start_token > self.end_token:
            raise ValueError(f"annotation start {self.start_token} > end {self.end_token}")

    @property
    def open_tag(self) -> str:
        if self.attribute is None:
            return f"<{self.label}>"
        return f"<{self.label}={self.attribute}>"

    @property
    def close_tag(self) -> str:
        return f"</{self.label}>"

    def key(self) -> tuple:
        return (self.start_token, self.end_token, self.label, self.attribute)


@dataclass
class AnnotatedDoc:
    text: str
    tokens: list[Token] = field(default_factory=list)
    annotations: list[Annotation] = field(default_factory=list)

    @classmethod
    def plain(cls, text: str) -> "AnnotatedDoc":
        text = normalize(text)
        return cls(text, tokenize(text), [])

    def check(self) -> None:
        """Assert sorted, non-overlapping, in-range annotations."""
        last = -1
        for ann in self.annotations:
            if ann.start_token <= last:
                raise ValueError(f"overlapping or unsorted annotation {ann}")
            if ann.end_token >= len(self.tokens):
                raise ValueError(f"annotation {ann} out of range")
            last = ann.end_token

    def span_text(self, ann: Annotation) -> str:
        return self.text[self.tokens[ann.start_token].offset:self.tokens[ann.end_token].end]

    def serialize(self) -> str:
        """Inline-tag (MERGE) rendering: tags inserted around the preserved text."""
        out, cursor = [], 0
        for ann in self.annotations:
            a = self.tokens[ann.start_token].offset
            b = self.tokens[ann.end_token].end
            out.append(self.text[cursor:a])
            out.append(ann.open_tag)
            out.append(self.text[a:b])
            out.append(ann.close_tag)
            cursor = b
        out.append(self.text[cursor:])
        return "".join(out)


TAG_RE = re.compile(r"<(/?)([A-Za-z][A-Za-z0-9_\-]*)(?:=([A-Za-z0-9_\-]+))?>")
