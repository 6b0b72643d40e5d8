"""Sentence container with whitespace tokenization.

Tokenization is deliberately dumb: tokens are maximal runs of non-whitespace
characters. Everything downstream (gap indexing, scorers, metrics) is defined
in terms of these tokens, so the whole pipeline shares one tokenizer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import SegmentationError

_TOKEN_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class Sentence:
    """A single input sentence.

    raw keeps the original string; tokens are its whitespace tokens and
    token_spans the [start, end) character offsets of each token in raw.
    """

    raw: str
    tokens: tuple[str, ...]
    token_spans: tuple[tuple[int, int], ...] = field(repr=False)

    @classmethod
    def from_raw(cls, text: str) -> "Sentence":
        spans = [(m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]
        if not spans:
            raise SegmentationError("empty input")
        tokens = tuple(text[a:b] for a, b in spans)
        return cls(raw=text, tokens=tokens, token_spans=tuple(spans))

    @property
    def normalized(self) -> str:
        """The raw text with whitespace runs collapsed to single spaces."""
        return " ".join(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)
