"""Gap scoring backends.

A gap score is the probability that a break belongs right after a token.
The MLM backend asks a fill-mask model how likely punctuation is at a mask
inserted after the token; the stub backend fakes plausible numbers so the
transport can be tested without downloading model weights.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

DEFAULT_MODEL = "google-bert/bert-base-multilingual-uncased"
DEFAULT_PUNCT = (".", ",", ";", ":", "!", "?")


@dataclass(frozen=True)
class SidecarConfig:
    model: str = DEFAULT_MODEL
    punct: tuple[str, ...] = DEFAULT_PUNCT
    device: str | None = None
    batch_size: int = 16

    def __post_init__(self) -> None:
        if not self.punct:
            raise ValueError("punctuation set must be non-empty")
        if any(not p or p.split() != [p] for p in self.punct):
            raise ValueError("punctuation entries must be non-blank single tokens")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")


class StubScorer:
    """Deterministic formula scorer: gap i of n tokens gets (i + 1) / n."""

    name = "stub"

    def score_gaps(self, text: str, tokens: list[str]) -> list[float]:
        n = len(tokens)
        if n == 0:
            raise ValueError("no tokens")
        return [(i + 1) / n for i in range(n)]


class _HfFillMask:
    """Thin wrapper over a transformers fill-mask pipeline.

    Keeps the library-specific calling conventions (single-text vs batch
    result shapes, target token lookup) in one place so the scorer logic
    stays testable with a fake.
    """

    def __init__(self, config: SidecarConfig):
        from transformers import pipeline  # deferred: heavyweight import

        kwargs = {"model": config.model}
        if config.device is not None:
            kwargs["device"] = config.device
        self._fill = pipeline("fill-mask", **kwargs)
        self.mask_token: str = self._fill.tokenizer.mask_token
        self._vocab = self._fill.tokenizer.get_vocab()
        self._batch_size = config.batch_size

    def has_token(self, symbol: str) -> bool:
        return symbol in self._vocab

    def scores(self, texts: list[str], targets: list[str]) -> list[dict[str, float]]:
        """Per text, the probability of each target filling its mask."""
        raw = self._fill(texts, targets=list(targets), batch_size=self._batch_size)
        if texts and isinstance(raw, list) and raw and isinstance(raw[0], dict):
            raw = [raw]  # single-text calls come back unnested
        out = []
        for per_text in raw:
            out.append({d["token_str"]: float(d["score"]) for d in per_text})
        return out


class MlmScorer:
    """Scores gaps by the probability mass a masked LM puts on punctuation.

    For token i the input text gets a mask inserted right after the token,
    separated by single spaces, and the gap score is the summed probability
    of the configured punctuation symbols filling that mask. Symbols the
    model's vocabulary lacks are skipped with a one-time warning.
    """

    name = "mlm"

    def __init__(self, config: SidecarConfig, backend=None):
        self.config = config
        self._backend = backend if backend is not None else _HfFillMask(config)
        self._targets = [p for p in config.punct if self._backend.has_token(p)]
        for symbol in config.punct:
            if symbol not in self._targets:
                print(
                    f"warning: punctuation {symbol!r} not in model vocabulary, skipped",
                    file=sys.stderr,
                )

    def _masked_variants(self, tokens: list[str]) -> list[str]:
        mask = self._backend.mask_token
        variants = []
        for i in range(len(tokens)):
            left = " ".join(tokens[: i + 1])
            right = " ".join(tokens[i + 1 :])
            variants.append(f"{left} {mask} {right}".rstrip())
        return variants

    def score_gaps(self, text: str, tokens: list[str]) -> list[float]:
        if not tokens:
            raise ValueError("no tokens")
        if not self._targets:
            return [0.0] * len(tokens)
        variants = self._masked_variants(tokens)
        scores: list[float] = []
        bs = self.config.batch_size
        for start in range(0, len(variants), bs):
            for per_text in self._backend.scores(variants[start : start + bs], self._targets):
                total = sum(per_text.get(t, 0.0) for t in self._targets)
                # numerical guard: summed softmax mass cannot exceed 1
                scores.append(min(max(total, 0.0), 1.0))
        return scores
