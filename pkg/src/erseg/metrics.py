"""Segmentation quality metrics.

Hypotheses and references are sentences with break positions. Break F1
aligns the two word sequences by longest common subsequence and counts a
hypothesis break as correct only when both words flanking it align to the
words flanking a reference break. BLEU treats break markers as ordinary
tokens (or strips them), and sigma rescales BLEU-with-breaks by an upper
bound obtained by projecting the reference breaks onto the hypothesis text.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .errors import MetricError

DEFAULT_MARKER = "<seg>"


@dataclass(frozen=True)
class SegmentedText:
    """One sentence with break positions.

    words holds the break-free word tokens; break_gaps holds inter-word gap
    indices, gap g sitting between words g and g+1. Breaks can therefore
    never lead, trail, or stack on one another.
    """

    words: tuple[str, ...]
    break_gaps: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if not self.words:
            raise ValueError("a segmented sentence needs at least one word")
        for w in self.words:
            if not w or any(c.isspace() for c in w):
                raise ValueError(f"bad word token {w!r}")
        bad = [g for g in self.break_gaps if not 0 <= g < len(self.words) - 1]
        if bad:
            raise ValueError(f"break gap(s) {sorted(bad)} out of range")

    def segments(self) -> list[tuple[str, ...]]:
        out, start = [], 0
        for g in sorted(self.break_gaps):
            out.append(self.words[start : g + 1])
            start = g + 1
        out.append(self.words[start:])
        return out

    def tokens_with_breaks(self, marker: str = DEFAULT_MARKER) -> list[str]:
        """The word tokens with the break marker interleaved at each break."""
        if marker in self.words:
            raise ValueError(f"marker {marker!r} collides with a word token")
        out: list[str] = []
        for i, w in enumerate(self.words):
            out.append(w)
            if i in self.break_gaps:
                out.append(marker)
        return out

    def render(self, marker: str = DEFAULT_MARKER) -> str:
        return " ".join(self.tokens_with_breaks(marker))


def lcs_align(a: Sequence[str], b: Sequence[str]) -> list[tuple[int, int]]:
    """Longest common subsequence pairing between two token sequences.

    Returns index pairs (i, j), strictly increasing on both sides. The
    backtrack is canonical: matches are taken whenever possible, and on
    equal table values the walk moves up before left, so the result is
    deterministic. Identical sequences align index-for-index.
    """
    na, nb = len(a), len(b)
    table = [[0] * (nb + 1) for _ in range(na + 1)]
    for i in range(1, na + 1):
        row, prev = table[i], table[i - 1]
        ai = a[i - 1]
        for j in range(1, nb + 1):
            if ai == b[j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                up, left = prev[j], row[j - 1]
                row[j] = up if up >= left else left
    pairs: list[tuple[int, int]] = []
    i, j = na, nb
    while i > 0 and j > 0:
        if a[i - 1] == b[j - 1] and table[i][j] == table[i - 1][j - 1] + 1:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif table[i - 1][j] >= table[i][j - 1]:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs


@dataclass(frozen=True)
class BreakF1:
    precision: float
    recall: float
    f1: float
    matches: int
    hyp_breaks: int
    ref_breaks: int


def break_f1(hyps: Sequence[SegmentedText], refs: Sequence[SegmentedText]) -> BreakF1:
    """Corpus break precision/recall/F1, all on a 0..100 scale.

    A hypothesis break between words (h, h+1) matches when the LCS alignment
    maps h and h+1 to adjacent reference words (r, r+1) with a reference
    break between them. A corpus with no breaks on either side scores 100 by
    convention; breaks on exactly one side score 0.
    """
    if len(hyps) != len(refs):
        raise MetricError("hypothesis and reference counts differ")
    if not hyps:
        raise MetricError("empty corpus")
    matched = hyp_total = ref_total = 0
    for hyp, ref in zip(hyps, refs):
        hyp_total += len(hyp.break_gaps)
        ref_total += len(ref.break_gaps)
        if not hyp.break_gaps:
            continue
        amap = dict(lcs_align(hyp.words, ref.words))
        for g in hyp.break_gaps:
            r = amap.get(g)
            if r is not None and amap.get(g + 1) == r + 1 and r in ref.break_gaps:
                matched += 1
    if hyp_total == 0 and ref_total == 0:
        return BreakF1(100.0, 100.0, 100.0, 0, 0, 0)
    precision = 100.0 * matched / hyp_total if hyp_total else 0.0
    recall = 100.0 * matched / ref_total if ref_total else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return BreakF1(precision, recall, f1, matched, hyp_total, ref_total)


def _ngram_counts(seq: Sequence[str], order: int) -> Counter:
    return Counter(tuple(seq[i : i + order]) for i in range(len(seq) - order + 1))


def corpus_bleu(
    hyps: Sequence[Sequence[str]],
    refs: Sequence[Sequence[str]],
    include_breaks: bool = True,
    marker: str = DEFAULT_MARKER,
    max_order: int = 4,
) -> float:
    """Corpus BLEU on a 0..100 scale, one reference per hypothesis.

    Uses clipped n-gram precisions up to max_order with a geometric mean and
    the brevity penalty exp(min(0, 1 - ref_len/hyp_len)). No smoothing: any
    order with candidate n-grams but zero matches takes the whole score to
    zero. Orders longer than every hypothesis (no candidate n-grams at all)
    drop out of the mean, so identical corpora always score 100. When
    include_breaks is false, break marker tokens are removed on both sides
    first.
    """
    if len(hyps) != len(refs):
        raise MetricError("hypothesis and reference counts differ")
    if not hyps:
        raise MetricError("empty corpus")
    if not include_breaks:
        hyps = [[t for t in h if t != marker] for h in hyps]
        refs = [[t for t in r if t != marker] for r in refs]
    matches = [0] * max_order
    totals = [0] * max_order
    hyp_len = ref_len = 0
    for hyp, ref in zip(hyps, refs):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_order + 1):
            hyp_counts = _ngram_counts(hyp, n)
            if not hyp_counts:
                break
            ref_counts = _ngram_counts(ref, n)
            totals[n - 1] += sum(hyp_counts.values())
            matches[n - 1] += sum(
                min(c, ref_counts[g]) for g, c in hyp_counts.items()
            )
    used = [i for i in range(max_order) if totals[i] > 0]
    if not used:
        return 0.0
    if any(matches[i] == 0 for i in used):
        return 0.0
    log_mean = sum(math.log(matches[i] / totals[i]) for i in used) / len(used)
    brevity = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(log_mean)


def project_breaks(ref: SegmentedText, hyp_words: Sequence[str]) -> frozenset[int]:
    """Carry reference breaks over to another word sequence via the LCS.

    A reference break between words (r, r+1) lands between hypothesis words
    (h, h+1) when the alignment maps r to h and r+1 to h+1; breaks whose
    flanking words do not survive alignment are dropped.
    """
    amap = dict(lcs_align(ref.words, hyp_words))
    out = set()
    for g in ref.break_gaps:
        h = amap.get(g)
        if h is not None and amap.get(g + 1) == h + 1:
            out.add(h)
    return frozenset(out)


def _sigma_components(
    hyps: Sequence[SegmentedText],
    refs: Sequence[SegmentedText],
    marker: str = DEFAULT_MARKER,
) -> tuple[float, float, float]:
    ref_seqs = [r.tokens_with_breaks(marker) for r in refs]
    bleu_br = corpus_bleu(
        [h.tokens_with_breaks(marker) for h in hyps], ref_seqs, marker=marker
    )
    upper_hyps = [
        SegmentedText(h.words, project_breaks(r, h.words)).tokens_with_breaks(marker)
        for h, r in zip(hyps, refs)
    ]
    bleu_upper = corpus_bleu(upper_hyps, ref_seqs, marker=marker)
    if bleu_upper == 0.0:
        raise MetricError("sigma undefined: upper-bound BLEU is zero")
    return 100.0 * bleu_br / bleu_upper, bleu_br, bleu_upper


def sigma(
    hyps: Sequence[SegmentedText],
    refs: Sequence[SegmentedText],
    marker: str = DEFAULT_MARKER,
) -> float:
    """BLEU-with-breaks rescaled by its break-projection upper bound.

    The upper bound re-breaks each hypothesis at the reference breaks
    carried over by project_breaks, which is the best any segmenter could do
    without editing the words. Text-preserving hypotheses therefore get
    sigma == bleu_br, and an upper bound of zero is an error rather than a
    division by zero.
    """
    if len(hyps) != len(refs):
        raise MetricError("hypothesis and reference counts differ")
    if not hyps:
        raise MetricError("empty corpus")
    return _sigma_components(hyps, refs, marker)[0]


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of checking one hypothesis against its source text."""

    preserved: bool
    bleu_nb: float
    diff: tuple[tuple[str, str], ...]


def validate_hypothesis(
    hyp: SegmentedText, src_words: Sequence[str]
) -> ValidationResult:
    """Check that a hypothesis altered nothing but the breaks.

    preserved is exact token equality after stripping breaks; bleu_nb is the
    break-free BLEU of this single sentence; diff lists ("-", word) entries
    for source words the hypothesis lost and ("+", word) for words it
    invented, in sentence order.
    """
    src = tuple(src_words)
    preserved = hyp.words == src
    bleu_nb = corpus_bleu([list(hyp.words)], [list(src)], include_breaks=False)
    diff: list[tuple[str, str]] = []
    if not preserved:
        pairs = lcs_align(src, hyp.words)
        kept_src = {i for i, _ in pairs}
        kept_hyp = {j for _, j in pairs}
        for si in range(len(src)):
            if si not in kept_src:
                diff.append(("-", src[si]))
        for hi in range(len(hyp.words)):
            if hi not in kept_hyp:
                diff.append(("+", hyp.words[hi]))
    return ValidationResult(preserved, bleu_nb, tuple(diff))


@dataclass
class EvalReport:
    """Corpus-level metric bundle plus per-sentence diagnostics."""

    f1: float
    precision: float
    recall: float
    bleu_br: float
    bleu_nb: float
    sigma: float
    per_sentence: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "bleu_nb": self.bleu_nb,
            "f1": self.f1,
            "precision": self.precision,
            "recall": self.recall,
            "bleu_br": self.bleu_br,
            "per_sentence": self.per_sentence,
        }


def evaluate_corpus(
    hyps: Sequence[SegmentedText],
    refs: Sequence[SegmentedText],
    marker: str = DEFAULT_MARKER,
) -> EvalReport:
    """Compute every corpus metric for paired hypothesis/reference sentences."""
    if len(hyps) != len(refs):
        raise MetricError("hypothesis and reference counts differ")
    if not hyps:
        raise MetricError("empty corpus")
    bf = break_f1(hyps, refs)
    bleu_nb = corpus_bleu(
        [list(h.words) for h in hyps], [list(r.words) for r in refs], marker=marker
    )
    sig, bleu_br, _upper = _sigma_components(hyps, refs, marker)
    per_sentence = []
    for k, (hyp, ref) in enumerate(zip(hyps, refs), start=1):
        check = validate_hypothesis(hyp, ref.words)
        per_sentence.append(
            {
                "index": k,
                "preserved": check.preserved,
                "hyp_breaks": len(hyp.break_gaps),
                "ref_breaks": len(ref.break_gaps),
                "diff": [list(d) for d in check.diff],
            }
        )
    return EvalReport(
        f1=bf.f1,
        precision=bf.precision,
        recall=bf.recall,
        bleu_br=bleu_br,
        bleu_nb=bleu_nb,
        sigma=sig,
        per_sentence=per_sentence,
    )


@dataclass(frozen=True)
class WindowProfile:
    """How well reference segment lengths fit a window."""

    n_segments: int
    n_under: int
    n_over: int

    @property
    def frac_under(self) -> float:
        return self.n_under / self.n_segments if self.n_segments else 0.0

    @property
    def frac_over(self) -> float:
        return self.n_over / self.n_segments if self.n_segments else 0.0


def window_profile(
    refs: Sequence[SegmentedText], min_words: int, max_words: int
) -> WindowProfile:
    """Fraction of reference segments falling outside [min_words, max_words].

    Reference segments shorter than min_words can never be reproduced by a
    window-constrained segmenter, so this bounds the reachable recall.
    """
    n = under = over = 0
    for ref in refs:
        for seg in ref.segments():
            n += 1
            if len(seg) < min_words:
                under += 1
            elif len(seg) > max_words:
                over += 1
    if n == 0:
        raise MetricError("empty corpus")
    return WindowProfile(n, under, over)
