"""Windowed beam search segmentation.

A sentence of n tokens has n gaps: one after each token, the last one sitting
at the end of the sentence. A gap scorer assigns each gap a desirability in
[0, 1], or the sentinel EXCLUDED for gaps that must never be broken. The beam
search picks break positions so that every segment except possibly the last
has between min_words and max_words tokens, maximizing the arithmetic mean of
the chosen gap scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

from .errors import ScorerError, SegmentationError
from .sentence import Sentence

# Sentinel for gaps where breaking is forbidden (for example a whitespace gap
# that falls inside a parser token). Compared with ==, never with "is".
EXCLUDED = -1.0


@dataclass(frozen=True)
class GapScores:
    """Per-gap scores for one sentence; len(scores) == len(tokens)."""

    scores: tuple[float, ...]

    @classmethod
    def from_iter(cls, values: Iterable[float]) -> "GapScores":
        return cls(tuple(float(v) for v in values))

    def check(self, n_tokens: int) -> None:
        """Validate length and value range; raises ScorerError on violation."""
        if len(self.scores) != n_tokens:
            raise ScorerError(
                f"expected {n_tokens} gap scores, got {len(self.scores)}"
            )
        for i, s in enumerate(self.scores):
            if s != s or s in (float("inf"), float("-inf")):
                raise ScorerError(f"non-finite score at gap {i}")
            if not (0.0 <= s <= 1.0) and s != EXCLUDED:
                raise ScorerError(f"score {s} at gap {i} outside [0, 1]")

    def __len__(self) -> int:
        return len(self.scores)


@dataclass
class SegmentationConfig:
    """Window and search parameters.

    min_words/max_words bound the token count of every segment except a final
    short remainder; beam_width bounds the number of partial paths kept alive;
    penalty is the score assigned to a forced under-window final segment and
    must not be positive, or it could outrank real gap scores.
    """

    min_words: int = 5
    max_words: int = 15
    beam_width: int = 5
    penalty: float = 0.0

    def __post_init__(self) -> None:
        if self.min_words < 1:
            raise ValueError("min_words must be >= 1")
        if self.max_words < self.min_words:
            raise ValueError("max_words must be >= min_words")
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.penalty > 0.0:
            raise ValueError("penalty must be <= 0")


@dataclass(frozen=True)
class Candidate:
    """One possible first segment of a (remaining) token sequence."""

    segment_tokens: tuple[str, ...]
    score: float
    remaining_tokens: tuple[str, ...]
    remaining_scores: tuple[float, ...]

    @property
    def length(self) -> int:
        return len(self.segment_tokens)


@dataclass(frozen=True)
class SegmentationPath:
    """A complete segmentation of one sentence.

    segments holds [start, end) token ranges covering the sentence in order;
    path_score is the arithmetic mean of segment_scores.
    """

    segments: tuple[tuple[int, int], ...]
    segment_scores: tuple[float, ...]
    path_score: float

    @property
    def break_gaps(self) -> frozenset[int]:
        """Inter-word gap indices carrying a break (gap g = after token g)."""
        return frozenset(end - 1 for _, end in self.segments[:-1])

    def segment_texts(self, sentence: Sentence) -> list[str]:
        return [" ".join(sentence.tokens[a:b]) for a, b in self.segments]

    def to_marker_text(self, sentence: Sentence, marker: str = "<seg>") -> str:
        return f" {marker} ".join(self.segment_texts(sentence))


@dataclass
class SegmentationResult:
    """Per-sentence outcome of segment_corpus; error is None on success."""

    sentence: Sentence
    path: SegmentationPath
    error: str | None = None


class GapScorer(Protocol):
    """Anything that can score the gaps of a sentence."""

    def score(self, sid: str, sentence: Sentence) -> GapScores: ...


def get_segmentation_candidates(
    tokens: Sequence[str],
    scores: Sequence[float],
    config: SegmentationConfig,
) -> list[Candidate]:
    """Enumerate the legal first segments of a token sequence.

    A segment of j tokens breaks at gap j-1 and is legal when
    min_words <= j <= max_words and that gap is not excluded. The candidate
    consuming every token uses the sentence-final gap. Below min_words the
    whole sequence becomes a single penalty-scored candidate. When every gap
    in the window is excluded, the best non-excluded gap within max_words is
    used instead, relaxing min_words; with no usable gap at all the whole
    sequence is taken at the penalty.
    """
    n = len(tokens)
    if n == 0:
        raise SegmentationError("empty input")
    if len(scores) != n:
        raise SegmentationError(f"expected {n} gap scores, got {len(scores)}")
    tokens = tuple(tokens)
    scores = tuple(scores)

    def make(j: int, score: float) -> Candidate:
        return Candidate(
            segment_tokens=tokens[:j],
            score=score,
            remaining_tokens=tokens[j:],
            remaining_scores=scores[j:],
        )

    if n < config.min_words:
        return [make(n, config.penalty)]

    hi = min(config.max_words, n)
    out = [
        make(j, scores[j - 1])
        for j in range(config.min_words, hi + 1)
        if scores[j - 1] != EXCLUDED
    ]
    if out:
        return out

    # Every gap in the window is excluded. Fall back to the best non-excluded
    # gap within max_words (ties to the earliest), else swallow everything.
    best_j, best_s = 0, EXCLUDED
    for j in range(1, hi + 1):
        if scores[j - 1] != EXCLUDED and scores[j - 1] > best_s:
            best_j, best_s = j, scores[j - 1]
    if best_j:
        return [make(best_j, best_s)]
    return [make(n, config.penalty)]


@dataclass(frozen=True, order=True)
class _Partial:
    """A partial path during beam search, ordered by the beam ranking key.

    sort_key ranks higher means first and, among equal means, the path whose
    first differing break comes earlier. Boundary tuples make that comparison
    exact and total over distinct paths.
    """

    sort_key: tuple[float, tuple[int, ...]] = field(repr=False)
    boundaries: tuple[int, ...]
    scores: tuple[float, ...]

    @staticmethod
    def make(boundaries: tuple[int, ...], scores: tuple[float, ...]) -> "_Partial":
        mean = sum(scores) / len(scores)
        return _Partial((-mean, boundaries), boundaries, scores)

    @property
    def mean(self) -> float:
        return -self.sort_key[0]


def beam_search_segment(
    sentence: Sentence,
    gap_scores: GapScores,
    config: SegmentationConfig,
) -> SegmentationPath:
    """Find the complete path with the best mean segment score.

    The beam keeps at most beam_width partial paths, ranked by the mean of
    the segment scores chosen so far. Completed paths stay in the beam and
    keep competing; the search stops only when every surviving path is
    complete, so a width of at least the number of reachable paths makes the
    search exhaustive. Ties rank the path with the earlier first differing
    break ahead.
    """
    tokens = sentence.tokens
    n = len(tokens)
    if n == 0:
        raise SegmentationError("empty input")
    gap_scores.check(n)
    scores = gap_scores.scores

    beam = [
        _Partial.make((cand.length,), (cand.score,))
        for cand in get_segmentation_candidates(tokens, scores, config)
    ]
    beam.sort()
    beam = beam[: config.beam_width]
    while any(p.boundaries[-1] != n for p in beam):
        grown: list[_Partial] = []
        for p in beam:
            start = p.boundaries[-1]
            if start == n:
                grown.append(p)
                continue
            for cand in get_segmentation_candidates(
                tokens[start:], scores[start:], config
            ):
                grown.append(
                    _Partial.make(
                        p.boundaries + (start + cand.length,),
                        p.scores + (cand.score,),
                    )
                )
        grown.sort()
        beam = grown[: config.beam_width]

    best = beam[0]
    bounds = (0,) + best.boundaries  # (0, b1, ..., n)
    segments = tuple(
        (bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)
    )
    return SegmentationPath(
        segments=segments,
        segment_scores=best.scores,
        path_score=best.mean,
    )


def segment_corpus(
    sentences: Sequence[Sentence],
    scorer: GapScorer,
    config: SegmentationConfig,
    ids: Sequence[str] | None = None,
    jobs: int = 1,
) -> list[SegmentationResult]:
    """Segment every sentence independently, never dropping one.

    A sentence whose scorer call fails is emitted unsegmented (one segment
    covering everything, at the penalty score) with the failure message in
    the result. Output order always equals input order, whatever jobs is.
    """
    if ids is None:
        ids = [str(i + 1) for i in range(len(sentences))]
    if len(ids) != len(sentences):
        raise ValueError("ids and sentences must have equal length")

    def one(args: tuple[str, Sentence]) -> SegmentationResult:
        sid, sent = args
        try:
            gs = scorer.score(sid, sent)
            return SegmentationResult(sent, beam_search_segment(sent, gs, config))
        except ScorerError as exc:
            whole = SegmentationPath(
                segments=((0, len(sent.tokens)),),
                segment_scores=(config.penalty,),
                path_score=config.penalty,
            )
            return SegmentationResult(sent, whole, error=str(exc))

    pairs = list(zip(ids, sentences))
    if jobs <= 1:
        return [one(p) for p in pairs]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, pairs))
