"""Corpus loading, statistics, filtering, and partitioning.

The on-disk format is one sentence per line, with break positions written as
a marker token (default ``<seg>``) between words. Markers never lead, trail,
or stack, so serialization round-trips exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import CorpusFormatError
from .metrics import DEFAULT_MARKER, SegmentedText

# Closing punctuation that may legitimately follow a sentence-final mark.
_TRAILING_CLOSERS = "\"')]}»”’›"


@dataclass(frozen=True)
class ErCorpus:
    """A list of segmented sentences, each tagged with where it came from."""

    entries: tuple[SegmentedText, ...]
    sources: tuple[str, ...]
    language: str = ""

    def __post_init__(self) -> None:
        if len(self.entries) != len(self.sources):
            raise ValueError("entries and sources must have equal length")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[SegmentedText]:
        return iter(self.entries)

    def take(self, indices: Sequence[int]) -> "ErCorpus":
        return ErCorpus(
            entries=tuple(self.entries[i] for i in indices),
            sources=tuple(self.sources[i] for i in indices),
            language=self.language,
        )


def parse_marker_line(line: str, marker: str = DEFAULT_MARKER) -> SegmentedText:
    """Parse one marker-format sentence; rejects misplaced markers."""
    tokens = line.split()
    if not tokens:
        raise CorpusFormatError("empty sentence")
    if tokens[0] == marker:
        raise CorpusFormatError("break marker at sentence start")
    if tokens[-1] == marker:
        raise CorpusFormatError("break marker at sentence end")
    words: list[str] = []
    gaps: set[int] = set()
    previous_was_marker = False
    for tok in tokens:
        if tok == marker:
            if previous_was_marker:
                raise CorpusFormatError("adjacent break markers")
            gaps.add(len(words) - 1)
            previous_was_marker = True
        else:
            words.append(tok)
            previous_was_marker = False
    return SegmentedText(tuple(words), frozenset(gaps))


def load_corpus(
    path: str, marker: str = DEFAULT_MARKER, language: str = ""
) -> ErCorpus:
    """Load a marker-format corpus; format errors carry the line number."""
    entries: list[SegmentedText] = []
    sources: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            try:
                entries.append(parse_marker_line(line, marker))
            except (CorpusFormatError, ValueError) as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from exc
            sources.append(f"{path}:{lineno}")
    if not entries:
        raise CorpusFormatError(f"{path}: empty corpus")
    return ErCorpus(tuple(entries), tuple(sources), language)


def save_corpus(corpus: ErCorpus, path: str, marker: str = DEFAULT_MARKER) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in corpus.entries:
            fh.write(entry.render(marker) + "\n")


@dataclass(frozen=True)
class CorpusStats:
    """Corpus-level segmentation statistics.

    pct_with_breaks is breaks per hundred sentences, and avg_seg_len divides
    the words of break-bearing sentences by the number of breaks; both match
    how the published Easy-Read corpus statistics are computed. Averages over
    an empty subpopulation are None.
    """

    n_sentences: int
    n_breaks: int
    pct_with_breaks: float
    n_unsegmented: int
    avg_len_unsegmented: float | None
    n_segmented: int
    avg_breaks_segmented: float | None
    avg_sent_len_segmented: float | None
    avg_seg_len: float | None

    def to_dict(self) -> dict:
        return {
            "n_sentences": self.n_sentences,
            "n_breaks": self.n_breaks,
            "pct_with_breaks": self.pct_with_breaks,
            "n_unsegmented": self.n_unsegmented,
            "avg_len_unsegmented": self.avg_len_unsegmented,
            "n_segmented": self.n_segmented,
            "avg_breaks_segmented": self.avg_breaks_segmented,
            "avg_sent_len_segmented": self.avg_sent_len_segmented,
            "avg_seg_len": self.avg_seg_len,
        }


def compute_stats(corpus: ErCorpus) -> CorpusStats:
    if len(corpus) == 0:
        raise ValueError("empty corpus")
    n_sentences = len(corpus)
    n_breaks = sum(len(e.break_gaps) for e in corpus)
    unseg = [e for e in corpus if not e.break_gaps]
    seg = [e for e in corpus if e.break_gaps]
    seg_words = sum(len(e.words) for e in seg)
    return CorpusStats(
        n_sentences=n_sentences,
        n_breaks=n_breaks,
        pct_with_breaks=100.0 * n_breaks / n_sentences,
        n_unsegmented=len(unseg),
        avg_len_unsegmented=(
            sum(len(e.words) for e in unseg) / len(unseg) if unseg else None
        ),
        n_segmented=len(seg),
        avg_breaks_segmented=n_breaks / len(seg) if seg else None,
        avg_sent_len_segmented=seg_words / len(seg) if seg else None,
        avg_seg_len=seg_words / n_breaks if n_breaks else None,
    )


def filter_segmented(corpus: ErCorpus) -> ErCorpus:
    """Keep only sentences with at least one break, in order."""
    keep = [i for i, e in enumerate(corpus.entries) if e.break_gaps]
    return corpus.take(keep)


def _looks_noisy(entry: SegmentedText) -> bool:
    for word in entry.words[:-1]:
        stripped = word.rstrip(_TRAILING_CLOSERS)
        if stripped.endswith((".", "!", "?")):
            return True
    return False


def filter_noise(corpus: ErCorpus) -> tuple[ErCorpus, int]:
    """Drop sentences with sentence-final punctuation stranded mid-sentence.

    A word other than the last ending in '.', '!' or '?' (closing quotes and
    brackets aside) usually means two sentences were glued together upstream.
    The rule is a heuristic; the removal count is returned so runs can report
    what it did.
    """
    keep = [i for i, e in enumerate(corpus.entries) if not _looks_noisy(e)]
    return corpus.take(keep), len(corpus) - len(keep)


@dataclass(frozen=True)
class Partition:
    train: ErCorpus
    dev: ErCorpus
    test: ErCorpus


def partition(
    corpus: ErCorpus, dev_size: int, test_size: int, seed: int
) -> Partition:
    """Split into train/dev/test by seeded shuffle; deterministic per seed.

    Test then dev are drawn from the shuffled order; whatever remains is
    train. Each split keeps the original corpus order internally.
    """
    n = len(corpus)
    if dev_size < 0 or test_size < 0:
        raise ValueError("split sizes must be non-negative")
    if dev_size + test_size > n:
        raise ValueError(
            f"requested dev {dev_size} + test {test_size} exceeds corpus size {n}"
        )
    order = list(range(n))
    random.Random(seed).shuffle(order)
    test_idx = sorted(order[:test_size])
    dev_idx = sorted(order[test_size : test_size + dev_size])
    train_idx = sorted(order[test_size + dev_size :])
    return Partition(
        train=corpus.take(train_idx),
        dev=corpus.take(dev_idx),
        test=corpus.take(test_idx),
    )
