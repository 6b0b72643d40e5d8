"""erseg: windowed beam-search sentence segmentation for Easy-Read text."""

__version__ = "0.1.0"

from .corpus import ErCorpus, compute_stats, filter_noise, filter_segmented, load_corpus, partition
from .metrics import (
    SegmentedText,
    break_f1,
    corpus_bleu,
    evaluate_corpus,
    sigma,
    validate_hypothesis,
    window_profile,
)
from .scorers import FileScorer, SidecarSession, SubprocessScorer, load_score_file
from .segmenter import (
    EXCLUDED,
    GapScores,
    SegmentationConfig,
    SegmentationPath,
    beam_search_segment,
    get_segmentation_candidates,
    segment_corpus,
)
from .sentence import Sentence
from .trees import TreeScorer, leaf_distance, parse_bracketed, tree_gap_scores

__all__ = [
    "__version__",
    "ErCorpus",
    "EXCLUDED",
    "FileScorer",
    "GapScores",
    "SegmentationConfig",
    "SegmentationPath",
    "SegmentedText",
    "Sentence",
    "SidecarSession",
    "SubprocessScorer",
    "TreeScorer",
    "beam_search_segment",
    "break_f1",
    "compute_stats",
    "corpus_bleu",
    "evaluate_corpus",
    "filter_noise",
    "filter_segmented",
    "get_segmentation_candidates",
    "leaf_distance",
    "load_corpus",
    "load_score_file",
    "parse_bracketed",
    "partition",
    "segment_corpus",
    "sigma",
    "tree_gap_scores",
    "validate_hypothesis",
    "window_profile",
]
