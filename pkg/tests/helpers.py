"""Shared construction helpers for the test suite."""

from __future__ import annotations

import os
import random
import sys

from erseg.sentence import Sentence
from erseg.trees import BracketedTree, TreeNode

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")
STUB = [sys.executable, os.path.join(os.path.dirname(os.path.abspath(__file__)),
                                     "stub_sidecar.py")]


def data_path(name: str) -> str:
    return os.path.join(DATA_DIR, name)


def make_sentence(n: int, prefix: str = "w") -> Sentence:
    return Sentence.from_raw(" ".join(f"{prefix}{i}" for i in range(n)))


def random_scores(rng: random.Random, n: int, grid: int | None = None) -> list[float]:
    """Uniform scores, optionally snapped to a grid to provoke ties."""
    if grid:
        return [rng.randrange(grid + 1) / grid for _ in range(n)]
    return [rng.random() for _ in range(n)]


_LABELS = ["S", "NP", "VP", "PP", "ADJP", "DT", "NN", "VB", "JJ", "RB"]


def random_tree(rng: random.Random, n_leaves: int | None = None) -> BracketedTree:
    """A random constituency tree over distinct single-character-ish words."""
    if n_leaves is None:
        n_leaves = rng.randint(1, 12)
    words = [f"x{i}" for i in range(n_leaves)]

    def build(lo: int, hi: int) -> TreeNode:
        if hi - lo == 1:
            return TreeNode(label=rng.choice(_LABELS), surface=words[lo])
        k = rng.randint(2, min(4, hi - lo))
        cuts = sorted(rng.sample(range(lo + 1, hi), k - 1))
        bounds = [lo] + cuts + [hi]
        children = tuple(build(a, b) for a, b in zip(bounds, bounds[1:]))
        return TreeNode(label=rng.choice(_LABELS), children=children)

    return BracketedTree(build(0, n_leaves))
