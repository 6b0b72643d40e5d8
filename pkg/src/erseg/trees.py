"""Constituency tree parsing and tree-based gap scoring.

Trees arrive in bracketed form, one per line, aligned with the sentences they
parse. A gap between two tokens is scored by the tree distance between the
leaves flanking it: the further apart two adjacent words sit in the tree, the
more natural a break between them. Distances are normalized per sentence so
the best interior gap scores 1.0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import AlignmentError, ScorerError, TreeParseError
from .segmenter import EXCLUDED, GapScores
from .sentence import Sentence

# Penn-style escapes for brackets inside leaf text.
_UNESCAPE = {
    "-LRB-": "(",
    "-RRB-": ")",
    "-LCB-": "{",
    "-RCB-": "}",
    "-LSB-": "[",
    "-RSB-": "]",
}

_STOP_CHARS = frozenset("() \t\r\n")


def _unescape(surface: str) -> str:
    for code, char in _UNESCAPE.items():
        surface = surface.replace(code, char)
    return surface


@dataclass
class TreeNode:
    """A constituent. Leaves carry the surface token in ``surface``.

    A bracket holding exactly one bare token, like ``(DT the)``, is a leaf;
    its depth is the bracket's own depth. Bare tokens mixed with brackets
    become label-less leaf children of the enclosing bracket.
    """

    label: str
    children: tuple["TreeNode", ...] = ()
    surface: str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.surface is not None


@dataclass
class BracketedTree:
    """A parsed tree plus the leaf bookkeeping the scorers need."""

    root: TreeNode
    leaves: tuple[TreeNode, ...] = field(init=False)
    _leaf_paths: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        leaves: list[TreeNode] = []
        paths: list[tuple[int, ...]] = []

        def walk(node: TreeNode, path: tuple[int, ...]) -> None:
            if node.is_leaf:
                leaves.append(node)
                paths.append(path)
                return
            for k, child in enumerate(node.children):
                walk(child, path + (k,))

        walk(self.root, ())
        self.leaves = tuple(leaves)
        self._leaf_paths = tuple(paths)

    def depth(self, leaf_index: int) -> int:
        """Depth of a leaf, counting the root as depth 1."""
        return len(self._leaf_paths[leaf_index]) + 1

    def leaf_texts(self) -> list[str]:
        """Leaf surfaces with bracket escapes undone, for text alignment."""
        return [_unescape(l.surface) for l in self.leaves]


def parse_bracketed(text: str) -> BracketedTree:
    """Parse one bracketed tree; raises TreeParseError with the offset of
    the first offending character on malformed input."""
    s = text
    n = len(s)

    def skip_ws(i: int) -> int:
        while i < n and s[i].isspace():
            i += 1
        return i

    def read_word(i: int) -> tuple[str, int]:
        j = i
        while j < n and s[j] not in _STOP_CHARS:
            j += 1
        return s[i:j], j

    def parse_node(i: int) -> tuple[TreeNode, int]:
        # precondition: s[i] == "("
        open_at = i
        label, i = read_word(i + 1)
        i = skip_ws(i)
        items: list[TreeNode | str] = []
        while i < n and s[i] != ")":
            if s[i] == "(":
                child, i = parse_node(i)
                items.append(child)
            else:
                word, i = read_word(i)
                items.append(word)
            i = skip_ws(i)
        if i >= n:
            raise TreeParseError("unbalanced brackets, missing ')'", offset=open_at)
        i += 1  # consume ")"
        if not items:
            raise TreeParseError("empty constituent", offset=open_at)
        if len(items) == 1 and isinstance(items[0], str):
            return TreeNode(label=label, surface=items[0]), i
        children = tuple(
            TreeNode(label="", surface=it) if isinstance(it, str) else it
            for it in items
        )
        return TreeNode(label=label, children=children), i

    i = skip_ws(0)
    if i >= n:
        raise TreeParseError("empty input")
    if s[i] != "(":
        raise TreeParseError("expected '('", offset=i)
    root, i = parse_node(i)
    i = skip_ws(i)
    if i < n:
        raise TreeParseError("unexpected trailing content", offset=i)
    return BracketedTree(root)


def to_bracketed(tree: BracketedTree) -> str:
    """Serialize with canonical single-space separators (parse round-trips)."""

    def render(node: TreeNode) -> str:
        if node.is_leaf:
            if node.label:
                return f"({node.label} {node.surface})"
            return node.surface
        inner = " ".join(render(c) for c in node.children)
        return f"({node.label} {inner})" if node.label else f"( {inner})"

    out = render(tree.root)
    if not out.startswith("("):
        # a bare single-leaf root still needs its bracket
        out = f"( {out})"
    return out


def leaf_distance(tree: BracketedTree, i: int, j: int) -> int:
    """Number of edges on the path between leaves i and j.

    Equals depth(i) + depth(j) - 2 * depth(lowest common ancestor), so two
    adjacent leaves under one parent sit at distance 2 and i == j gives 0.
    """
    n_leaves = len(tree.leaves)
    for idx in (i, j):
        if not 0 <= idx < n_leaves:
            raise IndexError(f"leaf index {idx} out of range [0, {n_leaves})")
    if i == j:
        return 0
    pi, pj = tree._leaf_paths[i], tree._leaf_paths[j]
    common = 0
    for a, b in zip(pi, pj):
        if a != b:
            break
        common += 1
    return len(pi) + len(pj) - 2 * common


def _first_divergence(a: str, b: str) -> int:
    for k, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return k
    return min(len(a), len(b))


def gap_validity(sentence: Sentence, tree: BracketedTree) -> list[bool]:
    """Which interior whitespace gaps coincide with a leaf boundary.

    Comparison runs in whitespace-stripped character space, so tokenization
    differences between the parser and the whitespace tokenizer (split or
    merged words) simply invalidate the affected gaps. The leaves must cover
    exactly the sentence text, or an AlignmentError names the first divergent
    offset in the stripped text.
    """
    sent_chars = "".join(sentence.tokens)
    leaf_chars = "".join(tree.leaf_texts())
    if sent_chars != leaf_chars:
        raise AlignmentError(
            "tree leaves diverge from sentence text at offset "
            f"{_first_divergence(sent_chars, leaf_chars)}"
        )
    leaf_ends = set()
    pos = 0
    for text in tree.leaf_texts():
        pos += len(text)
        leaf_ends.add(pos)
    out = []
    pos = 0
    for tok in sentence.tokens[:-1]:
        pos += len(tok)
        out.append(pos in leaf_ends)
    return out


def tree_gap_scores(sentence: Sentence, tree: BracketedTree) -> GapScores:
    """Score every gap of the sentence from the tree.

    Valid interior gaps get leaf_distance(last leaf of the left token, first
    leaf of the right token), normalized by the sentence's maximum so scores
    land in (0, 1]. Invalid gaps are EXCLUDED and the sentence-final gap is
    always 1.0. If every valid distance is 0 (degenerate), valid gaps
    score 1.0.
    """
    n = len(sentence.tokens)
    if n == 1:
        return GapScores((1.0,))
    valid = gap_validity(sentence, tree)

    # leaf index ending at each stripped-text offset
    end_to_leaf: dict[int, int] = {}
    pos = 0
    for k, text in enumerate(tree.leaf_texts()):
        pos += len(text)
        end_to_leaf[pos] = k

    distances: list[int | None] = []
    pos = 0
    for t, tok in enumerate(sentence.tokens[:-1]):
        pos += len(tok)
        if not valid[t]:
            distances.append(None)
            continue
        left = end_to_leaf[pos]
        distances.append(leaf_distance(tree, left, left + 1))

    max_d = max((d for d in distances if d is not None), default=0)
    scores: list[float] = []
    for d in distances:
        if d is None:
            scores.append(EXCLUDED)
        elif max_d == 0:
            scores.append(1.0)
        else:
            scores.append(d / max_d)
    scores.append(1.0)
    return GapScores(tuple(scores))


def load_tree_file(path: str) -> list[BracketedTree | None]:
    """Read one tree per line; a blank line means the sentence has no parse."""
    out: list[BracketedTree | None] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                out.append(None)
                continue
            try:
                out.append(parse_bracketed(stripped))
            except TreeParseError as exc:
                raise TreeParseError(f"line {lineno}: {exc}") from exc
    return out


class TreeScorer:
    """Gap scorer backed by a tree file aligned line-for-line with the input."""

    name = "tree"

    def __init__(self, trees: list[BracketedTree | None]):
        self.trees = trees

    def score(self, sid: str, sentence: Sentence) -> GapScores:
        try:
            index = int(sid) - 1
        except ValueError:
            raise ScorerError(f"tree scorer needs numeric sentence ids, got {sid!r}")
        if not 0 <= index < len(self.trees):
            raise ScorerError(f"no tree line for sentence {sid}")
        tree = self.trees[index]
        if tree is None:
            raise ScorerError(f"no parse for sentence {sid}")
        try:
            return tree_gap_scores(sentence, tree)
        except AlignmentError as exc:
            raise ScorerError(str(exc)) from exc
