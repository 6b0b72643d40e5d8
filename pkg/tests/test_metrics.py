"""Break F1, corpus BLEU, Sigma, and the alignment they all share."""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from erseg.errors import MetricError
from erseg.metrics import (
    DEFAULT_MARKER,
    SegmentedText,
    break_f1,
    corpus_bleu,
    evaluate_corpus,
    lcs_align,
    project_breaks,
    sigma,
    validate_hypothesis,
    window_profile,
)
from oracles import is_common_subsequence, lcs_length, oracle_bleu


def seg(text: str, marker: str = DEFAULT_MARKER) -> SegmentedText:
    words: list[str] = []
    breaks: set[int] = set()
    for tok in text.split():
        if tok == marker:
            breaks.add(len(words) - 1)
        else:
            words.append(tok)
    return SegmentedText(tuple(words), frozenset(breaks))


def random_segmented(rng: random.Random, n_words: int) -> SegmentedText:
    words = tuple(rng.choice("red blue green cold warm stone river".split())
                  for _ in range(n_words))
    gaps = [g for g in range(n_words - 1) if rng.random() < 0.3]
    return SegmentedText(words, frozenset(gaps))


# -- SegmentedText --------------------------------------------------------------


def test_segmented_text_render_round_trip():
    s = seg("a b <seg> c d")
    assert s.words == ("a", "b", "c", "d")
    assert s.break_gaps == frozenset({1})
    assert s.render() == "a b <seg> c d"
    assert [list(x) for x in s.segments()] == [["a", "b"], ["c", "d"]]


def test_segmented_text_rejects_bad_shapes():
    with pytest.raises(ValueError):
        SegmentedText((), frozenset())
    with pytest.raises(ValueError):
        SegmentedText(("a", "b c"), frozenset())
    with pytest.raises(ValueError):
        SegmentedText(("a", "b"), frozenset({1}))  # final gap is not breakable
    with pytest.raises(ValueError):
        SegmentedText(("a", "b"), frozenset({-1}))


def test_marker_collision_detected():
    s = SegmentedText(("a", "<seg>", "b"), frozenset({0}))
    with pytest.raises(ValueError, match="marker"):
        s.tokens_with_breaks("<seg>")
    # a different marker sidesteps the collision
    assert s.render("||") == "a || <seg> b"


# -- LCS alignment ---------------------------------------------------------------


def test_lcs_align_simple():
    pairs = lcs_align(("a", "b", "c"), ("a", "x", "c"))
    assert pairs == [(0, 0), (2, 2)]


@settings(max_examples=150, deadline=None)
@given(
    a=st.lists(st.sampled_from("abcde"), max_size=12),
    b=st.lists(st.sampled_from("abcde"), max_size=12),
)
def test_lcs_align_is_a_maximal_common_subsequence(a, b):
    pairs = lcs_align(tuple(a), tuple(b))
    assert len(pairs) == lcs_length(tuple(a), tuple(b))
    assert is_common_subsequence(pairs, tuple(a), tuple(b))


def test_lcs_align_deterministic_on_ties():
    # "ab" vs "ba" has two maximal alignments; the canonical DP must always
    # produce the same one
    runs = {tuple(lcs_align(("a", "b"), ("b", "a"))) for _ in range(5)}
    assert len(runs) == 1


# -- break F1 ---------------------------------------------------------------------


def test_f1_identity():
    h = [seg("a b <seg> c d e f")]
    r = break_f1(h, h)
    assert (r.precision, r.recall, r.f1) == (100.0, 100.0, 100.0)


def test_f1_half_recall():
    ref = SegmentedText(tuple("abcdefghij"), frozenset({3, 7}))
    hyp = SegmentedText(tuple("abcdefghij"), frozenset({3}))
    r = break_f1([hyp], [ref])
    assert r.precision == 100.0
    assert r.recall == 50.0
    assert r.f1 == pytest.approx(200.0 / 3.0, abs=1e-9)


def test_f1_flanking_word_rule():
    # the break survives only if both words around it align; substituting a
    # flanking word kills the match even though the gap index is identical
    ref = seg("a b c <seg> d e f")
    hyp = SegmentedText(("a", "b", "c", "X", "e", "f"), frozenset({2}))
    r = break_f1([hyp], [ref])
    assert r.matches == 0
    assert r.precision == 0.0 and r.recall == 0.0 and r.f1 == 0.0


def test_f1_survives_a_distant_edit():
    # same break, word substituted far from it: still a match
    ref = seg("a b c <seg> d e f")
    hyp = SegmentedText(("a", "X", "c", "d", "e", "f"), frozenset({2}))
    r = break_f1([hyp], [ref])
    assert r.matches == 1
    assert r.f1 == 100.0


def test_f1_zero_break_conventions():
    plain = [seg("a b c d e f")]
    broken = [seg("a b <seg> c d e f")]
    both = break_f1(plain, plain)
    assert (both.precision, both.recall, both.f1) == (100.0, 100.0, 100.0)
    one = break_f1(plain, broken)
    assert (one.precision, one.recall, one.f1) == (0.0, 0.0, 0.0)
    other = break_f1(broken, plain)
    assert (other.precision, other.recall, other.f1) == (0.0, 0.0, 0.0)


def test_f1_precision_recall_swap_on_identical_text():
    ref = SegmentedText(tuple("abcdefghij"), frozenset({1, 5, 8}))
    hyp = SegmentedText(tuple("abcdefghij"), frozenset({1, 3}))
    fwd = break_f1([hyp], [ref])
    rev = break_f1([ref], [hyp])
    assert fwd.precision == rev.recall
    assert fwd.recall == rev.precision


def test_f1_corpus_level_pooling():
    # counts pool over the corpus before the ratio, not per sentence
    ref1 = SegmentedText(tuple("abcdef"), frozenset({2}))
    hyp1 = SegmentedText(tuple("abcdef"), frozenset({2}))
    ref2 = SegmentedText(tuple("uvwxyz"), frozenset({1, 3}))
    hyp2 = SegmentedText(tuple("uvwxyz"), frozenset({4}))
    r = break_f1([hyp1, hyp2], [ref1, ref2])
    assert r.matches == 1
    assert r.hyp_breaks == 2 and r.ref_breaks == 3
    assert r.precision == 50.0
    assert r.recall == pytest.approx(100.0 / 3.0, abs=1e-9)


# -- corpus BLEU -----------------------------------------------------------------


def test_bleu_identity_and_disjoint():
    toks = "a b c d e f".split()
    assert corpus_bleu([toks], [toks]) == 100.0
    assert corpus_bleu([["x", "y", "z", "w"]], [["a", "b", "c", "d"]]) == 0.0


def test_bleu_hand_case_brevity_penalty():
    got = corpus_bleu([["a", "b", "c", "d"]], [["a", "b", "c", "d", "e"]])
    assert got == pytest.approx(100.0 * math.exp(1.0 - 5.0 / 4.0), abs=1e-9)
    assert got == pytest.approx(77.8800783071405, abs=1e-9)
    assert got == pytest.approx(
        oracle_bleu([["a", "b", "c", "d"]], [["a", "b", "c", "d", "e"]]), abs=1e-9
    )


def test_bleu_short_identity_uses_effective_orders():
    # two-token sentences have no 3- or 4-grams at all; identity still scores 100
    assert corpus_bleu([["a", "b"]], [["a", "b"]]) == 100.0


def test_bleu_empty_corpus_is_an_error():
    with pytest.raises(MetricError, match="empty"):
        corpus_bleu([], [])


def test_bleu_clipping_counts_each_ref_ngram_once():
    # "the the the" against one "the": clipped p1 = 1/3
    got = corpus_bleu([["the", "the", "the"]], [["the", "cat", "sat"]])
    want = oracle_bleu([["the", "the", "the"]], [["the", "cat", "sat"]])
    assert got == pytest.approx(want, abs=1e-9)


def test_bleu_strip_breaks_flag():
    hyp = "a b <seg> c d".split()
    ref = "a b c <seg> d".split()
    assert corpus_bleu([hyp], [ref], include_breaks=False) == 100.0
    assert corpus_bleu([hyp], [ref], include_breaks=True) < 100.0


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10**9), n_sents=st.integers(1, 5))
def test_bleu_matches_counting_oracle(seed, n_sents):
    rng = random.Random(seed)
    vocab = "a b c d e".split()
    hyps, refs = [], []
    for _ in range(n_sents):
        hyps.append([rng.choice(vocab) for _ in range(rng.randint(1, 10))])
        refs.append([rng.choice(vocab) for _ in range(rng.randint(1, 10))])
    assert corpus_bleu(hyps, refs) == pytest.approx(
        oracle_bleu(hyps, refs), abs=1e-9
    )


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_bleu_without_breaks_ignores_resegmentation(seed):
    rng = random.Random(seed)
    a = random_segmented(rng, rng.randint(2, 10))
    b = SegmentedText(
        a.words,
        frozenset(g for g in range(len(a.words) - 1) if rng.random() < 0.5),
    )
    ref = random_segmented(rng, rng.randint(2, 10))
    va = corpus_bleu([a.tokens_with_breaks()], [ref.tokens_with_breaks()],
                     include_breaks=False)
    vb = corpus_bleu([b.tokens_with_breaks()], [ref.tokens_with_breaks()],
                     include_breaks=False)
    assert va == vb


# -- break projection and Sigma ---------------------------------------------------


def test_project_breaks_identity_text():
    ref = SegmentedText(tuple("abcde"), frozenset({1, 3}))
    assert project_breaks(ref, tuple("abcde")) == frozenset({1, 3})


def test_project_breaks_drops_unalignable():
    # "c" missing from the hypothesis: the break before it cannot project
    ref = SegmentedText(("a", "b", "c", "d", "e"), frozenset({1, 3}))
    assert project_breaks(ref, ("a", "b", "d", "e")) == frozenset({2})


def test_project_breaks_requires_adjacency():
    # flanking words align, but an insertion sits between them in the
    # hypothesis: no single gap corresponds, so the break is dropped
    ref = SegmentedText(("a", "b", "c", "d"), frozenset({1}))
    assert project_breaks(ref, ("a", "b", "X", "c", "d")) == frozenset()


def test_sigma_identity():
    h = [seg("a b <seg> c d e f")]
    assert sigma(h, h) == pytest.approx(100.0, abs=1e-9)


def test_sigma_equals_bleu_br_when_text_preserved():
    ref = seg("the cat <seg> sat on the mat <seg> today ok")
    hyp = seg("the cat sat <seg> on the mat today ok")
    s = sigma([hyp], [ref])
    br = corpus_bleu([hyp.tokens_with_breaks()], [ref.tokens_with_breaks()])
    assert s == pytest.approx(br, abs=1e-9)


def test_sigma_altered_text_fixture():
    # one word substituted, one break right and one break wrong; all four
    # numbers frozen from the independent n-gram oracle plus hand projection
    ref = SegmentedText(
        tuple("the tiny cat sat on the soft red mat in the hall".split()),
        frozenset({3, 7}),
    )
    hyp = SegmentedText(
        tuple("the tiny dog sat on the soft red mat in the hall".split()),
        frozenset({3, 9}),
    )
    assert project_breaks(ref, hyp.words) == frozenset({3, 7})
    s = sigma([hyp], [ref])
    assert s == pytest.approx(59.00468726392809, abs=1e-6)
    br = corpus_bleu([hyp.tokens_with_breaks()], [ref.tokens_with_breaks()])
    assert br == pytest.approx(47.74108847934617, abs=1e-6)
    nb = corpus_bleu([list(hyp.words)], [list(ref.words)], include_breaks=False)
    assert nb == pytest.approx(76.91605673134586, abs=1e-6)


def test_sigma_undefined_when_upper_bound_is_zero():
    hyp = SegmentedText(("x", "y", "z", "w"), frozenset())
    ref = seg("a b <seg> c d")
    with pytest.raises(MetricError, match="sigma undefined"):
        sigma([hyp], [ref])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_sigma_matches_bleu_br_property(seed):
    # every text-preserving hypothesis has upper bound 100 by construction
    rng = random.Random(seed)
    refs, hyps = [], []
    for _ in range(rng.randint(1, 4)):
        r = random_segmented(rng, rng.randint(2, 10))
        h = SegmentedText(
            r.words,
            frozenset(g for g in range(len(r.words) - 1) if rng.random() < 0.3),
        )
        refs.append(r)
        hyps.append(h)
    br = corpus_bleu(
        [h.tokens_with_breaks() for h in hyps],
        [r.tokens_with_breaks() for r in refs],
    )
    assert sigma(hyps, refs) == pytest.approx(br, abs=1e-9)


# -- validation and reports --------------------------------------------------------


def test_validate_preserved():
    hyp = seg("a b <seg> c d")
    v = validate_hypothesis(hyp, ("a", "b", "c", "d"))
    assert v.preserved
    assert v.bleu_nb == 100.0
    assert v.diff == ()


def test_validate_dropped_word_named_in_diff():
    hyp = SegmentedText(("a", "b", "d"), frozenset({1}))
    v = validate_hypothesis(hyp, ("a", "b", "c", "d"))
    assert not v.preserved
    assert ("-", "c") in v.diff
    assert v.bleu_nb < 100.0


def test_validate_added_word_named_in_diff():
    hyp = SegmentedText(("a", "b", "NEW", "c"), frozenset())
    v = validate_hypothesis(hyp, ("a", "b", "c"))
    assert not v.preserved
    assert ("+", "NEW") in v.diff


def test_evaluate_corpus_identity_and_shape():
    hyps = [seg("a b <seg> c d e f"), seg("g h i <seg> j k")]
    rep = evaluate_corpus(hyps, hyps)
    assert rep.f1 == 100.0
    assert rep.precision == 100.0 and rep.recall == 100.0
    assert rep.bleu_br == 100.0 and rep.bleu_nb == 100.0
    assert rep.sigma == pytest.approx(100.0, abs=1e-9)
    assert len(rep.per_sentence) == 2
    assert rep.per_sentence[0]["preserved"] is True
    d = rep.to_dict()
    assert list(d)[:3] == ["sigma", "bleu_nb", "f1"]


def test_evaluate_corpus_counts_altered_lines():
    refs = [seg("a b <seg> c d"), seg("e f <seg> g h")]
    hyps = [seg("a b <seg> c d"), SegmentedText(("e", "X", "g", "h"), frozenset({1}))]
    rep = evaluate_corpus(hyps, refs)
    flags = [p["preserved"] for p in rep.per_sentence]
    assert flags == [True, False]
    assert rep.per_sentence[1]["diff"]


def test_evaluate_corpus_is_permutation_invariant():
    rng = random.Random(31)
    refs = [random_segmented(rng, rng.randint(3, 9)) for _ in range(6)]
    hyps = [
        SegmentedText(
            r.words,
            frozenset(g for g in range(len(r.words) - 1) if rng.random() < 0.4),
        )
        for r in refs
    ]
    base = evaluate_corpus(hyps, refs)
    order = list(range(6))
    rng.shuffle(order)
    perm = evaluate_corpus([hyps[i] for i in order], [refs[i] for i in order])
    assert perm.f1 == pytest.approx(base.f1, abs=1e-9)
    assert perm.bleu_br == pytest.approx(base.bleu_br, abs=1e-9)
    assert perm.sigma == pytest.approx(base.sigma, abs=1e-9)


def test_evaluate_empty_corpus_is_an_error():
    with pytest.raises(MetricError, match="empty"):
        evaluate_corpus([], [])


def test_evaluate_length_mismatch_is_an_error():
    with pytest.raises(MetricError):
        evaluate_corpus([seg("a b")], [seg("a b"), seg("c d")])


# -- window profile ----------------------------------------------------------------


def test_window_profile_counts_out_of_window_segments():
    refs = [
        seg("a b <seg> c d e f g h"),          # segments of 2 and 6 words
        seg("p q r s <seg> t u v w x y z"),    # 4 and 7
    ]
    prof = window_profile(refs, min_words=5, max_words=6)
    assert prof.n_segments == 4
    assert prof.n_under == 2
    assert prof.n_over == 1
    assert prof.frac_under == 0.5
    assert prof.frac_over == 0.25


def test_window_profile_quarter_under():
    refs = []
    for k in range(4):
        refs.append(seg(" ".join(f"w{k}_{i}" for i in range(3))))       # under
        for _ in range(3):
            refs.append(seg(" ".join(f"v{k}_{i}" for i in range(7))))   # inside
    prof = window_profile(refs, min_words=5, max_words=15)
    assert prof.n_segments == 16
    assert prof.frac_under == 0.25
    assert prof.n_over == 0
