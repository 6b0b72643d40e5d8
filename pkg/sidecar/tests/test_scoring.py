"""Scorer backends: the stub formula and the masked-LM aggregation logic."""

from __future__ import annotations

import pytest

from erseg_sidecar.scoring import MlmScorer, SidecarConfig, StubScorer


def test_stub_formula():
    s = StubScorer()
    assert s.score_gaps("a b c d", ["a", "b", "c", "d"]) == [0.25, 0.5, 0.75, 1.0]


def test_stub_single_token():
    got = StubScorer().score_gaps("hi", ["hi"])
    assert got == [1.0]


def test_stub_deterministic():
    s = StubScorer()
    a = s.score_gaps("x y z", ["x", "y", "z"])
    b = s.score_gaps("x y z", ["x", "y", "z"])
    assert a == b


def test_stub_rejects_empty():
    with pytest.raises(ValueError, match="no tokens"):
        StubScorer().score_gaps("", [])


def test_config_validation():
    with pytest.raises(ValueError, match="non-empty"):
        SidecarConfig(punct=())
    with pytest.raises(ValueError, match="single tokens"):
        SidecarConfig(punct=(". .",))
    with pytest.raises(ValueError, match="single tokens"):
        SidecarConfig(punct=("",))
    with pytest.raises(ValueError, match="batch size"):
        SidecarConfig(batch_size=0)
    cfg = SidecarConfig()
    assert cfg.punct == (".", ",", ";", ":", "!", "?")
    assert cfg.batch_size == 16


class FakeBackend:
    """Canned fill-mask results recording every call."""

    mask_token = "[MASK]"

    def __init__(self, vocab=(".", ",", "!"), score=0.125):
        self.vocab = set(vocab)
        self.score = score
        self.calls: list[tuple[tuple[str, ...], tuple[str, ...]]] = []

    def has_token(self, symbol):
        return symbol in self.vocab

    def scores(self, texts, targets):
        self.calls.append((tuple(texts), tuple(targets)))
        return [{t: self.score for t in targets} for _ in texts]


def make_scorer(backend, punct=(".", ",", "!"), batch_size=16):
    cfg = SidecarConfig(punct=tuple(punct), batch_size=batch_size)
    return MlmScorer(cfg, backend=backend)


def test_mask_inserted_after_each_token_with_single_spaces():
    backend = FakeBackend()
    scorer = make_scorer(backend)
    scorer.score_gaps("the dog ran", ["the", "dog", "ran"])
    texts = backend.calls[0][0]
    assert texts == (
        "the [MASK] dog ran",
        "the dog [MASK] ran",
        "the dog ran [MASK]",
    )


def test_scores_sum_over_the_punctuation_set():
    backend = FakeBackend(score=0.125)
    scorer = make_scorer(backend, punct=(".", ",", "!"))
    got = scorer.score_gaps("a b", ["a", "b"])
    assert got == [0.375, 0.375]  # three symbols at 0.125 each


def test_scores_clamped_to_unit_interval():
    backend = FakeBackend(score=0.9)
    scorer = make_scorer(backend, punct=(".", ",", "!"))
    got = scorer.score_gaps("a", ["a"])
    assert got == [1.0]  # 2.7 of raw mass cannot leave [0, 1]


def test_missing_vocab_symbols_skipped_with_one_warning(capsys):
    backend = FakeBackend(vocab=(".",), score=0.25)
    scorer = make_scorer(backend, punct=(".", ";"))
    err = capsys.readouterr().err
    assert err.count("';'") == 1
    assert "skipped" in err
    got = scorer.score_gaps("a b", ["a", "b"])
    assert got == [0.25, 0.25]  # only '.' contributes
    assert backend.calls[0][1] == (".",)


def test_no_usable_symbols_scores_zero(capsys):
    backend = FakeBackend(vocab=())
    scorer = make_scorer(backend, punct=(".", ","))
    assert scorer.score_gaps("a b c", ["a", "b", "c"]) == [0.0, 0.0, 0.0]
    assert backend.calls == []  # no pointless model calls


def test_batching_respects_batch_size_and_order():
    backend = FakeBackend()
    scorer = make_scorer(backend, batch_size=4)
    tokens = [f"w{i}" for i in range(10)]
    got = scorer.score_gaps(" ".join(tokens), tokens)
    assert len(got) == 10
    sizes = [len(texts) for texts, _ in backend.calls]
    assert sizes == [4, 4, 2]
    flattened = [t for texts, _ in backend.calls for t in texts]
    assert flattened[0].startswith("w0 [MASK]")
    assert flattened[-1].endswith("w9 [MASK]")


def test_mlm_scorer_rejects_empty_tokens():
    scorer = make_scorer(FakeBackend())
    with pytest.raises(ValueError, match="no tokens"):
        scorer.score_gaps("", [])
