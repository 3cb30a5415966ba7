import math
import random

import pytest

from smtkit.align import (
    NULL,
    Model1Aligner,
    TTable,
    compare_factored,
    corpus_log_likelihood,
    format_factor_report,
    to_pharaoh,
    train_model1,
    viterbi_align,
)
from smtkit.exceptions import TrainingError
from smtkit.morph import StemRuleTable


def random_corpus(seed):
    rng = random.Random(seed)
    return [
        ([f"e{rng.randint(0, 4)}" for _ in range(rng.randint(1, 5))], [f"f{rng.randint(0, 4)}" for _ in range(rng.randint(1, 5))])
        for _ in range(rng.randint(2, 10))
    ]


def test_single_pair_converges():
    t, _ = train_model1([(["a"], ["x"])], iterations=20)
    assert t("x", "a") >= 0.99


def test_pigeonhole_disambiguation():
    corpus = [(["a", "b"], ["x", "y"]), (["a"], ["x"])]
    t, _ = train_model1(corpus, iterations=10)
    assert t("x", "a") > t("y", "a")
    links = viterbi_align(corpus[0], t)
    assert links == [(0, 0), (1, 1)]


def test_empty_corpus_rejected():
    with pytest.raises(TrainingError):
        train_model1([])
    with pytest.raises(ValueError):
        train_model1([(["a"], ["x"])], iterations=0)


@pytest.mark.parametrize("seed", range(10))
def test_rows_normalized_and_likelihood_monotone(seed):
    corpus = random_corpus(seed)
    t, log = train_model1(corpus, iterations=15)
    for e, total in t.row_sums().items():
        assert abs(total - 1.0) <= 1e-6, e
    assert all(b >= a - 1e-9 for a, b in zip(log, log[1:]))
    assert log[-1] == pytest.approx(corpus_log_likelihood([(tuple(s), tuple(f)) for s, f in corpus], t))


@pytest.mark.parametrize("seed", range(5))
def test_order_invariance(seed):
    corpus = random_corpus(seed)
    shuffled = corpus[:]
    random.Random(99).shuffle(shuffled)
    t1, log1 = train_model1(corpus, 8)
    t2, log2 = train_model1(shuffled, 8)
    for e in t1.sources():
        for f, p in t1[e].items():
            assert t2(f, e) == pytest.approx(p, abs=1e-12)
    assert log1[-1] == pytest.approx(log2[-1], abs=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_viterbi_covers_every_target_once(seed):
    corpus = random_corpus(seed)
    t, _ = train_model1(corpus, 5)
    for src, tgt in corpus:
        links = viterbi_align((src, tgt), t)
        assert [j for _, j in links] == list(range(len(tgt)))
        assert all(i is None or 0 <= i < len(src) for i, _ in links)


def test_viterbi_ties_go_to_first_source():
    uniform = TTable({"a": {"x": 0.5, "y": 0.5}, "b": {"x": 0.5, "y": 0.5}, NULL: {"x": 0.5, "y": 0.5}})
    assert viterbi_align((["a", "b"], ["x", "y"]), uniform) == [(0, 0), (0, 1)]


def test_pharaoh_format_skips_null():
    assert to_pharaoh([(0, 0), (None, 1), (2, 2)]) == "0-0 2-2"


def test_ttable_text_round_trip():
    t, _ = train_model1(random_corpus(1), 3)
    back = TTable.from_text(t.to_text())
    assert back.table == t.table
    lines = t.to_text().splitlines()
    assert lines == sorted(lines, key=lambda ln: ln.split("\t")[:2])


def test_compare_factored_identity_stemmer():
    corpus = random_corpus(3)
    rep = compare_factored(corpus, None, None, iterations=4)
    assert rep["surface"].__dict__ | {"factor": None} == rep["stem"].__dict__ | {"factor": None}
    text = format_factor_report(rep)
    assert "surface" in text and "stem" in text


def test_compare_factored_reduces_types():
    sufs = ["kal", "ukku", "odu"]
    corpus = [([f"p{j}", f"n{i}"], [f"{s}{x}"]) for i, s in enumerate(["bar", "dor", "kam", "nil"]) for j, x in enumerate(sufs)]
    rep = compare_factored(corpus, None, StemRuleTable(sufs), iterations=8)
    assert rep["stem"].target_types < rep["surface"].target_types
    assert rep["stem"].log_likelihood_per_token > rep["surface"].log_likelihood_per_token


def test_estimator_interface():
    X = [["a", "b"], ["a"]]
    y = [["x", "y"], ["x"]]
    m = Model1Aligner(iterations=10).fit(X, y)
    assert m.predict(X, y)[0] == [(0, 0), (1, 1)]
    score = m.score(X, y)
    assert math.isfinite(score) and score < 0
    # unseen target words hit the probability floor instead of log(0)
    assert math.isfinite(m.score([["a"]], [["zzz"]]))
