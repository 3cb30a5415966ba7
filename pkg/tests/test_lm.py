import math
import random
import warnings

import pytest

from oracles import kn_reference
from smtkit.exceptions import DataError
from smtkit.lm import (
    LOG_ZERO,
    DiscountFallbackWarning,
    KneserNeyLM,
    NGramModel,
    count_ngrams,
    estimate_mkn,
    logprob,
    perplexity,
    score_sentence,
)


def quiet_mkn(corpus, order, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DiscountFallbackWarning)
        return estimate_mkn(count_ngrams(corpus, order), **kw)


def random_corpus(seed, n=60, vocab="abcdefgh"):
    rng = random.Random(seed)
    return [[rng.choice(vocab) for _ in range(rng.randint(0, 8))] for _ in range(n)]


# -- counting -------------------------------------------------------------------------


def test_count_examples():
    assert dict(count_ngrams([["a"]], 1).counts[0]) == {("a",): 1, ("</s>",): 1}
    c = count_ngrams([["a", "a"]], 2)
    assert dict(c.counts[1]) == {("<s>", "a"): 1, ("a", "a"): 1, ("a", "</s>"): 1}
    assert len(count_ngrams([], 3)) == 0


def test_count_rejects_reserved_tokens():
    with pytest.raises(DataError):
        count_ngrams([["a", "<s>"]], 2)


@pytest.mark.parametrize("order", [2, 3, 4, 5])
def test_count_consistency(order):
    counts = count_ngrams(random_corpus(order), order)
    for k in range(2, order + 1):
        left = {}
        for g, c in counts.counts[k - 1].items():
            left[g[1:]] = left.get(g[1:], 0) + c
        # every (k-1)-gram occurrence has exactly one predecessor in the padded text
        assert left == dict(counts.counts[k - 2])


def test_bad_order():
    with pytest.raises(ValueError):
        count_ngrams([["a"]], 6)


# -- estimation vs reference ------------------------------------------------------------


def test_unigram_hand_values():
    model = quiet_mkn([["a", "a", "b"]], 1)
    expected = {"a": 0.453125, "b": 0.203125, "</s>": 0.203125, "<unk>": 0.140625}
    for w, p in expected.items():
        assert 10 ** model.logprob(w) == pytest.approx(p, abs=1e-12)


@pytest.mark.parametrize("order", [1, 2])
@pytest.mark.parametrize("seed", range(6))
def test_matches_reference_kneser_ney(order, seed):
    corpus = random_corpus(seed, n=40 + 20 * seed, vocab="abcdefghij"[: 4 + seed])
    model = quiet_mkn(corpus, order)
    ref, vocab = kn_reference(corpus, order)
    for (ctx, w), p in ref.items():
        assert model.logprob(w, ctx) == pytest.approx(math.log10(p), abs=1e-9), (ctx, w)


def test_discount_fallback_warns_and_normalizes():
    with pytest.warns(DiscountFallbackWarning):
        model = estimate_mkn(count_ngrams([["w1", "w2", "w3", "w4"]], 3))
    assert model.discounts[0] == (0.75, 0.75, 0.75)
    assert model.normalization_error() < 1e-9


@pytest.mark.parametrize("order", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("seed", range(3))
def test_normalization_on_random_corpora(order, seed):
    model = quiet_mkn(random_corpus(seed), order)
    assert model.normalization_error() <= 1e-9


def test_normalization_closed_vocab():
    model = quiet_mkn(random_corpus(1), 3, closed_vocab=True)
    assert model.logprob("<unk>") == LOG_ZERO
    assert "<unk>" not in model.prediction_vocabulary
    assert model.normalization_error() <= 1e-9


# -- queries ------------------------------------------------------------------------------


def test_oov_maps_to_unk_and_is_finite():
    model = quiet_mkn(random_corpus(2), 3)
    lp = model.logprob("never-seen", ("a", "b"))
    assert math.isfinite(lp) and lp == model.logprob("<unk>", ("a", "b"))


def test_context_truncated_to_order_minus_one():
    model = quiet_mkn(random_corpus(3), 3)
    assert model.logprob("a", ("x", "y", "b", "c")) == model.logprob("a", ("b", "c"))


def test_observed_contexts_give_finite_probabilities():
    corpus = random_corpus(4)
    model = quiet_mkn(corpus, 4)
    for h in model.contexts():
        for w in model.prediction_vocabulary:
            lp = model.logprob(w, h)
            assert math.isfinite(lp) and lp <= 0.0


def test_empty_sentence_scores_end_marker():
    model = quiet_mkn(random_corpus(5), 3)
    assert score_sentence(model, []) == model.logprob("</s>", ("<s>", "<s>"))
    assert logprob(model, "a") == model.logprob("a")


def test_perplexity_matches_definition():
    corpus = random_corpus(6, n=10)
    model = quiet_mkn(corpus, 2)
    total = sum(model.score_sentence(s) for s in corpus)
    n = sum(len(s) + 1 for s in corpus)
    assert perplexity(model, corpus) == pytest.approx(10 ** (-total / n))


# -- persistence ---------------------------------------------------------------------------


def test_deterministic_model_file(tmp_path):
    corpus = random_corpus(7)
    a, b = quiet_mkn(corpus, 5), quiet_mkn(list(corpus), 5)
    assert a.to_arpa() == b.to_arpa()


def test_arpa_round_trip(tmp_path):
    model = quiet_mkn(random_corpus(8), 4)
    path = tmp_path / "lm.arpa"
    model.write_arpa(path)
    back = NGramModel.read_arpa(path)
    assert back == model
    assert back.to_arpa() == model.to_arpa()


def test_arpa_reader_is_tolerant_but_checks_counts():
    text = "\\data\\\nngram 1=2\n\n\\1-grams:\n-0.3 a  \n-0.5   </s>\n\\end\\\n"
    model = NGramModel.from_arpa(text)
    assert model.logprob("a") == -0.3
    with pytest.raises(DataError):
        NGramModel.from_arpa(text.replace("ngram 1=2", "ngram 1=3"))
    with pytest.raises(DataError):
        NGramModel.from_arpa(text.replace("\\end\\\n", ""))


def test_estimator_wrapper():
    corpus = random_corpus(9, n=20)
    lm = KneserNeyLM(order=3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DiscountFallbackWarning)
        lm.fit(corpus)
    scores = lm.score_samples(corpus[:3])
    assert scores.shape == (3,)
    assert lm.score(corpus[:3]) == pytest.approx(scores.sum())
    assert lm.get_params() == {"order": 3, "closed_vocab": False}
