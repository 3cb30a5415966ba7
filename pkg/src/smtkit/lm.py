"""Interpolated modified Kneser-Ney n-gram language models in ARPA form.

Training follows the Chen & Goodman estimator as implemented by common LM
toolkits: the highest order uses raw counts, lower orders use continuation
counts (number of distinct left extensions) except for n-grams that start
with ``<s>``, which keep their raw counts. Three discounts per order are
estimated from counts-of-counts. The unigram level interpolates with a
uniform distribution over the vocabulary plus ``<unk>``, so ``<unk>``
receives exactly the zeroton mass.

All probabilities are stored and returned as log10 values.
"""

import math
import warnings
from collections import Counter, defaultdict

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import DataError
from .validation import check_is_fitted, check_positive_int, check_sentences

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
RESERVED = (BOS, EOS, UNK)

MAX_ORDER = 5
FALLBACK_DISCOUNT = 0.75
# ARPA convention for "probability zero": <s> is never predicted
LOG_ZERO = -99.0


class DiscountFallbackWarning(UserWarning):
    """Counts-of-counts were too sparse to estimate discounts."""


class NGramCounts:
    """Raw n-gram counts for orders ``1..order``.

    ``counts[k - 1]`` maps k-token tuples to occurrence counts. Only n-grams
    ending in a predicted token (a word or ``</s>``) are counted; the
    ``<s>`` padding appears only inside contexts.
    """

    def __init__(self, order):
        if not 1 <= order <= MAX_ORDER:
            raise ValueError(f"order must be in 1..{MAX_ORDER}, got {order}")
        self.order = order
        self.counts = [Counter() for _ in range(order)]
        self.n_sentences = 0

    def __len__(self):
        return sum(len(c) for c in self.counts)

    def __getitem__(self, ngram):
        ngram = tuple(ngram)
        return self.counts[len(ngram) - 1].get(ngram, 0)

    def context_count(self, context):
        """Number of times ``context`` was followed by a predicted token."""
        context = tuple(context)
        k = len(context) + 1
        return sum(c for g, c in self.counts[k - 1].items() if g[:-1] == context)

    def continuation_count(self, ngram):
        """N1+(. ngram): distinct tokens seen directly before ``ngram``."""
        ngram = tuple(ngram)
        k = len(ngram) + 1
        if k > self.order:
            raise ValueError("no higher order to take continuation counts from")
        return sum(1 for g in self.counts[k - 1] if g[1:] == ngram)

    @property
    def vocabulary(self):
        return {g[0] for g in self.counts[0]}


def pad(sentence, order):
    return (BOS,) * (order - 1) + tuple(sentence) + (EOS,)


def count_ngrams(corpus, order=MAX_ORDER):
    """Count all n-grams up to ``order`` in padded sentences.

    >>> dict(count_ngrams([["a"]], 1).counts[0])
    {('a',): 1, ('</s>',): 1}
    """
    counts = NGramCounts(order)
    for sentence in corpus:
        for tok in sentence:
            if tok in RESERVED:
                raise DataError(f"reserved token {tok!r} in training text")
        padded = pad(sentence, order)
        counts.n_sentences += 1
        for i in range(order - 1, len(padded)):
            for k in range(1, order + 1):
                counts.counts[k - 1][padded[i - k + 1 : i + 1]] += 1
    return counts


def _adjusted_counts(counts):
    """Counts used by the estimator at each order (see module docstring)."""
    n = counts.order
    adjusted = [None] * n
    adjusted[n - 1] = dict(counts.counts[n - 1])
    for k in range(n - 1, 0, -1):
        left = Counter(g[1:] for g in counts.counts[k])
        adj = {}
        for g, c in counts.counts[k - 1].items():
            adj[g] = c if g[0] == BOS else left[g]
        adjusted[k - 1] = adj
    return adjusted


def estimate_discounts(adjusted_counts):
    """(D1, D2, D3+) from counts-of-counts, or the fixed fallback.

    Returns ``(discounts, fell_back)``.
    """
    coc = Counter(c for c in adjusted_counts.values() if c <= 4)
    n1, n2, n3, n4 = (coc[i] for i in range(1, 5))
    if n1 == 0 or n2 == 0 or n3 == 0:
        return (FALLBACK_DISCOUNT,) * 3, True
    y = n1 / (n1 + 2 * n2)
    d1 = 1 - 2 * y * n2 / n1
    d2 = 2 - 3 * y * n3 / n2
    d3 = 3 - 4 * y * n4 / n3
    return tuple(min(max(d, 0.0), float(k)) for k, d in zip((1, 2, 3), (d1, d2, d3))), False


def _discount(c, discounts):
    return discounts[min(c, 3) - 1]


class NGramModel:
    """Stored log10 probabilities and backoff weights of an n-gram model.

    ``probs[k - 1]`` maps k-token tuples to log10 p(w | h); ``bows`` maps
    context tuples to log10 backoff weights. Queries for unseen n-grams
    back off through shorter contexts in the usual ARPA fashion.
    """

    def __init__(self, order, probs, bows, closed_vocab=False, discounts=None):
        self.order = order
        self.probs = probs
        self.bows = bows
        self.closed_vocab = closed_vocab
        self.discounts = discounts
        self.vocab = frozenset(g[0] for g in probs[0])

    # -- queries ---------------------------------------------------------

    def _map(self, tok):
        return tok if tok in self.vocab else UNK

    def logprob(self, word, context=()):
        """log10 p(word | context), truncating context to ``order - 1``."""
        word = self._map(word)
        context = tuple(self._map(t) for t in context)
        if self.order > 1:
            context = context[len(context) - (self.order - 1) :] if len(context) > self.order - 1 else context
        else:
            context = ()
        backoff = 0.0
        for start in range(len(context) + 1):
            h = context[start:]
            lp = self.probs[len(h)].get(h + (word,))
            if lp is not None:
                return lp + backoff
            backoff += self.bows.get(h, 0.0)
        raise AssertionError(f"unigram {word!r} missing from model")

    def score_sentence(self, sentence):
        """Total log10 probability of ``sentence`` including ``</s>``."""
        padded = pad(sentence, self.order)
        n = self.order - 1
        return sum(self.logprob(padded[i], padded[i - n : i]) for i in range(n, len(padded)))

    def perplexity(self, corpus):
        total = 0.0
        n_tokens = 0
        for sentence in corpus:
            total += self.score_sentence(sentence)
            n_tokens += len(sentence) + 1
        if n_tokens == 0:
            raise ValueError("perplexity of an empty corpus is undefined")
        return 10.0 ** (-total / n_tokens)

    @property
    def prediction_vocabulary(self):
        """Tokens the model distributes probability over."""
        out = sorted(self.vocab - {BOS})
        if self.closed_vocab:
            out.remove(UNK)
        return out

    def contexts(self):
        """Every context with a stored backoff weight, plus the empty one."""
        return [()] + sorted(self.bows, key=lambda h: (len(h), h))

    def normalization_error(self, contexts=None):
        """Largest |sum_w p(w | h) - 1| over ``contexts`` (default: all)."""
        vocab = self.prediction_vocabulary
        worst = 0.0
        for h in contexts if contexts is not None else self.contexts():
            total = math.fsum(10.0 ** self.logprob(w, h) for w in vocab)
            worst = max(worst, abs(total - 1.0))
        return worst

    def __eq__(self, other):
        return (
            isinstance(other, NGramModel)
            and self.order == other.order
            and self.probs == other.probs
            and self.bows == other.bows
        )

    # -- ARPA ------------------------------------------------------------

    def to_arpa(self):
        """Serialize to ARPA text; floats use shortest round-trip repr."""
        lines = ["\\data\\"]
        for k in range(1, self.order + 1):
            lines.append(f"ngram {k}={len(self.probs[k - 1])}")
        for k in range(1, self.order + 1):
            lines.append("")
            lines.append(f"\\{k}-grams:")
            for g in sorted(self.probs[k - 1]):
                fields = [repr(self.probs[k - 1][g]), " ".join(g)]
                if g in self.bows:
                    fields.append(repr(self.bows[g]))
                lines.append("\t".join(fields))
        lines.append("")
        lines.append("\\end\\")
        return "\n".join(lines) + "\n"

    def write_arpa(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_arpa())

    @classmethod
    def from_arpa(cls, text):
        """Parse ARPA text. Tolerates blank lines and space or tab separators."""
        declared = {}
        probs = []
        bows = {}
        section = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line == "\\data\\":
                section = "data"
                continue
            if line == "\\end\\":
                section = "end"
                break
            if line.startswith("\\") and line.endswith("-grams:"):
                try:
                    section = int(line[1 : -len("-grams:")])
                except ValueError:
                    raise DataError(f"bad section header {line!r}", line=lineno) from None
                while len(probs) < section:
                    probs.append({})
                continue
            if section == "data":
                if not line.startswith("ngram "):
                    raise DataError(f"unexpected line in \\data\\ section: {line!r}", line=lineno)
                k, _, n = line[len("ngram ") :].partition("=")
                declared[int(k)] = int(n)
            elif isinstance(section, int):
                parts = line.split()
                k = section
                if len(parts) not in (k + 1, k + 2):
                    raise DataError(f"expected {k} tokens plus probability in {line!r}", line=lineno)
                try:
                    lp = float(parts[0])
                    bow = float(parts[k + 1]) if len(parts) == k + 2 else None
                except ValueError:
                    raise DataError(f"non-numeric field in {line!r}", line=lineno) from None
                g = tuple(parts[1 : k + 1])
                probs[k - 1][g] = lp
                if bow is not None:
                    bows[g] = bow
            else:
                raise DataError(f"text outside any section: {line!r}", line=lineno)
        if section != "end":
            raise DataError("missing \\end\\ marker")
        if not probs:
            raise DataError("no n-gram sections")
        for k, n in declared.items():
            if k > len(probs) or len(probs[k - 1]) != n:
                got = len(probs[k - 1]) if k <= len(probs) else 0
                raise DataError(f"header declares {n} {k}-grams but {got} were read")
        unk = probs[0].get((UNK,))
        closed = unk is None or unk <= LOG_ZERO
        if unk is None:
            probs[0][(UNK,)] = LOG_ZERO
        return cls(len(probs), probs, bows, closed_vocab=closed)

    @classmethod
    def read_arpa(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_arpa(fh.read())


def estimate_mkn(counts, closed_vocab=False):
    """Build an interpolated modified Kneser-Ney model from ``counts``.

    Orders whose counts-of-counts n1, n2 or n3 is zero fall back to a
    fixed discount of 0.75 and emit :class:`DiscountFallbackWarning`.
    """
    if len(counts) == 0:
        raise DataError("cannot estimate a language model from empty counts")
    n = counts.order
    adjusted = _adjusted_counts(counts)

    discounts = []
    for k in range(1, n + 1):
        d, fell_back = estimate_discounts(adjusted[k - 1])
        if fell_back:
            warnings.warn(
                f"order {k}: counts-of-counts too sparse, using fixed discount {FALLBACK_DISCOUNT}",
                DiscountFallbackWarning,
                stacklevel=2,
            )
        discounts.append(d)

    # per-context sums and gamma numerators
    gammas = []
    denominators = []
    for k in range(1, n + 1):
        denom = defaultdict(int)
        mass = defaultdict(float)
        d = discounts[k - 1]
        for g, a in adjusted[k - 1].items():
            denom[g[:-1]] += a
            mass[g[:-1]] += _discount(a, d)
        denominators.append(denom)
        gammas.append({h: mass[h] / denom[h] for h in denom})

    probs = [dict() for _ in range(n)]
    bows = {}

    words = sorted({g[0] for g in adjusted[0]})
    vocab_size = len(words) + (0 if closed_vocab else 1)
    uniform = gammas[0][()] / vocab_size
    d = discounts[0]
    for g in sorted(adjusted[0]):
        a = adjusted[0][g]
        probs[0][g] = math.log10((a - _discount(a, d)) / denominators[0][()] + uniform)
    probs[0][(UNK,)] = LOG_ZERO if closed_vocab else math.log10(uniform)

    for k in range(2, n + 1):
        d = discounts[k - 1]
        lower = probs[k - 2]
        for g in sorted(adjusted[k - 1]):
            a = adjusted[k - 1][g]
            h = g[:-1]
            p_lower = 10.0 ** lower[g[1:]]
            probs[k - 1][g] = math.log10((a - _discount(a, d)) / denominators[k - 1][h] + gammas[k - 1][h] * p_lower)

    for k in range(2, n + 1):
        for h, gamma in gammas[k - 1].items():
            if all(t == BOS for t in h):
                probs[k - 2].setdefault(h, LOG_ZERO)
            bows[h] = math.log10(gamma) if gamma > 0 else LOG_ZERO

    return NGramModel(n, probs, bows, closed_vocab=closed_vocab, discounts=discounts)


def logprob(model, word, context=()):
    return model.logprob(word, context)


def score_sentence(model, sentence):
    return model.score_sentence(sentence)


def perplexity(model, corpus):
    return model.perplexity(corpus)


class KneserNeyLM(BaseEstimator):
    """sklearn-style wrapper: ``fit`` on tokenized sentences, then score."""

    def __init__(self, order=MAX_ORDER, closed_vocab=False):
        self.order = order
        self.closed_vocab = closed_vocab

    def fit(self, X, y=None):
        check_positive_int(self.order, "order")
        X = check_sentences(X)
        self.model_ = estimate_mkn(count_ngrams(X, self.order), closed_vocab=self.closed_vocab)
        return self

    def score_samples(self, X):
        """Per-sentence total log10 probability."""
        check_is_fitted(self, "model_")
        return np.array([self.model_.score_sentence(s) for s in check_sentences(X)])

    def score(self, X, y=None):
        return float(self.score_samples(X).sum())

    def perplexity(self, X):
        check_is_fitted(self, "model_")
        return self.model_.perplexity(check_sentences(X))

    def logprob(self, word, context=()):
        check_is_fitted(self, "model_")
        return self.model_.logprob(word, context)
