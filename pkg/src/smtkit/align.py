"""IBM Model 1 word alignment trained with EM.

t(target | source) is initialized uniformly over the target vocabulary and
refined with exact expected counts. Every target word may also be generated
by the NULL source token.
"""

import math
from collections import defaultdict
from dataclasses import dataclass

from sklearn.base import BaseEstimator

from .exceptions import TrainingError
from .morph import stem_sentence
from .validation import check_is_fitted, check_parallel, check_positive_int

NULL = "<NULL>"


def _as_pairs(corpus):
    """Accept a ParallelCorpus or an iterable of (source, target) pairs."""
    out = []
    for pair in corpus:
        if hasattr(pair, "source"):
            out.append((tuple(pair.source), tuple(pair.target)))
        else:
            src, tgt = pair
            out.append((tuple(src), tuple(tgt)))
    return out


class TTable:
    """Translation probabilities ``t[source][target]``."""

    def __init__(self, table=None):
        self.table = table if table is not None else {}

    def __call__(self, target, source):
        return self.table.get(source, {}).get(target, 0.0)

    def __getitem__(self, source):
        return self.table[source]

    def __contains__(self, source):
        return source in self.table

    def sources(self):
        return self.table.keys()

    def row_sums(self):
        return {e: math.fsum(row.values()) for e, row in self.table.items()}

    def entropy(self):
        """Mean entropy in bits of t(. | e) over real (non-NULL) sources."""
        rows = [row for e, row in self.table.items() if e != NULL]
        if not rows:
            return 0.0
        total = 0.0
        for row in rows:
            total -= math.fsum(p * math.log2(p) for p in row.values() if p > 0)
        return total / len(rows)

    def to_text(self):
        lines = []
        for e in sorted(self.table):
            for f in sorted(self.table[e]):
                lines.append(f"{e}\t{f}\t{self.table[e][f]!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        table = defaultdict(dict)
        for line in text.splitlines():
            if line.strip():
                e, f, p = line.split("\t")
                table[e][f] = float(p)
        return cls(dict(table))


# probability floor for target words no source can generate (unseen data)
PROB_FLOOR = 1e-12


def corpus_log_likelihood(pairs, t):
    """Sum over pairs and target words of ln( sum_i t(f | e_i) / (l + 1) )."""
    total = 0.0
    for src, tgt in pairs:
        sources = (NULL,) + src
        norm = math.log(len(sources))
        for f in tgt:
            total += math.log(max(sum(t(f, e) for e in sources), PROB_FLOOR)) - norm
    return total


def train_model1(corpus, iterations=5):
    """Run Model 1 EM; returns ``(TTable, log)``.

    ``log[i]`` is the corpus log-likelihood (natural log) after iteration
    ``i + 1``; EM guarantees it never decreases.
    """
    check_positive_int(iterations, "iterations")
    pairs = [(s, t) for s, t in _as_pairs(corpus) if t]
    if not pairs:
        raise TrainingError("cannot train an aligner on an empty corpus")
    target_vocab = sorted({f for _, tgt in pairs for f in tgt})
    uniform = 1.0 / len(target_vocab)
    cooc = defaultdict(set)
    for src, tgt in pairs:
        for e in (NULL,) + src:
            cooc[e].update(tgt)
    t = TTable({e: {f: uniform for f in sorted(fs)} for e, fs in sorted(cooc.items())})

    log = []
    for _ in range(iterations):
        counts = defaultdict(lambda: defaultdict(float))
        for src, tgt in pairs:
            sources = (NULL,) + src
            for f in tgt:
                probs = [t.table[e][f] for e in sources]
                z = sum(probs)
                for e, p in zip(sources, probs):
                    counts[e][f] += p / z
        table = {}
        for e in sorted(counts):
            row = counts[e]
            total = math.fsum(row.values())
            table[e] = {f: row[f] / total for f in sorted(row)}
        t = TTable(table)
        log.append(corpus_log_likelihood(pairs, t))
    return t, log


def viterbi_align(pair, t):
    """Best source position for every target word.

    Returns ``[(i or None, j), ...]`` with one entry per target index;
    ``None`` is the NULL word. Ties go to the smallest source index, and
    NULL wins only when strictly better than every real source word.
    """
    src, tgt = _as_pairs([pair])[0]
    links = []
    for j, f in enumerate(tgt):
        best_i, best_p = None, -1.0
        for i, e in enumerate(src):
            p = t(f, e)
            if p > best_p:
                best_i, best_p = i, p
        if t(f, NULL) > best_p:
            best_i = None
        links.append((best_i, j))
    return links


def to_pharaoh(links):
    """Pharaoh ``i-j`` string; NULL links are omitted."""
    return " ".join(f"{i}-{j}" for i, j in links if i is not None)


@dataclass
class FactorReport:
    factor: str
    source_types: int
    target_types: int
    log_likelihood_per_token: float
    ttable_entropy: float


def compare_factored(corpus, stem_rules_src=None, stem_rules_tgt=None, iterations=5):
    """Train on surface forms and on stems; returns ``{"surface": ..., "stem": ...}``.

    ``None`` for either rule table leaves that side unstemmed.
    """
    surface = _as_pairs(corpus)

    def _stem(sentence, rules):
        return sentence if rules is None else stem_sentence(sentence, rules)

    stemmed = [(_stem(s, stem_rules_src), _stem(t, stem_rules_tgt)) for s, t in surface]
    report = {}
    for name, pairs in (("surface", surface), ("stem", stemmed)):
        t, log = train_model1(pairs, iterations)
        n_tokens = sum(len(tgt) for _, tgt in pairs)
        report[name] = FactorReport(
            factor=name,
            source_types=len({w for s, _ in pairs for w in s}),
            target_types=len({w for _, tg in pairs for w in tg}),
            log_likelihood_per_token=log[-1] / n_tokens,
            ttable_entropy=t.entropy(),
        )
    return report


def format_factor_report(report):
    rows = [
        ("source types", "source_types", "{}"),
        ("target types", "target_types", "{}"),
        ("log-likelihood / token", "log_likelihood_per_token", "{:.4f}"),
        ("t-table entropy (bits)", "ttable_entropy", "{:.4f}"),
    ]
    names = list(report)
    label_w = max(len(r[0]) for r in rows)
    out = [" " * label_w + "  " + "  ".join(n.rjust(12) for n in names)]
    for label, attr, fmt in rows:
        out.append(label.ljust(label_w) + "  " + "  ".join(fmt.format(getattr(report[n], attr)).rjust(12) for n in names))
    return "\n".join(out) + "\n"


class Model1Aligner(BaseEstimator):
    """``fit(sources, targets)`` trains; ``predict`` returns Viterbi links."""

    def __init__(self, iterations=5):
        self.iterations = iterations

    def fit(self, X, y):
        X, y = check_parallel(X, y)
        self.ttable_, self.log_likelihood_ = train_model1(list(zip(X, y)), self.iterations)
        return self

    def predict(self, X, y):
        check_is_fitted(self, "ttable_")
        X, y = check_parallel(X, y)
        return [viterbi_align((s, t), self.ttable_) for s, t in zip(X, y)]

    def score(self, X, y):
        """Corpus log-likelihood per target token under the fitted table."""
        check_is_fitted(self, "ttable_")
        X, y = check_parallel(X, y)
        pairs = [(s, t) for s, t in zip(X, y) if t]
        n = sum(len(t) for _, t in pairs)
        return corpus_log_likelihood(pairs, self.ttable_) / n
