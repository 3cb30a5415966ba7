"""Character-level transliteration for out-of-vocabulary words.

A character translation table t(target char | source char) is learned
with EM from a word-pair lexicon. Alignment positions follow a fixed prior
that favours the diagonal (plus a NULL source), which keeps EM monotone
while letting it resolve otherwise symmetric pairs such as ``ab -> ab``.
Candidates come from a left-to-right beam search that emits one target
character per source character, scored by the translation table and a
character trigram model. Candidates are finally plugged into the sentence
and rescored with a word language model.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field

from sklearn.base import BaseEstimator

from .exceptions import TrainingError
from .lm import EOS, BOS, NGramModel, count_ngrams, estimate_mkn
from .validation import check_indices, check_is_fitted, check_positive_int, check_sentence

log = logging.getLogger(__name__)

NULL = "<NULL>"
DEFAULT_K = 100


@dataclass
class CharTransModel:
    ttable: dict
    char_lm: NGramModel
    target_alphabet: tuple
    log_likelihood: list = field(default_factory=list)

    def t(self, target_char, source_char):
        return self.ttable.get(source_char, {}).get(target_char, 0.0)

    def to_text(self):
        lines = ["source_char\ttarget_char\tprob"]
        for s in sorted(self.ttable):
            for c in sorted(self.ttable[s]):
                lines.append(f"{s}\t{c}\t{self.ttable[s][c]!r}")
        return "\n".join(lines) + "\n"

    def save(self, path):
        """Write the probability table to ``path`` and the char LM beside it."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())
        self.char_lm.write_arpa(str(path) + ".charlm.arpa")

    @classmethod
    def load(cls, path):
        ttable = {}
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            if header != "source_char\ttarget_char\tprob":
                raise ValueError(f"{path}: unexpected header {header!r}")
            for line in fh:
                if line.strip():
                    s, c, p = line.rstrip("\n").split("\t")
                    ttable.setdefault(s, {})[c] = float(p)
        lm = NGramModel.read_arpa(str(path) + ".charlm.arpa")
        alphabet = tuple(sorted({c for row in ttable.values() for c in row}))
        return cls(ttable, lm, alphabet)


def _alignment_prior(l, m, diagonal_tension, null_prob):
    """prior[j][i] for target j over (NULL, source 0..l-1).

    ``null_prob=None`` gives NULL the Model 1 share 1 / (l + 1).
    """
    if null_prob is None:
        null_prob = 1.0 / (l + 1)
    prior = []
    for j in range(m):
        w = [math.exp(-diagonal_tension * abs((i + 0.5) / l - (j + 0.5) / m)) for i in range(l)]
        z = sum(w)
        prior.append([null_prob] + [(1.0 - null_prob) * x / z for x in w])
    return prior


def _check_pairs(pairs):
    out = []
    for src, tgt in pairs:
        if not src or not tgt:
            raise TrainingError(f"transliteration pair ({src!r}, {tgt!r}) has an empty side")
        out.append((tuple(src), tuple(tgt)))
    if not out:
        raise TrainingError("cannot train on an empty transliteration corpus")
    return out


def char_log_likelihood(pairs, ttable, diagonal_tension=4.0, null_prob=0.05):
    total = 0.0
    for src, tgt in pairs:
        sources = (NULL,) + src
        prior = _alignment_prior(len(src), len(tgt), diagonal_tension, null_prob)
        for j, c in enumerate(tgt):
            total += math.log(sum(p * ttable[s].get(c, 0.0) for p, s in zip(prior[j], sources)))
    return total


def train_char_model(pairs, iterations=10, diagonal_tension=4.0, null_prob=0.05, lm_order=3):
    """EM over character alignments of a (source word, target word) lexicon.

    ``diagonal_tension=0`` with ``null_prob=None`` gives plain Model 1
    alignment probabilities. The returned model's ``log_likelihood`` lists
    the corpus log-likelihood after each iteration.
    """
    check_positive_int(iterations, "iterations")
    pairs = _check_pairs(pairs)
    alphabet = tuple(sorted({c for _, tgt in pairs for c in tgt}))
    uniform = 1.0 / len(alphabet)
    ttable = {s: {c: uniform for c in alphabet} for s in sorted({ch for src, _ in pairs for ch in src} | {NULL})}

    history = []
    for _ in range(iterations):
        counts = {s: {} for s in ttable}
        for src, tgt in pairs:
            sources = (NULL,) + src
            prior = _alignment_prior(len(src), len(tgt), diagonal_tension, null_prob)
            for j, c in enumerate(tgt):
                weights = [p * ttable[s][c] for p, s in zip(prior[j], sources)]
                z = sum(weights)
                for s, w in zip(sources, weights):
                    counts[s][c] = counts[s].get(c, 0.0) + w / z
        for s, row in counts.items():
            total = math.fsum(row.values())
            if total > 0:
                ttable[s] = {c: row.get(c, 0.0) / total for c in alphabet}
        history.append(char_log_likelihood(pairs, ttable, diagonal_tension, null_prob))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        char_lm = estimate_mkn(count_ngrams([tgt for _, tgt in pairs], lm_order))
    return CharTransModel(ttable, char_lm, alphabet, history)


@dataclass(frozen=True)
class Candidate:
    word: str
    score: float


class CandidateSet(tuple):
    """Candidates sorted by descending score; ``unseen`` lists characters
    that had no translation row and were emitted uniformly."""

    def __new__(cls, candidates, unseen=()):
        obj = super().__new__(cls, candidates)
        obj.unseen = tuple(unseen)
        return obj

    @property
    def words(self):
        return [c.word for c in self]


def _order_key(item):
    return (-item[0], item[1])


def generate_candidates(word, model, k=DEFAULT_K, lm_weight=1.0, beam_width=None):
    """Beam search for up to ``k`` transliterations of ``word``.

    Scores are log10 t(target | source) summed over characters plus
    ``lm_weight`` times the character LM log10 probability (including the
    end-of-word event). The beam keeps ``2 k`` hypotheses; score ties are
    broken by the candidate string.
    """
    check_positive_int(k, "k")
    if not word:
        raise ValueError("cannot transliterate an empty word")
    width = beam_width or 2 * k
    lm = model.char_lm
    n = lm.order - 1
    uniform = {c: 1.0 / len(model.target_alphabet) for c in model.target_alphabet}
    unseen = []
    # hypotheses: (score, string)
    beam = [(0.0, "")]
    for ch in word:
        row = model.ttable.get(ch)
        if row is None:
            unseen.append(ch)
            row = uniform
        emissions = [(c, math.log10(p)) for c, p in sorted(row.items()) if p > 0.0]
        expanded = []
        for score, prefix in beam:
            history = ((BOS,) * n + tuple(prefix))[-n:] if n else ()
            for c, lt in emissions:
                lm_lp = lm.logprob(c, history) if lm_weight else 0.0
                expanded.append((score + lt + lm_weight * lm_lp, prefix + c))
        expanded.sort(key=_order_key)
        beam = expanded[:width]
    final = []
    for score, prefix in beam:
        if lm_weight:
            history = ((BOS,) * n + tuple(prefix))[-n:] if n else ()
            score += lm_weight * lm.logprob(EOS, history)
        final.append((score, prefix))
    final.sort(key=_order_key)
    if unseen:
        log.info("characters %r of %r unseen in training; emitted uniformly", unseen, word)
    return CandidateSet([Candidate(w, s) for s, w in final[:k]], unseen)


def find_oovs(sentence, vocabulary):
    """Positions of tokens missing from ``vocabulary``."""
    return [i for i, tok in enumerate(sentence) if tok not in vocabulary]


def rescore(sentence, position, candidates, lm, weights=(1.0, 1.0)):
    """Pick the candidate maximizing ``w_tm * score + w_lm * LM(sentence)``.

    Returns ``(word, combined score)``; ties keep the earlier candidate.
    """
    w_tm, w_lm = weights
    tokens = list(sentence)
    best = None
    for cand in candidates:
        tokens[position] = cand.word
        total = w_tm * cand.score + (w_lm * lm.score_sentence(tokens) if w_lm else 0.0)
        if best is None or total > best[1]:
            best = (cand.word, total)
    return best


def replace_oovs(translated, oov_positions, model, lm, weights=(1.0, 1.0), k=DEFAULT_K, lm_weight=1.0, report=None):
    """Replace each OOV token with its best rescored transliteration.

    Every position is handled independently against the original sentence.
    If ``report`` is a list, one dict per OOV position is appended.
    """
    sentence = check_sentence(translated, "translated")
    positions = sorted(check_indices(oov_positions, len(sentence), "oov_positions"))
    out = list(sentence)
    for pos in positions:
        cands = generate_candidates(sentence[pos], model, k, lm_weight=lm_weight)
        choice = rescore(sentence, pos, cands, lm, weights) if cands else None
        if choice is None:
            log.warning("no candidate for %r at %d; keeping it", sentence[pos], pos)
        else:
            out[pos] = choice[0]
        if report is not None:
            report.append(
                {
                    "position": pos,
                    "source": sentence[pos],
                    "chosen": out[pos],
                    "n_candidates": len(cands),
                    "unseen": list(cands.unseen),
                    "kept_original": choice is None,
                }
            )
    return tuple(out)


class Transliterator(BaseEstimator):
    """``fit(source_words, target_words)``; ``predict`` gives the 1-best."""

    def __init__(self, iterations=10, diagonal_tension=4.0, null_prob=0.05, lm_order=3, lm_weight=1.0, k=DEFAULT_K):
        self.iterations = iterations
        self.diagonal_tension = diagonal_tension
        self.null_prob = null_prob
        self.lm_order = lm_order
        self.lm_weight = lm_weight
        self.k = k

    def fit(self, X, y):
        X, y = list(X), list(y)
        if len(X) != len(y):
            raise ValueError(f"{len(X)} source words but {len(y)} target words")
        self.model_ = train_char_model(
            list(zip(X, y)), self.iterations, self.diagonal_tension, self.null_prob, self.lm_order
        )
        return self

    def predict_nbest(self, X, k=None):
        check_is_fitted(self, "model_")
        return [generate_candidates(w, self.model_, k or self.k, self.lm_weight) for w in X]

    def predict(self, X):
        return [c[0].word for c in self.predict_nbest(X, k=1)]
