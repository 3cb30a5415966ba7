"""Reading, normalizing, tokenizing, filtering and summarizing parallel text."""

import random
import re
import unicodedata
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DataError, DecodeError, SizingError
from .validation import check_sentence

SCRIPT_CLASSES = ("latin", "indic")

PUNCTUATION = ".,;:!?()\"'"
# danda and double danda end Indic sentences the way "." ends English ones
INDIC_PUNCTUATION = PUNCTUATION + "।॥"

STATS_LABELS = (
    "#sentences",
    "#total words",
    "#unique words",
    "average word length (#characters)",
    "average sentence length (#words)",
)


@dataclass(frozen=True)
class SentencePair:
    source: tuple
    target: tuple
    id: int

    def __post_init__(self):
        object.__setattr__(self, "source", check_sentence(self.source, "source"))
        object.__setattr__(self, "target", check_sentence(self.target, "target"))
        if self.id < 0:
            raise ValueError(f"pair id must be >= 0, got {self.id}")


@dataclass(frozen=True)
class ParallelCorpus:
    pairs: tuple = ()
    source_lang: str = "src"
    target_lang: str = "tgt"

    def __post_init__(self):
        pairs = tuple(self.pairs)
        ids = [p.id for p in pairs]
        if len(set(ids)) != len(ids):
            raise ValueError("pair ids must be unique within a corpus")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_sentences(cls, sources, targets, source_lang="src", target_lang="tgt"):
        sources, targets = list(sources), list(targets)
        if len(sources) != len(targets):
            raise DataError(f"{len(sources)} source sentences but {len(targets)} target sentences")
        pairs = tuple(SentencePair(s, t, i) for i, (s, t) in enumerate(zip(sources, targets)))
        return cls(pairs, source_lang, target_lang)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    @property
    def sources(self):
        return [p.source for p in self.pairs]

    @property
    def targets(self):
        return [p.target for p in self.pairs]

    def replace(self, pairs):
        return ParallelCorpus(tuple(pairs), self.source_lang, self.target_lang)


@dataclass(frozen=True)
class FilterPolicy:
    max_words: int = 80
    max_ratio: float = 9

    def __post_init__(self):
        if isinstance(self.max_words, bool) or not isinstance(self.max_words, int) or self.max_words < 1:
            raise ValueError(f"max_words must be an integer >= 1, got {self.max_words!r}")
        if not self.max_ratio >= 1:
            raise ValueError(f"max_ratio must be >= 1, got {self.max_ratio!r}")


@dataclass(frozen=True)
class CorpusStats:
    n_sentences: int = 0
    n_total_words: int = 0
    n_unique_words: int = 0
    avg_word_len_unique: float = 0.0
    avg_word_len_total: float = 0.0
    avg_sentence_len: float = 0.0

    def rows(self):
        return (
            self.n_sentences,
            self.n_total_words,
            self.n_unique_words,
            self.avg_word_len_unique,
            self.avg_sentence_len,
        )


# -- normalization ---------------------------------------------------------


@lru_cache(maxsize=None)
def _translation_table(script_class):
    table = {}
    text = resources.files("smtkit").joinpath("data/normalization.tsv").read_text(encoding="utf-8")
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        cls, src, dst = line.split("\t")
        if cls not in ("all", script_class):
            continue
        repl = "" if dst == "-" else "".join(chr(int(cp, 16)) for cp in dst.split())
        table[int(src, 16)] = repl
    return table


def _check_script_class(script_class):
    if script_class not in SCRIPT_CLASSES:
        raise ValueError(f"script_class must be one of {SCRIPT_CLASSES}, got {script_class!r}")


def decode(raw):
    """Decode UTF-8 bytes strictly, reporting the first bad byte offset."""
    if isinstance(raw, str):
        return raw
    try:
        return bytes(raw).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DecodeError(exc.start, exc.reason) from None


def normalize_text(raw, script_class="latin"):
    """NFC-normalize ``raw`` and map punctuation and digit variants.

    ``raw`` may be ``str`` or UTF-8 ``bytes``. The Indic class additionally
    folds native decimal digits (Devanagari, Tamil, Malayalam, Gurmukhi...)
    to ASCII. The function is idempotent.
    """
    _check_script_class(script_class)
    text = unicodedata.normalize("NFC", decode(raw))
    text = text.translate(_translation_table(script_class))
    if script_class == "indic":
        text = "".join(
            str(unicodedata.decimal(ch)) if not ch.isascii() and unicodedata.category(ch) == "Nd" else ch
            for ch in text
        )
    # deletions can bring a base and a combining mark together
    return unicodedata.normalize("NFC", text)


@lru_cache(maxsize=None)
def _token_pattern(script_class):
    punct = re.escape(INDIC_PUNCTUATION if script_class == "indic" else PUNCTUATION)
    return re.compile(rf"[{punct}]|[^\s{punct}]+")


def tokenize(raw, script_class="latin"):
    """Split on whitespace and detach punctuation as separate tokens.

    >>> tokenize("city in 1411.")
    ('city', 'in', '1411', '.')
    """
    _check_script_class(script_class)
    return tuple(_token_pattern(script_class).findall(raw))


# -- filtering and splitting -----------------------------------------------


def violates(source_len, target_len, policy):
    """True when a pair of the given token lengths must be filtered out."""
    if source_len == 0 or target_len == 0:
        return True
    if source_len > policy.max_words or target_len > policy.max_words:
        return True
    longer, shorter = max(source_len, target_len), min(source_len, target_len)
    return Fraction(longer, shorter) > Fraction(policy.max_ratio)


def filter_pairs(corpus, policy=None):
    """Partition ``corpus`` into (kept, removed), preserving order."""
    policy = policy or FilterPolicy()
    kept, removed = [], []
    for pair in corpus:
        (removed if violates(len(pair.source), len(pair.target), policy) else kept).append(pair)
    return corpus.replace(kept), corpus.replace(removed)


def split_corpus(corpus, n_dev=500, n_test=500, seed=0):
    """Randomly carve dev and test sets out of ``corpus``.

    Returns ``(train, dev, test)``; each part keeps the corpus order.
    """
    n = len(corpus)
    if n_dev < 0 or n_test < 0:
        raise SizingError(f"n_dev and n_test must be >= 0, got {n_dev}, {n_test}")
    if n_dev + n_test > n:
        raise SizingError(f"cannot take {n_dev} dev + {n_test} test pairs from a corpus of {n}")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    dev_idx = set(order[:n_dev])
    test_idx = set(order[n_dev : n_dev + n_test])
    train, dev, test = [], [], []
    for i, pair in enumerate(corpus):
        (dev if i in dev_idx else test if i in test_idx else train).append(pair)
    return corpus.replace(train), corpus.replace(dev), corpus.replace(test)


# -- statistics --------------------------------------------------------------


def compute_stats(side):
    """Table-2 style statistics for one side of a corpus.

    Word length is counted in Unicode code points.
    """
    n_sentences = 0
    total = 0
    total_chars = 0
    vocab = set()
    for sentence in side:
        n_sentences += 1
        for tok in sentence:
            total += 1
            total_chars += len(tok)
            vocab.add(tok)
    if n_sentences == 0:
        return CorpusStats()
    return CorpusStats(
        n_sentences=n_sentences,
        n_total_words=total,
        n_unique_words=len(vocab),
        avg_word_len_unique=sum(map(len, vocab)) / len(vocab) if vocab else 0.0,
        avg_word_len_total=total_chars / total if total else 0.0,
        avg_sentence_len=total / n_sentences,
    )


def format_stats(columns):
    """Render ``{column name: CorpusStats}`` as a plain-text table."""
    names = list(columns)
    label_w = max(map(len, STATS_LABELS))
    cells = []
    for name in names:
        st = columns[name]
        cells.append([f"{v:.2f}" if isinstance(v, float) else str(v) for v in st.rows()])
    widths = [max(len(name), *(len(c) for c in col)) for name, col in zip(names, cells)]
    lines = [" " * label_w + " | " + " | ".join(n.rjust(w) for n, w in zip(names, widths))]
    for r, label in enumerate(STATS_LABELS):
        lines.append(label.ljust(label_w) + " | " + " | ".join(col[r].rjust(w) for col, w in zip(cells, widths)))
    return "\n".join(lines) + "\n"


# -- file I/O ----------------------------------------------------------------


def read_lines(path):
    """Read a UTF-8 file as a list of lines without trailing newlines."""
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data.count(b"\n", 0, exc.start) + 1
        raise DataError(f"invalid UTF-8 at byte offset {exc.start}", line=line, path=path) from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [ln.rstrip("\r") for ln in lines]


def write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def read_sentences(path):
    return [tuple(line.split()) for line in read_lines(path)]


def write_sentences(path, sentences):
    write_lines(path, (" ".join(s) for s in sentences))


def read_parallel(source_path, target_path, source_lang="src", target_lang="tgt"):
    src = read_sentences(source_path)
    tgt = read_sentences(target_path)
    if len(src) != len(tgt):
        shorter = target_path if len(tgt) < len(src) else source_path
        raise DataError(
            f"line count mismatch: {len(src)} source vs {len(tgt)} target lines",
            line=min(len(src), len(tgt)) + 1,
            path=shorter,
        )
    return ParallelCorpus.from_sentences(src, tgt, source_lang, target_lang)


def write_parallel(corpus, source_path, target_path):
    write_sentences(source_path, corpus.sources)
    write_sentences(target_path, corpus.targets)


# -- estimators --------------------------------------------------------------


class TextNormalizer(TransformerMixin, BaseEstimator):
    """Stateless transformer applying :func:`normalize_text` to raw lines."""

    def __init__(self, script_class="latin"):
        self.script_class = script_class

    def fit(self, X, y=None):
        _check_script_class(self.script_class)
        return self

    def transform(self, X):
        return [normalize_text(x, self.script_class) for x in X]


class Tokenizer(TransformerMixin, BaseEstimator):
    def __init__(self, script_class="latin", normalize=True):
        self.script_class = script_class
        self.normalize = normalize

    def fit(self, X, y=None):
        _check_script_class(self.script_class)
        return self

    def transform(self, X):
        out = []
        for x in X:
            if self.normalize:
                x = normalize_text(x, self.script_class)
            out.append(tokenize(x, self.script_class))
        return out


class PairFilter(BaseEstimator):
    """Length and ratio filter with an sklearn-style interface.

    ``transform`` returns the kept corpus; ``removed_`` holds the rest from
    the last call.
    """

    def __init__(self, max_words=80, max_ratio=9):
        self.max_words = max_words
        self.max_ratio = max_ratio

    def fit(self, corpus=None, y=None):
        self.policy_ = FilterPolicy(self.max_words, self.max_ratio)
        return self

    def transform(self, corpus):
        policy = FilterPolicy(self.max_words, self.max_ratio)
        kept, self.removed_ = filter_pairs(corpus, policy)
        return kept

    def fit_transform(self, corpus, y=None):
        return self.fit(corpus).transform(corpus)


__all__ = [
    "CorpusStats",
    "FilterPolicy",
    "PairFilter",
    "ParallelCorpus",
    "SentencePair",
    "TextNormalizer",
    "Tokenizer",
    "compute_stats",
    "filter_pairs",
    "format_stats",
    "normalize_text",
    "read_parallel",
    "split_corpus",
    "tokenize",
    "write_parallel",
]

