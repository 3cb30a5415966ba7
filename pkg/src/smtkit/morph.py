"""Suffix separation with a continuation marker, rejoining, and rule stemming."""

from collections import Counter
from importlib import resources
from typing import NamedTuple, Optional

from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DataError, MarkerCollisionError
from .validation import check_indices, check_is_fitted, check_sentence

DEFAULT_MARKER = "@@"


def read_table_file(path):
    """Entries of a one-per-line table file; ``#`` lines and blanks skipped."""
    if hasattr(path, "read_text"):
        text = path.read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        if any(ch.isspace() for ch in entry):
            raise DataError(f"table entry {entry!r} contains whitespace", line=lineno, path=str(path))
        entries.append(entry)
    return entries


def shipped_table(name):
    """Path-like handle for a table file bundled with the package."""
    return resources.files("smtkit").joinpath("data", name)


def _by_length(entries):
    return tuple(sorted(set(entries), key=lambda s: (-len(s), s)))


class SuffixTable:
    """Suffix inventory kept longest-first so the first hit is the longest match."""

    def __init__(self, suffixes=(), marker=DEFAULT_MARKER):
        if not marker:
            raise ValueError("marker must be nonempty")
        suffixes = list(suffixes)
        for s in suffixes:
            if not isinstance(s, str) or not s:
                raise ValueError(f"suffixes must be nonempty strings, got {s!r}")
            if marker in s:
                raise ValueError(f"marker {marker!r} occurs inside suffix {s!r}")
        self.suffixes = _by_length(suffixes)
        self.marker = marker

    @classmethod
    def from_file(cls, path, marker=DEFAULT_MARKER):
        return cls(read_table_file(path), marker)

    def __len__(self):
        return len(self.suffixes)

    def __iter__(self):
        return iter(self.suffixes)

    def __repr__(self):
        return f"SuffixTable({list(self.suffixes)!r}, marker={self.marker!r})"

    def __eq__(self, other):
        return isinstance(other, SuffixTable) and (self.suffixes, self.marker) == (other.suffixes, other.marker)

    def __hash__(self):
        return hash((self.suffixes, self.marker))


class SplitResult(NamedTuple):
    stem: str
    suffix: Optional[str] = None

    @property
    def is_split(self):
        return self.suffix is not None


def suffix_split(word, table, min_stem_len=1):
    """Separate the longest matching table suffix from ``word``.

    The suffix must be strictly shorter than the word, and at most one
    suffix is removed. ``min_stem_len`` can raise the minimum number of
    characters left behind (default 1, the bare "word longer than suffix"
    guard).

    >>> suffix_split("mahinyaaMnii", SuffixTable(["aaMnii"]))
    SplitResult(stem='mahiny@@', suffix='aaMnii')
    """
    if not word:
        raise ValueError("cannot split an empty word")
    marker = table.marker
    if marker in word:
        raise MarkerCollisionError(word, marker)
    for suffix in table.suffixes:
        if word.endswith(suffix):
            # only the longest matching suffix is considered; if it leaves
            # too short a stem the word stays whole
            if len(word) - len(suffix) >= max(min_stem_len, 1):
                return SplitResult(word[: len(word) - len(suffix)] + marker, suffix)
            break
    return SplitResult(word, None)


def split_sentence(sentence, table, protected=None, min_stem_len=1):
    sentence = check_sentence(sentence)
    protected = check_indices(protected, len(sentence), "protected")
    out = []
    for i, tok in enumerate(sentence):
        if i in protected:
            out.append(tok)
            continue
        try:
            res = suffix_split(tok, table, min_stem_len)
        except MarkerCollisionError as exc:
            raise MarkerCollisionError(exc.word, exc.marker, position=i) from None
        out.append(res.stem)
        if res.suffix is not None:
            out.append(res.suffix)
    return tuple(out)


def rejoin(sentence, marker=DEFAULT_MARKER):
    """Glue every marker-final token onto its successor.

    Chains collapse left to right; a marker on the last token is dropped.

    >>> rejoin(["a@@", "b@@", "c"])
    ('abc',)
    """
    if not marker:
        raise ValueError("marker must be nonempty")
    out = []
    pending = None
    for tok in sentence:
        if pending is not None:
            tok = pending + tok
            pending = None
        if tok.endswith(marker):
            pending = tok[: -len(marker)]
        else:
            out.append(tok)
    if pending is not None:
        if pending:
            out.append(pending)
    return tuple(out)


class StemRuleTable:
    def __init__(self, strip_suffixes=(), min_stem_len=2):
        for s in strip_suffixes:
            if not isinstance(s, str) or not s:
                raise ValueError(f"stem rules must be nonempty strings, got {s!r}")
        if min_stem_len < 1:
            raise ValueError("min_stem_len must be >= 1")
        self.strip_suffixes = _by_length(strip_suffixes)
        self.min_stem_len = min_stem_len

    @classmethod
    def from_file(cls, path, min_stem_len=2):
        return cls(read_table_file(path), min_stem_len)

    @classmethod
    def shipped(cls, language, min_stem_len=2):
        """Bundled rule tables: ``"english"`` or ``"hindi"``."""
        return cls.from_file(shipped_table(f"stem_{language}.txt"), min_stem_len)

    def __repr__(self):
        return f"StemRuleTable({list(self.strip_suffixes)!r}, min_stem_len={self.min_stem_len})"


def stem(word, rules):
    """Strip the longest rule suffix that leaves ``min_stem_len`` characters."""
    for suffix in rules.strip_suffixes:
        if word.endswith(suffix) and len(word) - len(suffix) >= rules.min_stem_len:
            return word[: len(word) - len(suffix)]
    return word


def stem_sentence(sentence, rules):
    return tuple(stem(tok, rules) for tok in sentence)


def split_diagnostics(sentences, table, min_stem_len=1):
    """Counts that help spot over-eager splitting.

    Returns a dict with the number of tokens seen and split, the per-suffix
    split counts, and the vocabulary size before and after splitting.
    """
    per_suffix = Counter()
    n_tokens = n_split = 0
    before, after = set(), set()
    for sentence in sentences:
        for tok in sentence:
            n_tokens += 1
            before.add(tok)
            res = suffix_split(tok, table, min_stem_len)
            after.add(res.stem)
            if res.suffix is not None:
                n_split += 1
                per_suffix[res.suffix] += 1
                after.add(res.suffix)
    return {
        "tokens": n_tokens,
        "split": n_split,
        "per_suffix": dict(sorted(per_suffix.items(), key=lambda kv: (-kv[1], kv[0]))),
        "vocab_before": len(before),
        "vocab_after": len(after),
    }


class SuffixSplitter(TransformerMixin, BaseEstimator):
    """Transformer wrapper around :func:`split_sentence`.

    ``inverse_transform`` rejoins, so ``inverse_transform(transform(X)) == X``
    for marker-free input.
    """

    def __init__(self, suffixes=(), marker=DEFAULT_MARKER, min_stem_len=1):
        self.suffixes = suffixes
        self.marker = marker
        self.min_stem_len = min_stem_len

    def _table(self):
        if isinstance(self.suffixes, SuffixTable):
            return SuffixTable(self.suffixes.suffixes, self.marker)
        if isinstance(self.suffixes, str):
            return SuffixTable.from_file(self.suffixes, self.marker)
        return SuffixTable(self.suffixes, self.marker)

    def fit(self, X, y=None):
        self.table_ = self._table()
        self.diagnostics_ = split_diagnostics([check_sentence(x) for x in X], self.table_, self.min_stem_len)
        return self

    def transform(self, X):
        check_is_fitted(self, "table_")
        return [split_sentence(x, self.table_, min_stem_len=self.min_stem_len) for x in X]

    def inverse_transform(self, X):
        return [rejoin(x, self.marker) for x in X]


class Stemmer(TransformerMixin, BaseEstimator):
    def __init__(self, rules="english", min_stem_len=2):
        self.rules = rules
        self.min_stem_len = min_stem_len

    def fit(self, X=None, y=None):
        if isinstance(self.rules, StemRuleTable):
            self.rules_ = StemRuleTable(self.rules.strip_suffixes, self.min_stem_len)
        elif self.rules in ("english", "hindi"):
            self.rules_ = StemRuleTable.shipped(self.rules, self.min_stem_len)
        elif isinstance(self.rules, str):
            self.rules_ = StemRuleTable.from_file(self.rules, self.min_stem_len)
        else:
            self.rules_ = StemRuleTable(self.rules, self.min_stem_len)
        return self

    def transform(self, X):
        check_is_fitted(self, "rules_")
        return [stem_sentence(check_sentence(x), self.rules_) for x in X]
