"""Input validation helpers used by the estimators.

These play the role ``check_array`` plays for numeric estimators: they
coerce loosely typed inputs (strings, lists, tuples) into tuples of tokens
and reject anything that would silently corrupt a later stage.
"""

from collections.abc import Iterable, Sequence

from sklearn.utils.validation import check_is_fitted  # noqa: F401  re-exported


def check_sentence(sentence, name="sentence"):
    """Return ``sentence`` as a tuple of tokens.

    A plain string is split on whitespace. Tokens must be nonempty strings
    without whitespace.
    """
    if isinstance(sentence, str):
        return tuple(sentence.split())
    if not isinstance(sentence, Iterable):
        raise TypeError(f"{name} must be a string or a sequence of tokens, got {type(sentence).__name__}")
    tokens = tuple(sentence)
    for i, tok in enumerate(tokens):
        if not isinstance(tok, str):
            raise TypeError(f"{name}[{i}] is {type(tok).__name__}, expected str")
        if not tok or any(ch.isspace() for ch in tok):
            raise ValueError(f"{name}[{i}]={tok!r} is empty or contains whitespace")
    return tokens


def check_sentences(X, name="X"):
    """Validate a collection of sentences, returning a list of token tuples."""
    if isinstance(X, str):
        raise TypeError(f"{name} must be a sequence of sentences, not a single string")
    return [check_sentence(s, name=f"{name}[{i}]") for i, s in enumerate(X)]


def check_parallel(X, y, name_x="X", name_y="y"):
    """Validate two aligned sentence collections of equal length."""
    xs = check_sentences(X, name_x)
    ys = check_sentences(y, name_y)
    if len(xs) != len(ys):
        raise ValueError(f"{name_x} has {len(xs)} sentences but {name_y} has {len(ys)}")
    return xs, ys


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return value


def check_indices(indices, length, name="indices"):
    """Validate token positions against a sentence of ``length`` tokens."""
    if indices is None:
        return frozenset()
    out = set()
    for i in indices:
        if isinstance(i, bool) or not isinstance(i, int) or not 0 <= i < length:
            raise IndexError(f"{name} contains {i!r}, outside 0..{length - 1}")
        out.add(i)
    return frozenset(out)


def is_sequence_of_str(obj):
    return isinstance(obj, Sequence) and not isinstance(obj, str) and all(isinstance(t, str) for t in obj)
