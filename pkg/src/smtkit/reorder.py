"""Rule-based pre-ordering of bracketed constituency trees.

Trees use the usual one-line bracketed notation, ``(S (NP Ram) (VP (V ate)
(NP mango)))``: a node is either ``(LABEL token)`` or ``(LABEL child ...)``.
Rules rewrite the child order of a node whose label and child labels match
exactly, e.g. ``VP: V NP -> 2 1``.
"""

from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DataError, ParseError
from .validation import check_is_fitted


@dataclass(frozen=True)
class ParseNode:
    label: str
    children: tuple = ()
    token: Optional[str] = None

    def __post_init__(self):
        if not self.label:
            raise ValueError("node label must be nonempty")
        if (self.token is None) == (not self.children):
            raise ValueError("a node has either children or a token, not both or neither")
        object.__setattr__(self, "children", tuple(self.children))

    @property
    def is_leaf(self):
        return self.token is not None

    def __str__(self):
        return to_bracketed(self)


@dataclass(frozen=True)
class ReorderRule:
    parent_label: str
    child_pattern: tuple
    permutation: tuple

    def __post_init__(self):
        object.__setattr__(self, "child_pattern", tuple(self.child_pattern))
        object.__setattr__(self, "permutation", tuple(self.permutation))
        n = len(self.child_pattern)
        if n == 0:
            raise ValueError("rule child pattern is empty")
        if sorted(self.permutation) != list(range(1, n + 1)):
            raise ValueError(f"permutation {self.permutation} is not a bijection on 1..{n}")

    def matches(self, node):
        return (
            not node.is_leaf
            and node.label == self.parent_label
            and tuple(c.label for c in node.children) == self.child_pattern
        )

    def __str__(self):
        return f"{self.parent_label}: {' '.join(self.child_pattern)} -> {' '.join(map(str, self.permutation))}"


class RuleSet(tuple):
    """Ordered rules; earlier rules take priority."""

    def __new__(cls, rules=()):
        return super().__new__(cls, tuple(rules))

    @classmethod
    def from_text(cls, text):
        return cls(parse_rules(text))

    @classmethod
    def from_file(cls, path):
        if hasattr(path, "read_text"):
            return cls.from_text(path.read_text(encoding="utf-8"))
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    @classmethod
    def demo(cls):
        return cls.from_file(resources.files("smtkit").joinpath("data", "demo.rules"))

    def __repr__(self):
        return f"RuleSet({list(self)!r})"


# -- tree parsing and printing ---------------------------------------------


def _tokens(text):
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            yield ch, i
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            yield text[i:j], i
            i = j
    yield None, n


def parse_bracketed(text):
    """Parse one bracketed tree; errors carry the character offset."""
    toks = _tokens(text)
    tok, off = next(toks)

    def node(tok, off):
        # tok is "(" here
        label, loff = next(toks)
        if label is None:
            raise ParseError("unexpected end of input, expected a label", loff)
        if label in "()":
            raise ParseError("node without a label", loff)
        children = []
        leaf = None
        while True:
            t, o = next(toks)
            if t is None:
                raise ParseError("unbalanced brackets: unexpected end of input", o)
            if t == ")":
                break
            if t == "(":
                if leaf is not None:
                    raise ParseError("node mixes a token with child nodes", o)
                children.append(node(t, o))
            else:
                if leaf is not None or children:
                    raise ParseError(f"unexpected token {t!r}; a leaf node holds exactly one token", o)
                leaf = t
        if leaf is None and not children:
            raise ParseError("empty node", off)
        if leaf is not None:
            return ParseNode(label, token=leaf)
        return ParseNode(label, tuple(children))

    if tok != "(":
        if tok is None:
            raise ParseError("empty input", off)
        raise ParseError(f"expected '(' but found {tok!r}", off)
    tree = node(tok, off)
    rest, roff = next(toks)
    if rest is not None:
        raise ParseError(f"trailing input {rest!r} after tree", roff)
    return tree


def to_bracketed(tree):
    """Canonical single-line form: one space between siblings."""
    if tree.is_leaf:
        return f"({tree.label} {tree.token})"
    return f"({tree.label} " + " ".join(to_bracketed(c) for c in tree.children) + ")"


def linearize(tree):
    """Left-to-right leaf tokens."""
    out = []
    stack = [tree]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            out.append(node.token)
        else:
            stack.extend(reversed(node.children))
    return tuple(out)


# -- rules -----------------------------------------------------------------


def parse_rule(line, lineno=None):
    """Parse ``PARENT: L1 L2 ... -> i j ...``."""
    head, sep, rest = line.partition(":")
    if not sep or not head.strip():
        raise ParseError(f"rule {line!r} lacks 'PARENT:'", line=lineno)
    lhs, arrow, rhs = rest.partition("->")
    if not arrow:
        raise ParseError(f"rule {line!r} lacks '->'", line=lineno)
    pattern = lhs.split()
    try:
        perm = tuple(int(x) for x in rhs.split())
    except ValueError:
        raise ParseError(f"rule {line!r}: permutation must be integers", line=lineno) from None
    if len(perm) != len(pattern):
        raise ParseError(f"rule {line!r}: {len(pattern)} labels but {len(perm)} indices", line=lineno)
    try:
        return ReorderRule(head.strip(), tuple(pattern), perm)
    except ValueError as exc:
        raise ParseError(f"rule {line!r}: {exc}", line=lineno) from None


def parse_rules(text):
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rules.append(parse_rule(line, lineno))
    return rules


def _first_match(node, rules):
    for rule in rules:
        if rule.matches(node):
            return rule
    return None


def apply_rules(tree, rules, trace=None):
    """Rewrite ``tree`` bottom-up, firing at most one rule per node.

    If ``trace`` is a list, ``(rule, node label)`` is appended for every
    rule that fires, in firing order.
    """
    if tree.is_leaf:
        return tree
    children = tuple(apply_rules(c, rules, trace) for c in tree.children)
    node = ParseNode(tree.label, children)
    rule = _first_match(node, rules)
    if rule is None:
        return node
    if trace is not None:
        trace.append(rule)
    return ParseNode(node.label, tuple(children[i - 1] for i in rule.permutation))


def reorder_sentence(text, rules):
    return linearize(apply_rules(parse_bracketed(text), rules))


def reorder_diff(original, reordered):
    """Describe how tokens moved: list of ``(token, old_index, new_index)``.

    Only tokens whose position changed are listed. Repeated tokens are
    paired up in order of occurrence.
    """
    positions = {}
    for i, tok in enumerate(original):
        positions.setdefault(tok, []).append(i)
    moved = []
    for j, tok in enumerate(reordered):
        if not positions.get(tok):
            raise DataError(f"token {tok!r} not present in the original sentence")
        i = positions[tok].pop(0)
        if i != j:
            moved.append((tok, i, j))
    return moved


class Reorderer(TransformerMixin, BaseEstimator):
    """Transform bracketed trees (strings) into reordered token tuples.

    ``rules`` may be a :class:`RuleSet`, a path to a rule file, or ``"demo"``.
    After ``transform``, ``fired_`` counts how often each rule fired.
    """

    def __init__(self, rules="demo"):
        self.rules = rules

    def fit(self, X=None, y=None):
        if isinstance(self.rules, RuleSet):
            self.rules_ = self.rules
        elif self.rules == "demo":
            self.rules_ = RuleSet.demo()
        elif isinstance(self.rules, str):
            self.rules_ = RuleSet.from_file(self.rules)
        else:
            self.rules_ = RuleSet(self.rules)
        self.fired_ = Counter()
        return self

    def transform(self, X):
        check_is_fitted(self, "rules_")
        out = []
        for text in X:
            trace = []
            out.append(linearize(apply_rules(parse_bracketed(text), self.rules_, trace)))
            self.fired_.update(str(r) for r in trace)
        return out
