"""Automatic MT evaluation: BLEU, PER, TER and CDER.

Error rates are edit counts divided by reference length. Corpus-level
rates are micro-averaged: total edits over total reference words.

TER comes in two flavours. ``greedy`` repeatedly applies the block shift
that most reduces the word edit distance. ``exact`` searches all shift
sequences and is only allowed on short sentences; it serves as an oracle
for the greedy search.

CDER covers the reference left to right with blocks of the hypothesis.
Inside a block it pays the usual substitution, insertion and deletion
costs; starting a new block anywhere in the hypothesis (a long jump) costs
one edit. The hypothesis need not be covered completely, and the first
block may start and the last block end anywhere.
"""

import math
from collections import Counter, deque
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from functools import lru_cache

import numpy as np

from .exceptions import OracleGuardError
from .validation import check_sentence

EXACT_TER_MAX_LEN = 8
MAX_SHIFT_SIZE = 10


def _require_ref(ref):
    if len(ref) == 0:
        raise ValueError("reference must be nonempty")


def levenshtein(hyp, ref):
    """Word-level edit distance with unit costs."""
    prev = list(range(len(ref) + 1))
    for i, h in enumerate(hyp, 1):
        cur = [i]
        for j, r in enumerate(ref, 1):
            cur.append(min(prev[j - 1] + (h != r), prev[j] + 1, cur[j - 1] + 1))
        prev = cur
    return prev[-1]


# -- BLEU ------------------------------------------------------------------


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_stats(hyp, ref, max_n=4):
    """``[c, r, m1, t1, ..., m_n, t_n]`` sufficient statistics for one pair."""
    stats = [len(hyp), len(ref)]
    for n in range(1, max_n + 1):
        h, r = _ngrams(hyp, n), _ngrams(ref, n)
        stats.append(sum(min(c, r[g]) for g, c in h.items()))
        stats.append(max(len(hyp) - n + 1, 0))
    return stats


def bleu_from_stats(stats, max_n=4, smooth=False):
    c, r = stats[0], stats[1]
    if c == 0:
        return 0.0
    log_p = 0.0
    for n in range(max_n):
        matches, total = stats[2 + 2 * n], stats[3 + 2 * n]
        if matches == 0 or total == 0:
            if not smooth:
                return 0.0
            matches = max(matches, 1e-9)
            total = max(total, 1)
        log_p += math.log(matches / total)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return bp * math.exp(log_p / max_n)


def bleu(hyps, refs, max_n=4, smooth=False):
    """Corpus BLEU with clipped n-gram counts and a brevity penalty.

    Without ``smooth`` any order with no matching n-gram gives 0. With it,
    zero match counts are floored at 1e-9.
    """
    hyps, refs = list(hyps), list(refs)
    if len(hyps) != len(refs):
        raise ValueError(f"{len(hyps)} hypotheses but {len(refs)} references")
    if not hyps:
        raise ValueError("BLEU needs at least one sentence pair")
    total = np.zeros(2 + 2 * max_n, dtype=np.int64)
    for h, r in zip(hyps, refs):
        total += bleu_stats(tuple(h), tuple(r), max_n)
    return bleu_from_stats(total.tolist(), max_n, smooth)


# -- PER -------------------------------------------------------------------


def per_edits(hyp, ref):
    overlap = sum((Counter(hyp) & Counter(ref)).values())
    return max(len(hyp), len(ref)) - overlap


def per(hyp, ref):
    """Position-independent error rate."""
    _require_ref(ref)
    return per_edits(hyp, ref) / len(ref)


# -- TER -------------------------------------------------------------------


def _shifts(seq, max_size=None):
    """Yield ``(start, length, dest, shifted)`` for every block move."""
    n = len(seq)
    for i in range(n):
        for j in range(i + 1, min(n, i + (max_size or n)) + 1):
            block = seq[i:j]
            rest = seq[:i] + seq[j:]
            for p in range(len(rest) + 1):
                if p == i:
                    continue
                yield i, j - i, p, rest[:p] + block + rest[p:]


@lru_cache(maxsize=4096)
def shift_arrangements(hyp):
    """Every distinct reordering reachable by block shifts, with the
    minimum number of shifts needed: ``{arrangement: n_shifts}``."""
    dist = {hyp: 0}
    queue = deque([hyp])
    while queue:
        cur = queue.popleft()
        d = dist[cur] + 1
        for *_, nxt in _shifts(cur):
            if nxt not in dist:
                dist[nxt] = d
                queue.append(nxt)
    return dist


def _exact_ter_edits(hyp, ref):
    best = levenshtein(hyp, ref)
    # shifts never change the bag of words, so this bound holds for every arrangement
    floor = per_edits(hyp, ref)
    if best == floor:
        return best
    frontier = [hyp]
    seen = {hyp}
    depth = 0
    while frontier and depth + 1 + floor < best:
        depth += 1
        nxt = []
        for cur in frontier:
            for *_, cand in _shifts(cur):
                if cand in seen:
                    continue
                seen.add(cand)
                best = min(best, depth + levenshtein(cand, ref))
                nxt.append(cand)
        frontier = nxt
    return best


def _greedy_ter_edits(hyp, ref, max_size=MAX_SHIFT_SIZE):
    ref_blocks = {ref[i:j] for i in range(len(ref)) for j in range(i + 1, min(len(ref), i + max_size) + 1)}
    cur = hyp
    cost = levenshtein(cur, ref)
    n_shifts = 0
    while cost > 0:
        best = None
        for i, length, p, cand in _shifts(cur, max_size):
            if cur[i : i + length] not in ref_blocks:
                continue
            d = levenshtein(cand, ref)
            key = (d, i, length, p)
            if best is None or key < best[0]:
                best = (key, cand)
        if best is None or best[0][0] >= cost:
            break
        cost = best[0][0]
        cur = best[1]
        n_shifts += 1
    return n_shifts + cost


def ter_edits(hyp, ref, mode="greedy"):
    """Number of TER edits (shifts plus word edits)."""
    hyp, ref = tuple(hyp), tuple(ref)
    if mode == "greedy":
        return _greedy_ter_edits(hyp, ref)
    if mode == "exact":
        if len(hyp) > EXACT_TER_MAX_LEN or len(ref) > EXACT_TER_MAX_LEN:
            raise OracleGuardError(
                f"exact TER is limited to {EXACT_TER_MAX_LEN} words per side, got {len(hyp)} and {len(ref)}"
            )
        return _exact_ter_edits(hyp, ref)
    raise ValueError(f"mode must be 'greedy' or 'exact', got {mode!r}")


def ter(hyp, ref, mode="greedy"):
    """Translation edit rate."""
    _require_ref(ref)
    return ter_edits(hyp, ref, mode) / len(ref)


# -- CDER ------------------------------------------------------------------


def cder_edits(hyp, ref):
    hyp, ref = tuple(hyp), tuple(ref)
    J = len(hyp)
    row = [0] * (J + 1)
    for r in ref:
        cur = [row[0] + 1]
        for j in range(1, J + 1):
            cur.append(min(row[j - 1] + (hyp[j - 1] != r), row[j] + 1, cur[j - 1] + 1))
        jump = min(cur) + 1
        row = [min(c, jump) for c in cur]
    return min(row)


def cder(hyp, ref):
    """CDER: block-movement edit rate, polynomial time."""
    _require_ref(ref)
    return cder_edits(hyp, ref) / len(ref)


# -- batched cross products ------------------------------------------------


class _Encoder:
    def __init__(self):
        self.ids = {}

    def __call__(self, seq):
        return [self.ids.setdefault(tok, len(self.ids)) for tok in seq]


def _group_by_length(seqs, encode):
    groups = {}
    for idx, s in enumerate(seqs):
        groups.setdefault(len(s), []).append(idx)
    return {n: (np.array(ix), np.array([encode(seqs[i]) for i in ix], dtype=np.int32).reshape(len(ix), n)) for n, ix in groups.items()}


def _dtype_for(n):
    return np.int16 if n < 2**14 else np.int32


def _cross_levenshtein(A, B):
    """Edit distance between every row of ``A`` and every row of ``B``."""
    na, nb = A.shape[1], B.shape[1]
    dt = _dtype_for(na + nb)
    prev = np.broadcast_to(np.arange(nb + 1, dtype=dt), (len(A), len(B), nb + 1)).copy()
    for i in range(na):
        cur = np.empty_like(prev)
        cur[..., 0] = i + 1
        neq = (A[:, i][:, None, None] != B[None, :, :]).astype(dt)
        for j in range(1, nb + 1):
            cur[..., j] = np.minimum(np.minimum(prev[..., j - 1] + neq[..., j - 1], prev[..., j] + 1), cur[..., j - 1] + 1)
        prev = cur
    return prev[..., nb]


def _cross_cder(H, R):
    """CDER edits for every hypothesis row of ``H`` against every row of ``R``."""
    J, I = H.shape[1], R.shape[1]
    dt = _dtype_for(I + J)
    row = np.zeros((len(H), len(R), J + 1), dtype=dt)
    for i in range(I):
        neq = (H[:, None, :] != R[None, :, i, None]).astype(dt)
        cur = np.empty_like(row)
        cur[..., 0] = row[..., 0] + 1
        for j in range(1, J + 1):
            cur[..., j] = np.minimum(np.minimum(row[..., j - 1] + neq[..., j - 1], row[..., j] + 1), cur[..., j - 1] + 1)
        jump = cur.min(axis=-1, keepdims=True) + 1
        row = np.minimum(cur, jump)
    return row.min(axis=-1)


def cder_matrix(hyps, refs):
    """CDER edit counts for all ``len(hyps) x len(refs)`` combinations."""
    hyps, refs = [tuple(h) for h in hyps], [tuple(r) for r in refs]
    enc = _Encoder()
    out = np.zeros((len(hyps), len(refs)), dtype=np.int32)
    hg, rg = _group_by_length(hyps, enc), _group_by_length(refs, enc)
    for _, (hix, H) in hg.items():
        for _, (rix, R) in rg.items():
            out[np.ix_(hix, rix)] = _cross_cder(H, R)
    return out


def exact_ter_matrix(hyps, refs):
    """Exact TER edit counts for all ``len(hyps) x len(refs)`` combinations.

    Each hypothesis is expanded into its shift arrangements once; edit
    distances are computed for the distinct arrangements only.
    """
    hyps, refs = [tuple(h) for h in hyps], [tuple(r) for r in refs]
    for s in (*hyps, *refs):
        if len(s) > EXACT_TER_MAX_LEN:
            raise OracleGuardError(f"exact TER is limited to {EXACT_TER_MAX_LEN} words, got {len(s)}")
    enc = _Encoder()
    arrangements = {}
    per_hyp = []
    for h in hyps:
        dist = shift_arrangements(h)
        ids = np.array([arrangements.setdefault(a, len(arrangements)) for a in dist], dtype=np.int64)
        per_hyp.append((ids, np.array(list(dist.values()), dtype=np.int32)))
    arr_list = list(arrangements)
    lev = np.zeros((len(arr_list), len(refs)), dtype=np.int32)
    ag, rg = _group_by_length(arr_list, enc), _group_by_length(refs, enc)
    for _, (aix, A) in ag.items():
        for _, (rix, R) in rg.items():
            lev[np.ix_(aix, rix)] = _cross_levenshtein(A, R)
    out = np.empty((len(hyps), len(refs)), dtype=np.int32)
    for k, (ids, shifts) in enumerate(per_hyp):
        out[k] = (lev[ids] + shifts[:, None]).min(axis=0)
    return out


# -- reporting -------------------------------------------------------------


def format_score(value):
    """Two decimals, half-up, zero-padded to five characters ("08.52")."""
    q = Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return f"{q:05.2f}" if q >= 0 else f"{q:.2f}"


@dataclass(frozen=True)
class MetricReport:
    bleu: float
    per: float
    ter: float
    cder: float

    @property
    def bleu_pct(self):
        return self.bleu * 100

    @property
    def one_minus_ter(self):
        return (1 - self.ter) * 100

    @property
    def one_minus_per(self):
        return (1 - self.per) * 100

    @property
    def one_minus_cder(self):
        return (1 - self.cder) * 100

    def as_dict(self):
        return {
            "bleu": self.bleu,
            "per": self.per,
            "ter": self.ter,
            "cder": self.cder,
            "bleu_pct": self.bleu_pct,
            "one_minus_ter": self.one_minus_ter,
            "one_minus_per": self.one_minus_per,
            "one_minus_cder": self.one_minus_cder,
        }

    def format_table(self, label=""):
        head = ("", "BLEU", "1-TER", "1-PER", "1-CDER")
        vals = (label, *(format_score(v) for v in (self.bleu_pct, self.one_minus_ter, self.one_minus_per, self.one_minus_cder)))
        widths = [max(len(a), len(b)) for a, b in zip(head, vals)]
        fmt = lambda row: " | ".join(c.rjust(w) for c, w in zip(row, widths))  # noqa: E731
        return fmt(head) + "\n" + fmt(vals) + "\n"

    def format_keyvalue(self):
        return "".join(f"{k}={v!r}\n" for k, v in self.as_dict().items())


def report(hyps, refs, max_n=4, smooth=False, lowercase=False, ter_mode="greedy"):
    """Corpus BLEU plus micro-averaged PER, TER and CDER."""
    hyps = [check_sentence(h, "hypothesis") for h in hyps]
    refs = [check_sentence(r, "reference") for r in refs]
    if len(hyps) != len(refs):
        raise ValueError(f"{len(hyps)} hypotheses but {len(refs)} references")
    if lowercase:
        hyps = [tuple(t.lower() for t in h) for h in hyps]
        refs = [tuple(t.lower() for t in r) for r in refs]
    ref_words = 0
    per_e = ter_e = cder_e = 0
    for h, r in zip(hyps, refs):
        _require_ref(r)
        ref_words += len(r)
        per_e += per_edits(h, r)
        ter_e += ter_edits(h, r, ter_mode)
        cder_e += cder_edits(h, r)
    return MetricReport(
        bleu=bleu(hyps, refs, max_n, smooth),
        per=per_e / ref_words,
        ter=ter_e / ref_words,
        cder=cder_e / ref_words,
    )
