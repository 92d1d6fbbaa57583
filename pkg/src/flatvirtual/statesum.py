"""The flat-virtual Jones polynomial as a state sum over classical smoothings.

For a diagram ``D`` with classical crossings ``C`` and writhe ``w``::

    X(D) = (-a)^(-3w) * sum_s a^(alpha - beta) * (-a^2 - a^-2)^gamma_even * b^gamma_odd

where ``s`` ranges over all 0/1 assignments on ``C``, ``alpha``/``beta`` count
the 0- and 1-smoothings, and ``gamma_even``/``gamma_odd`` count the loops of
the smoothed diagram meeting an even/odd number of distinct flat crossings.

Smoothing convention: 0 is the Kauffman A-smoothing.  At a positive crossing
it joins over-in to under-out and under-in to over-out (the oriented
smoothing); at a negative crossing it joins the two incoming ends and the two
outgoing ends.  1 is the other smoothing.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Mapping
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .diagram import UNKNOT, Classical, Diagram, Role, writhe
from .poly import Poly2

__all__ = [
    "DEFAULT_CAP",
    "StateMismatchError",
    "StateCapExceeded",
    "Loop",
    "LoopSet",
    "GammaCounts",
    "StateRow",
    "smooth",
    "gamma",
    "flat_virtual_jones",
    "state_table",
    "loop_circle",
    "prefactor",
]

DEFAULT_CAP = 24
# below this many classical crossings the plain-Python path is faster
_VECTOR_THRESHOLD = 6
_CHUNK = 1 << 13


class StateMismatchError(ValueError):
    pass


class StateCapExceeded(ValueError):
    def __init__(self, n: int, cap: int):
        super().__init__(f"{n} classical crossings exceeds the state-sum cap of {cap} (2^{n} states)")
        self.n = n
        self.cap = cap


@dataclass(frozen=True)
class Loop:
    """One circle of a smoothing: the diagram edges it runs along and the flat
    crossings it meets (each at most once)."""

    edges: frozenset[tuple[int, int]]
    flats: frozenset[int]


@dataclass(frozen=True)
class LoopSet:
    loops: tuple[Loop, ...]

    def __len__(self) -> int:
        return len(self.loops)


@dataclass(frozen=True)
class GammaCounts:
    gamma_even: int
    gamma_odd: int
    alpha: int
    beta: int


@dataclass(frozen=True)
class StateRow:
    state: dict[int, int]
    counts: GammaCounts
    contribution: Poly2


def loop_circle() -> Poly2:
    """The value ``-a^2 - a^-2`` of a loop meeting an even number of flats."""
    return Poly2({(2, 0): -1, (-2, 0): -1})


def prefactor(w: int) -> Poly2:
    """``(-a)^(-3w)``."""
    return Poly2.monomial(-3 * w, 0, -1 if w % 2 else 1)


@lru_cache(maxsize=256)
def _circle_power(n: int) -> Poly2:
    return loop_circle() ** n


# ---------------------------------------------------------------------------
# half-edge skeleton


@dataclass
class _Skeleton:
    """Arcs between consecutive classical visits, with the end pairings of
    both smoothings at every classical crossing.

    Arc ``k`` has half-edges ``2k`` (tail, leaving a classical visit) and
    ``2k + 1`` (head, entering the next one).  Closed arcs belong to
    components without classical visits.
    """

    crossing_ids: list[int]
    signs: list[int]
    arc_edges: list[list[tuple[int, int]]]
    arc_flats: list[list[int]]
    closed: list[bool]
    pairs: list[tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]]]
    flat_arcs: dict[int, tuple[int, int]]

    @property
    def n_arcs(self) -> int:
        return len(self.arc_edges)


def _skeleton(d: Diagram) -> _Skeleton:
    arc_edges: list[list[tuple[int, int]]] = []
    arc_flats: list[list[int]] = []
    closed: list[bool] = []
    in_arc: dict[tuple[int, int], int] = {}
    out_arc: dict[tuple[int, int], int] = {}
    flat_arcs: dict[int, list[int]] = {}

    def is_classical(v) -> bool:
        return isinstance(d.crossings.get(v.crossing), Classical)

    for ci, comp in enumerate(d.components):
        if comp is UNKNOT:
            arc_edges.append([(ci, 0)])
            arc_flats.append([])
            closed.append(True)
            continue
        n = len(comp)
        cls_pos = [i for i, v in enumerate(comp) if is_classical(v)]
        if not cls_pos:
            k = len(arc_edges)
            arc_edges.append([(ci, i) for i in range(n)])
            arc_flats.append([v.crossing for v in comp])
            closed.append(True)
            for v in comp:
                flat_arcs.setdefault(v.crossing, []).append(k)
            continue
        m = len(cls_pos)
        for j, p in enumerate(cls_pos):
            q = cls_pos[(j + 1) % m]
            span = (q - p) % n or n
            k = len(arc_edges)
            arc_edges.append([(ci, (p + t) % n) for t in range(span)])
            inner = [comp[(p + t) % n].crossing for t in range(1, span)]
            arc_flats.append(inner)
            closed.append(False)
            for f in inner:
                flat_arcs.setdefault(f, []).append(k)
            out_arc[(ci, p)] = k
            in_arc[(ci, q)] = k

    crossing_ids = d.classical_ids
    signs = []
    pairs = []
    pos = d.positions()
    for cid in crossing_ids:
        sign = d.crossings[cid].sign
        signs.append(sign)
        over = under = None
        for ci, pi in pos.get(cid, []):
            if d.components[ci][pi].role is Role.OVER:
                over = (ci, pi)
            else:
                under = (ci, pi)
        oi, oo = 2 * in_arc[over] + 1, 2 * out_arc[over]
        ui, uo = 2 * in_arc[under] + 1, 2 * out_arc[under]
        oriented = ((oi, uo), (ui, oo))
        unoriented = ((oi, ui), (oo, uo))
        pairs.append((oriented, unoriented) if sign > 0 else (unoriented, oriented))

    fa = {}
    for f in d.flat_ids:
        arcs = flat_arcs.get(f, [])
        if len(arcs) != 2:
            raise ValueError(f"flat crossing {f} is visited {len(arcs)} times")
        fa[f] = (arcs[0], arcs[1])
    return _Skeleton(crossing_ids, signs, arc_edges, arc_flats, closed, pairs, fa)


# ---------------------------------------------------------------------------
# single-state evaluation


def _find(parent: list[int], x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _arc_components(sk: _Skeleton, bits) -> list[int]:
    parent = list(range(sk.n_arcs))
    for (p0, p1), b in zip(sk.pairs, bits):
        for h1, h2 in p1 if b else p0:
            r1, r2 = _find(parent, h1 >> 1), _find(parent, h2 >> 1)
            if r1 != r2:
                parent[r1] = r2
    return [_find(parent, k) for k in range(sk.n_arcs)]


def _state_bits(sk: _Skeleton, s: Mapping[int, int]) -> list[int]:
    if set(s) != set(sk.crossing_ids):
        raise StateMismatchError("state/crossing-set mismatch")
    bits = []
    for cid in sk.crossing_ids:
        b = s[cid]
        if b not in (0, 1):
            raise StateMismatchError(f"state value {b!r} at crossing {cid} is not 0 or 1")
        bits.append(b)
    return bits


def _loops_from_roots(sk: _Skeleton, roots: list[int]) -> LoopSet:
    groups: dict[int, list[int]] = {}
    for k, r in enumerate(roots):
        groups.setdefault(r, []).append(k)
    loops = []
    for r in sorted(groups):
        arcs = groups[r]
        edges = frozenset(e for k in arcs for e in sk.arc_edges[k])
        flats = frozenset(f for k in arcs for f in sk.arc_flats[k])
        loops.append(Loop(edges, flats))
    loops.sort(key=lambda lp: min(lp.edges))
    return LoopSet(tuple(loops))


def smooth(d: Diagram, s: Mapping[int, int]) -> LoopSet:
    """Resolve every classical crossing of ``d`` according to ``s``."""
    sk = _skeleton(d)
    bits = _state_bits(sk, s)
    return _loops_from_roots(sk, _arc_components(sk, bits))


def gamma(ls: LoopSet, state: Mapping[int, int] | None = None) -> GammaCounts:
    """Even/odd loop counts of a smoothing; ``alpha``/``beta`` from ``state`` if given."""
    odd = sum(1 for lp in ls.loops if len(lp.flats) % 2)
    alpha = beta = 0
    if state is not None:
        beta = sum(1 for v in state.values() if v)
        alpha = len(state) - beta
    return GammaCounts(len(ls.loops) - odd, odd, alpha, beta)


def _contribution(k: int, ge: int, go: int) -> Poly2:
    return _circle_power(ge).shift(k, go)


# ---------------------------------------------------------------------------
# enumeration engines


def _python_histogram(sk: _Skeleton, start: int, stop: int) -> Counter:
    n = len(sk.crossing_ids)
    hist: Counter = Counter()
    flat_arcs = list(sk.flat_arcs.values())
    for idx in range(start, stop):
        bits = [(idx >> (n - 1 - i)) & 1 for i in range(n)]
        roots = _arc_components(sk, bits)
        loops = set(roots)
        parity = dict.fromkeys(loops, 0)
        for a1, a2 in flat_arcs:
            r1, r2 = roots[a1], roots[a2]
            parity[r1] ^= 1
            if r2 != r1:
                parity[r2] ^= 1
        odd = sum(parity.values())
        beta = sum(bits)
        hist[(n - 2 * beta, len(loops) - odd, odd)] += 1
    return hist


def _numpy_histogram(sk: _Skeleton, start: int, stop: int) -> Counter:
    n = len(sk.crossing_ids)
    H = 2 * sk.n_arcs
    idx = np.arange(start, stop, dtype=np.int64)
    S = idx.size
    tau = np.empty((S, H), dtype=np.int32)
    for k, c in enumerate(sk.closed):
        if c:
            tau[:, 2 * k] = 2 * k + 1
            tau[:, 2 * k + 1] = 2 * k
    beta = np.zeros(S, dtype=np.int64)
    for i, (p0, p1) in enumerate(sk.pairs):
        bit = ((idx >> (n - 1 - i)) & 1).astype(bool)
        beta += bit
        # both smoothings pair the same four ends
        ends = sorted({h for pr in p0 for h in pr})
        partner0 = {}
        partner1 = {}
        for x, y in p0:
            partner0[x], partner0[y] = y, x
        for x, y in p1:
            partner1[x], partner1[y] = y, x
        for h in ends:
            tau[:, h] = np.where(bit, partner1[h], partner0[h])

    sigma = np.arange(H) ^ 1
    rho = tau[:, sigma]
    label = np.broadcast_to(np.arange(H, dtype=np.int32), (S, H)).copy()
    # pointer doubling on flat indices; a directed cycle has at most H/2 half-edges
    P = rho + (np.arange(S, dtype=np.int64) * H)[:, None]
    for _ in range(max(1, math.ceil(math.log2(max(2, H // 2))))):
        label = np.minimum(label, label.ravel()[P])
        P = P.ravel()[P]
    label = np.minimum(label, label[:, sigma])
    is_root = label == np.arange(H, dtype=np.int32)
    n_loops = is_root.sum(axis=1)

    parity = np.zeros((S, H), dtype=np.uint8)
    rows = np.arange(S)
    for a1, a2 in sk.flat_arcs.values():
        la = label[:, 2 * a1]
        lb = label[:, 2 * a2]
        parity[rows, la] ^= 1
        parity[rows, lb] ^= (la != lb).astype(np.uint8)
    odd = (parity * is_root).sum(axis=1, dtype=np.int64)

    base = H + 1
    keys = (beta * base + (n_loops - odd)) * base + odd
    uniq, counts = np.unique(keys, return_counts=True)
    hist: Counter = Counter()
    for key, m in zip(uniq.tolist(), counts.tolist()):
        rest, go = divmod(key, base)
        b, ge = divmod(rest, base)
        hist[(n - 2 * b, ge, go)] = m
    return hist


def _chunk_task(args) -> Counter:
    sk, start, stop, engine = args
    if engine == "numpy":
        return _numpy_histogram(sk, start, stop)
    return _python_histogram(sk, start, stop)


def state_histogram(d: Diagram, workers: int = 1, engine: str = "auto", cap: int | None = None) -> Counter:
    """Multiplicities of ``(alpha - beta, gamma_even, gamma_odd)`` over all states."""
    sk = _skeleton(d)
    n = len(sk.crossing_ids)
    if cap is not None and n > cap:
        raise StateCapExceeded(n, cap)
    if engine == "auto":
        engine = "numpy" if n >= _VECTOR_THRESHOLD else "python"
    total = 1 << n
    chunks = [(sk, lo, min(lo + _CHUNK, total), engine) for lo in range(0, total, _CHUNK)]
    hist: Counter = Counter()
    if workers <= 1 or len(chunks) == 1:
        for ch in chunks:
            hist.update(_chunk_task(ch))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_chunk_task, chunks):
                hist.update(part)
    return hist


def flat_virtual_jones(d: Diagram, workers: int = 1, engine: str = "auto", cap: int | None = None) -> Poly2:
    """Exact flat-virtual Jones polynomial of ``d``."""
    hist = state_histogram(d, workers=workers, engine=engine, cap=cap)
    w = writhe(d)
    scale = -1 if w % 2 else 1
    acc: dict[tuple[int, int], int] = {}
    for (k, ge, go), m in sorted(hist.items()):
        for (ea, _), c in _circle_power(ge).items():
            key = (ea + k - 3 * w, go)
            acc[key] = acc.get(key, 0) + scale * c * m
    return Poly2(acc)


def state_table(d: Diagram, cap: int = DEFAULT_CAP) -> list[StateRow]:
    """Every state in lexicographic order of sorted crossing ids, with its
    loop counts and bracket contribution (prefactor not applied)."""
    sk = _skeleton(d)
    n = len(sk.crossing_ids)
    if n > cap:
        raise StateCapExceeded(n, cap)
    rows = []
    for idx in range(1 << n):
        bits = [(idx >> (n - 1 - i)) & 1 for i in range(n)]
        state = dict(zip(sk.crossing_ids, bits))
        counts = gamma(_loops_from_roots(sk, _arc_components(sk, bits)), state)
        rows.append(StateRow(state, counts, _contribution(counts.alpha - counts.beta, counts.gamma_even, counts.gamma_odd)))
    return rows
