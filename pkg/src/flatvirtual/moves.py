"""Reidemeister-type moves on Gauss codes and an invariance fuzzer.

Every move here is a rewrite of the visit sequences:

* classical R1: insert or delete a classical crossing whose two visits are
  adjacent;
* classical R2 / flat R2: insert or delete two crossings of the same kind
  whose visits form two adjacent pairs (classical: same strand over at both,
  opposite signs);
* R3 (classical, all-flat, or mixed with one classical and two flat
  crossings): three crossings whose six visits form three adjacent pairs,
  one per pair of crossings; the move swaps the order inside every pair.

Which classical triangles admit R3 is read off from three oriented lines in
the plane (see :func:`r3_signatures`).  Detours need no move: virtual
crossings are not part of the code.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations, product

from .diagram import (
    UNKNOT,
    Classical,
    Diagram,
    Flat,
    Role,
    Visit,
    component_count,
    serialize_diagram,
    validate,
    writhe,
)
from .statesum import flat_virtual_jones

__all__ = [
    "MoveKind",
    "Gap",
    "R1Insert",
    "CrossingSet",
    "R2Insert",
    "FlatR2Insert",
    "Triangle",
    "StaleSiteError",
    "RESTRICTED_FORBIDDEN",
    "enumerate_sites",
    "random_site",
    "apply",
    "r3_signatures",
    "random_diagram",
    "FuzzReport",
    "fuzz_invariance",
]


class MoveKind(enum.Enum):
    R1_INSERT = "classical-r1-insert"
    R1_DELETE = "classical-r1-delete"
    R2_INSERT = "classical-r2-insert"
    R2_DELETE = "classical-r2-delete"
    R3 = "classical-r3"
    FLAT_R2_INSERT = "flat-r2-insert"
    FLAT_R2_DELETE = "flat-r2-delete"
    FLAT_R3 = "flat-r3"
    MIXED_R3 = "mixed-r3"


INSERT_KINDS = frozenset({MoveKind.R1_INSERT, MoveKind.R2_INSERT, MoveKind.FLAT_R2_INSERT})
TRIANGLE_KINDS = frozenset({MoveKind.R3, MoveKind.FLAT_R3, MoveKind.MIXED_R3})
# all-flat R3 is the move dropped for restricted links; add MIXED_R3 for the stricter reading
RESTRICTED_FORBIDDEN = frozenset({MoveKind.FLAT_R3})

_ADDED = {MoveKind.R1_INSERT: 1, MoveKind.R2_INSERT: 2, MoveKind.FLAT_R2_INSERT: 2}

Pos = tuple[int, int]


@dataclass(frozen=True, order=True)
class Gap:
    """The arc leaving visit ``index`` of ``component`` (index 0 on an unknot)."""

    component: int
    index: int

    def __str__(self) -> str:
        return f"{self.component}:{self.index}"


@dataclass(frozen=True)
class R1Insert:
    gap: Gap
    sign: int
    over_first: bool

    def __str__(self) -> str:
        return f"gap={self.gap} sign={self.sign:+d} {'over-under' if self.over_first else 'under-over'}"


@dataclass(frozen=True)
class CrossingSet:
    """Deletion site: the crossings removed."""

    crossings: tuple[int, ...]

    def __str__(self) -> str:
        return "crossings=" + ",".join(map(str, self.crossings))


@dataclass(frozen=True)
class R2Insert:
    over_gap: Gap
    under_gap: Gap
    sign: int
    parallel: bool
    # only meaningful when both gaps coincide
    over_first: bool = True

    def __str__(self) -> str:
        return (
            f"over={self.over_gap} under={self.under_gap} sign={self.sign:+d} "
            f"{'parallel' if self.parallel else 'antiparallel'}{'' if self.over_first else ' under-first'}"
        )


@dataclass(frozen=True)
class FlatR2Insert:
    gap1: Gap
    gap2: Gap
    parallel: bool

    def __str__(self) -> str:
        return f"gaps={self.gap1},{self.gap2} {'parallel' if self.parallel else 'antiparallel'}"


@dataclass(frozen=True)
class Triangle:
    """Three adjacent visit pairs ``((c, i), (c, i+1))`` forming a triangle."""

    pairs: tuple[tuple[Pos, Pos], ...]

    def __str__(self) -> str:
        return "pairs=" + " ".join(f"{a[0]}:{a[1]}-{b[1]}" for a, b in self.pairs)


class StaleSiteError(ValueError):
    pass


# ---------------------------------------------------------------------------
# R3 table


@lru_cache(maxsize=None)
def r3_signatures() -> frozenset[tuple]:
    """Signatures of classical R3 triangles realisable by three lines.

    A signature is ``(first_T, first_M, first_B, sign_TM, sign_TB, sign_MB)``
    where ``first_X`` names the strand met first along strand ``X`` (``T`` is
    over at both its crossings, ``B`` under at both, ``M`` mixed) and
    ``sign_XY`` is the sign of the crossing of ``X`` and ``Y``.
    """
    out = set()
    angles = (0.0, math.pi / 3, 2 * math.pi / 3)
    for offset in (0.3, -0.3):
        offsets = (0.0, 0.0, offset)
        for flips in product((1, -1), repeat=3):
            dirs = [(f * math.cos(t), f * math.sin(t)) for f, t in zip(flips, angles)]
            normals = [(-math.sin(t), math.cos(t)) for t in angles]

            def meet(i, j):
                (a1, b1), (a2, b2) = normals[i], normals[j]
                det = a1 * b2 - a2 * b1
                return ((offsets[i] * b2 - offsets[j] * b1) / det, (a1 * offsets[j] - a2 * offsets[i]) / det)

            points = {frozenset((i, j)): meet(i, j) for i, j in ((0, 1), (0, 2), (1, 2))}

            def param(i, j):
                p = points[frozenset((i, j))]
                return dirs[i][0] * p[0] + dirs[i][1] * p[1]

            def sign(over, under):
                (x1, y1), (x2, y2) = dirs[over], dirs[under]
                return 1 if x1 * y2 - y1 * x2 > 0 else -1

            for t, m, b in permutations(range(3)):
                first_t = "M" if param(t, m) < param(t, b) else "B"
                first_m = "T" if param(m, t) < param(m, b) else "B"
                first_b = "T" if param(b, t) < param(b, m) else "M"
                out.add((first_t, first_m, first_b, sign(t, m), sign(t, b), sign(m, b)))
    return frozenset(out)


# ---------------------------------------------------------------------------
# helpers


def _gaps(d: Diagram) -> list[Gap]:
    out = []
    for ci, comp in enumerate(d.components):
        if comp is UNKNOT:
            out.append(Gap(ci, 0))
        else:
            out.extend(Gap(ci, i) for i in range(len(comp)))
    return out


def _new_ids(d: Diagram, k: int) -> list[int]:
    top = max(d.crossings, default=0)
    return list(range(top + 1, top + 1 + k))


def _insert(d: Diagram, inserts: dict[Gap, list[Visit]], new: dict) -> Diagram:
    comps = []
    for ci, comp in enumerate(d.components):
        if comp is UNKNOT:
            extra = inserts.get(Gap(ci, 0))
            comps.append(tuple(extra) if extra else UNKNOT)
            continue
        seq: list[Visit] = []
        for i, v in enumerate(comp):
            seq.append(v)
            seq.extend(inserts.get(Gap(ci, i), ()))
        comps.append(tuple(seq))
    crossings = dict(d.crossings)
    crossings.update(new)
    return Diagram(tuple(comps), crossings)


def _delete(d: Diagram, ids) -> Diagram:
    ids = set(ids)
    comps = []
    for comp in d.components:
        if comp is UNKNOT:
            comps.append(UNKNOT)
            continue
        kept = tuple(v for v in comp if v.crossing not in ids)
        comps.append(kept if kept else UNKNOT)
    return Diagram(tuple(comps), {k: v for k, v in d.crossings.items() if k not in ids})


def _adjacent_pairs(d: Diagram) -> list[tuple[Pos, Pos]]:
    out = []
    for ci, comp in enumerate(d.components):
        if comp is UNKNOT or len(comp) < 2:
            continue
        n = len(comp)
        for i in range(n):
            j = (i + 1) % n
            if comp[i].crossing != comp[j].crossing:
                out.append(((ci, i), (ci, j)))
    return out


def _visit(d: Diagram, p: Pos) -> Visit:
    return d.components[p[0]][p[1]]


def _is_classical(d: Diagram, cid: int) -> bool:
    return isinstance(d.crossings[cid], Classical)


def _r1_deletions(d: Diagram) -> list[CrossingSet]:
    out = []
    for ci, comp in enumerate(d.components):
        if comp is UNKNOT or len(comp) < 2:
            continue
        n = len(comp)
        seen = set()
        for i in range(n):
            v, w = comp[i], comp[(i + 1) % n]
            if v.crossing == w.crossing and _is_classical(d, v.crossing) and v.crossing not in seen:
                seen.add(v.crossing)
                out.append(CrossingSet((v.crossing,)))
    return out


def _r2_deletions(d: Diagram, flat: bool) -> list[CrossingSet]:
    by_set: dict[frozenset, list[tuple[Pos, Pos]]] = {}
    for p, q in _adjacent_pairs(d):
        x, y = _visit(d, p).crossing, _visit(d, q).crossing
        kinds = (_is_classical(d, x), _is_classical(d, y))
        if kinds != ((False, False) if flat else (True, True)):
            continue
        by_set.setdefault(frozenset((x, y)), []).append((p, q))
    out = []
    for key, pairs in by_set.items():
        ok = False
        for i, (p1, q1) in enumerate(pairs):
            for p2, q2 in pairs[i + 1 :]:
                if {p1, q1} & {p2, q2}:
                    continue
                if flat:
                    ok = True
                else:
                    r1 = {_visit(d, p1).role, _visit(d, q1).role}
                    r2 = {_visit(d, p2).role, _visit(d, q2).role}
                    x, y = sorted(key)
                    if len(r1) == 1 and len(r2) == 1 and r1 != r2 and d.crossings[x].sign == -d.crossings[y].sign:
                        ok = True
        if ok:
            out.append(CrossingSet(tuple(sorted(key))))
    out.sort(key=lambda s: s.crossings)
    return out


def _triangles(d: Diagram) -> list[Triangle]:
    pairs = _adjacent_pairs(d)
    ends = []
    by_crossing: dict[int, list[int]] = {}
    for k, (p, q) in enumerate(pairs):
        x, y = _visit(d, p).crossing, _visit(d, q).crossing
        ends.append({x: p, y: q})
        by_crossing.setdefault(x, []).append(k)
        by_crossing.setdefault(y, []).append(k)

    found = set()
    out = []
    for k1, e1 in enumerate(ends):
        x, y = sorted(e1)
        for k2 in by_crossing[x]:
            e2 = ends[k2]
            if e2[x] == e1[x]:
                continue
            z = next(c for c in e2 if c != x)
            if z == y:
                continue
            for k3 in by_crossing[y]:
                e3 = ends[k3]
                if z not in e3 or e3[y] == e1[y] or e3[z] == e2[z]:
                    continue
                key = frozenset((k1, k2, k3))
                if key not in found:
                    found.add(key)
                    out.append(Triangle(tuple(pairs[k] for k in sorted(key))))
    return out


def _triangle_kind(d: Diagram, t: Triangle) -> MoveKind | None:
    ids = {_visit(d, p).crossing for pair in t.pairs for p in pair}
    n_classical = sum(_is_classical(d, c) for c in ids)
    if n_classical == 0:
        return MoveKind.FLAT_R3
    if n_classical == 1:
        return MoveKind.MIXED_R3
    if n_classical == 3 and _r3_signature(d, t) in r3_signatures():
        return MoveKind.R3
    return None


def _r3_signature(d: Diagram, t: Triangle) -> tuple | None:
    strands = {}
    for p, q in t.pairs:
        v, w = _visit(d, p), _visit(d, q)
        roles = (v.role, w.role)
        if roles == (Role.OVER, Role.OVER):
            name = "T"
        elif roles == (Role.UNDER, Role.UNDER):
            name = "B"
        else:
            name = "M"
        if name in strands:
            return None
        strands[name] = (v.crossing, w.crossing)
    T, M, B = strands["T"], strands["M"], strands["B"]
    tm = (set(T) & set(M)).pop()
    tb = (set(T) & set(B)).pop()
    mb = (set(M) & set(B)).pop()
    sign = {c: d.crossings[c].sign for c in (tm, tb, mb)}
    return (
        "M" if T[0] == tm else "B",
        "T" if M[0] == tm else "B",
        "T" if B[0] == tb else "M",
        sign[tm],
        sign[tb],
        sign[mb],
    )


# ---------------------------------------------------------------------------
# public surface


def enumerate_sites(d: Diagram, kind: MoveKind) -> list:
    """All sites of ``kind`` in ``d``."""
    if kind is MoveKind.R1_INSERT:
        return [R1Insert(g, s, o) for g in _gaps(d) for s in (1, -1) for o in (True, False)]
    if kind is MoveKind.R2_INSERT:
        gaps = _gaps(d)
        return [
            R2Insert(g1, g2, s, par, of)
            for g1 in gaps
            for g2 in gaps
            for s in (1, -1)
            for par in (True, False)
            for of in ((True, False) if g1 == g2 else (True,))
        ]
    if kind is MoveKind.FLAT_R2_INSERT:
        gaps = _gaps(d)
        return [FlatR2Insert(g1, g2, par) for i, g1 in enumerate(gaps) for g2 in gaps[i:] for par in (True, False)]
    if kind is MoveKind.R1_DELETE:
        return _r1_deletions(d)
    if kind is MoveKind.R2_DELETE:
        return _r2_deletions(d, flat=False)
    if kind is MoveKind.FLAT_R2_DELETE:
        return _r2_deletions(d, flat=True)
    return [t for t in _triangles(d) if _triangle_kind(d, t) is kind]


def random_site(d: Diagram, kind: MoveKind, rng: random.Random, near: bool = False):
    """A random site of ``kind``, or ``None``.  With ``near`` the inserted
    strands are placed next to visits of an existing crossing."""
    if kind in INSERT_KINDS:
        gaps = _gaps(d)
        if near and d.crossings:
            cid = rng.choice(sorted(d.crossings))
            around = []
            for ci, pi in d.positions()[cid]:
                n = len(d.components[ci])
                around.append(Gap(ci, rng.choice(((pi - 1) % n, pi))))
            g1, g2 = around
            if rng.random() < 0.5:
                g2 = rng.choice(gaps)
            if rng.random() < 0.5:
                g1, g2 = g2, g1
        else:
            g1, g2 = rng.choice(gaps), rng.choice(gaps)
        if kind is MoveKind.R1_INSERT:
            return R1Insert(g1, rng.choice((1, -1)), rng.random() < 0.5)
        if kind is MoveKind.R2_INSERT:
            return R2Insert(g1, g2, rng.choice((1, -1)), rng.random() < 0.5, g1 != g2 or rng.random() < 0.5)
        g1, g2 = sorted((g1, g2))
        return FlatR2Insert(g1, g2, rng.random() < 0.5)
    sites = enumerate_sites(d, kind)
    return rng.choice(sites) if sites else None


def _check_gap(d: Diagram, g: Gap):
    if not 0 <= g.component < len(d.components):
        raise StaleSiteError(f"no component {g.component}")
    comp = d.components[g.component]
    if not 0 <= g.index < max(1, len(comp)):
        raise StaleSiteError(f"no gap {g}")


def apply(d: Diagram, kind: MoveKind, site) -> Diagram:
    """Apply the move ``kind`` at ``site``; raises :class:`StaleSiteError` if it
    does not match."""
    if kind is MoveKind.R1_INSERT:
        if not isinstance(site, R1Insert) or site.sign not in (1, -1):
            raise StaleSiteError(f"bad R1 insertion site {site!r}")
        _check_gap(d, site.gap)
        (c,) = _new_ids(d, 1)
        seq = [Visit(c, Role.OVER), Visit(c, Role.UNDER)]
        if not site.over_first:
            seq.reverse()
        return _insert(d, {site.gap: seq}, {c: Classical(site.sign)})

    if kind is MoveKind.R2_INSERT:
        if not isinstance(site, R2Insert) or site.sign not in (1, -1):
            raise StaleSiteError(f"bad R2 insertion site {site!r}")
        _check_gap(d, site.over_gap)
        _check_gap(d, site.under_gap)
        c1, c2 = _new_ids(d, 2)
        over = [Visit(c1, Role.OVER), Visit(c2, Role.OVER)]
        under = [Visit(c1, Role.UNDER), Visit(c2, Role.UNDER)]
        if not site.parallel:
            under.reverse()
        new = {c1: Classical(site.sign), c2: Classical(-site.sign)}
        if site.over_gap == site.under_gap:
            seq = over + under if site.over_first else under + over
            return _insert(d, {site.over_gap: seq}, new)
        return _insert(d, {site.over_gap: over, site.under_gap: under}, new)

    if kind is MoveKind.FLAT_R2_INSERT:
        if not isinstance(site, FlatR2Insert):
            raise StaleSiteError(f"bad flat R2 insertion site {site!r}")
        _check_gap(d, site.gap1)
        _check_gap(d, site.gap2)
        f1, f2 = _new_ids(d, 2)
        first = [Visit(f1, Role.FLAT), Visit(f2, Role.FLAT)]
        second = list(first) if site.parallel else first[::-1]
        new = {f1: Flat(1), f2: Flat(-1)}
        if site.gap1 == site.gap2:
            return _insert(d, {site.gap1: first + second}, new)
        return _insert(d, {site.gap1: first, site.gap2: second}, new)

    if kind in (MoveKind.R1_DELETE, MoveKind.R2_DELETE, MoveKind.FLAT_R2_DELETE):
        if site not in enumerate_sites(d, kind):
            raise StaleSiteError(f"{kind.value} does not apply at {site}")
        return _delete(d, site.crossings)

    if kind in TRIANGLE_KINDS:
        if not isinstance(site, Triangle) or site not in _triangles(d) or _triangle_kind(d, site) is not kind:
            raise StaleSiteError(f"{kind.value} does not apply at {site}")
        comps = [list(c) if c is not UNKNOT else UNKNOT for c in d.components]
        for (ci, i), (_, j) in site.pairs:
            comps[ci][i], comps[ci][j] = comps[ci][j], comps[ci][i]
        return Diagram(tuple(c if c is UNKNOT else tuple(c) for c in comps), d.crossings)

    raise ValueError(f"unknown move kind {kind!r}")


# ---------------------------------------------------------------------------
# random diagrams and fuzzing


def random_diagram(rng: random.Random, max_classical: int = 5, max_flat: int = 3, max_components: int = 3) -> Diagram:
    """A random valid diagram from a shuffled Gauss code."""
    n_c = rng.randint(0, max_classical)
    n_f = rng.randint(0, max_flat)
    n_comp = rng.randint(1, max_components)
    crossings = {}
    tokens = []
    for cid in range(1, n_c + 1):
        crossings[cid] = Classical(rng.choice((1, -1)))
        tokens += [Visit(cid, Role.OVER), Visit(cid, Role.UNDER)]
    for cid in range(n_c + 1, n_c + n_f + 1):
        crossings[cid] = Flat(rng.choice((1, -1)))
        tokens += [Visit(cid, Role.FLAT), Visit(cid, Role.FLAT)]
    rng.shuffle(tokens)
    cuts = sorted(rng.randint(0, len(tokens)) for _ in range(n_comp - 1))
    comps = []
    lo = 0
    for hi in [*cuts, len(tokens)]:
        comps.append(tuple(tokens[lo:hi]) or UNKNOT)
        lo = hi
    return Diagram(tuple(comps), crossings)


@dataclass
class FuzzStep:
    kind: MoveKind
    site: object
    polynomial: str

    def __str__(self) -> str:
        return f"{self.kind.value} [{self.site}] X={self.polynomial}"


@dataclass
class FuzzReport:
    seed: int
    steps: int
    restricted: bool
    initial: Diagram
    initial_polynomial: str
    log: list[FuzzStep] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds_applied(self) -> set[MoveKind]:
        return {s.kind for s in self.log}

    def reproduction(self) -> str:
        flag = " --restricted" if self.restricted else ""
        return f"repro: fuzz --seed {self.seed} --steps {self.steps} --trials 1{flag}"

    def __str__(self) -> str:
        lines = [f"seed {self.seed} steps {self.steps} restricted {str(self.restricted).lower()}"]
        lines += ["initial diagram:"] + ["  " + ln for ln in serialize_diagram(self.initial).splitlines()]
        lines.append(f"initial X={self.initial_polynomial}")
        lines += [f"step {i + 1}: {s}" for i, s in enumerate(self.log)]
        lines.append("no violations" if self.ok else f"{len(self.violations)} violation(s)")
        lines += ["  " + v for v in self.violations]
        lines.append(self.reproduction())
        return "\n".join(lines)


def _choose_move(d: Diagram, rng: random.Random, cap: int, forbidden) -> tuple[MoveKind, object] | None:
    room = cap - len(d.crossings)
    if room >= 2 and d.crossings and rng.random() < 0.3:
        # repeated R2 insertions next to one crossing tend to build R3 triangles
        kind = MoveKind.R2_INSERT if rng.random() < 0.5 else MoveKind.FLAT_R2_INSERT
        return kind, random_site(d, kind, rng, near=True)
    sites: dict[MoveKind, list] = {k: [] for k in TRIANGLE_KINDS}
    for t in _triangles(d):
        tk = _triangle_kind(d, t)
        if tk is not None:
            sites[tk].append(t)
    for kind in (MoveKind.R1_DELETE, MoveKind.R2_DELETE, MoveKind.FLAT_R2_DELETE):
        sites[kind] = enumerate_sites(d, kind)
    weighted = []
    for kind in MoveKind:
        if kind in forbidden:
            continue
        if kind in INSERT_KINDS:
            if room >= _ADDED[kind]:
                weighted.append((kind, 1))
        elif sites[kind]:
            weighted.append((kind, 4 if kind in TRIANGLE_KINDS else 2))
    if not weighted:
        return None
    kinds, weights = zip(*weighted)
    kind = rng.choices(kinds, weights)[0]
    if kind in INSERT_KINDS:
        return kind, random_site(d, kind, rng, near=rng.random() < 0.5)
    return kind, rng.choice(sites[kind])


def fuzz_invariance(
    seed: int,
    steps: int,
    restricted: bool = False,
    cap: int = 12,
    start: Diagram | None = None,
    forbidden=None,
) -> FuzzReport:
    """Apply ``steps`` random moves to a random (or given) diagram, checking
    that the invariant and the component count never change."""
    rng = random.Random(seed)
    if forbidden is None:
        forbidden = RESTRICTED_FORBIDDEN if restricted else frozenset()
    d = start if start is not None else random_diagram(rng, max_classical=min(5, cap), max_flat=min(3, cap))
    if not validate(d).ok:
        raise ValueError(f"invalid start diagram:\n{validate(d)}")
    x0 = flat_virtual_jones(d)
    n0 = component_count(d)
    report = FuzzReport(seed, steps, restricted, d, str(x0))
    done = 0
    while done < steps:
        move = _choose_move(d, rng, cap, forbidden)
        if move is None:
            break
        kind, site = move
        nd = apply(d, kind, site)
        x = flat_virtual_jones(nd)
        report.log.append(FuzzStep(kind, site, str(x)))
        problems = []
        if not validate(nd).ok:
            problems.append(f"invalid diagram: {validate(nd)}")
        if component_count(nd) != n0:
            problems.append(f"component count {component_count(nd)} != {n0}")
        if x != x0:
            problems.append(f"X changed to {x}")
        for p in problems:
            report.violations.append(f"step {len(report.log)} {kind.value} [{site}]: {p}")
        d = nd
        done += 1
    return report


def writhe_change(before: Diagram, after: Diagram) -> int:
    return writhe(after) - writhe(before)
