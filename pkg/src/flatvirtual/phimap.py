"""Flat-virtual diagrams from piecewise-linear curves on the cylinder and torus.

Coordinates are measured in turns (1 = full circle) and handled as exact
fractions.  On the cylinder a vertex is ``(theta, z, h)`` with ``theta``
periodic and ``z`` in ``[0, 1]``; on the torus it is ``(theta1, theta2, h)``
with both angles periodic.  ``h`` is a height above the surface, used only to
decide over/under at self-intersections of the projection.

Given a finite group of translations (``Z_d`` acting on ``theta``, or
``Z_d1 x Z_d2`` on the torus), every pair of distinct curve points that differ
by a group element becomes a flat crossing; the strand through one of the
points is pushed onto the other, and the connecting strands only meet the
rest of the diagram in virtual crossings, which the Gauss code does not
record.

Curve file format (``#`` starts a comment)::

    space: cylinder          # or: torus
    group: 2                 # or, on the torus: group: 2 3
    component:
    0.05 0.65 0              # theta z h  (torus: theta1 theta2 h)
    35/100 0.62 0
    ...

Numbers may be fractions ``p/q`` or exact decimals.  Each segment is
drawn along the shorter way round, so consecutive vertices must differ by
less than half a turn in every periodic coordinate.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .diagram import UNKNOT, Classical, Diagram, Flat, Role, Visit

__all__ = [
    "Vertex",
    "CylCurve",
    "TorusCurve",
    "GroupSpec",
    "CurvePoint",
    "ClassicalCrossing",
    "EquivalentPair",
    "CurveError",
    "CurveSyntaxError",
    "NonGenericError",
    "project_crossings",
    "find_equivalent_pairs",
    "phi",
    "phi_torus",
    "rotate",
    "mirror",
    "subdivide",
    "perturb",
    "restricted_eligible",
    "parse_curve",
    "serialize_curve",
    "load_curve",
]

F = Fraction


class CurveError(ValueError):
    pass


class NonGenericError(CurveError):
    pass


class CurveSyntaxError(CurveError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Vertex:
    x: Fraction
    y: Fraction
    h: Fraction


class _Curve:
    periodic: tuple[bool, bool] = (True, False)
    space = ""

    def __init__(self, components):
        comps = []
        for comp in components:
            verts = []
            for v in comp:
                if not isinstance(v, Vertex):
                    v = Vertex(*(F(c) for c in v))
                x = v.x % 1 if self.periodic[0] else v.x
                y = v.y % 1 if self.periodic[1] else v.y
                verts.append(Vertex(F(x), F(y), F(v.h)))
            if len(verts) < 2:
                raise CurveError("a closed curve needs at least two vertices")
            comps.append(tuple(verts))
        self.components: tuple[tuple[Vertex, ...], ...] = tuple(comps)
        self._check()

    def _check(self):
        pass

    def __eq__(self, other):
        return type(self) is type(other) and self.components == other.components

    def __hash__(self):
        return hash((type(self).__name__, self.components))

    def __repr__(self):
        return f"{type(self).__name__}({len(self.components)} components, {sum(map(len, self.components))} vertices)"


class CylCurve(_Curve):
    """Closed PL curves on the cylinder ``S^1 x [0, 1]``."""

    periodic = (True, False)
    space = "cylinder"

    def _check(self):
        for comp in self.components:
            for v in comp:
                if not 0 <= v.y <= 1:
                    raise CurveError(f"z = {v.y} is outside [0, 1]")


class TorusCurve(_Curve):
    """Closed PL curves on the torus."""

    periodic = (True, True)
    space = "torus"


@dataclass(frozen=True)
class GroupSpec:
    """Translation group: ``(d,)`` on the cylinder, ``(d1, d2)`` on the torus."""

    orders: tuple[int, ...]

    def __post_init__(self):
        if not self.orders or any(int(o) != o or o < 1 for o in self.orders):
            raise ValueError(f"group orders must be positive integers, got {self.orders}")

    def elements(self) -> list[tuple[Fraction, Fraction]]:
        """Nonzero group elements as translation vectors in turns."""
        if len(self.orders) == 1:
            (d,) = self.orders
            return [(F(k, d), F(0)) for k in range(1, d)]
        d1, d2 = self.orders
        return [(F(k1, d1), F(k2, d2)) for k1 in range(d1) for k2 in range(d2) if k1 or k2]


def _as_group(group, curve: _Curve) -> GroupSpec:
    if isinstance(group, GroupSpec):
        g = group
    elif isinstance(group, int):
        g = GroupSpec((group,))
    else:
        g = GroupSpec(tuple(group))
    want = 1 if isinstance(curve, CylCurve) else 2
    if len(g.orders) != want:
        raise ValueError(f"{curve.space} needs a group with {want} order(s), got {g.orders}")
    return g


# ---------------------------------------------------------------------------
# segments


@dataclass(frozen=True)
class CurvePoint:
    """A point on a curve: component, segment index and parameter in ``[0, 1)``."""

    component: int
    segment: int
    t: Fraction

    def key(self):
        return (self.component, self.segment, self.t)


@dataclass(frozen=True)
class _Segment:
    component: int
    index: int
    p: tuple[Fraction, Fraction]
    r: tuple[Fraction, Fraction]
    h0: Fraction
    h1: Fraction
    lo: tuple[Fraction, Fraction]
    hi: tuple[Fraction, Fraction]

    def at(self, t: Fraction) -> tuple[Fraction, Fraction]:
        return (self.p[0] + t * self.r[0], self.p[1] + t * self.r[1])

    def height(self, t: Fraction) -> Fraction:
        return self.h0 + t * (self.h1 - self.h0)


def _lift(a: Fraction, b: Fraction) -> Fraction:
    delta = (b - a) % 1
    if delta > F(1, 2):
        delta -= 1
    if abs(delta) == F(1, 2):
        raise CurveError(f"segment spans exactly half a turn ({a} to {b}); subdivide it")
    return delta


def _segments(curve: _Curve) -> list[_Segment]:
    out = []
    for ci, comp in enumerate(curve.components):
        m = len(comp)
        for i, v in enumerate(comp):
            w = comp[(i + 1) % m]
            dx = _lift(v.x, w.x) if curve.periodic[0] else w.x - v.x
            dy = _lift(v.y, w.y) if curve.periodic[1] else w.y - v.y
            if dx == 0 and dy == 0:
                raise CurveError(f"zero-length segment at component {ci}, vertex {i}")
            lo = (min(v.x, v.x + dx), min(v.y, v.y + dy))
            hi = (max(v.x, v.x + dx), max(v.y, v.y + dy))
            out.append(_Segment(ci, i, (v.x, v.y), (dx, dy), v.h, w.h, lo, hi))
    return out


def _cross(u, v) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


def _fmt_point(seg: _Segment, t: Fraction) -> str:
    x, y = seg.at(t)
    return f"({float(x % 1):.6g}, {float(y):.6g}) on component {seg.component} segment {seg.index}"


def _shared(s: _Segment, t: _Segment, sizes: list[int]) -> set[tuple[int, int]]:
    """Allowed ``(u, v)`` endpoint contacts: the vertex shared by consecutive segments."""
    if s.component != t.component:
        return set()
    n = sizes[s.component]
    out = set()
    if (s.index + 1) % n == t.index:
        out.add((1, 0))
    if (t.index + 1) % n == s.index:
        out.add((0, 1))
    return out


def _intersect(s: _Segment, t: _Segment, shift, error: str, shared=frozenset()):
    """Intersection of ``s`` with ``t`` translated by ``shift``.

    Returns ``(u, v)`` parameters, or ``None``; raises ``NonGenericError`` on
    overlaps and on intersections at vertices (other than the vertex shared
    by adjacent segments).
    """
    q = (t.p[0] + shift[0], t.p[1] + shift[1])
    qp = (q[0] - s.p[0], q[1] - s.p[1])
    denom = _cross(s.r, t.r)
    if denom == 0:
        if _cross(qp, s.r) != 0:
            return None
        rr = s.r[0] ** 2 + s.r[1] ** 2
        t0 = (qp[0] * s.r[0] + qp[1] * s.r[1]) / rr
        t1 = t0 + (t.r[0] * s.r[0] + t.r[1] * s.r[1]) / rr
        lo, hi = min(t0, t1), max(t0, t1)
        if hi < 0 or lo > 1:
            return None
        if shared and (hi == 0 or lo == 1):
            return None
        raise NonGenericError(f"{error}: overlapping segments at {_fmt_point(s, max(lo, F(0)))}")
    u = _cross(qp, t.r) / denom
    v = _cross(qp, s.r) / denom
    if not (0 <= u <= 1 and 0 <= v <= 1):
        return None
    if u in (0, 1) or v in (0, 1):
        if (u, v) in shared:
            return None
        raise NonGenericError(f"{error}: intersection at a vertex {_fmt_point(s, u)}")
    return u, v


def _shifts(s: _Segment, t: _Segment, g, periodic):
    """Translations ``g + m`` (``m`` integral along periodic axes) under which
    the bounding boxes of ``s`` and ``t`` overlap."""
    axes = []
    for a in (0, 1):
        lo_t, hi_t = t.lo[a] + g[a], t.hi[a] + g[a]
        if periodic[a]:
            ms = range(math.ceil(s.lo[a] - hi_t), math.floor(s.hi[a] - lo_t) + 1)
        else:
            ms = (0,) if s.lo[a] <= hi_t and lo_t <= s.hi[a] else ()
        axes.append([g[a] + m for m in ms])
    return product(*axes)


# ---------------------------------------------------------------------------
# crossings and pairs


@dataclass(frozen=True)
class ClassicalCrossing:
    over: CurvePoint
    under: CurvePoint
    sign: int
    position: tuple[Fraction, Fraction]


@dataclass(frozen=True)
class EquivalentPair:
    """``point_b`` equals ``point_a`` translated by ``group_element``."""

    point_a: CurvePoint
    point_b: CurvePoint
    group_element: tuple[Fraction, Fraction]
    flat_bit: int


_PROJ = "non-generic projection"
_SUBGROUP = "non-generic with respect to subgroup"


def _crossings(curve: _Curve, segs: list[_Segment]) -> list[ClassicalCrossing]:
    sizes = [len(c) for c in curve.components]
    out = []
    for i, s in enumerate(segs):
        for t in segs[i + 1 :]:
            shared = _shared(s, t, sizes)
            for m in _shifts(s, t, (0, 0), curve.periodic):
                hit = _intersect(s, t, m, _PROJ, shared)
                if hit is None:
                    continue
                u, v = hit
                hs, ht = s.height(u), t.height(v)
                if hs == ht:
                    raise NonGenericError(f"{_PROJ}: equal heights at crossing {_fmt_point(s, u)}")
                (o, ou), (w, wu) = ((s, u), (t, v)) if hs > ht else ((t, v), (s, u))
                sign = 1 if _cross(o.r, w.r) > 0 else -1
                x, y = s.at(u)
                pos = (x % 1 if curve.periodic[0] else x, y % 1 if curve.periodic[1] else y)
                out.append(
                    ClassicalCrossing(
                        CurvePoint(o.component, o.index, ou), CurvePoint(w.component, w.index, wu), sign, pos
                    )
                )
    _check_distinct(
        [(c.over, "crossing") for c in out] + [(c.under, "crossing") for c in out], segs, _PROJ
    )
    return out


def project_crossings(curve: _Curve) -> list[ClassicalCrossing]:
    """Double points of the projection, with over/under from ``h``."""
    return _crossings(curve, _segments(curve))


def _check_distinct(points, segs, error):
    seen = {}
    for p, what in points:
        if p.key() in seen:
            seg = next(s for s in segs if s.component == p.component and s.index == p.segment)
            raise NonGenericError(f"{error}: {what} and {seen[p.key()]} meet at {_fmt_point(seg, p.t)}")
        seen[p.key()] = what


def _pairs(curve: _Curve, group: GroupSpec, segs, crossings) -> list[EquivalentPair]:
    found: dict[tuple, EquivalentPair] = {}
    for g in group.elements():
        for s in segs:
            for t in segs:
                for shift in _shifts(s, t, g, curve.periodic):
                    hit = _intersect(s, t, shift, _SUBGROUP)
                    if hit is None:
                        continue
                    u, v = hit
                    ps = CurvePoint(s.component, s.index, u)
                    pt = CurvePoint(t.component, t.index, v)
                    key = tuple(sorted((ps.key(), pt.key())))
                    if key in found:
                        continue
                    # ps = pt + g; the lexicographically smaller point is shifted
                    if pt.key() < ps.key():
                        a, sa, b, sb, ge = pt, t, ps, s, g
                    else:
                        a, sa, b, sb, ge = ps, s, pt, t, ((-g[0]) % 1, (-g[1]) % 1)
                    bit = 1 if _cross(sa.r, sb.r) > 0 else -1
                    found[key] = EquivalentPair(a, b, ge, bit)
    pairs = [found[k] for k in sorted(found)]
    _check_distinct(
        [(c.over, "crossing") for c in crossings]
        + [(c.under, "crossing") for c in crossings]
        + [(p.point_a, "equivalent point") for p in pairs]
        + [(p.point_b, "equivalent point") for p in pairs],
        segs,
        _SUBGROUP,
    )
    return pairs


def find_equivalent_pairs(curve: _Curve, group) -> list[EquivalentPair]:
    """All unordered pairs of distinct curve points differing by a nonzero
    group element, each reported once."""
    group = _as_group(group, curve)
    segs = _segments(curve)
    return _pairs(curve, group, segs, _crossings(curve, segs))


def _phi(curve: _Curve, group) -> Diagram:
    group = _as_group(group, curve)
    segs = _segments(curve)
    crossings = _crossings(curve, segs)
    return _build(curve, crossings, _pairs(curve, group, segs, crossings))


def _build(curve: _Curve, crossings: list[ClassicalCrossing], pairs: list[EquivalentPair]) -> Diagram:
    events: dict[int, list[tuple[tuple, int, Role]]] = {}
    for k, c in enumerate(crossings):
        events.setdefault(c.over.component, []).append(((c.over.segment, c.over.t), k, Role.OVER))
        events.setdefault(c.under.component, []).append(((c.under.segment, c.under.t), k, Role.UNDER))
    base = len(crossings)
    for k, p in enumerate(pairs):
        for pt in (p.point_a, p.point_b):
            events.setdefault(pt.component, []).append(((pt.segment, pt.t), base + k, Role.FLAT))

    ids: dict[int, int] = {}
    comps = []
    for ci in range(len(curve.components)):
        evs = sorted(events.get(ci, []))
        if not evs:
            comps.append(UNKNOT)
            continue
        seq = []
        for _, k, role in evs:
            if k not in ids:
                ids[k] = len(ids) + 1
            seq.append(Visit(ids[k], role))
        comps.append(tuple(seq))
    table = {}
    for k, cid in ids.items():
        table[cid] = Classical(crossings[k].sign) if k < base else Flat(pairs[k - base].flat_bit)
    return Diagram(tuple(comps), table)


def phi(curve: CylCurve, group) -> Diagram:
    """The flat-virtual diagram of a cylinder curve for the group ``Z_d``."""
    if not isinstance(curve, CylCurve):
        raise TypeError("phi expects a CylCurve; use phi_torus for torus curves")
    return _phi(curve, group)


def phi_torus(curve: TorusCurve, group) -> Diagram:
    """The flat-virtual diagram of a torus curve for the lattice ``Z_d1 x Z_d2``."""
    if not isinstance(curve, TorusCurve):
        raise TypeError("phi_torus expects a TorusCurve")
    return _phi(curve, group)


def restricted_eligible(curve: _Curve, group) -> bool:
    """Outputs expected to be equivalent as restricted links: the ``d = 2``
    cylinder case, and torus outputs (the two readings of that claim)."""
    group = _as_group(group, curve)
    return isinstance(curve, TorusCurve) or group.orders == (2,)


# ---------------------------------------------------------------------------
# curve transformations


def rotate(curve: _Curve, shift) -> _Curve:
    """Translate every vertex by ``shift`` (turns), along the periodic directions."""
    sx, sy = (F(shift), F(0)) if not isinstance(shift, tuple) else (F(shift[0]), F(shift[1]))
    if sy and not curve.periodic[1]:
        raise ValueError("cannot translate a cylinder curve vertically")
    return type(curve)([[Vertex(v.x + sx, v.y + sy, v.h) for v in comp] for comp in curve.components])


def mirror(curve: _Curve) -> _Curve:
    return type(curve)([[Vertex(v.x, v.y, -v.h) for v in comp] for comp in curve.components])


def subdivide(curve: _Curve, parts: int = 2) -> _Curve:
    """Split every segment into ``parts`` equal pieces."""
    comps = []
    for ci, comp in enumerate(curve.components):
        segs = [s for s in _segments(type(curve)([comp]))]
        verts = []
        for s in segs:
            for j in range(parts):
                t = F(j, parts)
                x, y = s.at(t)
                verts.append(Vertex(x, y, s.height(t)))
        comps.append(verts)
    return type(curve)(comps)


def perturb(curve: _Curve, rng: random.Random, eps: Fraction = F(1, 10**5)) -> _Curve:
    """Move every vertex by a random rational offset of size at most ``eps``."""

    def jitter():
        return F(rng.randint(-10**6, 10**6), 10**6) * eps

    comps = []
    for comp in curve.components:
        verts = []
        for v in comp:
            y = v.y + jitter()
            if not curve.periodic[1]:
                y = min(max(y, F(0)), F(1))
            verts.append(Vertex(v.x + jitter(), y, v.h))
        comps.append(verts)
    return type(curve)(comps)


# ---------------------------------------------------------------------------
# text format


_NUM_RE = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)(/\d+)?")


def _number(tok: str, line: int, col: int) -> Fraction:
    if not _NUM_RE.fullmatch(tok):
        raise CurveSyntaxError(f"bad number {tok!r}", line, col)
    try:
        return F(tok)
    except (ValueError, ZeroDivisionError):
        raise CurveSyntaxError(f"bad number {tok!r}", line, col) from None


def parse_curve(text: str) -> tuple[_Curve, GroupSpec]:
    space = group = None
    comps: list[list[Vertex]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", body)]
        if not toks:
            continue
        head = toks[0][1]
        if head == "space:":
            if len(toks) != 2 or toks[1][1] not in ("cylinder", "torus"):
                raise CurveSyntaxError("expected 'space: cylinder|torus'", lineno, toks[0][0])
            space = toks[1][1]
        elif head == "group:":
            orders = []
            for col, tok in toks[1:]:
                if not tok.isdigit() or int(tok) < 1:
                    raise CurveSyntaxError(f"bad group order {tok!r}", lineno, col)
                orders.append(int(tok))
            if len(orders) not in (1, 2):
                raise CurveSyntaxError("expected 'group: d' or 'group: d1 d2'", lineno, toks[0][0])
            group = GroupSpec(tuple(orders))
        elif head == "component:":
            if len(toks) != 1:
                raise CurveSyntaxError("unexpected text after 'component:'", lineno, toks[1][0])
            comps.append([])
        else:
            if not comps:
                raise CurveSyntaxError("vertex before any 'component:' line", lineno, toks[0][0])
            if len(toks) != 3:
                raise CurveSyntaxError("expected three numbers per vertex", lineno, toks[0][0])
            comps[-1].append(Vertex(*(_number(t, lineno, c) for c, t in toks)))
    if space is None:
        raise CurveSyntaxError("missing 'space:' line", 1, 1)
    if group is None:
        raise CurveSyntaxError("missing 'group:' line", 1, 1)
    if not comps:
        raise CurveSyntaxError("no components", 1, 1)
    cls = CylCurve if space == "cylinder" else TorusCurve
    if len(group.orders) != (1 if cls is CylCurve else 2):
        raise CurveSyntaxError(f"group {group.orders} does not match space {space}", 1, 1)
    return cls(comps), group


def serialize_curve(curve: _Curve, group: GroupSpec) -> str:
    out = [f"space: {curve.space}", "group: " + " ".join(map(str, group.orders))]
    for comp in curve.components:
        out.append("component:")
        out.extend(f"{v.x} {v.y} {v.h}" for v in comp)
    return "\n".join(out) + "\n"


def load_curve(path) -> tuple[_Curve, GroupSpec]:
    with open(path, encoding="utf-8") as fh:
        return parse_curve(fh.read())
