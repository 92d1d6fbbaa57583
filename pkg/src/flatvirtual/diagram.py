"""Flat-virtual link diagrams as signed Gauss codes.

A diagram is a list of oriented components, each a cyclic sequence of
visits to classical or flat crossings.  Virtual crossings are not recorded:
any strand carrying only virtual crossings can be rerouted freely, so the
Gauss code already determines the diagram up to that freedom.

Text format (one diagram per file, ``#`` starts a comment)::

    components: 1
    3f 1+ 2- 4f 4f 2+ 1- 3f
    crossings:
    1 C +1
    2 C +1
    3 F +1
    4 F -1

Visit tokens are ``<id><role>`` with role ``+`` (over), ``-`` (under) or
``f`` (flat pass).  A component without crossings is the single token ``O``.
The crossing table lists ``<id> C <sign>`` or ``<id> F <bit>`` with the value
``+1`` or ``-1``; it may be omitted when no crossings are visited.
"""

from __future__ import annotations

import enum
import re
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Union

__all__ = [
    "Role",
    "Visit",
    "Classical",
    "Flat",
    "UNKNOT",
    "Diagram",
    "Violation",
    "ValidationReport",
    "DiagramSyntaxError",
    "validate",
    "component_count",
    "writhe",
    "forget",
    "relabel",
    "canonical_key",
    "parse_diagram",
    "serialize_diagram",
    "load_diagram",
]


class Role(enum.Enum):
    OVER = "+"
    UNDER = "-"
    FLAT = "f"


@dataclass(frozen=True)
class Visit:
    crossing: int
    role: Role

    def __str__(self) -> str:
        return f"{self.crossing}{self.role.value}"


@dataclass(frozen=True)
class Classical:
    sign: int

    def __str__(self) -> str:
        return f"C {self.sign:+d}"


@dataclass(frozen=True)
class Flat:
    # rotation datum; never consulted by the invariant
    bit: int

    def __str__(self) -> str:
        return f"F {self.bit:+d}"


CrossingKind = Union[Classical, Flat]


class _Unknot:
    """Marker for a component that visits no crossing."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNKNOT"

    def __str__(self) -> str:
        return "O"

    def __reduce__(self):
        return (_Unknot, ())

    def __len__(self) -> int:
        return 0

    def __iter__(self):
        return iter(())


UNKNOT = _Unknot()

Component = Union[tuple[Visit, ...], _Unknot]


@dataclass(frozen=True, eq=False)
class Diagram:
    """Immutable flat-virtual diagram.

    ``components`` holds tuples of :class:`Visit` in traversal order, or the
    :data:`UNKNOT` marker.  ``crossings`` maps crossing id to its kind.  The
    constructor does not check consistency; use :func:`validate`.
    """

    components: tuple[Component, ...]
    crossings: Mapping[int, CrossingKind] = field(default_factory=dict)

    def __post_init__(self):
        comps = tuple(c if c is UNKNOT else tuple(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "crossings", MappingProxyType(dict(self.crossings)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Diagram):
            return NotImplemented
        return self.components == other.components and dict(self.crossings) == dict(other.crossings)

    def __hash__(self) -> int:
        return hash((self.components, frozenset(self.crossings.items())))

    def __reduce__(self):
        return (Diagram, (self.components, dict(self.crossings)))

    def __repr__(self) -> str:
        comps = " | ".join(" ".join(map(str, c)) if c is not UNKNOT else "O" for c in self.components)
        return f"Diagram({comps}; {len(self.classical_ids)} classical, {len(self.flat_ids)} flat)"

    @property
    def classical_ids(self) -> list[int]:
        return sorted(k for k, v in self.crossings.items() if isinstance(v, Classical))

    @property
    def flat_ids(self) -> list[int]:
        return sorted(k for k, v in self.crossings.items() if isinstance(v, Flat))

    def visits(self):
        """Yield ``(component, position, visit)`` over all visits."""
        for ci, comp in enumerate(self.components):
            for pi, v in enumerate(comp):
                yield ci, pi, v

    def positions(self) -> dict[int, list[tuple[int, int]]]:
        """Map crossing id to the positions ``(component, index)`` where it is visited."""
        out: dict[int, list[tuple[int, int]]] = {}
        for ci, pi, v in self.visits():
            out.setdefault(v.crossing, []).append((ci, pi))
        return out

    @classmethod
    def unknot(cls, n: int = 1) -> Diagram:
        return cls((UNKNOT,) * n, {})


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    crossing: int | None
    kind: str
    message: str

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


def validate(d: Diagram) -> ValidationReport:
    """Check the Gauss-code invariants and report every violation found."""
    out: list[Violation] = []
    for ci, comp in enumerate(d.components):
        if comp is UNKNOT:
            continue
        if len(comp) == 0:
            out.append(Violation(None, "empty-component", f"component {ci} is empty; use the unknot marker O"))
        for v in comp:
            if not isinstance(v, Visit):
                out.append(Violation(None, "bad-visit", f"component {ci} holds a non-visit {v!r}"))

    for cid, kind in sorted(d.crossings.items()):
        if isinstance(kind, Classical):
            if kind.sign not in (1, -1):
                out.append(Violation(cid, "bad-sign", f"crossing id {cid} has sign {kind.sign}, expected +1 or -1"))
        elif isinstance(kind, Flat):
            if kind.bit not in (1, -1):
                out.append(Violation(cid, "bad-bit", f"crossing id {cid} has bit {kind.bit}, expected +1 or -1"))
        else:
            out.append(Violation(cid, "bad-kind", f"crossing id {cid} has unknown kind {kind!r}"))

    roles: dict[int, list[Role]] = {}
    for _, _, v in d.visits():
        if isinstance(v, Visit):
            roles.setdefault(v.crossing, []).append(v.role)

    for cid in sorted(set(roles) - set(d.crossings)):
        out.append(Violation(cid, "undeclared", f"crossing id {cid} is visited but not declared"))

    for cid, kind in sorted(d.crossings.items()):
        rs = roles.get(cid, [])
        if len(rs) != 2:
            out.append(Violation(cid, "visit-count", f"crossing id {cid} has {len(rs)} visit{'s' if len(rs) != 1 else ''}, expected 2"))
            continue
        if isinstance(kind, Classical) and sorted(r.value for r in rs) != ["+", "-"]:
            out.append(Violation(cid, "classical-roles", f"crossing id {cid}: classical visit roles must be {{Over, Under}}"))
        if isinstance(kind, Flat) and any(r is not Role.FLAT for r in rs):
            out.append(Violation(cid, "flat-roles", f"crossing id {cid}: flat visit roles must be FlatPass"))
    return ValidationReport(tuple(out))


# ---------------------------------------------------------------------------
# basic invariants and maps


def component_count(d: Diagram) -> int:
    return len(d.components)


def writhe(d: Diagram) -> int:
    return sum(k.sign for k in d.crossings.values() if isinstance(k, Classical))


def forget(d: Diagram) -> Diagram:
    """Make every classical crossing flat, keeping its sign as the flat bit."""
    crossings = {
        cid: Flat(k.sign) if isinstance(k, Classical) else k for cid, k in d.crossings.items()
    }
    comps = tuple(
        comp if comp is UNKNOT else tuple(Visit(v.crossing, Role.FLAT) for v in comp)
        for comp in d.components
    )
    return Diagram(comps, crossings)


def relabel(d: Diagram, start: int = 1) -> Diagram:
    """Renumber crossings by order of first visit; unvisited ids go last."""
    mapping: dict[int, int] = {}
    for _, _, v in d.visits():
        if v.crossing not in mapping:
            mapping[v.crossing] = start + len(mapping)
    for cid in sorted(d.crossings):
        if cid not in mapping:
            mapping[cid] = start + len(mapping)
    comps = tuple(
        comp if comp is UNKNOT else tuple(Visit(mapping[v.crossing], v.role) for v in comp)
        for comp in d.components
    )
    return Diagram(comps, {mapping[k]: v for k, v in d.crossings.items()})


def _kind_code(kind: CrossingKind) -> tuple[int, int]:
    if isinstance(kind, Classical):
        return (0, kind.sign)
    return (1, kind.bit)


def canonical_key(d: Diagram) -> tuple:
    """A key equal for diagrams that differ only by relabelling, rotation of
    components and reordering of components."""
    n_unknots = sum(1 for c in d.components if c is UNKNOT)
    comps = [c for c in d.components if c is not UNKNOT]
    kinds = {cid: _kind_code(k) for cid, k in d.crossings.items()}

    beam: list[tuple[dict[int, int], frozenset[int]]] = [({}, frozenset(range(len(comps))))]
    prefix: list[tuple] = []
    for _ in range(len(comps)):
        best = None
        nxt: dict[tuple, tuple[dict[int, int], frozenset[int]]] = {}
        for mapping, remaining in beam:
            for ci in remaining:
                comp = comps[ci]
                n = len(comp)
                for r in range(n):
                    local = dict(mapping)
                    toks = [n]
                    for j in range(n):
                        v = comp[(r + j) % n]
                        lab = local.get(v.crossing)
                        if lab is None:
                            lab = local[v.crossing] = len(local)
                        toks.append((lab, v.role.value, kinds.get(v.crossing, (9, 0))))
                    key = tuple(toks)
                    if best is None or key < best:
                        best = key
                        nxt = {}
                    if key == best:
                        rest = remaining - {ci}
                        ident = (rest, tuple(sorted(local.items())))
                        nxt.setdefault(ident, (local, rest))
        prefix.append(best)
        beam = list(nxt.values())
    return (n_unknots, tuple(prefix))


# ---------------------------------------------------------------------------
# text format


class DiagramSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(r"(\d+)([+\-f])")
_ROLE = {"+": Role.OVER, "-": Role.UNDER, "f": Role.FLAT}


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if body.strip():
            yield lineno, body


def parse_diagram(text: str) -> Diagram:
    """Parse the text format.  Structural consistency is left to :func:`validate`."""
    lines = list(_content_lines(text))
    if not lines:
        raise DiagramSyntaxError("missing 'components:' header", 1, 1)
    lineno, body = lines[0]
    m = re.fullmatch(r"\s*components:\s*(\d+)\s*", body)
    if m is None:
        raise DiagramSyntaxError("expected 'components: <n>'", lineno, 1)
    n = int(m.group(1))
    if len(lines) - 1 < n:
        raise DiagramSyntaxError(f"expected {n} component lines, found {len(lines) - 1}", lineno, 1)

    comps: list[Component] = []
    for lineno, body in lines[1 : n + 1]:
        tokens = [(mt.start() + 1, mt.group()) for mt in re.finditer(r"\S+", body)]
        if tokens[0][1] == "crossings:":
            raise DiagramSyntaxError(f"expected {n} component lines before 'crossings:'", lineno, tokens[0][0])
        if len(tokens) == 1 and tokens[0][1] == "O":
            comps.append(UNKNOT)
            continue
        visits = []
        for col, tok in tokens:
            mt = _TOKEN_RE.fullmatch(tok)
            if mt is None:
                raise DiagramSyntaxError(f"bad visit token {tok!r}", lineno, col)
            visits.append(Visit(int(mt.group(1)), _ROLE[mt.group(2)]))
        comps.append(tuple(visits))

    crossings: dict[int, CrossingKind] = {}
    rest = lines[n + 1 :]
    if rest:
        lineno, body = rest[0]
        if body.strip() != "crossings:":
            raise DiagramSyntaxError("expected 'crossings:'", lineno, body.index(body.strip()[0]) + 1)
        for lineno, body in rest[1:]:
            tokens = [(mt.start() + 1, mt.group()) for mt in re.finditer(r"\S+", body)]
            if len(tokens) != 3:
                raise DiagramSyntaxError("expected '<id> C|F +1|-1'", lineno, tokens[0][0])
            (c0, sid), (c1, kind), (c2, val) = tokens
            if not sid.isdigit():
                raise DiagramSyntaxError(f"bad crossing id {sid!r}", lineno, c0)
            if kind not in ("C", "F"):
                raise DiagramSyntaxError(f"bad crossing kind {kind!r}", lineno, c1)
            if val not in ("+1", "-1"):
                raise DiagramSyntaxError(f"bad sign {val!r}, expected +1 or -1", lineno, c2)
            cid = int(sid)
            if cid in crossings:
                raise DiagramSyntaxError(f"crossing id {cid} declared twice", lineno, c0)
            crossings[cid] = Classical(int(val)) if kind == "C" else Flat(int(val))
    return Diagram(tuple(comps), crossings)


def serialize_diagram(d: Diagram, comments: Iterable[str] = ()) -> str:
    out = [f"# {c}" for c in comments]
    out.append(f"components: {len(d.components)}")
    for comp in d.components:
        out.append("O" if comp is UNKNOT else " ".join(str(v) for v in comp))
    if d.crossings:
        out.append("crossings:")
        for cid in sorted(d.crossings):
            out.append(f"{cid} {d.crossings[cid]}")
    return "\n".join(out) + "\n"


def load_diagram(path) -> Diagram:
    with open(path, encoding="utf-8") as fh:
        return parse_diagram(fh.read())


def visit_counts(d: Diagram) -> Counter:
    return Counter(v.crossing for _, _, v in d.visits())
