"""Independent Kauffman bracket for classical (flat-free) Gauss codes.

Works from planar-diagram quadruples ``X[i, j, k, l]`` (``i`` the incoming
under-arc, labels counterclockwise) and the textbook rule
``<X[i,j,k,l]> = A <P[i,j] P[k,l]> + A^-1 <P[i,l] P[j,k]>``.  Shares no code
with the package's state-sum engine; polynomials are plain ``{exponent: coeff}``
dicts in ``A``.
"""

from __future__ import annotations

from collections import defaultdict
from itertools import product


def pd_code(components, signs):
    """``components``: lists of ``(crossing, 'O'|'U')``; ``signs``: crossing -> +-1.

    Returns the PD quadruples and the number of crossingless components.
    """
    arc = 0
    incoming = {}
    outgoing = {}
    free = 0
    for comp in components:
        if not comp:
            free += 1
            continue
        first = arc
        m = len(comp)
        for k, (c, role) in enumerate(comp):
            out_arc = first + k
            in_arc = first + (k - 1) % m
            incoming[(c, role)] = in_arc
            outgoing[(c, role)] = out_arc
        arc += m
    quads = []
    for c, s in signs.items():
        ui, uo = incoming[(c, "U")], outgoing[(c, "U")]
        oi, oo = incoming[(c, "O")], outgoing[(c, "O")]
        quads.append((ui, oo, uo, oi) if s > 0 else (ui, oi, uo, oo))
    return quads, free, arc


def _loops(n_arcs, pairs):
    parent = list(range(n_arcs))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x, y in pairs:
        parent[find(x)] = find(y)
    return len({find(x) for x in range(n_arcs)})


def _mul(p, q):
    out = defaultdict(int)
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            out[e1 + e2] += c1 * c2
    return {e: c for e, c in out.items() if c}


def bracket(components, signs):
    """Unnormalized bracket with every loop (including the last) weighted by
    ``-A^2 - A^-2``; returns ``{exponent: coeff}``."""
    quads, free, n_arcs = pd_code(components, signs)
    loop = {2: -1, -2: -1}
    total = defaultdict(int)
    for choice in product((0, 1), repeat=len(quads)):
        pairs = []
        exp = 0
        for (i, j, k, l), b in zip(quads, choice):
            if b == 0:
                pairs += [(i, j), (k, l)]
                exp += 1
            else:
                pairs += [(i, l), (j, k)]
                exp -= 1
        term = {exp: 1}
        for _ in range(_loops(n_arcs, pairs) + free):
            term = _mul(term, loop)
        for e, c in term.items():
            total[e] += c
    return {e: c for e, c in total.items() if c}


def normalized_bracket(components, signs):
    """``(-A^3)^-w <D> / (-A^2 - A^-2)``: the Jones polynomial in ``A``."""
    w = sum(signs.values())
    raw = bracket(components, signs)
    # divide by the loop value: raw is an exact multiple of it
    q = {}
    rem = dict(raw)
    lo = min(raw, default=0)
    while rem:
        top = max(rem)
        if top - 4 < lo:
            raise ArithmeticError("bracket not divisible by the loop value")
        c = -rem[top]
        q[top - 2] = c
        for e, v in {top: -c, top - 4: -c}.items():
            rem[e] = rem.get(e, 0) - v
            if rem[e] == 0:
                del rem[e]
    sign = -1 if w % 2 else 1
    return {e - 3 * w: sign * c for e, c in q.items()}


def oracle_x(components, signs):
    """The value the flat-virtual invariant must take on a flat-free diagram."""
    return _mul(normalized_bracket(components, signs), {2: -1, -2: -1})
