"""Exact sparse polynomials in Z[a, a^-1, b].

A :class:`Poly2` maps ``(a_exponent, b_exponent)`` to a nonzero integer
coefficient.  The ``a`` exponent may be negative, the ``b`` exponent may not.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping

__all__ = ["Poly2", "PolySyntaxError"]


class PolySyntaxError(ValueError):
    pass


class Poly2:
    """Immutable polynomial in ``a``, ``a^-1`` and ``b`` with integer coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple[int, int], int] | Iterable[tuple[tuple[int, int], int]] = ()):
        acc: dict[tuple[int, int], int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for (ea, eb), c in items:
            if eb < 0:
                raise ValueError(f"negative b exponent {eb}")
            key = (int(ea), int(eb))
            acc[key] = acc.get(key, 0) + int(c)
        self._terms = {k: v for k, v in acc.items() if v}
        self._hash = None

    @classmethod
    def monomial(cls, a_exp: int = 0, b_exp: int = 0, coeff: int = 1) -> Poly2:
        return cls({(a_exp, b_exp): coeff})

    @classmethod
    def constant(cls, c: int) -> Poly2:
        return cls({(0, 0): c})

    @property
    def terms(self) -> dict[tuple[int, int], int]:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def a_degrees(self) -> tuple[int, int]:
        """Return ``(min, max)`` exponent of ``a``; ``(0, 0)`` for zero."""
        if not self._terms:
            return (0, 0)
        exps = [ea for ea, _ in self._terms]
        return (min(exps), max(exps))

    def b_degree(self) -> int:
        return max((eb for _, eb in self._terms), default=0)

    def substitute_b(self, value: int) -> dict[int, int]:
        """Evaluate at an integer ``b``; returns a Laurent polynomial in ``a`` as a dict."""
        out: dict[int, int] = {}
        for (ea, eb), c in self._terms.items():
            out[ea] = out.get(ea, 0) + c * value**eb
        return {k: v for k, v in out.items() if v}

    def __add__(self, other: Poly2 | int) -> Poly2:
        other = _coerce(other)
        acc = dict(self._terms)
        for k, v in other._terms.items():
            acc[k] = acc.get(k, 0) + v
        return Poly2(acc)

    __radd__ = __add__

    def __neg__(self) -> Poly2:
        return Poly2({k: -v for k, v in self._terms.items()})

    def __sub__(self, other: Poly2 | int) -> Poly2:
        return self + (-_coerce(other))

    def __rsub__(self, other: Poly2 | int) -> Poly2:
        return _coerce(other) - self

    def __mul__(self, other: Poly2 | int) -> Poly2:
        other = _coerce(other)
        acc: dict[tuple[int, int], int] = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                key = (a1 + a2, b1 + b2)
                acc[key] = acc.get(key, 0) + c1 * c2
        return Poly2(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Poly2:
        if n < 0:
            if len(self._terms) != 1:
                raise ValueError("only monomials have negative powers")
            ((ea, eb), c), = self._terms.items()
            if eb or abs(c) != 1:
                raise ValueError("only +-a^k is invertible")
            m = -n
            return Poly2({(-ea * m, 0): c**m})
        result = Poly2.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def shift(self, a_exp: int = 0, b_exp: int = 0, scale: int = 1) -> Poly2:
        """Multiply by the monomial ``scale * a^a_exp * b^b_exp``."""
        return Poly2({(ea + a_exp, eb + b_exp): c * scale for (ea, eb), c in self._terms.items()})

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = Poly2.constant(other)
        if not isinstance(other, Poly2):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Poly2({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, ((ea, eb), c) in enumerate(sorted(self._terms.items())):
            factors = []
            if ea:
                factors.append("a" if ea == 1 else f"a^{ea}")
            if eb:
                factors.append("b" if eb == 1 else f"b^{eb}")
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag), *factors])
            if i == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return " ".join(parts)

    @classmethod
    def parse(cls, text: str) -> Poly2:
        """Inverse of ``str``; accepts the canonical form and reorderings of it."""
        s = text.replace(" ", "")
        if s == "0":
            return cls()
        if not s:
            raise PolySyntaxError("empty polynomial")
        if s[0] not in "+-":
            s = "+" + s
        terms: dict[tuple[int, int], int] = {}
        pos = 0
        while pos < len(s):
            m = _TERM_RE.match(s, pos)
            if m is None or m.end() == pos:
                raise PolySyntaxError(f"cannot parse polynomial at offset {pos}: {text!r}")
            sign = -1 if m.group("sign") == "-" else 1
            coeff = int(m.group("coeff")) if m.group("coeff") else 1
            ea = eb = 0
            factors = m.group("factors")
            if not m.group("coeff") and not factors:
                raise PolySyntaxError(f"empty term in {text!r}")
            for f in filter(None, (factors or "").split("*")):
                var, _, exp = f.partition("^")
                e = int(exp) if exp else 1
                if var == "a":
                    ea += e
                elif var == "b":
                    eb += e
                else:
                    raise PolySyntaxError(f"unknown variable {var!r}")
            key = (ea, eb)
            terms[key] = terms.get(key, 0) + sign * coeff
            pos = m.end()
        return cls(terms)


_TERM_RE = re.compile(
    r"(?P<sign>[+-])(?P<coeff>\d+)?\*?(?P<factors>(?:[ab](?:\^-?\d+)?)(?:\*[ab](?:\^-?\d+)?)*)?"
)


def _coerce(x: Poly2 | int) -> Poly2:
    if isinstance(x, Poly2):
        return x
    if isinstance(x, int):
        return Poly2.constant(x)
    raise TypeError(f"cannot combine Poly2 with {type(x).__name__}")
