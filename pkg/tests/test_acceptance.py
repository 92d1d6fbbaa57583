"""Acceptance suite: one test per primary criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` to see only these lines,
or ``python3 tests/test_acceptance.py``.
"""

import random
import time
from collections import Counter
from contextlib import contextmanager

import pytest

from conftest import FIXTURES, W_STRING
from curvegen import random_generic
from flatvirtual.cli import main
from flatvirtual.diagram import Classical, Diagram, Flat, Role, Visit, load_diagram, parse_diagram, writhe
from flatvirtual.moves import RESTRICTED_FORBIDDEN, CrossingSet, MoveKind, apply, enumerate_sites, fuzz_invariance, random_diagram, random_site
from flatvirtual.phimap import GroupSpec, phi, phi_torus, rotate
from flatvirtual.poly import Poly2
from flatvirtual.statesum import flat_virtual_jones, loop_circle, state_table
from gauss_enum import as_oracle_input, structures, with_signs
from kauffman_oracle import oracle_x

W_EXPECTED = Poly2.parse("a^-6*b^2 - a^-2*b^2 - a^-10 - a^-6")


@contextmanager
def criterion(capsys, number: int, title: str, budget: float):
    start = time.perf_counter()
    ok = False
    detail = ""
    try:
        yield
        elapsed = time.perf_counter() - start
        ok = elapsed < budget
        detail = f"{elapsed:.2f}s of {budget:g}s"
        assert ok, f"criterion {number} over budget: {detail}"
    except AssertionError as e:
        detail = detail or str(e).splitlines()[0]
        raise
    finally:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({detail})")


def test_criterion_1_w_invariant(capsys):
    with criterion(capsys, 1, "X(W) exact", 1.0):
        w = load_diagram(FIXTURES / "whitehead_W.diagram")
        x = flat_virtual_jones(w)
        assert x == W_EXPECTED
        assert str(x) == W_STRING


def test_criterion_2_state_table(capsys):
    with criterion(capsys, 2, "W state table summands", 1.0):
        rows = state_table(load_diagram(FIXTURES / "whitehead_W.diagram"))
        c, b2 = loop_circle(), Poly2.monomial(0, 2)
        expected = Counter([Poly2.monomial(2) * c * b2, b2, b2, Poly2.monomial(-2) * c])
        assert Counter(r.contribution for r in rows) == expected


def test_criterion_3_geometric_pipeline(capsys):
    with criterion(capsys, 3, "phi of the companion curve, d = 2", 1.0):
        code = main(["phi", str(FIXTURES / "whitehead_companion.curve"), "--invariant", "--workers", "1"])
        out = capsys.readouterr().out
        assert code == 0
        *diagram, last = out.splitlines()
        d = parse_diagram("\n".join(diagram))
        assert len(d.classical_ids) == 2
        assert len(d.flat_ids) == 2
        assert Poly2.parse(last) == W_EXPECTED
        assert last == W_STRING


def test_criterion_4_classical_oracle(capsys):
    with criterion(capsys, 4, "flat-free codes with <= 4 crossings match the bracket oracle", 60.0):
        checked = 0
        for n in range(5):
            for s in structures(n):
                for d in with_signs(s):
                    x = flat_virtual_jones(d)
                    assert x.b_degree() == 0
                    assert x.substitute_b(0) == oracle_x(*as_oracle_input(d)), d
                    checked += 1
        for name in ("trefoil", "figure_eight"):
            d = load_diagram(FIXTURES / f"{name}.diagram")
            assert flat_virtual_jones(d).substitute_b(0) == oracle_x(*as_oracle_input(d))
        assert checked == 29877


def _fuzz_all(restricted: bool):
    kinds = set()
    for seed in range(1000):
        r = fuzz_invariance(seed, 50, restricted=restricted, cap=12)
        assert r.ok, str(r)
        assert len(r.log) == 50
        kinds |= r.kinds_applied()
    return kinds


def test_criterion_5_move_fuzz(capsys):
    with criterion(capsys, 5, "1000 x 50 random moves, both modes, cap 12", 600.0):
        assert _fuzz_all(False) == set(MoveKind)
        assert _fuzz_all(True) == set(MoveKind) - RESTRICTED_FORBIDDEN


def test_criterion_6_prefactor(capsys):
    with criterion(capsys, 6, "R1 shifts writhe by 1, flat R2 shifts flats by 2, X fixed", 60.0):
        rng = random.Random(6)
        for _ in range(100):
            d = random_diagram(rng)
            x = flat_virtual_jones(d)
            site = random_site(d, MoveKind.R1_INSERT, rng)
            e = apply(d, MoveKind.R1_INSERT, site)
            assert writhe(e) - writhe(d) == site.sign
            assert flat_virtual_jones(e) == x
            back = apply(e, MoveKind.R1_DELETE, CrossingSet((max(e.crossings),)))
            assert writhe(back) - writhe(e) == -site.sign
            assert flat_virtual_jones(back) == x

            f = apply(d, MoveKind.FLAT_R2_INSERT, random_site(d, MoveKind.FLAT_R2_INSERT, rng))
            assert len(f.flat_ids) == len(d.flat_ids) + 2
            assert flat_virtual_jones(f) == x
            for site in enumerate_sites(f, MoveKind.FLAT_R2_DELETE):
                g = apply(f, MoveKind.FLAT_R2_DELETE, site)
                assert len(g.flat_ids) == len(f.flat_ids) - 2
                assert flat_virtual_jones(g) == x


def _diagram_16(rng: random.Random) -> Diagram:
    crossings = {}
    tokens = []
    for cid in range(1, 17):
        crossings[cid] = Classical(rng.choice((1, -1)))
        tokens += [Visit(cid, Role.OVER), Visit(cid, Role.UNDER)]
    for cid in range(17, 17 + rng.randint(0, 4)):
        crossings[cid] = Flat(rng.choice((1, -1)))
        tokens += [Visit(cid, Role.FLAT)] * 2
    rng.shuffle(tokens)
    cuts = sorted(rng.sample(range(1, len(tokens)), rng.randint(0, 2)))
    bounds = [0, *cuts, len(tokens)]
    comps = tuple(tuple(tokens[a:b]) for a, b in zip(bounds, bounds[1:]))
    return Diagram(comps, crossings)


def test_criterion_7_parallel_determinism(capsys):
    with criterion(capsys, 7, "16-crossing X identical for 1, 2, 8 workers", 300.0):
        rng = random.Random(7)
        for _ in range(20):
            d = _diagram_16(rng)
            outs = {str(flat_virtual_jones(d, workers=w)).encode() for w in (1, 2, 8)}
            assert len(outs) == 1


GROUPS = [(2,), (3,), (4,), (2, 2), (2, 3), (3, 1)]


def test_criterion_8_equivariance(capsys):
    with criterion(capsys, 8, "phi commutes with group rotations on 50 curves", 60.0):
        rng = random.Random(8)
        with_flats = 0
        for i in range(50):
            group = GroupSpec(GROUPS[i % len(GROUPS)])
            torus = len(group.orders) == 2
            curve, d = random_generic(rng, group)
            with_flats += bool(d.flat_ids)
            x = str(flat_virtual_jones(d))
            for g in group.elements():
                shifted = rotate(curve, g if torus else g[0])
                e = (phi_torus if torus else phi)(shifted, group)
                assert str(flat_virtual_jones(e)) == x
        assert with_flats >= 10


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
