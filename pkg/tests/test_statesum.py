import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import W_STRING
from flatvirtual.diagram import UNKNOT, Classical, Diagram, Flat, Role, Visit, forget, writhe
from flatvirtual.moves import FlatR2Insert, Gap, MoveKind, apply, random_diagram, random_site
from flatvirtual.poly import Poly2
from flatvirtual.statesum import (
    GammaCounts,
    Loop,
    LoopSet,
    StateCapExceeded,
    StateMismatchError,
    flat_virtual_jones,
    gamma,
    loop_circle,
    prefactor,
    smooth,
    state_table,
)
from strategies import diagrams

O, U, FP = Role.OVER, Role.UNDER, Role.FLAT
UNKNOT_X = Poly2.parse("-a^-2 - a^2")


def kink(sign):
    return Diagram(((Visit(1, O), Visit(1, U)),), {1: Classical(sign)})


def test_unknot():
    d = Diagram.unknot()
    ls = smooth(d, {})
    assert len(ls) == 1
    assert ls.loops[0].flats == frozenset()
    assert gamma(ls) == GammaCounts(1, 0, 0, 0)
    assert flat_virtual_jones(d) == UNKNOT_X
    assert str(flat_virtual_jones(d)) == "-a^-2 - a^2"


@pytest.mark.parametrize("sign", [1, -1])
def test_kink(sign):
    d = kink(sign)
    assert sorted(len(smooth(d, {1: b})) for b in (0, 1)) == [1, 2]
    assert flat_virtual_jones(d) == UNKNOT_X


def test_state_mismatch(w_diagram):
    with pytest.raises(StateMismatchError, match="state/crossing-set mismatch"):
        smooth(w_diagram, {1: 0})
    with pytest.raises(StateMismatchError):
        smooth(w_diagram, {1: 0, 2: 0, 3: 0})


def test_gamma_parity():
    loops = LoopSet(
        tuple(Loop(frozenset(), frozenset(f)) for f in ({}, {1, 2}, {1}, {2}))
    )
    g = gamma(loops)
    assert (g.gamma_even, g.gamma_odd) == (2, 2)


def test_w_states(w_diagram):
    ls = smooth(w_diagram, {1: 0, 2: 0})
    assert sorted(len(lp.flats) % 2 for lp in ls.loops) == [0, 1, 1]
    g = gamma(smooth(w_diagram, {1: 1, 2: 1}))
    assert (g.gamma_even, g.gamma_odd) == (1, 0)


def test_w_invariant(w_diagram):
    x = flat_virtual_jones(w_diagram)
    assert str(x) == W_STRING
    assert x != UNKNOT_X


def test_w_state_table(w_diagram):
    rows = state_table(w_diagram)
    c = loop_circle()
    b2 = Poly2.monomial(0, 2)
    expected = Counter([Poly2.monomial(2) * c * b2, b2, b2, Poly2.monomial(-2) * c])
    assert Counter(r.contribution for r in rows) == expected
    assert [tuple(r.state.values()) for r in rows] == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_table_sizes():
    assert len(state_table(Diagram.unknot())) == 1
    assert state_table(Diagram.unknot())[0].contribution == UNKNOT_X
    assert len(state_table(kink(1))) == 2


def test_cap():
    d = random_diagram(random.Random(0), max_classical=0)
    n = 5
    comps = (tuple(Visit(i, r) for i in range(1, n + 1) for r in (O, U)),)
    big = Diagram(comps, {i: Classical(1) for i in range(1, n + 1)})
    with pytest.raises(StateCapExceeded):
        state_table(big, cap=4)
    with pytest.raises(StateCapExceeded):
        flat_virtual_jones(big, cap=4)
    assert flat_virtual_jones(d, cap=0) is not None


@given(diagrams())
def test_table_sums_to_invariant(d):
    total = sum((r.contribution for r in state_table(d)), Poly2())
    assert total * prefactor(writhe(d)) == flat_virtual_jones(d)
    for r in state_table(d):
        assert r.counts.alpha + r.counts.beta == len(d.classical_ids)


@given(diagrams(), st.randoms(use_true_random=False))
def test_symmetries(d, rnd):
    comps = [c if c is UNKNOT else tuple(c[k:] + c[:k]) for c in d.components for k in [rnd.randrange(max(1, len(c)))]]
    rnd.shuffle(comps)
    perm = dict(zip(d.crossings, rnd.sample(range(1, 50), len(d.crossings))))
    comps = [c if c is UNKNOT else tuple(Visit(perm[v.crossing], v.role) for v in c) for c in comps]
    e = Diagram(tuple(comps), {perm[k]: v for k, v in d.crossings.items()})
    assert flat_virtual_jones(e) == flat_virtual_jones(d)


@given(diagrams())
def test_flat_bits_ignored(d):
    flipped = Diagram(
        d.components, {k: Flat(-v.bit) if isinstance(v, Flat) else v for k, v in d.crossings.items()}
    )
    assert flat_virtual_jones(flipped) == flat_virtual_jones(d)


@given(diagrams(max_flat=0))
def test_flat_free_has_no_b(d):
    assert flat_virtual_jones(d).b_degree() == 0


@given(diagrams())
def test_degree_bound(d):
    n = len(d.classical_ids)
    rows = state_table(d)
    most = max(r.counts.gamma_even + r.counts.gamma_odd for r in rows)
    x = flat_virtual_jones(d)
    for r in rows:
        lo, hi = r.contribution.a_degrees()
        assert -n - 2 * most <= lo and hi <= n + 2 * most
    assert x.b_degree() <= most


@settings(max_examples=30, deadline=None)
@given(diagrams(max_classical=9, max_flat=4))
def test_engines_agree(d):
    assert flat_virtual_jones(d, engine="python") == flat_virtual_jones(d, engine="numpy")


def test_workers_agree():
    rng = random.Random(3)
    d = random_diagram(rng, max_classical=14, max_flat=3)
    while len(d.classical_ids) < 14:
        d = random_diagram(rng, max_classical=14, max_flat=3)
    assert str(flat_virtual_jones(d, workers=1)) == str(flat_virtual_jones(d, workers=2))


@given(diagrams(), st.randoms(use_true_random=False))
def test_flat_r2_changes_loop_counts_by_0_or_2(d, rnd):
    site = random_site(d, MoveKind.FLAT_R2_INSERT, rnd)
    e = apply(d, MoveKind.FLAT_R2_INSERT, site)
    new = set(e.flat_ids) - set(d.flat_ids)
    assert len(new) == 2
    ids = d.classical_ids
    for bits in range(1 << len(ids)):
        s = {c: (bits >> i) & 1 for i, c in enumerate(ids)}
        before, after = smooth(d, s), smooth(e, s)
        assert len(before) == len(after)
        assert Counter(lp.flats for lp in before.loops) == Counter(lp.flats - new for lp in after.loops)
        assert all(len(lp.flats & new) in (0, 2) for lp in after.loops)
        assert gamma(before) == gamma(after)


def test_forget_leaves_single_state(w_diagram):
    f = forget(w_diagram)
    assert len(state_table(f)) == 1
