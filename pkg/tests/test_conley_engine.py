import functools

import pytest
from hypothesis import given, settings, strategies as st

from braidforce import braid_core as bc
from braidforce import colored_classes as cc
from braidforce import conley_engine as ce
from braidforce import word_algebra as wa
from braidforce.errors import DomainError

from conftest import FIXTURES
from sweep import proper_bounded_classes


def one_free() -> cc.ColoredDiscretizedBraid:
    return cc.parse_colored_braid((FIXTURES / 'one_free.braid').read_text())


def test_one_free_index():
    h = ce.braid_index(one_free())
    assert h.poincare == {1: 1}
    assert h.poincare_str() == 't'
    assert 'P_t = t' in h.report()


def test_one_free_index_pair():
    pair = ce.build_index_pair(cc.fiber(one_free(), star=True), 0)
    exit_set = pair.exit_set()
    closure = pair.closure()
    assert exit_set.cells <= closure.cells
    for c in exit_set.cells:
        assert all(f in exit_set.cells for f in ce.faces_all(c))
    assert ce.euler_characteristic(pair) == -1


def test_boundary_squares_to_zero():
    acc: dict = {}
    for f, s in ce.facets((1, 3, 5)):
        for g, t in ce.facets(f):
            acc[g] = acc.get(g, 0) + s * t
    assert all(v == 0 for v in acc.values())


def test_torsion_detected():
    # RP^2-like complex: a 2-cell wrapping a 1-cycle twice
    v, e = (2,), (1,)
    bd = {e: {}, v: {}, (1, 1): {e: 2}}
    h = ce.chain_homology(bd, 2)
    assert h.torsion[1] == (2,)
    h2 = ce.chain_homology(bd, 2, 'z2')
    assert h2.betti[1] == 1 and h2.betti[2] == 1


def test_wedge_and_shift():
    a = ce.HomologyResult((0, 1), ((), ()))
    b = ce.HomologyResult((1,), ((),))
    w = ce.wedge([a, b])
    assert w.betti == (1, 1)
    assert a.shifted(2).poincare == {3: 1}


def test_improper_refused():
    ab = cc.realize(wa.ColoredWord(wa.PositiveWord(3, (1, 1, 2, 2)), frozenset({3})))
    with pytest.raises(DomainError) as exc:
        ce.braid_index(ab)
    assert exc.value.reason == 'improper-class'


def test_one_free_stabilization_and_duality():
    assert ce.check_stabilization(one_free())
    assert ce.check_duality(one_free())


def test_odd_period_duality_refused():
    ab = cc.realize(wa.parse_colored((FIXTURES / 'twist_pair.word').read_text().strip()), 1)
    assert ab.d % 2 == 1
    with pytest.raises(DomainError):
        ce.check_duality(ab)


@functools.cache
def family() -> list:
    return list(proper_bounded_classes(3, 3))


@st.composite
def proper_bounded(draw) -> cc.ColoredDiscretizedBraid:
    ab = draw(st.sampled_from(family()))
    return cc.realize(ab.colored_word(), draw(st.integers(0, 1)))


@given(proper_bounded())
@settings(max_examples=30, deadline=None)
def test_reduced_and_naive_homology_agree(ab):
    fc = cc.fiber(ab, star=True)
    for k in range(len(fc.components)):
        pair = ce.build_index_pair(fc, k)
        for coeff in ('z', 'z2'):
            assert ce.relative_homology(pair, coeff).same(ce.naive_relative_homology(pair, coeff))
        h = ce.relative_homology(pair)
        assert sum((-1) ** i * b for i, b in enumerate(h.betti)) == ce.euler_characteristic(pair)


@given(proper_bounded())
@settings(max_examples=20, deadline=None)
def test_index_independent_of_representative(ab):
    h = ce.braid_index(ab)
    r = bc.normalize(ab.braid).braid
    ab2 = cc.ColoredDiscretizedBraid(r, ab.colors)
    assert ce.braid_index(ab2).same(h)
