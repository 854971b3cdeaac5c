import pytest
from hypothesis import assume, given, settings, strategies as st

from braidforce import braid_core as bc
from braidforce import colored_classes as cc
from braidforce import word_algebra as wa
from braidforce.errors import InputError

from conftest import FIXTURES


def CW(m: int, letters: tuple[int, ...], red: set[int]) -> wa.ColoredWord:
    return wa.ColoredWord(wa.PositiveWord(m, letters), frozenset(red))


def read_word(name: str) -> wa.ColoredWord:
    return wa.parse_colored((FIXTURES / name).read_text().strip())


def test_one_free_flags():
    ab = cc.parse_colored_braid((FIXTURES / 'one_free.braid').read_text())
    f = cc.class_flags(ab)
    assert (f.proper, f.bounded, f.free, f.acylindrical) == (True, True, False, (True,))


def test_twist_pair_flags():
    f = cc.class_flags(cc.realize(read_word('twist_pair.word')))
    assert f.proper and f.bounded and f.acylindrical == (True,)


def test_two_orbit_word_is_unbounded():
    f = cc.class_flags(cc.realize(read_word('two_orbit.word')))
    assert f.proper and not f.bounded


def test_collapse_is_improper():
    # red strand braids twice around one neighbour and then with the other: it can be pushed onto a black strand
    ab = cc.realize(CW(3, (1, 1, 2, 2), {3}))
    assert not cc.is_proper(ab)


def test_unlinked_red_is_cylindrical():
    ab = cc.realize(CW(3, (1, 1), {3}))
    assert not cc.is_acylindrical(ab)


def test_realize_matches_word():
    gw = read_word('twist_pair.word')
    base = cc.realize(gw).d
    for q in (0, 1):
        ab = cc.realize(gw, q)
        assert cc.validate_colored(ab)
        assert wa.colored_conjugate(ab.colored_word(), gw)
        assert ab.d == base + q


def test_parts_and_colors():
    ab = cc.parse_colored_braid((FIXTURES / 'one_free.braid').read_text())
    assert (ab.n, ab.m) == (1, 4)
    assert ab.part('black').m == 4 and ab.part('red').m == 1
    back = cc.parse_colored_braid(str(ab))
    assert back.braid.rows() == ab.braid.rows()


def test_red_must_close_up():
    with pytest.raises(InputError):
        cc.parse_colored_braid('braid m=2 d=2\n0 1 2 color: red\n2 1 0\n')


def test_fiber_component_is_stable():
    ab = cc.parse_colored_braid((FIXTURES / 'one_free.braid').read_text())
    fc = cc.fiber(ab)
    comp = fc.seed_component
    lat = fc.skeleton
    for g in list(comp)[:20]:
        assert all(h in comp for h in lat.moves(g))
    counts = {lat.crossing_count(g) for g in comp}
    assert len(counts) == 1


@st.composite
def one_red(draw) -> wa.ColoredWord:
    m = draw(st.integers(2, 4))
    letters = tuple(draw(st.lists(st.integers(1, m - 1), min_size=1, max_size=5)))
    perm = wa.word_perm(m, letters)
    fixed = [p + 1 for p in range(m) if perm[p] == p]
    assume(fixed)
    return CW(m, letters, {draw(st.sampled_from(fixed))})


@given(one_red())
@settings(max_examples=40, deadline=None)
def test_properness_invariant_under_extension(gw):
    ab = cc.realize(gw)
    assert cc.is_proper(ab) == cc.is_proper(ab.map(bc.extend_E))


def test_extension_can_lose_boundedness():
    # period one pins the red strand between the swapping pair; one more slice lets it escape upward
    ab = cc.realize(CW(3, (2, 1, 2), {2}))
    assert ab.d == 1 and cc.is_bounded(ab)
    assert not cc.is_bounded(ab.map(bc.extend_E))


@given(one_red())
@settings(max_examples=40, deadline=None)
def test_projection_commutes_with_realize(gw):
    ab = cc.realize(gw)
    assert wa.conjugate_mod_full_twist(bc.braid_word(ab.part('black')), wa.project_color(gw, 'black')) == 0
