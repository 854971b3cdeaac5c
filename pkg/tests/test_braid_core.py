from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from braidforce import braid_core as bc
from braidforce import word_algebra as wa
from braidforce.errors import InputError, WindowTooSmall

from conftest import FIXTURES


def B(*rows, perm=None) -> bc.DiscretizedBraid:
    return bc.DiscretizedBraid.from_anchors(rows, perm)


@st.composite
def positive_words(draw, max_m: int = 4, max_len: int = 6) -> wa.PositiveWord:
    m = draw(st.integers(2, max_m))
    letters = draw(st.lists(st.integers(1, m - 1), max_size=max_len))
    return wa.PositiveWord(m, tuple(letters))


def test_validate_clauses():
    assert bc.validate(B((0, 1, 0), (1, 0, 1)))
    assert bc.validate(B((0, 1, 0), (1, 1, 1))).clause == 'c'
    assert bc.validate(B((0, 1, 2), (1, 2, 0))).clause == 'b'
    assert bc.validate(B((0, 1), (1, 0, 1))).clause == 'a'


def test_transverse_tie_is_allowed():
    # strands meet at slice 1 and swap order: a transverse crossing
    v = bc.validate(B((0, 1, 2, 0), (2, 1, 0, 2)))
    assert v.ok


def test_permutation_inferred():
    b = B((0, 1, 2), (2, 1, 0))
    assert b.perm == (1, 0)
    assert b.x(0, 2) == 2 and b.x(0, 4) == 0


def test_word_of_fixture():
    b = bc.parse_braid((FIXTURES / 'b_1221.braid').read_text())[0]
    assert bc.braid_word(b).letters == (1, 2, 2, 1)
    assert bc.word_metric(b) == 4


def test_regularize_preserves_word():
    b = B((0, 1, 2, 0), (2, 1, 0, 2))
    r = bc.regularize(b)
    assert bc.is_regular(r)
    assert bc.braid_word(r) == bc.braid_word(b)


def test_operators_preserve_validity():
    b = bc.parse_braid((FIXTURES / 'b_1221.braid').read_text())[0]
    for op in (bc.extend_E, bc.twist_T2, bc.dual_D, bc.augment_star, bc.augment_saw):
        assert bc.validate(op(b)), op.__name__
    assert bc.extend_E(b).d == b.d + 1
    assert bc.twist_T2(b).d == b.d + 2


def test_full_twist_adds_delta_squared():
    b = bc.parse_braid((FIXTURES / 'b_1221.braid').read_text())[0]
    w = bc.braid_word(bc.twist_T2(b))
    assert len(w) == len(bc.braid_word(b)) + 3 * 2


def test_star_strands_bound_everything():
    b = B((0, 3, 0), (3, 0, 3))
    s = bc.augment_star(b)
    assert all(s.strands[2][j] < min(b.slice(j)) and s.strands[3][j] > max(b.slice(j)) for j in range(3))


def test_normalize_window():
    b = B((Fraction(1, 3), 5, Fraction(1, 3)), (2, -1, 2))
    lf = bc.normalize(b)
    assert all(v.denominator == 1 for row in lf.braid.rows() for v in row)
    assert bc.braid_word(lf.braid) == bc.braid_word(b)
    with pytest.raises(WindowTooSmall):
        bc.normalize(b, (0, 2))


def test_parse_errors():
    with pytest.raises(InputError):
        bc.parse_braid((FIXTURES / 'malformed.braid').read_text())
    with pytest.raises(InputError):
        bc.parse_braid('braid m=2 d=1\n0 1\n')
    with pytest.raises(InputError):
        bc.parse_braid('strands\n0 1\n')


def test_parse_colors():
    b, colors = bc.parse_braid('braid m=2 d=2\n0 1 0 color: red\n1 0 1\n')
    assert colors == ['red', 'black'] and b.m == 2


def test_pair_crossings_even_on_pure_pairs():
    b = B((0, 2, 0), (2, 0, 2))
    assert bc.pair_crossings(b, 0, 1) == 2


@given(positive_words())
@settings(max_examples=60, deadline=None)
def test_ev_round_trip(w):
    b = bc.ev(w)
    assert bc.validate(b)
    assert bc.braid_word(b) == w


@given(positive_words(), st.integers(0, 2))
@settings(max_examples=40, deadline=None)
def test_format_parse_round_trip(w, q):
    b = bc.ev(w, q)
    b2, _ = bc.parse_braid(bc.format_braid(b))
    assert b2.rows() == b.rows()


@given(positive_words(max_len=5))
@settings(max_examples=40, deadline=None)
def test_operators_on_words(w):
    b = bc.ev(w)
    assert bc.braid_word(bc.extend_E(b)) == w
    assert bc.word_metric(bc.twist_T2(b)) == len(w) + w.m * (w.m - 1)
    assert bc.braid_word(bc.normalize(b).braid) == w
