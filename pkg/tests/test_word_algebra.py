import pytest
from hypothesis import assume, given, settings, strategies as st

from braidforce import word_algebra as wa
from braidforce.errors import InputError
from braidforce.word_algebra import ColoredWord, PositiveWord


def W(m, *letters):
    return PositiveWord(m, tuple(letters))


@st.composite
def positive_words(draw, max_m=4, max_len=8):
    m = draw(st.integers(2, max_m))
    letters = draw(st.lists(st.integers(1, m - 1), max_size=max_len))
    return PositiveWord(m, tuple(letters))


@st.composite
def colored_words(draw, max_m=4, max_len=7):
    w = draw(positive_words(max_m, max_len))
    cyc = wa.cycles(wa.word_perm(w.m, w.letters))
    if len(cyc) < 2:
        w = w * PositiveWord(w.m, ())
        cyc = [tuple(range(w.m))]
    pick = draw(st.lists(st.booleans(), min_size=len(cyc), max_size=len(cyc)))
    if len(cyc) > 1 and (all(pick) or not any(pick)):
        pick = [True] + [False] * (len(cyc) - 1)
    red = {p + 1 for c, k in zip(cyc, pick) if k for p in c}
    assume(0 < len(red) < w.m)
    return ColoredWord(w, frozenset(red))


def test_permutation_and_composition():
    assert W(3, 1, 2).permutation() == (3, 1, 2)
    assert wa.word_perm(3, ()) == (0, 1, 2)
    p = wa.word_perm(4, (1, 3, 2))
    assert wa.compose(p, wa.inverse(p)) == (0, 1, 2, 3)


def test_letters_out_of_range():
    with pytest.raises(InputError):
        W(3, 3)


def test_braid_relations():
    assert wa.positive_equal(W(3, 1, 2, 1), W(3, 2, 1, 2))
    assert wa.positive_equal(W(4, 1, 3), W(4, 3, 1))
    assert not wa.positive_equal(W(3, 1, 2), W(3, 2, 1))


def test_conjugacy_class_example():
    cls = wa.conjugacy_class(W(3, 1, 2, 2, 1))
    assert {u.letters for u in cls.members} == {(1, 2, 2, 1), (2, 2, 1, 1), (2, 1, 1, 2), (1, 1, 2, 2)}
    assert cls.canonical == W(3, 1, 1, 2, 2)


def test_full_twist_and_normal_forms():
    sq = wa.full_twist(3)
    assert len(sq) == 6
    assert wa.divisible_by_full_twist(sq * W(3, 1))
    assert not wa.divisible_by_full_twist(W(3, 1, 2, 2, 1))
    nf = wa.symmetric_normal_form(0, sq * sq * W(3, 2))
    assert nf.power == 2 and nf.base == W(3, 2)
    assert wa.positive_equal(nf.reconstruct(), sq * sq * W(3, 2))


def test_strip_full_twists_colored_tracks_red():
    gw = ColoredWord(wa.full_twist(3) * W(3, 1), frozenset({3}))
    lam, rest = wa.strip_full_twists_colored(gw)
    assert lam == 1 and wa.colored_conjugate(rest, ColoredWord(W(3, 1), frozenset({3})))


def test_conjugate_mod_full_twist():
    beta = W(3, 1, 2)
    assert wa.conjugate_mod_full_twist(beta * wa.full_twist(3), beta) == 1
    assert wa.conjugate_mod_full_twist(beta, beta * wa.full_twist(3)) == -1
    assert wa.conjugate_mod_full_twist(W(3, 1, 2), W(3, 2, 1)) == 0
    assert wa.conjugate_mod_full_twist(W(3, 1, 1), W(3, 1, 2)) is None


def test_project_color_example():
    gw = ColoredWord(W(3, 2, 1, 2), frozenset({2}))
    assert wa.project_color(gw, 'black') == W(2, 1)
    assert wa.project_color(gw, 'red') == PositiveWord(1, ())


def test_colored_conjugacy_example():
    assert wa.colored_conjugate(ColoredWord(W(3, 2, 1, 2), frozenset({2})), ColoredWord(W(3, 1, 2, 2), frozenset({3})))
    assert not wa.colored_conjugate(ColoredWord(W(3, 1, 1, 2, 2), frozenset({1})), ColoredWord(W(3, 1, 1, 2, 2), frozenset({2})))


def test_parse_and_format():
    assert wa.parse_word('s1 s2 s2 s1') == W(3, 1, 2, 2, 1)
    assert wa.parse_word('σ1 σ2') == W(3, 1, 2)
    gw = wa.parse_colored('m=5: 4 1 2 3 2 2 3 2 1 4; red={3}')
    assert gw.red == frozenset({3}) and gw.word.m == 5
    assert wa.parse_colored(wa.format_colored(gw)) == gw
    with pytest.raises(InputError):
        wa.parse_word('1 two')


@settings(max_examples=150, deadline=None)
@given(positive_words(max_len=7))
def test_garside_and_rewriting_agree(u):
    """Normal-form equality and exhaustive rewriting decide the word problem identically."""
    closure = wa.equality_closure(u)
    for v in list(closure)[:5]:
        assert wa.positive_equal(u, PositiveWord(u.m, v), 'garside')
    nf = wa.normal_form_word(u)
    assert nf.letters in closure


@settings(max_examples=100, deadline=None)
@given(positive_words(max_len=6), positive_words(max_len=6))
def test_equality_routes_on_pairs(u, v):
    if u.m != v.m:
        return
    assert wa.positive_equal(u, v, 'bfs') == wa.positive_equal(u, v, 'garside')


@settings(max_examples=100, deadline=None)
@given(positive_words(max_len=7))
def test_conjugacy_class_invariants(u):
    cls = wa.conjugacy_class(u)
    cyc = sorted(len(c) for c in wa.cycles(wa.word_perm(u.m, u.letters)))
    for w in cls.members:
        assert len(w) == len(u)
        assert sorted(len(c) for c in wa.cycles(wa.word_perm(w.m, w.letters))) == cyc


@settings(max_examples=200, deadline=None)
@given(colored_words())
def test_projection_matches_strand_removal(gw):
    """Simultaneous projection agrees with deleting red strands one at a time."""
    w = gw.word
    for p in sorted(gw.red, reverse=True):
        w = wa.remove_strand(w, p)
    assert wa.project_color(gw, 'black').letters == w.letters


@settings(max_examples=100, deadline=None)
@given(colored_words(max_len=6))
def test_colored_class_projects_into_conjugacy_class(gw):
    base = {v.letters for v in wa.conjugacy_class(wa.project_color(gw, 'black')).members}
    for letters, red in list(wa.colored_class(gw))[:20]:
        proj = wa.project_color(ColoredWord(PositiveWord(gw.word.m, letters), red), 'black')
        assert proj.letters in base


@settings(max_examples=100, deadline=None)
@given(positive_words(max_len=6), st.integers(0, 2))
def test_normal_form_reconstructs(u, k):
    w = wa.full_twist(u.m) ** k * u
    nf = wa.symmetric_normal_form(0, w)
    assert nf.power >= k
    assert wa.positive_equal(nf.reconstruct(), w, 'garside')
