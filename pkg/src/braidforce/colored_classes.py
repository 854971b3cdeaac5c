"""
2-colored discretized braids a rel b, fibers over a fixed skeleton, and the class flags.

For a single free strand (n = 1) the fiber is handled on a rank lattice. At every slice the skeleton
strands sit at heights 2·rank and the red strand sits in a gap, at height 2g+1, where g counts the
skeleton strands below it. A red configuration is a tuple of d gaps, one per slice, and is the center
of a top-dimensional cube of the cubical complex used by the index computation. Two configurations
are joined by a lattice move when the red anchor at one slice passes a skeleton anchor through a
transverse tie. For n > 1 the fiber is enumerated over order types of the full braid with the
skeleton order frozen.
"""

from __future__ import annotations

import dataclasses
import itertools
from collections import deque
from fractions import Fraction
from typing import Iterable, Sequence

from . import braid_core as bc
from .errors import DomainError, InputError
from .word_algebra import ColoredWord, PositiveWord, colored_conjugate, compose, inverse, left_normal_form

Cell = tuple[int, ...]
Gaps = tuple[int, ...]


@dataclasses.dataclass(frozen=True)
class ColoredDiscretizedBraid:
    braid: bc.DiscretizedBraid
    colors: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'colors', tuple(self.colors))
        if len(self.colors) != self.braid.m:
            raise InputError('one color per strand required')
        if any(c not in ('red', 'black') for c in self.colors):
            raise InputError('colors must be red or black')
        if self.braid.perm is not None:
            for mu, c in enumerate(self.colors):
                if self.colors[self.braid.perm[mu]] != c:
                    raise InputError('the permutation must not mix red and black strands')

    @classmethod
    def from_parts(cls, red: Iterable[Sequence[object]], black: Iterable[Sequence[object]]) -> ColoredDiscretizedBraid:
        red, black = list(red), list(black)
        b = bc.DiscretizedBraid.from_anchors(red + black)
        return cls(b, ('red',) * len(red) + ('black',) * len(black))

    @property
    def d(self) -> int:
        return self.braid.d

    @property
    def red_idx(self) -> list[int]:
        return [mu for mu, c in enumerate(self.colors) if c == 'red']

    @property
    def black_idx(self) -> list[int]:
        return [mu for mu, c in enumerate(self.colors) if c == 'black']

    @property
    def n(self) -> int:
        return len(self.red_idx)

    @property
    def m(self) -> int:
        return len(self.black_idx)

    def part(self, color: str) -> bc.DiscretizedBraid:
        idx = self.red_idx if color == 'red' else self.black_idx
        where = {mu: k for k, mu in enumerate(idx)}
        perm = tuple(where[self.braid.perm[mu]] for mu in idx)
        return bc.DiscretizedBraid.from_anchors([self.braid.strands[mu].anchors for mu in idx], perm)

    def colored_word(self) -> ColoredWord:
        r = self.braid if bc.is_regular(self.braid) else bc.regularize(self.braid)
        ranks = bc._ranks(r.slice(0))
        word = bc.braid_word(r)
        return ColoredWord(word, frozenset(ranks[mu] + 1 for mu in self.red_idx))

    def map(self, op) -> ColoredDiscretizedBraid:
        return ColoredDiscretizedBraid(op(self.braid), self.colors)

    def with_skeleton(self, skeleton: bc.DiscretizedBraid) -> ColoredDiscretizedBraid:
        rows = [self.braid.strands[mu].anchors for mu in self.red_idx] + [s.anchors for s in skeleton.strands]
        return ColoredDiscretizedBraid(bc.DiscretizedBraid.from_anchors(rows),
                                       ('red',) * self.n + ('black',) * skeleton.m)

    def __str__(self) -> str:
        return bc.format_braid(self.braid, self.colors)


def validate_colored(ab: ColoredDiscretizedBraid) -> bc.Validation:
    return bc.validate(ab.braid)


def parse_colored_braid(text: str) -> ColoredDiscretizedBraid:
    b, colors = bc.parse_braid(text)
    return ColoredDiscretizedBraid(b, tuple(colors))


def realize(gw: ColoredWord, q: int = 0) -> ColoredDiscretizedBraid:
    """
    A representative of a colored word with one permutation braid per step.

    The steps are the factors of the left normal form, so the period is the smallest a greedy
    factorization allows; q constant steps are appended.
    """
    m = gw.word.m
    inf, factors = left_normal_form(gw.word)
    delta = tuple(range(m - 1, -1, -1))
    steps = [delta] * inf + list(factors)
    if not steps:
        steps = [tuple(range(m))]
    pos = list(range(m))
    rows = [[Fraction(p + 1)] for p in pos]
    for f in steps:
        pos = [f[p] for p in pos]
        for mu in range(m):
            rows[mu].append(Fraction(pos[mu] + 1))
    for _ in range(q):
        for mu in range(m):
            rows[mu].append(rows[mu][-1])
    colors = tuple('red' if mu + 1 in gw.red else 'black' for mu in range(m))
    return ColoredDiscretizedBraid(bc.DiscretizedBraid.from_anchors(rows), colors)


# ---------------------------------------------------------------------------
# rank lattice for one free strand


@dataclasses.dataclass(frozen=True)
class SkeletonLattice:
    """
    Skeleton ranks per slice. ranks[j][α] is the 1-based rank of skeleton strand α at slice j for
    j = 0..d, where slice d is slice 0 relabeled through τ. With star=True the first and last rank are
    the two augmentation strands.
    """
    ranks: tuple[tuple[int, ...], ...]
    perm: tuple[int, ...]
    star: bool
    fixed: tuple[int, ...]     # strands α with τ(α) = α that may collapse with the red strand

    @property
    def d(self) -> int:
        return len(self.ranks) - 1

    @property
    def M(self) -> int:
        return len(self.perm)

    def value(self, alpha: int, s: int) -> int:
        q, r = divmod(s, self.d)
        for _ in range(abs(q)):
            alpha = self.perm[alpha] if q > 0 else self._inv[alpha]
        return 2 * self.ranks[r][alpha]

    @property
    def _inv(self) -> tuple[int, ...]:
        return inverse(self.perm)

    def strand_at(self, j: int, k: int) -> int:
        return self.ranks[j].index(k)

    def flips(self) -> list[list[list[int]]]:
        """flip[j][g][g2] = skeleton strands crossed by the red strand in segment j from gap g to gap g2."""
        M, d = self.M, self.d
        out = []
        for j in range(d):
            a, b = self.ranks[j], self.ranks[j + 1]
            tab = [[0] * (M + 1) for _ in range(M + 1)]
            for g in range(M + 1):
                for g2 in range(M + 1):
                    tab[g][g2] = sum(1 for al in range(M) if (a[al] <= g) != (b[al] <= g2))
            out.append(tab)
        return out

    def transverse(self, gaps: Gaps, j: int, up: bool) -> bool:
        """Whether the red anchor at slice j may pass the neighboring skeleton anchor (up or down)."""
        g = gaps[j]
        k = g + 1 if up else g
        if not 1 <= k <= self.M:
            return False
        alpha = self.strand_at(j, k)
        d = self.d

        def red(s: int) -> int:
            return 2 * k if (s - j) % d == 0 else 2 * gaps[s % d] + 1

        before = red(j - 1) - self.value(alpha, j - 1)
        after = red(j + 1) - self.value(alpha, j + 1)
        return before * after < 0

    def moves(self, gaps: Gaps) -> list[Gaps]:
        out = []
        for j in range(self.d):
            for up in (False, True):
                if self.transverse(gaps, j, up):
                    new = list(gaps)
                    new[j] += 1 if up else -1
                    out.append(tuple(new))
        return out

    def crossing_count(self, gaps: Gaps, flip: list | None = None) -> int:
        flip = flip or self.flips()
        d = self.d
        return sum(flip[j][gaps[j]][gaps[(j + 1) % d]] for j in range(d))


def lattice_of(ab: ColoredDiscretizedBraid, star: bool) -> tuple[SkeletonLattice, Gaps]:
    """Rank lattice of the skeleton and the gap tuple of the (single) red strand."""
    if ab.n != 1:
        raise DomainError(f'the rank lattice handles one free strand, got n={ab.n}', 'unsupported')
    r = ab.braid if bc.is_regular(ab.braid) else bc.regularize(ab.braid)
    red = ab.red_idx[0]
    if r.perm[red] != red:
        raise DomainError('free strand must close on itself', 'unsupported')
    black = ab.black_idx
    m, d = len(black), r.d
    where = {mu: k for k, mu in enumerate(black)}
    perm = [where[r.perm[mu]] for mu in black]
    ranks = []
    gaps = []
    for j in range(d + 1):
        col = r.slice(j)
        order = sorted(black, key=lambda mu: col[mu])
        rk = [0] * m
        for k, mu in enumerate(order):
            rk[where[mu]] = k + 1
        g = sum(1 for mu in black if col[mu] < col[red])
        if star:
            rk = [k + 1 for k in rk] + [1, m + 2]
            g += 1
        ranks.append(tuple(rk))
        gaps.append(g)
    if star:
        perm += [m, m + 1]
    fixed = tuple(a for a in range(m) if perm[a] == a)
    lat = SkeletonLattice(tuple(ranks), tuple(perm), star, fixed)
    return lat, tuple(gaps[:d])


def component(lat: SkeletonLattice, seed: Gaps, limit: int = 2_000_000) -> frozenset[Gaps]:
    seen = {seed}
    queue = deque([seed])
    while queue:
        g = queue.popleft()
        for h in lat.moves(g):
            if h not in seen:
                seen.add(h)
                queue.append(h)
                if len(seen) > limit:
                    raise DomainError(f'fiber component exceeds {limit} configurations', 'too-large')
    return frozenset(seen)


def _unbounded_closure(lat: SkeletonLattice, seed: Gaps) -> tuple[frozenset[Gaps], bool]:
    """Component in the lattice without star strands; outer gaps are rays, reported as unbounded."""
    comp = component(lat, seed)
    touches = any(g in (0, lat.M) for c in comp for g in c)
    return comp, touches


def lattice_word(lat: SkeletonLattice, gaps: Gaps) -> ColoredWord:
    m = lat.M
    rows = [[Fraction(2 * lat.ranks[j][a]) for j in range(lat.d + 1)] for a in range(m)]
    red = [Fraction(2 * gaps[j % lat.d] + 1) for j in range(lat.d + 1)]
    ab = ColoredDiscretizedBraid(bc.DiscretizedBraid.from_anchors([red] + rows, (0,) + tuple(p + 1 for p in lat.perm)),
                                 ('red',) + ('black',) * m)
    return ab.colored_word()


# ---------------------------------------------------------------------------
# fibers and flags


@dataclasses.dataclass(frozen=True)
class FiberClass:
    skeleton: SkeletonLattice
    components: tuple[frozenset[Gaps], ...]
    seed: int = 0
    scope: str = 'component'
    source: ColoredDiscretizedBraid | None = None

    @property
    def seed_component(self) -> frozenset[Gaps]:
        return self.components[self.seed] if self.components else frozenset()


@dataclasses.dataclass(frozen=True)
class ClassFlags:
    proper: bool
    bounded: bool
    free: bool | None
    acylindrical: tuple[bool, ...]
    witness: dict = dataclasses.field(default_factory=dict, compare=False)

    def summary(self) -> str:
        free = 'n/a' if self.free is None else str(self.free).lower()
        acyl = ','.join(str(a).lower() for a in self.acylindrical)
        return (f'proper: {str(self.proper).lower()}\nbounded: {str(self.bounded).lower()}\n'
                f'free: {free}\nacylindrical: {acyl}\n')


def fiber(ab: ColoredDiscretizedBraid, window: tuple[int, int] | None = None, scope: str = 'component',
          star: bool = False, word_limit: int = 16) -> FiberClass:
    """
    Fiber of the class of ab over its skeleton.

    scope='component' returns the path component of ab. scope='class' adds every other component of
    the fiber whose colored word is colored-conjugate to that of ab; it enumerates all gap tuples and
    is meant for short words.
    """
    v = bc.validate(ab.braid)
    if not v:
        raise InputError(f'invalid braid, clause ({v.clause}): {v.detail}')
    bc._check_window(ab.braid.m, window)
    if ab.n == 0:
        lat, _ = _empty_lattice(ab, star)
        return FiberClass(lat, (frozenset({()}),), 0, scope, ab)
    if ab.n > 1:
        return _fiber_multi(ab, scope)
    lat, seed = lattice_of(ab, star)
    comp = component(lat, seed)
    comps = [comp]
    if scope == 'class':
        gw = ab.colored_word()
        if len(gw.word) > word_limit:
            raise DomainError(f'class scope limited to words of length <= {word_limit}', 'too-large')
        length = len(gw.word)
        flip = lat.flips()
        base = length - lat.crossing_count(seed, flip)
        done = set(comp)
        rng = range(1, lat.M) if star else range(0, lat.M + 1)
        for g in itertools.product(rng, repeat=lat.d):
            if g in done or base + lat.crossing_count(g, flip) != length:
                continue
            c = component(lat, g)
            done |= c
            if colored_conjugate(lattice_word(lat, g), gw):
                comps.append(c)
    elif scope != 'component':
        raise InputError(f'unknown fiber scope {scope!r}')
    return FiberClass(lat, tuple(comps), 0, scope, ab)


def _empty_lattice(ab: ColoredDiscretizedBraid, star: bool) -> tuple[SkeletonLattice, Gaps]:
    b = ab.part('black')
    m, d = b.m, b.d
    ranks = []
    for j in range(d + 1):
        rk = bc._ranks(b.slice(j))
        rk = [k + 1 for k in rk]
        if star:
            rk = [k + 1 for k in rk] + [1, m + 2]
        ranks.append(tuple(rk))
    perm = list(b.perm) + ([m, m + 1] if star else [])
    return SkeletonLattice(tuple(ranks), tuple(perm), star, ()), ()


def _collapse_witness(lat: SkeletonLattice, comp: Iterable[Gaps]) -> Gaps | None:
    d = lat.d
    for alpha in lat.fixed:
        if lat.star and alpha >= lat.M - 2:
            continue
        ks = [lat.ranks[j][alpha] for j in range(d)]
        for g in comp:
            if all(g[j] in (ks[j] - 1, ks[j]) for j in range(d)):
                return g
    return None


def is_proper(ab: ColoredDiscretizedBraid, window: tuple[int, int] | None = None) -> bool:
    return class_flags(ab, window, free=False).proper


def is_bounded(ab: ColoredDiscretizedBraid, window: tuple[int, int] | None = None) -> bool:
    return class_flags(ab, window, free=False).bounded


def is_acylindrical(ab: ColoredDiscretizedBraid, selector: int = 0, window: tuple[int, int] | None = None) -> bool:
    return class_flags(ab, window, free=False).acylindrical[selector]


def _escape_witness(lat: SkeletonLattice, comp: Iterable[Gaps]) -> Gaps | None:
    top = tuple([lat.M] * lat.d)
    bottom = tuple([0] * lat.d)
    s = set(comp)
    if top in s:
        return top
    if bottom in s:
        return bottom
    return None


def class_flags(ab: ColoredDiscretizedBraid, window: tuple[int, int] | None = None, free: bool = True) -> ClassFlags:
    if ab.n > 1:
        return _flags_multi(ab, window, free)
    fc = fiber(ab, window, star=False)
    lat = fc.skeleton
    witness: dict = {}
    comps = fc.components
    collapse = [_collapse_witness(lat, c) for c in comps]
    proper = all(w is None for w in collapse)
    if not proper:
        witness['collapse'] = next(w for w in collapse if w is not None)
    bounded = True
    for c in comps:
        if any(g in (0, lat.M) for cell in c for g in cell):
            bounded = False
            witness['unbounded'] = next(cell for cell in c if any(g in (0, lat.M) for g in cell))
            break
    acyl = []
    for c in comps:
        w = _escape_witness(lat, c)
        acyl.append(w is None)
        if w is not None and 'escape' not in witness:
            witness['escape'] = w
    fr = None
    if free:
        try:
            fr = bc.is_free(ab.braid)
        except DomainError:
            fr = None
    return ClassFlags(proper, bounded, fr, tuple(acyl), witness)


# ---------------------------------------------------------------------------
# several free strands: order types with the skeleton order frozen


def _fiber_multi(ab: ColoredDiscretizedBraid, scope: str) -> FiberClass:
    comp = _multi_component(ab)
    return FiberClass(SkeletonLattice((), (), False, ()), (frozenset(comp),), 0, scope, ab)


def _labeled_state(b: bc.DiscretizedBraid) -> tuple[tuple[int, ...], ...]:
    """Strand labels in rank order at each slice 0..d-1."""
    r = b if bc.is_regular(b) else bc.regularize(b)
    out = []
    for j in range(r.d):
        col = r.slice(j)
        out.append(tuple(sorted(range(r.m), key=lambda mu: col[mu])))
    return tuple(out)


def _multi_component(ab: ColoredDiscretizedBraid, limit: int = 500_000) -> set:
    """BFS over labeled order types; only pairs involving a red strand may pass through each other."""
    b = ab.braid
    perm = b.perm
    inv = inverse(perm)
    red = set(ab.red_idx)
    d, m = b.d, b.m
    start = _labeled_state(b)

    def rank_of(state, s: int) -> list[int]:
        q, r = divmod(s, d)
        order = state[r]
        rk = [0] * m
        for k, mu in enumerate(order):
            rk[mu] = k
        # slice s holds strand mu's continuation; relabel through τ^q
        out = [0] * m
        for mu in range(m):
            nu = mu
            for _ in range(abs(q)):
                nu = perm[nu] if q > 0 else inv[nu]
            out[mu] = rk[nu]
        return out

    def nbrs(state):
        for j in range(d):
            order = state[j]
            for k in range(m - 1):
                mu, nu = order[k], order[k + 1]
                if mu not in red and nu not in red:
                    continue
                tied = {mu, nu}
                vals = []
                for s in (j - 1, j + 1):
                    rk = rank_of(state, s)
                    same = (s - j) % d == 0

                    def val(x: int) -> float:
                        q, _ = divmod(s, d)
                        y = x
                        for _ in range(abs(q)):
                            y = perm[y] if q > 0 else inv[y]
                        if same and y in tied:
                            return k + 0.5
                        return float(rk[x])
                    vals.append(val(mu) - val(nu))
                if vals[0] * vals[1] < 0:
                    new = list(state)
                    o = list(order)
                    o[k], o[k + 1] = nu, mu
                    new[j] = tuple(o)
                    yield tuple(new)

    seen = {start}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for t in nbrs(s):
            if t not in seen:
                seen.add(t)
                queue.append(t)
                if len(seen) > limit:
                    raise DomainError('fiber enumeration too large', 'too-large')
    return seen


def _flags_multi(ab: ColoredDiscretizedBraid, window, free: bool) -> ClassFlags:
    comp = _multi_component(ab)
    red = set(ab.red_idx)
    black = set(ab.black_idx)
    perm = ab.braid.perm
    witness: dict = {}
    bounded = True
    for st in comp:
        for order in st:
            if order[0] in red or order[-1] in red:
                bounded = False
                witness['unbounded'] = st
                break
        if not bounded:
            break
    # collapse: a red strand and another strand adjacent at every slice, together with all their images under τ
    proper = True
    for st in comp:
        w = _multi_collapse(st, perm, red, ab.braid.m)
        if w is not None:
            proper = False
            witness['collapse'] = (st, w)
            break
    escape = False
    for st in comp:
        for group in (red,):
            n = len(group)
            if all(set(o[-n:]) == group for o in st) or all(set(o[:n]) == group for o in st):
                escape = True
                witness['escape'] = st
                break
        if escape:
            break
    fr = None
    if free:
        try:
            fr = bc.is_free(ab.braid)
        except DomainError:
            fr = None
    return ClassFlags(proper, bounded, fr, (not escape,), witness)


def _multi_collapse(state, perm: Sequence[int], red: set[int], m: int) -> tuple[int, int] | None:
    for mu in sorted(red):
        for nu in range(m):
            if nu == mu:
                continue
            pairs = set()
            a, b = mu, nu
            while (a, b) not in pairs:
                pairs.add((a, b))
                a, b = perm[a], perm[b]
            if any(len({x, y} & {u for p in pairs for u in p}) and x == y for x, y in pairs):
                continue
            if all(abs(o.index(x) - o.index(y)) == 1 for x, y in pairs for o in state):
                return mu, nu
    return None
