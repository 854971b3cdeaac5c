"""
Index pairs, relative cubical homology and the braid Conley index.

Cells live on the rank lattice of one free strand. A cell is a tuple c with one entry per slice: an
odd entry 2g+1 is the open interval of gap g, an even entry 2k pins the red anchor to the skeleton
anchor of rank k. The dimension of a cell is its number of odd entries.

The exit set uses the crossing count of the top cells. All top cells of one fiber component share the
count c_N. A cell of N lies in N⁻ when one of the top cells around it (each even entry pushed to
either side) has a smaller count, so the word metric is locally maximal there and the flow leaves N.
Every face of such a cell sees the same top cells and more, so N⁻ is closed under faces.
"""

from __future__ import annotations

import dataclasses
from collections import defaultdict
from typing import Iterable, Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors

from . import braid_core as bc
from . import colored_classes as cc
from .colored_classes import ColoredDiscretizedBraid, Gaps, SkeletonLattice
from .errors import DomainError

Cell = tuple[int, ...]


@dataclasses.dataclass(frozen=True)
class CubeComplex:
    dimension: int
    cells: frozenset[Cell]

    def by_dim(self) -> dict[int, list[Cell]]:
        out: dict[int, list[Cell]] = defaultdict(list)
        for c in self.cells:
            out[cell_dim(c)].append(c)
        return {k: sorted(v) for k, v in sorted(out.items())}


@dataclasses.dataclass(frozen=True)
class IndexPair:
    lattice: SkeletonLattice
    top: frozenset[Gaps]
    count: int
    relative: frozenset[Cell]          # cells of N not in N⁻

    @property
    def dimension(self) -> int:
        return self.lattice.d

    def closure(self) -> CubeComplex:
        cells = set()
        for g in self.top:
            cells |= set(faces_all(tuple(2 * x + 1 for x in g)))
        return CubeComplex(self.dimension, frozenset(cells))

    def exit_set(self) -> CubeComplex:
        n = self.closure()
        return CubeComplex(self.dimension, frozenset(n.cells - self.relative))


@dataclasses.dataclass(frozen=True)
class HomologyResult:
    betti: tuple[int, ...]
    torsion: tuple[tuple[int, ...], ...]
    coeff: str = 'z'
    provenance: tuple[tuple[str, str], ...] = ()

    @property
    def poincare(self) -> dict[int, int]:
        return {k: b for k, b in enumerate(self.betti) if b}

    @property
    def monomials(self) -> int:
        return len(self.poincare)

    def poincare_str(self) -> str:
        terms = []
        for k, b in self.poincare.items():
            base = '1' if k == 0 else ('t' if k == 1 else f't^{k}')
            terms.append(base if b == 1 else (f'{b}' if k == 0 else f'{b}{base}'))
        return ' + '.join(terms) if terms else '0'

    def shifted(self, s: int) -> HomologyResult:
        return HomologyResult((0,) * s + self.betti, ((),) * s + self.torsion, self.coeff, self.provenance)

    def same(self, other: HomologyResult) -> bool:
        return _trim(self.betti) == _trim(other.betti) and _trim(self.torsion) == _trim(other.torsion)

    def report(self) -> str:
        lines = [f'coefficients: {"Z" if self.coeff == "z" else "Z/2"}']
        for k, b in enumerate(self.betti):
            tors = ''.join(f' + Z/{t}' for t in self.torsion[k]) if k < len(self.torsion) else ''
            lines.append(f'H_{k}: rank {b}{tors}')
        lines.append(f'P_t = {self.poincare_str()}')
        lines.append(f'|P_t| = {self.monomials}')
        for key, val in self.provenance:
            lines.append(f'{key}: {val}')
        return '\n'.join(lines) + '\n'


def _trim(seq: Sequence) -> tuple:
    s = list(seq)
    while s and not s[-1]:
        s.pop()
    return tuple(s)


def wedge(results: Iterable[HomologyResult]) -> HomologyResult:
    results = list(results)
    if not results:
        return HomologyResult((), ())
    n = max(len(r.betti) for r in results)
    betti = [0] * n
    tors: list[list[int]] = [[] for _ in range(n)]
    for r in results:
        for k, b in enumerate(r.betti):
            betti[k] += b
        for k, t in enumerate(r.torsion):
            tors[k] += list(t)
    return HomologyResult(tuple(betti), tuple(tuple(sorted(t)) for t in tors), results[0].coeff)


# ---------------------------------------------------------------------------
# cells


def cell_dim(c: Cell) -> int:
    return sum(x & 1 for x in c)


def facets(c: Cell) -> list[tuple[Cell, int]]:
    """Codimension-one faces with their incidence signs."""
    out = []
    k = 0
    for j, x in enumerate(c):
        if x & 1:
            sign = 1 if k % 2 == 0 else -1
            out.append((c[:j] + (x + 1,) + c[j + 1:], sign))
            out.append((c[:j] + (x - 1,) + c[j + 1:], -sign))
            k += 1
    return out


def faces_all(c: Cell) -> list[Cell]:
    out = {c}
    stack = [c]
    while stack:
        x = stack.pop()
        for f, _ in facets(x):
            if f not in out:
                out.add(f)
                stack.append(f)
    return sorted(out)


def min_adjacent_count(lat: SkeletonLattice, flip: list, c: Cell) -> int:
    """Smallest crossing count among the top cells around c (cyclic DP over slices)."""
    d = lat.d
    cand = [[x // 2] if x & 1 else [x // 2 - 1, x // 2] for x in c]
    best = None
    for g0 in cand[0]:
        if not 0 <= g0 <= lat.M:
            continue
        cur = {g0: 0}
        for j in range(d - 1):
            nxt: dict[int, int] = {}
            for g, v in cur.items():
                for h in cand[j + 1]:
                    if 0 <= h <= lat.M:
                        w = v + flip[j][g][h]
                        if h not in nxt or w < nxt[h]:
                            nxt[h] = w
            cur = nxt
        for g, v in cur.items():
            w = v + flip[d - 1][g][g0]
            if best is None or w < best:
                best = w
    return best if best is not None else 0


# ---------------------------------------------------------------------------
# index pair and homology


def build_index_pair(fc: cc.FiberClass | None = None, component: int | frozenset[Gaps] = 0,
                     lattice: SkeletonLattice | None = None) -> IndexPair:
    """Index pair (N, N⁻) of one fiber component; only N \\ N⁻ is stored."""
    if isinstance(component, int):
        if fc is None:
            raise DomainError('a fiber is required to select a component by index')
        top = fc.components[component] if fc.components else frozenset()
        lat = fc.skeleton
    else:
        top = frozenset(component)
        lat = lattice if lattice is not None else fc.skeleton
    if not top:
        return IndexPair(lat, frozenset(), 0, frozenset())
    if any(g in (0, lat.M) for t in top for g in t):
        raise DomainError('component is unbounded; augment the skeleton first', 'unbounded-class')
    witness = cc._collapse_witness(lat, top)
    if witness is not None:
        raise DomainError('component is improper', 'improper-class', witness)
    flip = lat.flips()
    seed = next(iter(top))
    count = lat.crossing_count(seed, flip)
    rel: set[Cell] = set()
    stack = [tuple(2 * x + 1 for x in g) for g in top]
    rel.update(stack)
    exit_memo: dict[Cell, bool] = {}
    while stack:
        c = stack.pop()
        for f, _ in facets(c):
            if f in rel:
                continue
            if f not in exit_memo:
                exit_memo[f] = min_adjacent_count(lat, flip, f) < count
            if not exit_memo[f]:
                rel.add(f)
                stack.append(f)
    return IndexPair(lat, frozenset(top), count, frozenset(rel))


def relative_homology(pair: IndexPair, coeff: str = 'z') -> HomologyResult:
    nd = pair.dimension
    cells = pair.relative
    bd: dict[Cell, dict[Cell, int]] = {}
    for c in cells:
        bd[c] = {f: s for f, s in facets(c) if f in cells}
    return chain_homology(bd, nd, coeff)


def chain_homology(bd: dict[Cell, dict[Cell, int]], top_dim: int, coeff: str = 'z') -> HomologyResult:
    """Homology of a based chain complex given by cell boundaries; reduces ±1 pairs, then Smith normal form."""
    mod2 = coeff == 'z2'
    bd = {c: {f: (s % 2 if mod2 else s) for f, s in fs.items() if (s % 2 if mod2 else s)} for c, fs in bd.items()}
    cob: dict[Cell, set[Cell]] = defaultdict(set)
    for c, fs in bd.items():
        for f in fs:
            cob[f].add(c)
    alive = set(bd)
    # algebraic reduction: remove (c, f) when ∂c contains f with a unit coefficient
    for c in sorted(bd, key=lambda x: (-cell_dim(x), x)):
        if c not in alive:
            continue
        pick = None
        for f, s in sorted(bd[c].items()):
            if f in alive and s in (1, -1):
                pick = (f, s)
                break
        if pick is None:
            continue
        f, a = pick
        dc = bd[c]
        for r in list(cob[f]):
            if r == c or r not in alive:
                continue
            coef = bd[r].get(f, 0)
            if not coef:
                continue
            factor = coef * a  # a = ±1 so 1/a = a
            row = bd[r]
            for g, s in dc.items():
                v = row.get(g, 0) - factor * s
                if mod2:
                    v %= 2
                if v:
                    row[g] = v
                    cob[g].add(r)
                else:
                    row.pop(g, None)
        for e in list(cob[c]):
            if e in alive:
                bd[e].pop(c, None)
        for g in dc:
            cob[g].discard(c)
        alive.discard(c)
        alive.discard(f)
        for e in list(cob[f]):
            if e in alive:
                bd[e].pop(f, None)
    by_dim: dict[int, list[Cell]] = defaultdict(list)
    for c in alive:
        by_dim[cell_dim(c)].append(c)
    for k in by_dim:
        by_dim[k].sort()
    ranks = {}
    tors: dict[int, list[int]] = {}
    for k in range(1, top_dim + 1):
        rows, cols = by_dim.get(k - 1, []), by_dim.get(k, [])
        if not rows or not cols:
            ranks[k] = 0
            tors[k - 1] = []
            continue
        idx = {c: i for i, c in enumerate(rows)}
        mat = [[0] * len(cols) for _ in rows]
        for jcol, c in enumerate(cols):
            for f, s in bd[c].items():
                if f in idx:
                    mat[idx[f]][jcol] = s
        if mod2:
            ranks[k] = _rank_mod2(mat)
            tors[k - 1] = []
        else:
            inv = [int(x) for x in invariant_factors(Matrix(mat), domain=ZZ) if x != 0]
            ranks[k] = len(inv)
            tors[k - 1] = sorted(abs(x) for x in inv if abs(x) > 1)
    betti = []
    torsion = []
    for k in range(top_dim + 1):
        n_k = len(by_dim.get(k, []))
        betti.append(n_k - ranks.get(k, 0) - ranks.get(k + 1, 0))
        torsion.append(tuple(tors.get(k, [])))
    return HomologyResult(tuple(betti), tuple(torsion), coeff)


def _rank_mod2(mat: list[list[int]]) -> int:
    rows = [int(''.join(str(v % 2) for v in r), 2) if r else 0 for r in mat]
    rank = 0
    ncols = len(mat[0]) if mat else 0
    for bit in range(ncols - 1, -1, -1):
        pivot = next((i for i, r in enumerate(rows) if r >> bit & 1), None)
        if pivot is None:
            continue
        pr = rows.pop(pivot)
        rows = [r ^ pr if r >> bit & 1 else r for r in rows]
        rank += 1
    return rank


def naive_relative_homology(pair: IndexPair, coeff: str = 'z') -> HomologyResult:
    """Same homology by full Smith normal form on the unreduced complex (independent check route)."""
    cells = pair.relative
    by_dim: dict[int, list[Cell]] = defaultdict(list)
    for c in cells:
        by_dim[cell_dim(c)].append(c)
    ranks = {}
    tors: dict[int, list[int]] = {}
    nd = pair.dimension
    for k in range(1, nd + 1):
        rows, cols = sorted(by_dim.get(k - 1, [])), sorted(by_dim.get(k, []))
        if not rows or not cols:
            ranks[k] = 0
            continue
        idx = {c: i for i, c in enumerate(rows)}
        mat = [[0] * len(cols) for _ in rows]
        for jcol, c in enumerate(cols):
            for f, s in facets(c):
                if f in idx:
                    mat[idx[f]][jcol] = s
        if coeff == 'z2':
            ranks[k] = _rank_mod2(mat)
        else:
            inv = [int(x) for x in invariant_factors(Matrix(mat), domain=ZZ) if x != 0]
            ranks[k] = len(inv)
            tors[k - 1] = sorted(abs(x) for x in inv if abs(x) > 1)
    betti = tuple(len(by_dim.get(k, [])) - ranks.get(k, 0) - ranks.get(k + 1, 0) for k in range(nd + 1))
    torsion = tuple(tuple(tors.get(k, [])) for k in range(nd + 1))
    return HomologyResult(betti, torsion, coeff)


def euler_characteristic(pair: IndexPair) -> int:
    return sum((-1) ** cell_dim(c) for c in pair.relative)


# ---------------------------------------------------------------------------
# braid index


def braid_index(ab: ColoredDiscretizedBraid, window: tuple[int, int] | None = None, coeff: str = 'z',
                scope: str = 'component') -> HomologyResult:
    """
    Braid Conley index of the class of ab, recorded by homology.

    The skeleton is star-augmented; the index is the degree-wise sum over the selected fiber
    components (the seed component by default).
    """
    if ab.n == 0:
        return HomologyResult((1,), ((),), coeff, (('note', 'empty free part'),))
    if ab.n > 1:
        raise DomainError('index computation supports one free strand', 'unsupported')
    flags = cc.class_flags(ab, window, free=False)
    if not flags.proper:
        raise DomainError('class is improper', 'improper-class', flags.witness.get('collapse'))
    fc = cc.fiber(ab, window, scope=scope, star=True)
    results = []
    for k in range(len(fc.components)):
        pair = build_index_pair(fc, k)
        results.append(relative_homology(pair, coeff))
    out = wedge(results)
    prov = (('window', str(window) if window else 'rank lattice'),
            ('augmentation', 'star'),
            ('period', str(ab.d)),
            ('components', str(len(fc.components))),
            ('scope', scope))
    betti = out.betti + (0,) * (ab.d + 1 - len(out.betti))
    tors = out.torsion + ((),) * (ab.d + 1 - len(out.torsion))
    return HomologyResult(betti, tors, coeff, prov)


def star_union(ab: ColoredDiscretizedBraid) -> ColoredDiscretizedBraid:
    """a rel b* with the augmentation strands kept as explicit skeleton strands."""
    b = ab.part('black')
    star = bc.augment_star(b)
    red_rows = [ab.braid.strands[mu].anchors for mu in ab.red_idx]
    # the star strands must also clear the free strands
    rows = [list(s.anchors) for s in star.strands]
    for j in range(ab.d + 1):
        lo = min([rows[-2][j]] + [r[j] - 1 for r in red_rows])
        hi = max([rows[-1][j]] + [r[j] + 1 for r in red_rows])
        rows[-2][j], rows[-1][j] = lo, hi
    return ColoredDiscretizedBraid.from_parts(red_rows, rows)


def check_stabilization(ab: ColoredDiscretizedBraid, window: tuple[int, int] | None = None, coeff: str = 'z') -> bool:
    base = braid_index(ab, window, coeff)
    ext = braid_index(ab.map(bc.extend_E), window, coeff)
    return base.same(ext)


def check_duality(ab: ColoredDiscretizedBraid, window: tuple[int, int] | None = None, coeff: str = 'z') -> bool:
    if ab.d % 2:
        raise DomainError('duality needs an even period', 'period-parity')
    s = star_union(ab)
    dual = s.map(bc.dual_D)
    twisted = dual.map(bc.twist_T2)
    h1 = braid_index(dual, window, coeff)
    h2 = braid_index(twisted, window, coeff)
    return h2.same(h1.shifted(2 * ab.n))
