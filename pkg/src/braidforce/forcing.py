"""
Forcing: from a skeleton word and a 2-colored class to an index certificate, a lower bound on the
number of forced orbits, and optionally orbits realized numerically on a chained isotopy.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Sequence

import numpy as np

from . import braid_core as bc
from . import colored_classes as cc
from . import conley_engine as ce
from . import dynamics as dy
from . import word_algebra as wa
from .errors import DomainError
from .word_algebra import ColoredWord, PositiveWord


@dataclasses.dataclass(frozen=True)
class ForcingQuery:
    skeleton_word: PositiveWord
    colored_word: ColoredWord
    realization: dy.SystemSpec | None = None


@dataclasses.dataclass(frozen=True)
class CaseInfo:
    case: str          # 'I', 'II' or 'III'
    lam: int
    params: dict
    realized_word: PositiveWord | None = None


@dataclasses.dataclass(frozen=True)
class Verification:
    ok: bool
    violations: tuple[str, ...]
    crossings: dict
    links: dict
    max_radius: float


@dataclasses.dataclass(frozen=True)
class FoundOrbit:
    x: np.ndarray
    plane: np.ndarray
    residual: float
    colored_match: bool
    verification: Verification


@dataclasses.dataclass(frozen=True)
class ForcingReport:
    flags: cc.ClassFlags | None
    index: ce.HomologyResult | None
    lower_bound: int
    case: CaseInfo | None
    found_orbits: tuple[FoundOrbit, ...] | None = None
    refusal: tuple[str, object] | None = None
    q: int = 0
    notes: tuple[str, ...] = ()

    @property
    def refused(self) -> bool:
        return self.refusal is not None

    def report(self) -> str:
        lines = []
        if self.flags is not None:
            lines.append(self.flags.summary().rstrip())
        lines.append(f'q: {self.q}')
        if self.refusal is not None:
            lines.append(f'refused: {self.refusal[0]}')
            lines.append(f'witness: {self.refusal[1]}')
        if self.index is not None:
            lines.append(self.index.report().rstrip())
        lines.append(f'lower_bound: {self.lower_bound}')
        if self.case is not None:
            lines.append(f'case: {self.case.case} (lambda={self.case.lam})')
            for k, v in self.case.params.items():
                lines.append(f'  {k}: {v}')
        if self.found_orbits is not None:
            lines.append(f'found_orbits: {len(self.found_orbits)}')
            for i, o in enumerate(self.found_orbits):
                lines.append(f'  orbit {i}: residual {o.residual:.3e}, class match {str(o.colored_match).lower()}, '
                             f'braiding {"ok" if o.verification.ok else "violated"}')
        lines += [f'note: {n}' for n in self.notes]
        return '\n'.join(lines) + '\n'


# ---------------------------------------------------------------------------
# braids of realized orbits


def braid_from_array(X: np.ndarray, perm: Sequence[int]) -> bc.DiscretizedBraid:
    """Discretized braid with anchors X[μ, j], j < d, closed through perm."""
    rows = [tuple(float(v) for v in X[mu]) + (float(X[perm[mu], 0]),) for mu in range(len(X))]
    return bc.DiscretizedBraid.from_anchors(rows, perm)


def _colored(red: np.ndarray, X: np.ndarray, perm: Sequence[int]) -> cc.ColoredDiscretizedBraid:
    red_row = [tuple(float(v) for v in red) + (float(red[0]),)]
    rows = [tuple(float(v) for v in X[mu]) + (float(X[perm[mu], 0]),) for mu in range(len(X))]
    return cc.ColoredDiscretizedBraid.from_parts(red_row, rows)


def same_mod_full_twist(gw: ColoredWord, ref: ColoredWord) -> int | None:
    """λ with gw ~ ref·□^λ as colored words, or None."""
    lg, rg = wa.strip_full_twists_colored(gw)
    lr, rr = wa.strip_full_twists_colored(ref)
    if len(rg.word) != len(rr.word):
        return None
    return lg - lr if wa.colored_conjugate(rg, rr) else None


# ---------------------------------------------------------------------------
# pipeline


def _check_query(query: ForcingQuery) -> None:
    gw = query.colored_word
    if not gw.is_valid():
        raise DomainError('free strands of the colored word must close on themselves', 'inconsistent-query')
    proj = wa.project_color(gw, 'black')
    beta = query.skeleton_word
    if proj.m != beta.m or not wa.positively_conjugate(proj, beta):
        raise DomainError(f'the black part {proj} is not conjugate to the skeleton word {beta}', 'inconsistent-query')


def classify_case(query: ForcingQuery) -> CaseInfo:
    """Compare the realized skeleton word with β modulo full twists."""
    _check_query(query)
    if query.realization is None:
        return CaseInfo('I', 0, {'note': 'no realization; index taken on the word representative'})
    X, perm = query.realization.skeleton()
    w = bc.braid_word(braid_from_array(X, perm))
    lam = wa.conjugate_mod_full_twist(w, query.skeleton_word)
    if lam is None:
        raise DomainError(f'realized skeleton word {w} differs from the skeleton word modulo full twists',
                          'inconsistent-query')
    if lam == 0:
        return CaseInfo('I', 0, {}, w)
    if lam > 0:
        return CaseInfo('II', lam, {'r': lam}, w)
    return CaseInfo('III', -lam, {'rho': 1, 'ell_rho': 2 * (-lam) + 2}, w)


def _smallest_free(gw: ColoredWord, max_q: int) -> tuple[cc.ColoredDiscretizedBraid, int, bool | None]:
    fr = None
    for q in range(max_q + 1):
        ab = cc.realize(gw, q)
        try:
            fr = bc.is_free(ab.braid)
        except DomainError:
            return ab, q, None
        if fr:
            return ab, q, True
    return cc.realize(gw, 0), 0, fr


def _saw_class(ab: cc.ColoredDiscretizedBraid) -> cc.ColoredDiscretizedBraid:
    if ab.d % 2:
        ab = ab.map(bc.extend_E)
    saw = bc.augment_saw(ab.part('black'))
    red = [ab.braid.strands[mu].anchors for mu in ab.red_idx]
    return cc.ColoredDiscretizedBraid.from_parts(red, [s.anchors for s in saw.strands])


def force(query: ForcingQuery, window: tuple[int, int] | None = None, coeff: str = 'z', seed: int = 0,
          max_q: int = 3, max_seeds: int = 60) -> ForcingReport:
    _check_query(query)
    gw = query.colored_word
    case = classify_case(query)
    ab, q, free = _smallest_free(gw, max_q)
    notes = [f'free: {"unknown" if free is None else str(free).lower()} at q={q}']
    flags = cc.class_flags(ab, window, free=False)
    if not flags.proper:
        return ForcingReport(flags, None, 0, case, refusal=('improper-class', flags.witness.get('collapse')), q=q,
                             notes=tuple(notes))
    if not all(flags.acylindrical):
        return ForcingReport(flags, None, 0, case, refusal=('cylindrical-class', flags.witness.get('escape')), q=q,
                             notes=tuple(notes))
    index = ce.braid_index(ab, window, coeff)
    n = ab.n
    if case.case == 'II':
        tw = ab
        for _ in range(case.lam):
            tw = tw.map(bc.twist_T2)
        ok = ce.braid_index(tw, window, coeff).same(index.shifted(2 * n * case.lam))
        notes.append(f'twist identity (shift {2 * n * case.lam}): {"holds" if ok else "fails"}')
    elif case.case == 'III':
        saw = _saw_class(ab)
        h_saw = ce.braid_index(saw, window, coeff)
        tw = saw
        for _ in range(case.lam + 1):
            tw = tw.map(bc.twist_T2)
        ok = ce.braid_index(tw, window, coeff).same(h_saw.shifted(2 * n * (case.lam + 1)))
        notes.append(f'suspension identity (shift {2 * n * (case.lam + 1)}): {"holds" if ok else "fails"}')
    lower = index.monomials
    if lower == 0:
        return ForcingReport(flags, index, 0, case, refusal=('index-zero', None), q=q, notes=tuple(notes))
    found = None
    if query.realization is not None:
        found, extra = _realize_orbits(query, case, seed, max_seeds)
        notes += extra
    return ForcingReport(flags, index, lower, case, found, None, q, tuple(notes))


def _realize_orbits(query: ForcingQuery, case: CaseInfo, seed: int, max_seeds: int) -> tuple[tuple[FoundOrbit, ...], list[str]]:
    spec = query.realization
    X, perm = spec.skeleton()
    rs = dy.recurrence_from(spec.chain)
    notes = []
    res_b = float(np.max(np.abs(rs.residual(X, perm))))
    notes.append(f'skeleton residual: {res_b:.3e}')
    d = spec.chain.d
    hints = [np.asarray(h, dtype=float) for h in spec.hints if len(h) == d]
    targets: dict[frozenset, tuple[dy.FlowTarget, list[np.ndarray]]] = {}
    _collect_targets(query, case, X, perm, hints, targets)
    if not targets:
        # constant sequences across the disc as a fallback
        _collect_targets(query, case, X, perm, [np.full(d, c) for c in np.linspace(-0.9, 0.9, 19)], targets)
    if not targets:
        notes.append('non-convergence: no seed sequence lies in the realized class')
        return (), notes
    out: list[FoundOrbit] = []
    for comp, (tgt, seeds) in targets.items():
        rep = dy.flow_and_find(rs, tgt, seed=seed, max_seeds=max_seeds, extra_seeds=seeds)
        notes.append(f'component of {len(comp)} cells: {rep.seeds} seeds, {rep.escaped} escaped, '
                     f'{len(rep)} stationary')
        for s in rep.solutions:
            plane = dy.lift_orbit(s.x, rs)
            ab = _colored(s.x, X, perm)
            match = same_mod_full_twist(ab.colored_word(), query.colored_word) is not None
            skel = [_lift_strand(X, perm, a, rs) for a in range(len(X))]
            ver = verify_orbit_braiding([plane], skel, spec.chain)
            out.append(FoundOrbit(s.x, plane, s.residual, match, ver))
    return tuple(out), notes


def _collect_targets(query: ForcingQuery, case: CaseInfo, X: np.ndarray, perm: Sequence[int],
                     hints: Sequence[np.ndarray], targets: dict) -> None:
    want = {'I': 0, 'II': case.lam, 'III': -case.lam}[case.case]
    for h in hints:
        if any(_in_target(t, h) for t, _ in targets.values()):
            targets[next(c for c, (t, _) in targets.items() if _in_target(t, h))][1].append(h)
            continue
        try:
            ab = _colored(h, X, perm)
            lam = same_mod_full_twist(ab.colored_word(), query.colored_word)
        except (DomainError, ValueError):
            continue
        if lam != want:
            continue
        lat, gaps = cc.lattice_of(ab, True)
        comp = cc.component(lat, gaps)
        targets[comp] = (dy.FlowTarget(X, tuple(perm), lat, comp), [h])


def _in_target(t: dy.FlowTarget, h: np.ndarray) -> bool:
    return t.gaps_of(h) in t.component


def _lift_strand(X: np.ndarray, perm: Sequence[int], a: int, rs: dy.RecurrenceSystem) -> np.ndarray:
    """Plane orbit of skeleton strand a over one period of the maps (it may end on another strand)."""
    d = rs.d
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    xs = list(X[a]) + [X[perm[a], 0]]
    prev = X[inv[a], d - 1]
    ys = []
    for j in range(d + 1):
        xp = prev if j == 0 else xs[j - 1]
        ys.append(float(rs.gfs[(j - 1) % d].h2(xp, xs[j])))
    return np.stack([np.array(xs), np.array(ys)], axis=1)


# ---------------------------------------------------------------------------
# verification of realized orbits


def verify_orbit_braiding(orbits: Sequence[np.ndarray], skeleton: Sequence[np.ndarray] = (),
                          chain: dy.ChainedIsotopy | None = None, acylindrical: bool = True,
                          samples: int = 24) -> Verification:
    """
    Check transversality, positivity of crossings, Link = ι/2 per pair and the disc bound.

    Orbits are plane sequences (x_j, y_j), j = 0..d, over one period of the chain. Strands that end
    on another strand are concatenated until they close, and pairs are compared over the common
    period. The isotopy between slices is the Moser interpolation of each factor.
    """
    paths = [np.asarray(o, dtype=float) for o in list(orbits) + list(skeleton)]
    violations: list[str] = []
    if not paths:
        return Verification(True, (), {}, {}, 0.0)
    d = len(paths[0]) - 1
    flows = [dy.HamiltonianFlow(g) for g in chain.maps] if chain is not None else None
    closed = _close_paths(paths)
    crossings: dict = {}
    links: dict = {}
    radius = max(float(np.max(np.hypot(p[:, 0], p[:, 1]))) for p in paths)
    for a in range(len(closed)):
        for b in range(a + 1, len(closed)):
            pa, pb = closed[a], closed[b]
            L = math.lcm(len(pa) - 1, len(pb) - 1)
            A = _tile(pa, L)
            B = _tile(pb, L)
            iota = 0
            angle = 0.0
            prev_vec = None
            for j in range(L):
                g0 = A[j, 0] - B[j, 0]
                g1 = A[j + 1, 0] - B[j + 1, 0]
                if g0 == 0 or g1 == 0:
                    violations.append(f'pair ({a},{b}) slice {j}: anchors tie')
                    continue
                if g0 * g1 < 0:
                    iota += 1
                    if flows is not None:
                        t = g0 / (g0 - g1)
                        fl = flows[j % d]
                        ya = fl.along(A[j, 0], A[j + 1, 0], t)[1]
                        yb = fl.along(B[j, 0], B[j + 1, 0], t)[1]
                        slope = (A[j + 1, 0] - A[j, 0]) - (B[j + 1, 0] - B[j, 0])
                        if (ya - yb) * slope <= 0:
                            violations.append(f'pair ({a},{b}) slice {j}: negative crossing')
                if flows is not None:
                    fl = flows[j % d]
                    for t in np.linspace(0, 1, samples + 1)[(0 if prev_vec is None else 1):]:
                        za = fl.along(A[j, 0], A[j + 1, 0], float(t))
                        zb = fl.along(B[j, 0], B[j + 1, 0], float(t))
                        vec = (za[0] - zb[0], za[1] - zb[1])
                        if prev_vec is not None:
                            step = math.atan2(prev_vec[0] * vec[1] - prev_vec[1] * vec[0],
                                              prev_vec[0] * vec[0] + prev_vec[1] * vec[1])
                            angle += step
                        prev_vec = vec
            crossings[(a, b)] = iota
            if iota % 2:
                violations.append(f'pair ({a},{b}): odd crossing count {iota}')
            if flows is not None:
                link = -angle / (2 * math.pi)
                links[(a, b)] = link
                if abs(link - iota / 2) > 1e-6:
                    violations.append(f'pair ({a},{b}): Link {link:.6f} != iota/2 = {iota / 2}')
    if acylindrical and radius >= 1:
        violations.append(f'orbit leaves the open unit disc (radius {radius:.6f})')
    return Verification(not violations, tuple(violations), crossings, links, radius)


def _close_paths(paths: list[np.ndarray]) -> list[np.ndarray]:
    """Concatenate strands that end where another starts until each closes up."""
    starts = {i: p[0] for i, p in enumerate(paths)}
    used = set()
    out = []
    for i in range(len(paths)):
        if i in used:
            continue
        seq = [paths[i]]
        used.add(i)
        cur = paths[i]
        while np.max(np.abs(cur[-1] - paths[i][0])) > 1e-7:
            nxt = next((k for k, s in starts.items() if k not in used and np.max(np.abs(s - cur[-1])) < 1e-7), None)
            if nxt is None:
                raise DomainError('orbit does not close up', 'verification-failure')
            used.add(nxt)
            cur = paths[nxt]
            seq.append(cur)
        out.append(np.concatenate([seq[0]] + [s[1:] for s in seq[1:]]))
    return out


def _tile(p: np.ndarray, L: int) -> np.ndarray:
    reps = L // (len(p) - 1)
    return np.concatenate([p] + [p[1:]] * (reps - 1))
