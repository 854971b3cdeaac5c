"""
Twist maps from generating functions, Moser interpolation, chained Moser isotopies, the discrete
action and the search for stationary braids of the induced parabolic recurrence relation.

A generating function h(x, x') defines a positive twist map (x, y) -> (x', y') through
y = -∂₁h(x, x') and y' = ∂₂h(x, x'), with ∂₁∂₂h < 0. A chain of such maps h_0, …, h_{d-1} (map j
sends slice j to slice j+1) gives the recurrence

    R_j(x_{j-1}, x_j, x_{j+1}) = -∂₂h_{j-1}(x_{j-1}, x_j) - ∂₁h_j(x_j, x_{j+1}),

whose zeros are the critical points of the action W = Σ_j h_j(x_j, x_{j+1}); ∇W = -R.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, InputError

Fn = Callable[[np.ndarray, np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# generating functions


@dataclasses.dataclass(frozen=True)
class GeneratingFunction:
    h: Fn
    h1: Fn
    h2: Fn
    h11: Fn
    h12: Fn
    h22: Fn
    name: str = 'h'
    mixed: float | None = None   # constant value of ∂₁∂₂h when known

    def forward(self, x: float, y: float) -> tuple[float, float]:
        """The twist map (x, y) -> (x', y')."""
        x1 = self.solve_next(x, y)
        return x1, float(self.h2(x, x1))

    def solve_next(self, x: float, y: float) -> float:
        """Solve y = -∂₁h(x, x') for x'; monotone in x' by the twist condition."""
        if self.mixed is not None:
            return float(-(y + self.h1(x, 0.0)) / self.mixed)
        g = lambda x1: float(-self.h1(x, x1) - y)
        lo, hi = x - 1.0, x + 1.0
        for _ in range(200):
            if g(lo) < 0 < g(hi):
                break
            lo -= 2 * (hi - lo)
            hi += 2 * (hi - lo)
        else:
            raise DomainError(f'no bracket for x\' at (x, y) = ({x}, {y})', 'root-find')
        return optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def with_potential(self, v: Potential, name: str | None = None) -> GeneratingFunction:
        """Generating function of S∘F for the vertical shear S(x, y) = (x, y + V'(x))."""
        return GeneratingFunction(
            h=lambda a, b: self.h(a, b) + v.V(b),
            h1=self.h1,
            h2=lambda a, b: self.h2(a, b) + v.f(b),
            h11=self.h11,
            h12=self.h12,
            h22=lambda a, b: self.h22(a, b) + v.df(b),
            name=name or f'{self.name}+V',
            mixed=self.mixed,
        )

    def twist_bounds(self, box: float = 5.0, n: int = 41) -> tuple[float, float]:
        """Sampled range of ∂f/∂y = -1/∂₁∂₂h on a grid; both ends must be positive and finite."""
        s = np.linspace(-box, box, n)
        a, b = np.meshgrid(s, s)
        m = np.asarray(self.h12(a, b), dtype=float) * np.ones_like(a)
        if np.any(m >= 0):
            raise DomainError(f'{self.name}: ∂₁∂₂h >= 0 somewhere on the sample grid', 'twist-violation')
        df = -1.0 / m
        return float(df.min()), float(df.max())


def rotation_gf(theta: float) -> GeneratingFunction:
    """Clockwise rotation by theta: h = ½cot(θ)x² − csc(θ)xx' + ½cot(θ)x'²."""
    if not 0 < theta < math.pi:
        raise InputError(f'rotation angle must lie in (0, π), got {theta}')
    ct, cs = 1 / math.tan(theta), 1 / math.sin(theta)
    if abs(ct) < 1e-15:
        ct = 0.0
    return GeneratingFunction(
        h=lambda a, b: 0.5 * ct * a * a - cs * a * b + 0.5 * ct * b * b,
        h1=lambda a, b: ct * a - cs * b,
        h2=lambda a, b: -cs * a + ct * b,
        h11=lambda a, b: ct + 0 * a,
        h12=lambda a, b: -cs + 0 * a,
        h22=lambda a, b: ct + 0 * b,
        name=f'rot:{theta:g}',
        mixed=-cs,
    )


def _smoothstep(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Quintic 6u⁵−15u⁴+10u³ clipped to [0,1], with first and second derivatives."""
    u = np.clip(u, 0.0, 1.0)
    s = u ** 3 * (10 - 15 * u + 6 * u * u)
    ds = 30 * u * u * (1 - u) ** 2
    dds = 60 * u * (1 - u) * (1 - 2 * u)
    return s, ds, dds


@dataclasses.dataclass(frozen=True)
class Xi:
    """
    Even piecewise quadratic ξ(x) = ½c_k x² on zones [a_k, b_k] of |x|, joined by quintic blending.

    Outside the last zone the last quadratic continues.
    """
    zones: tuple[tuple[float, float, float], ...]   # (a, b, c)

    def _parts(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ax = np.abs(x)
        sg = np.sign(x)
        a0, b0, c0 = self.zones[0]
        v = 0.5 * c0 * ax ** 2
        dv = c0 * ax
        ddv = c0 + 0 * ax
        top = float(np.max(ax)) if ax.size else 0.0
        for (a, b, c), (a2, b2, c2) in zip(self.zones, self.zones[1:]):
            if top <= b:
                break
            # blend on [b, a2] from c to c2
            s, ds, dds = _smoothstep((ax - b) / (a2 - b))
            ds, dds = ds / (a2 - b), dds / (a2 - b) ** 2
            q0, q1 = 0.5 * c * ax ** 2, 0.5 * c2 * ax ** 2
            dq0, dq1 = c * ax, c2 * ax
            inside = ax > b
            bv = (1 - s) * q0 + s * q1
            bdv = (1 - s) * dq0 + s * dq1 + ds * (q1 - q0)
            bddv = (1 - s) * c + s * c2 + 2 * ds * (dq1 - dq0) + dds * (q1 - q0)
            v = np.where(inside, bv, v)
            dv = np.where(inside, bdv, dv)
            ddv = np.where(inside, bddv, ddv)
        return v, sg * dv, ddv

    def __call__(self, x):
        return self._parts(np.asarray(x, dtype=float))[0]

    def d1(self, x):
        return self._parts(np.asarray(x, dtype=float))[1]

    def d2(self, x):
        return self._parts(np.asarray(x, dtype=float))[2]


def _xi_gf(xi: Xi, theta: float, name: str) -> GeneratingFunction:
    cs = 1 / math.sin(theta)
    return GeneratingFunction(
        h=lambda a, b: xi(a) - cs * a * b + xi(b),
        h1=lambda a, b: xi.d1(a) - cs * b,
        h2=lambda a, b: -cs * a + xi.d1(b),
        h11=lambda a, b: xi.d2(a) + 0 * b,
        h12=lambda a, b: -cs + 0 * a,
        h22=lambda a, b: xi.d2(b) + 0 * a,
        name=name,
        mixed=-cs,
    )


def psi_rotation(ell: int) -> GeneratingFunction:
    """Rotation by 2π/ℓ on the unit disc that fixes (±2, 0) and swaps (±4, 0)."""
    if ell < 3:
        raise InputError(f'ell must be at least 3, got {ell}')
    th = 2 * math.pi / ell
    ct, cs = 1 / math.tan(th), 1 / math.sin(th)
    xi = Xi(((0.0, 1.0, ct), (1.5, 2.5, cs), (3.5, 4.5, -cs)))
    return _xi_gf(xi, th, f'psi:{ell}')


def upsilon_rotation(ell: int) -> GeneratingFunction:
    """Rotation by 2π/ℓ on the unit disc with (±2, 0) and (±4, 0) of period two."""
    if ell < 3:
        raise InputError(f'ell must be at least 3, got {ell}')
    th = 2 * math.pi / ell
    ct, cs = 1 / math.tan(th), 1 / math.sin(th)
    xi = Xi(((0.0, 1.0, ct), (1.5, 4.5, -cs)))
    return _xi_gf(xi, th, f'ups:{ell}')


def gf_from_name(spec: str) -> GeneratingFunction:
    """`rot:<theta>`, `psi:<ell>` or `ups:<ell>`."""
    kind, _, arg = spec.partition(':')
    try:
        if kind == 'rot':
            return rotation_gf(float(eval(arg, {'pi': math.pi, '__builtins__': {}})))
        if kind == 'psi':
            return psi_rotation(int(arg))
        if kind == 'ups':
            return upsilon_rotation(int(arg))
    except (ValueError, SyntaxError, NameError, TypeError):
        raise InputError(f'bad generating-function argument in {spec!r}') from None
    raise InputError(f'unknown generating function {spec!r}')


# ---------------------------------------------------------------------------
# shear potentials


def bump(s: np.ndarray, eps: float = 0.25) -> tuple[np.ndarray, np.ndarray]:
    """Plateau α = 1 on |s| <= 1, 0 on |s| >= 1+eps (exp-based), with derivative."""
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    if np.all(a <= 1):
        return np.ones_like(s), np.zeros_like(s)
    u, v = 1 + eps - a, a - 1
    with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
        p = np.where(u > 0, np.exp(-1.0 / u), 0.0)
        q = np.where(v > 0, np.exp(-1.0 / v), 0.0)
        dp = np.where(u > 0, -p / u ** 2, 0.0)
        dq = np.where(v > 0, q / v ** 2, 0.0)
        den = p + q
        alpha = np.where(den > 0, p / den, 0.0)
        dalpha = np.where(den > 0, (dp * q - p * dq) / den ** 2, 0.0)
    return alpha, dalpha * np.sign(s)


@dataclasses.dataclass(frozen=True)
class Potential:
    """V with V' = f = α·P, P a polynomial (coefficients highest first), α the plateau bump."""
    coeffs: tuple[float, ...]
    eps: float = 0.25

    @classmethod
    def through(cls, points: Sequence[tuple[float, float]], eps: float = 0.25) -> Potential:
        """Potential whose shear V' interpolates the given (s, value) pairs exactly."""
        s = np.array([p[0] for p in points], dtype=float)
        v = np.array([p[1] for p in points], dtype=float)
        if np.any(np.abs(s) >= 1):
            raise InputError('shear interpolation nodes must lie in the open unit interval')
        coeffs = np.polyfit(s, v, len(s) - 1) if len(s) else np.zeros(1)
        return cls(tuple(float(c) for c in coeffs), eps)

    @classmethod
    def zero(cls) -> Potential:
        return cls((0.0,))

    def f(self, s):
        s = np.asarray(s, dtype=float)
        return bump(s, self.eps)[0] * np.polyval(self.coeffs, s)

    def df(self, s):
        s = np.asarray(s, dtype=float)
        a, da = bump(s, self.eps)
        return da * np.polyval(self.coeffs, s) + a * np.polyval(np.polyder(self.coeffs), s)

    def V(self, s):
        s = np.asarray(s, dtype=float)
        anti = np.polyint(self.coeffs)
        inner = np.polyval(anti, np.clip(s, -1, 1))
        out = np.array(inner, dtype=float)
        flat = out.reshape(-1)
        ss = s.reshape(-1)
        for i in np.nonzero(np.abs(ss) > 1)[0]:
            x = float(ss[i])
            edge = math.copysign(1.0, x)
            end = math.copysign(min(abs(x), 1 + self.eps), x)
            flat[i] += gauss_legendre(self.f, edge, end, 1e-14)
        return out.reshape(s.shape) if s.shape else float(flat[0])


# ---------------------------------------------------------------------------
# Moser interpolation


def gauss_legendre(fn: Callable[[np.ndarray], np.ndarray], a: float, b: float, tol: float = 1e-10,
                   depth: int = 0) -> float:
    """Adaptive Gauss-Legendre: compare 10- and 20-point rules, bisect until they agree."""
    if a == b:
        return 0.0
    r1 = _gl(fn, a, b, 10)
    r2 = _gl(fn, a, b, 20)
    if abs(r1 - r2) <= tol * max(1.0, abs(r2)) or depth > 30:
        return r2
    mid = 0.5 * (a + b)
    return gauss_legendre(fn, a, mid, tol / 2, depth + 1) + gauss_legendre(fn, mid, b, tol / 2, depth + 1)


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(fn, a: float, b: float, n: int) -> float:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    x, w = _GL_CACHE[n]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return float(half * np.dot(w, fn(mid + half * x)))


@dataclasses.dataclass(frozen=True)
class HamiltonianFlow:
    """Moser isotopy ψ_t of a twist map: x moves on straight lines, y = ∂_pL(t, x, p)."""
    gf: GeneratingFunction
    tol: float = 1e-10

    def velocity(self, x: float, y: float) -> float:
        """λ(x, y): the slope p with y = ∂_pL(0, x, p) = -∂₁h(x, x+p)."""
        return self.gf.solve_next(x, y) - x

    def dpL(self, t: float, x: float, p: float) -> float:
        h12 = self.gf.h12
        if self.gf.mixed is not None:
            integral = self.gf.mixed * p
        else:
            integral = gauss_legendre(lambda q: np.asarray(h12(x - q * t, x + q * (1 - t)), dtype=float)
                                      * np.ones_like(q), 0.0, p, self.tol)
        return float(-integral - (1 - t) * self.gf.h1(x, x) + t * self.gf.h2(x, x))

    def __call__(self, t: float, x: float, y: float) -> tuple[float, float]:
        lam = self.velocity(x, y)
        xt = x + lam * t
        return xt, self.dpL(t, xt, lam)

    def along(self, x0: float, x1: float, t: float) -> tuple[float, float]:
        """Point at time t on the isotopy orbit from slice x0 to slice x1."""
        p = x1 - x0
        xt = x0 + p * t
        return xt, self.dpL(t, xt, p)


def moser_interpolate(gf: GeneratingFunction, check_twist: bool = True) -> HamiltonianFlow:
    if check_twist:
        gf.twist_bounds()
    return HamiltonianFlow(gf)


# ---------------------------------------------------------------------------
# chained isotopies


@dataclasses.dataclass(frozen=True)
class ChainedIsotopy:
    maps: tuple[GeneratingFunction, ...]
    params: dict

    @property
    def d(self) -> int:
        return len(self.maps)

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(j / self.d for j in range(self.d + 1))

    def step(self, j: int, x: float, y: float) -> tuple[float, float]:
        return self.maps[j % self.d].forward(x, y)

    def orbit(self, x: float, y: float, steps: int | None = None) -> list[tuple[float, float]]:
        out = [(x, y)]
        for j in range(self.d if steps is None else steps):
            x, y = self.step(j, x, y)
            out.append((x, y))
        return out

    def check_marked_points(self, tol: float = 1e-9) -> float:
        """Largest deviation from z± fixed and z'± swapped over every factor."""
        worst = 0.0
        for gf in self.maps:
            if gf.name.startswith('ups'):
                continue
            for s in (1, -1):
                x, y = gf.forward(2.0 * s, 0.0)
                worst = max(worst, abs(x - 2 * s), abs(y))
                x, y = gf.forward(4.0 * s, 0.0)
                worst = max(worst, abs(x + 4 * s), abs(y))
        return worst


def build_chained_isotopy(G: Sequence[Potential | None], ell: int = 4, kappa: int = 1, r: int = 0,
                          ell_r: int = 3, rho: int = 0, ell_rho: int = 3) -> ChainedIsotopy:
    """
    Chain of positive twist maps: ρ blocks of Υ^{ℓ_ρ}, r blocks of Ψ_r^{ℓ_r}, then for every G_i
    κ(ℓ−1) rotations Ψ' by 2π/(κℓ) followed by G_i∘Ψ.

    G_i is a vertical shear given by its potential (None for the identity). κ = 0 puts a shear on
    every step.
    """
    if ell < 3 or kappa < 0 or r < 0 or rho < 0 or (r and ell_r < 3) or (rho and ell_rho < 3):
        raise InputError('chained isotopy parameters out of range')
    psi = psi_rotation(ell)
    maps: list[GeneratingFunction] = []
    ups = upsilon_rotation(ell_rho) if rho else None
    maps += [ups] * (ell_rho * rho) if ups else []
    if r:
        maps += [psi_rotation(ell_r)] * (ell_r * r)
    psi2 = psi_rotation(kappa * ell) if kappa else None
    for i, g in enumerate(G):
        if kappa:
            maps += [psi2] * (kappa * (ell - 1))
        f = psi if g is None else psi.with_potential(g, f'G{i + 1}∘psi:{ell}')
        bounds = f.twist_bounds()
        if not bounds[0] > 0:
            raise DomainError(f'factor G{i + 1}∘Ψ is not twist', 'twist-violation')
        maps.append(f)
    params = dict(ell=ell, k=len(G), kappa=kappa, r=r, ell_r=ell_r, rho=rho, ell_rho=ell_rho,
                  ell_kappa=kappa * (ell - 1) + 1)
    return ChainedIsotopy(tuple(maps), params)


# ---------------------------------------------------------------------------
# recurrence relation and action


@dataclasses.dataclass(frozen=True)
class RecurrenceSystem:
    gfs: tuple[GeneratingFunction, ...]

    @property
    def d(self) -> int:
        return len(self.gfs)

    def R(self, j: int, a, b, c):
        d = self.d
        return -self.gfs[(j - 1) % d].h2(a, b) - self.gfs[j % d].h1(b, c)

    def dR(self, j: int, a, b, c) -> tuple:
        d = self.d
        g0, g1 = self.gfs[(j - 1) % d], self.gfs[j % d]
        return -g0.h12(a, b), -g0.h22(a, b) - g1.h11(b, c), -g1.h12(b, c)

    def residual(self, X: np.ndarray, perm: Sequence[int]) -> np.ndarray:
        """R at every anchor of a closed configuration X[μ, j], j = 0..d-1, closing through perm."""
        d = self.d
        prev, nxt = _neighbors(X, perm)
        out = np.empty_like(X)
        for j in range(d):
            out[:, j] = self.R(j, prev[:, j], X[:, j], nxt[:, j])
        return out

    def jacobian(self, X: np.ndarray, perm: Sequence[int], free: Sequence[int] | None = None) -> np.ndarray:
        """∂R/∂X restricted to the strands in free (all strands by default), flattened row-major."""
        m, d = X.shape
        free = list(range(m)) if free is None else list(free)
        idx = {(mu, j): k for k, (mu, j) in enumerate((mu, j) for mu in free for j in range(d))}
        inv = _inverse(perm)
        prev, nxt = _neighbors(X, perm)
        J = np.zeros((len(idx), len(idx)))
        for mu in free:
            for j in range(d):
                row = idx[(mu, j)]
                a, b, c = self.dR(j, prev[mu, j], X[mu, j], nxt[mu, j])
                pm, pj = (mu, j - 1) if j > 0 else (inv[mu], d - 1)
                nm, nj = (mu, j + 1) if j < d - 1 else (perm[mu], 0)
                J[row, row] += b
                if (pm, pj) in idx:
                    J[row, idx[(pm, pj)]] += a
                if (nm, nj) in idx:
                    J[row, idx[(nm, nj)]] += c
        return J

    def parabolicity(self, box: float = 1.0, n: int = 9) -> float:
        """Smallest sampled value of ∂₁R_j and ∂₃R_j on [-box, box]³."""
        s = np.linspace(-box, box, n)
        a, b, c = np.meshgrid(s, s, s)
        worst = np.inf
        for j in range(self.d):
            da, _, dc = self.dR(j, a, b, c)
            worst = min(worst, float(np.min(da)), float(np.min(dc)))
        return worst


def _inverse(perm: Sequence[int]) -> list[int]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return inv


def _neighbors(X: np.ndarray, perm: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    perm = list(perm)
    inv = _inverse(perm)
    prev = np.empty_like(X)
    nxt = np.empty_like(X)
    prev[:, 1:] = X[:, :-1]
    nxt[:, :-1] = X[:, 1:]
    prev[:, 0] = X[inv, -1]
    nxt[:, -1] = X[perm, 0]
    return prev, nxt


def recurrence_from(ci: ChainedIsotopy | Sequence[GeneratingFunction]) -> RecurrenceSystem:
    maps = ci.maps if isinstance(ci, ChainedIsotopy) else tuple(ci)
    return RecurrenceSystem(tuple(maps))


def action(rs: RecurrenceSystem, X: np.ndarray, perm: Sequence[int] | None = None) -> float:
    """W = Σ_μ Σ_j h_j(x_j^μ, x_{j+1}^μ)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    perm = list(range(X.shape[0])) if perm is None else list(perm)
    _, nxt = _neighbors(X, perm)
    return float(sum(np.sum(rs.gfs[j].h(X[:, j], nxt[:, j])) for j in range(rs.d)))


def braid_array(b) -> tuple[np.ndarray, list[int]]:
    """Float array X[μ, j] (j < d) and permutation of a DiscretizedBraid."""
    X = np.array([[float(a) for a in s.anchors[:-1]] for s in b.strands])
    return X, list(b.perm)


# ---------------------------------------------------------------------------
# stationary braids


@dataclasses.dataclass(frozen=True)
class FlowTarget:
    """Skeleton values S[α, j] for j = 0..d (slice d closes through the skeleton permutation),
    the rank lattice with star strands, and the component of gap tuples to search."""
    skeleton: np.ndarray
    perm: tuple[int, ...]
    lattice: object
    component: frozenset

    def _column(self, j: int) -> np.ndarray:
        col = np.sort(self.skeleton[:, j])
        return np.concatenate([[col[0] - 1.0], col, [col[-1] + 1.0]])

    def gaps_of(self, x: np.ndarray) -> tuple[int, ...] | None:
        """Star-lattice gap tuple of a red strand, or None on a tie with the skeleton."""
        out = []
        for j in range(len(x)):
            ext = self._column(j)
            if np.any(np.abs(ext - x[j]) < 1e-12):
                return None
            out.append(int(np.sum(ext < x[j])))
        return tuple(out)

    def point(self, cell: tuple[int, ...]) -> np.ndarray:
        """Real coordinates of a lattice cell: odd entries at gap midpoints, even ones on the skeleton."""
        out = []
        for j, c in enumerate(cell):
            ext = self._column(j)
            if c % 2:
                g = c // 2
                out.append(0.5 * (ext[g - 1] + ext[g]))
            else:
                out.append(ext[c // 2 - 1])
        return np.array(out)


@dataclasses.dataclass(frozen=True)
class Stationary:
    x: np.ndarray
    residual: float
    seed: int
    route: str


@dataclasses.dataclass(frozen=True)
class FlowReport:
    solutions: tuple[Stationary, ...]
    seeds: int
    escaped: int
    failed: int
    best_residual: float

    def __len__(self) -> int:
        return len(self.solutions)


def _red_residual(rs: RecurrenceSystem, x: np.ndarray) -> np.ndarray:
    return rs.residual(x[None, :], [0])[0]


def _red_jacobian(rs: RecurrenceSystem, x: np.ndarray) -> np.ndarray:
    return rs.jacobian(x[None, :], [0])


def newton_polish(rs: RecurrenceSystem, x: np.ndarray, tol: float = 1e-12, maxit: int = 60) -> tuple[np.ndarray, float]:
    """Damped Newton on R = 0 for one closed strand of period d."""
    x = np.array(x, dtype=float)
    r = _red_residual(rs, x)
    nr = float(np.max(np.abs(r)))
    for _ in range(maxit):
        if nr < tol:
            break
        J = _red_jacobian(rs, x)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -r, rcond=None)[0]
        t = 1.0
        while t > 1e-6:
            xn = x + t * step
            rn = _red_residual(rs, xn)
            nn = float(np.max(np.abs(rn)))
            if nn < nr:
                break
            t *= 0.5
        else:
            break
        x, r, nr = xn, rn, nn
    return x, nr


def flow_and_find(rs: RecurrenceSystem, target: FlowTarget, tol: float = 1e-9, dedupe: float = 1e-6,
                  max_seeds: int = 200, flow_time: float = 8.0, seed: int = 0,
                  extra_seeds: Sequence[Sequence[float]] = ()) -> FlowReport:
    """
    Stationary red strands of the recurrence inside one fiber component.

    Every seed (cube vertices pulled slightly toward the cell centers, and top-cell barycenters) is
    first moved along the parabolic flow dx/ds = R inside the class. A seed that converges is
    polished by Newton's method. Critical points with unstable directions repel the flow, so a seed
    that leaves the class or stalls is handed to Newton's method from its starting point. Large
    fibers are sampled with a seeded generator.
    """
    cells = sorted(target.component)
    rng = np.random.default_rng(seed)
    bary = lambda g: target.point(tuple(2 * x + 1 for x in g))
    seeds: list[np.ndarray] = [np.asarray(x, dtype=float) for x in extra_seeds]
    if len(cells) * 2 ** len(cells[0]) <= 4 * max_seeds if cells else True:
        # small fiber: every barycenter and every cube vertex (pulled toward one of its cells)
        seeds += [bary(g) for g in cells]
        owner: dict[tuple[int, ...], tuple[int, ...]] = {}
        for g in cells:
            for corner in np.ndindex(*([2] * len(g))):
                owner.setdefault(tuple(2 * (x + c) for x, c in zip(g, corner)), g)
        seeds += [0.9 * target.point(v) + 0.1 * bary(g) for v, g in sorted(owner.items())]
    if len(seeds) > max_seeds or not seeds or len(seeds) == len(extra_seeds):
        pick = rng.choice(len(cells), size=min(len(cells), max_seeds), replace=False) if cells else []
        sampled = []
        for i in sorted(pick):
            g = cells[i]
            corner = tuple(2 * (x + int(c)) for x, c in zip(g, rng.integers(0, 2, len(g))))
            sampled.append(bary(g) if len(sampled) % 2 == 0 else 0.9 * target.point(corner) + 0.1 * bary(g))
        seeds = seeds[:len(extra_seeds)] + sampled[:max_seeds]
    comp = target.component
    found: list[Stationary] = []
    escaped = failed = 0
    best = np.inf

    def accept(x: np.ndarray, res: float, k: int, route: str) -> None:
        nonlocal best
        best = min(best, res)
        if res >= tol or target.gaps_of(x) not in comp:
            return
        for s in found:
            if np.max(np.abs(s.x - x)) < dedupe:
                return
        found.append(Stationary(x, res, k, route))

    for k, x0 in enumerate(seeds):
        x, status = _flow(rs, target, x0, flow_time, tol)
        if status == 'converged':
            xp, res = newton_polish(rs, x)
            accept(xp, res, k, 'flow')
            continue
        if status == 'escaped':
            escaped += 1
        xp, res = newton_polish(rs, x0)
        if res < tol and target.gaps_of(xp) in comp:
            accept(xp, res, k, 'newton')
        else:
            failed += 1
            best = min(best, res)
    found.sort(key=lambda s: tuple(np.round(s.x, 9)))
    return FlowReport(tuple(found), len(seeds), escaped, failed, float(best))


def _flow(rs: RecurrenceSystem, target: FlowTarget, x0: np.ndarray, horizon: float, tol: float) -> tuple[np.ndarray, str]:
    comp = target.component
    x = np.array(x0, dtype=float)
    s = 0.0
    chunk = 1.0
    last = np.inf
    while s < horizon:
        sol = integrate.solve_ivp(lambda _s, y: _red_residual(rs, y), (0.0, chunk), x, method='RK45',
                                  rtol=1e-6, atol=1e-9)
        xn = sol.y[:, -1]
        if target.gaps_of(xn) not in comp:
            return x, 'escaped'
        x = xn
        s += chunk
        res = float(np.max(np.abs(_red_residual(rs, x))))
        if res < tol:
            return x, 'converged'
        if res > 0.9 * last and res > 1e-4:
            return x, 'stalled'
        last = res
    return x, 'stalled'


def lift_orbit(x: Sequence[float], rs: RecurrenceSystem, tol: float = 1e-8) -> np.ndarray:
    """Plane orbit (x_j, y_j), j = 0..d, with y_j = ∂₂h_{j−1}(x_{j−1}, x_j); checked against the maps."""
    x = np.asarray(x, dtype=float)
    d = rs.d
    xs = np.concatenate([x, x[:1]])
    ys = np.array([float(rs.gfs[(j - 1) % d].h2(xs[j - 1] if j > 0 else x[-1], xs[j])) for j in range(d + 1)])
    worst = 0.0
    for j in range(d):
        x1, y1 = rs.gfs[j].forward(xs[j], ys[j])
        worst = max(worst, abs(x1 - xs[j + 1]), abs(y1 - ys[j + 1]))
    if worst > tol:
        raise DomainError(f'lifted orbit fails the maps by {worst:.3e}', 'verification-failure', worst)
    return np.stack([xs, ys], axis=1)


# ---------------------------------------------------------------------------
# quarter-turn shear chains and system files


def quarter_turn_chain(frames: Sequence[np.ndarray]) -> ChainedIsotopy:
    """
    Chain G_j∘Ψ (Ψ the quarter turn, κ = 0) that moves the given points through the given frames.

    frames[j] holds the point positions after j steps in the frame co-rotating with Ψ. Step j
    must be a horizontal move (y fixed) for even j and a vertical move (x fixed) for odd j; in the
    lab frame each of them is a vertical shear applied after Ψ. The shears interpolate the required
    displacements at the points only.
    """
    frames = [np.asarray(f, dtype=float) for f in frames]
    G: list[Potential | None] = []
    for j in range(len(frames) - 1):
        a, b = frames[j], frames[j + 1]
        horizontal = j % 2 == 0
        fixed, moved = (1, 0) if horizontal else (0, 1)
        if np.max(np.abs(a[:, fixed] - b[:, fixed])) > 1e-14:
            raise InputError(f'step {j} must be a {"horizontal" if horizontal else "vertical"} move')
        if len(set(np.round(a[:, fixed], 12))) < len(a):
            raise InputError(f'step {j}: points share a coordinate across the move direction')
        nodes = [(float(p[fixed]), float(q[moved] - p[moved])) for p, q in zip(a, b)]
        k = (j + 1) % 4
        # conjugating the lab shear by Ψ^k gives the co-rotating move
        sign = {1: (1, -1), 2: (-1, -1), 3: (-1, 1), 0: (1, 1)}[k]
        pts = [(sign[0] * u, sign[1] * v) for u, v in nodes]
        G.append(None if all(abs(v) < 1e-15 for _, v in pts) else Potential.through(pts))
    return build_chained_isotopy(G, ell=4, kappa=0)


@dataclasses.dataclass(frozen=True)
class SystemSpec:
    chain: ChainedIsotopy
    orbits: tuple[tuple[float, float], ...]   # initial points of the skeleton orbits
    hints: tuple[tuple[float, ...], ...]      # red x-sequences used as extra seeds

    def skeleton(self) -> tuple[np.ndarray, list[int]]:
        """Skeleton anchors X[α, j] (j < d) and closing permutation, from the planted orbits."""
        d = self.chain.d
        paths = [self.chain.orbit(x, y) for x, y in self.orbits]
        X = np.array([[p[0] for p in path[:d]] for path in paths])
        ends = [path[d] for path in paths]
        perm = []
        for e in ends:
            dist = [math.hypot(e[0] - x, e[1] - y) for x, y in self.orbits]
            k = int(np.argmin(dist))
            if dist[k] > 1e-8:
                raise DomainError('planted skeleton points do not close up after one period', 'verification-failure', dist[k])
            perm.append(k)
        return X, perm


def load_system(text: str) -> SystemSpec:
    """
    Parse a system file. Lines (# starts a comment):

        maps psi:4 psi:4 rot:pi/2 ...     explicit factors, or
        frame a=x,y b=x,y ...             co-rotating frames of a quarter-turn chain
        scale s / center x                affine map applied to frame coordinates
        chain ell k kappa r ell_r rho ell_rho   with `shear j s:v ...` lines for G_j
        orbit x y                         planted skeleton orbit (frames supply their own)
        hint x_0 x_1 ...                  red seed sequence
    """
    maps: list[GeneratingFunction] = []
    frames: list[dict[str, tuple[float, float]]] = []
    scale, center = 1.0, 0.0
    chain_params: list[int] | None = None
    shears: dict[int, list[tuple[float, float]]] = {}
    orbits: list[tuple[float, float]] = []
    hints: list[tuple[float, ...]] = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        try:
            if key == 'maps':
                maps += [gf_from_name(t) for t in rest]
            elif key == 'frame':
                fr = {}
                for tok in rest:
                    name, _, xy = tok.partition('=')
                    x, y = xy.split(',')
                    fr[name] = (float(x), float(y))
                frames.append(fr)
            elif key == 'scale':
                scale = float(rest[0])
            elif key == 'center':
                center = float(rest[0])
            elif key == 'chain':
                chain_params = [int(t) for t in rest]
            elif key == 'shear':
                shears[int(rest[0])] = [tuple(float(v) for v in t.split(':')) for t in rest[1:]]
            elif key == 'orbit':
                orbits.append((float(rest[0]), float(rest[1])))
            elif key == 'hint':
                hints.append(tuple(float(t) for t in rest))
            else:
                raise InputError(f'line {ln}: unknown key {key!r}')
        except (ValueError, IndexError):
            raise InputError(f'line {ln}: malformed {key!r} entry') from None
    if sum(bool(x) for x in (maps, frames, chain_params)) != 1:
        raise InputError('a system file needs exactly one of maps, frame or chain')
    if frames:
        names = list(frames[0])
        if any(list(f) != names for f in frames):
            raise InputError('every frame must list the same points in the same order')
        arr = [np.array([[(f[n][0] - center) * scale, f[n][1] * scale] for n in names]) for f in frames]
        chain = quarter_turn_chain(arr)
        orbits = orbits or [tuple(p) for p in arr[0]]
    elif chain_params is not None:
        ell, k, kappa, *extra = chain_params + [0] * (7 - len(chain_params))
        r, ell_r, rho, ell_rho = extra[:4]
        G = [Potential.through(shears[i]) if i in shears else None for i in range(k)]
        chain = build_chained_isotopy(G, ell, kappa, r, ell_r or 3, rho, ell_rho or 3)
    else:
        chain = ChainedIsotopy(tuple(maps), dict(explicit=True))
    return SystemSpec(chain, tuple(orbits), tuple(hints))
