"""
Discretized closed braids: validation, regularization, positive words, class membership and the
operators E, T, D with the two skeletal augmentations.

Anchors are exact rationals. Strand μ has anchors x_0..x_d and closes up through the permutation τ,
x_d^μ = x_0^{τ(μ)}. Strand labels and τ are 0-based internally; text output uses 1-based labels.

Class searches do not walk integer lattices point by point. A braid whose slices are strictly ordered
is determined up to positive isotopy by its order type, recorded as one rank permutation per segment
(rank at slice j to rank at slice j+1). A single-anchor lattice move can only change the order type by
letting two rank-adjacent strands pass through each other at one slice, and that is allowed exactly
when the tie is transverse. BFS over order types therefore visits the same components as BFS over
±1 lattice moves in any window wide enough to separate m strands.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from collections import deque
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainError, InputError, WindowTooSmall
from .word_algebra import (
    Perm,
    PositiveWord,
    compose,
    conjugacy_class,
    inverse,
    perm_length,
    perm_word,
)

Number = Fraction
State = tuple[Perm, ...]

MAX_ENUMERATION = 2_000_000


def _frac(v: object) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**12)
    return Fraction(v)  # type: ignore[arg-type]


@dataclasses.dataclass(frozen=True)
class Strand:
    anchors: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'anchors', tuple(_frac(a) for a in self.anchors))
        if len(self.anchors) < 2:
            raise InputError('a strand needs at least two anchors')

    def __getitem__(self, j: int) -> Fraction:
        return self.anchors[j]

    def __len__(self) -> int:
        return len(self.anchors)


@dataclasses.dataclass(frozen=True)
class DiscretizedBraid:
    strands: tuple[Strand, ...]
    perm: Perm | None = None

    def __post_init__(self) -> None:
        strands = tuple(s if isinstance(s, Strand) else Strand(tuple(s)) for s in self.strands)
        object.__setattr__(self, 'strands', strands)
        if self.perm is None:
            object.__setattr__(self, 'perm', _infer_perm(strands))
        else:
            object.__setattr__(self, 'perm', tuple(self.perm))

    @classmethod
    def from_anchors(cls, rows: Iterable[Sequence[object]], perm: Sequence[int] | None = None) -> DiscretizedBraid:
        return cls(tuple(Strand(tuple(r)) for r in rows), None if perm is None else tuple(perm))

    @property
    def m(self) -> int:
        return len(self.strands)

    @property
    def d(self) -> int:
        return len(self.strands[0]) - 1 if self.strands else 0

    def x(self, mu: int, j: int) -> Fraction:
        """Anchor of strand mu at any integer slice, continued periodically through τ."""
        q, r = divmod(j, self.d)
        mu = _perm_power(self.perm, q)[mu]
        return self.strands[mu][r]

    def slice(self, j: int) -> list[Fraction]:
        return [self.x(mu, j) for mu in range(self.m)]

    def rows(self) -> list[tuple[Fraction, ...]]:
        return [s.anchors for s in self.strands]

    def __str__(self) -> str:
        return format_braid(self)


@dataclasses.dataclass(frozen=True)
class Validation:
    ok: bool
    clause: str | None = None
    detail: str = ''

    def __bool__(self) -> bool:
        return self.ok


@dataclasses.dataclass(frozen=True)
class BraidDiagram:
    crossings: tuple[tuple[Fraction, int], ...]   # (time in [0,1], position k)

    @property
    def word_metric(self) -> int:
        return len(self.crossings)


@dataclasses.dataclass(frozen=True)
class LatticeForm:
    braid: DiscretizedBraid
    bounds: tuple[int, int]

    def __post_init__(self) -> None:
        lo, hi = self.bounds
        for j in range(self.braid.d + 1):
            col = [self.braid.strands[mu][j] for mu in range(self.braid.m)]
            if len(set(col)) != len(col):
                raise InputError(f'lattice slice {j} has coincident anchors')
            for v in col:
                if v.denominator != 1 or not lo <= v <= hi:
                    raise WindowTooSmall(f'anchor {v} at slice {j} outside integer window [{lo},{hi}]')


# ---------------------------------------------------------------------------
# permutation helpers


def _perm_power(p: Perm | None, q: int) -> Perm:
    if p is None:
        raise DomainError('braid does not close up; no permutation', 'not-closed')
    if q < 0:
        p = inverse(p)
        q = -q
    out = tuple(range(len(p)))
    for _ in range(q):
        out = compose(p, out)
    return out


def _infer_perm(strands: Sequence[Strand]) -> Perm | None:
    """Match x_d^μ = x_0^{τ(μ)}; coincident endpoints are matched so that the closing tie is transverse."""
    m = len(strands)
    if m == 0:
        return ()
    if len({len(s) for s in strands}) != 1:
        return None
    starts: dict[Fraction, list[int]] = {}
    for nu, s in enumerate(strands):
        starts.setdefault(s[0], []).append(nu)
    ends: dict[Fraction, list[int]] = {}
    for mu, s in enumerate(strands):
        ends.setdefault(s[-1], []).append(mu)
    if {k: len(v) for k, v in starts.items()} != {k: len(v) for k, v in ends.items()}:
        return None
    tau = [0] * m
    for value, mus in ends.items():
        nus = starts[value]
        if len(mus) == 1:
            tau[mus[0]] = nus[0]
            continue
        chosen = None
        for cand in itertools.permutations(nus):
            good = True
            for (a, na), (b, nb) in itertools.combinations(zip(mus, cand), 2):
                before = strands[a][-2] - strands[b][-2]
                after = strands[na][1] - strands[nb][1]
                if before * after >= 0:
                    good = False
                    break
            if good:
                chosen = cand
                break
        if chosen is None:
            chosen = tuple(nus)
        for mu, nu in zip(mus, chosen):
            tau[mu] = nu
    if len(set(tau)) != m:
        return None
    return tuple(tau)


# ---------------------------------------------------------------------------
# validation and regularization


def validate(b: DiscretizedBraid) -> Validation:
    lengths = {len(s) for s in b.strands}
    if len(lengths) > 1:
        return Validation(False, 'a', f'strand lengths differ: {sorted(lengths)}')
    if b.strands and b.d < 1:
        return Validation(False, 'a', 'a strand needs d+1 >= 2 anchors')
    if b.perm is None or sorted(b.perm) != list(range(b.m)):
        return Validation(False, 'b', 'endpoints x_d do not match the starting points x_0 under any permutation')
    for mu in range(b.m):
        if b.strands[mu][-1] != b.strands[b.perm[mu]][0]:
            return Validation(False, 'b', f'x_d of strand {mu + 1} != x_0 of strand {b.perm[mu] + 1}')
    for j in range(1, b.d + 1):
        for mu, nu in itertools.combinations(range(b.m), 2):
            if b.x(mu, j) == b.x(nu, j):
                prod = (b.x(mu, j - 1) - b.x(nu, j - 1)) * (b.x(mu, j + 1) - b.x(nu, j + 1))
                if prod >= 0:
                    return Validation(False, 'c', f'strands {mu + 1},{nu + 1} tangent at slice {j % b.d}')
    return Validation(True)


def _crossings(x: list[list[Fraction]], j: int) -> list[tuple[Fraction, int, int]]:
    out = []
    m = len(x)
    for mu, nu in itertools.combinations(range(m), 2):
        d0 = x[mu][j] - x[nu][j]
        d1 = x[mu][j + 1] - x[nu][j + 1]
        if d0 * d1 < 0:
            out.append((j + d0 / (d0 - d1), mu, nu))
    return out


def is_regular(b: DiscretizedBraid) -> bool:
    return _find_tie([list(s.anchors) for s in b.strands], b.d) is None


def _find_tie(x: list[list[Fraction]], d: int) -> tuple[int, int] | None:
    m = len(x)
    for j in range(d):
        seen: dict[Fraction, int] = {}
        for mu in range(m):
            if x[mu][j] in seen:
                return j, seen[x[mu][j]]
            seen[x[mu][j]] = mu
    for j in range(d):
        times: dict[Fraction, tuple[int, int]] = {}
        for t, mu, nu in _crossings(x, j):
            if t in times:
                return j, min(mu, nu, *times[t])
            times[t] = (mu, nu)
    return None


def _min_gap(x: list[list[Fraction]], slices: Iterable[int]) -> Fraction:
    gaps = []
    for j in slices:
        col = sorted(set(row[j] for row in x))
        gaps += [b - a for a, b in zip(col, col[1:])]
    return min(gaps) if gaps else Fraction(1)


def regularize(b: DiscretizedBraid) -> DiscretizedBraid:
    """
    Positively isotope b to a regular braid: distinct anchors per slice and distinct crossing times.

    Each tie is broken by raising the smallest involved strand at slice j by ε_j = 1/(3(j+2)) times the
    smallest gap near slice j, halved each time the same anchor needs another push.
    """
    v = validate(b)
    if not v:
        raise InputError(f'invalid braid, clause ({v.clause}): {v.detail}')
    d, m = b.d, b.m
    x = [list(s.anchors) for s in b.strands]
    tau_inv = inverse(b.perm)
    pushes: dict[tuple[int, int], int] = {}
    for _ in range(10_000):
        tie = _find_tie(x, d)
        if tie is None:
            break
        j, mu = tie
        k = pushes.get(tie, 0)
        pushes[tie] = k + 1
        gap = _min_gap(x, [(j - 1) % d, j, j + 1])
        eps = Fraction(1, 3 * (j + 2)) * gap / 2 ** k
        x[mu][j] += eps
        if j == 0:
            x[tau_inv[mu]][d] += eps
    else:
        raise DomainError('regularization did not terminate')
    return DiscretizedBraid(tuple(Strand(tuple(r)) for r in x), b.perm)


# ---------------------------------------------------------------------------
# words


def diagram(b: DiscretizedBraid) -> BraidDiagram:
    r = b if is_regular(b) else regularize(b)
    x = [list(s.anchors) for s in r.strands]
    out = []
    for j in range(r.d):
        for t, mu, nu in _crossings(x, j):
            s = t - j
            val = x[mu][j] + s * (x[mu][j + 1] - x[mu][j])
            below = sum(1 for lam in range(r.m)
                        if x[lam][j] + s * (x[lam][j + 1] - x[lam][j]) < val)
            out.append((t / r.d, below + 1))
    out.sort()
    return BraidDiagram(tuple(out))


def braid_word(b: DiscretizedBraid) -> PositiveWord:
    return PositiveWord(max(b.m, 1), tuple(k for _, k in diagram(b).crossings))


def word_metric(b: DiscretizedBraid) -> int:
    return diagram(b).word_metric


def ev(beta: PositiveWord, q: int = 0) -> DiscretizedBraid:
    """Braid in D^{d+q}_m tracing β one letter per step from x_0^μ = μ, then q constant steps."""
    m = beta.m
    pos = list(range(1, m + 1))       # pos[μ] = current height of strand μ
    at = list(range(m))               # at[height-1] = strand
    rows = [[Fraction(p)] for p in pos]
    for i in beta.letters:
        a, b2 = at[i - 1], at[i]
        at[i - 1], at[i] = b2, a
        pos[a], pos[b2] = i + 1, i
        for mu in range(m):
            rows[mu].append(Fraction(pos[mu]))
    for _ in range(q):
        for mu in range(m):
            rows[mu].append(rows[mu][-1])
    if len(rows[0]) == 1:
        for mu in range(m):
            rows[mu].append(rows[mu][-1])
    return DiscretizedBraid.from_anchors(rows)


# ---------------------------------------------------------------------------
# order types


def _ranks(col: Sequence[Fraction]) -> list[int]:
    order = sorted(range(len(col)), key=lambda mu: col[mu])
    r = [0] * len(col)
    for k, mu in enumerate(order):
        r[mu] = k
    return r


def order_state(b: DiscretizedBraid) -> State:
    """Segment rank permutations of a regular representative of b."""
    r = b if is_regular(b) else regularize(b)
    out = []
    for j in range(r.d):
        a = _ranks(r.slice(j))
        c = _ranks(r.slice(j + 1))
        p = [0] * r.m
        for mu in range(r.m):
            p[a[mu]] = c[mu]
        out.append(tuple(p))
    return tuple(out)


def state_word(state: State, m: int) -> PositiveWord:
    letters: tuple[int, ...] = ()
    for p in state:
        letters += perm_word(p)
    return PositiveWord(max(m, 1), letters)


def state_braid(state: State, m: int, spacing: int = 2, offset: int = 0) -> DiscretizedBraid:
    """Lattice representative with the rank-r strand at height offset + spacing*(r+1)."""
    rows = []
    for r0 in range(m):
        r = r0
        row = [Fraction(offset + spacing * (r + 1))]
        for p in state:
            r = p[r]
            row.append(Fraction(offset + spacing * (r + 1)))
        rows.append(row)
    return DiscretizedBraid.from_anchors(rows)


def _swap_ranks(m: int, r: int) -> Perm:
    s = list(range(m))
    s[r], s[r + 1] = r + 1, r
    return tuple(s)


def _transverse_swap(state: State, m: int, j: int, r: int) -> bool:
    """Whether ranks r, r+1 may pass through each other at slice j (the tie is transverse)."""
    d = len(state)
    prev = state[(j - 1) % d]
    nxt = state[j]
    pinv = inverse(prev)
    tied = {r, r + 1}

    def val(k: int, at_tied_slice: bool) -> float:
        return r + 0.5 if at_tied_slice and k in tied else float(k)

    same = d == 1
    a, b = val(pinv[r], same), val(pinv[r + 1], same)
    c, e = val(nxt[r], same), val(nxt[r + 1], same)
    return (a - b) * (c - e) < 0


def state_neighbors(state: State, m: int) -> list[State]:
    d = len(state)
    out = []
    for j in range(d):
        for r in range(m - 1):
            if not _transverse_swap(state, m, j, r):
                continue
            s = _swap_ranks(m, r)
            new = list(state)
            if d == 1:
                new[0] = compose(s, compose(state[0], s))
            else:
                new[(j - 1) % d] = compose(s, state[(j - 1) % d])
                new[j] = compose(state[j], s)
            out.append(tuple(new))
    return out


def state_component(state: State, m: int, limit: int = MAX_ENUMERATION) -> set[State]:
    seen = {state}
    queue = deque([state])
    while queue:
        s = queue.popleft()
        for t in state_neighbors(s, m):
            if t not in seen:
                seen.add(t)
                queue.append(t)
                if len(seen) > limit:
                    raise DomainError(f'class enumeration exceeds {limit} order types', 'too-large')
    return seen


def _check_window(m: int, window: tuple[int, int] | None) -> None:
    if window is None:
        return
    lo, hi = window
    if hi - lo < 2 * m + 2:
        raise WindowTooSmall(f'window [{lo},{hi}] cannot hold the normalized form of {m} strands '
                             f'(needs width {2 * m + 2})')


def same_class(b: DiscretizedBraid, b2: DiscretizedBraid, window: tuple[int, int] | None = None) -> bool:
    if b.m != b2.m or b.d != b2.d:
        raise InputError('same_class needs equal strand counts and periods')
    for br in (b, b2):
        v = validate(br)
        if not v:
            raise InputError(f'invalid braid, clause ({v.clause}): {v.detail}')
    _check_window(b.m, window)
    s1, s2 = order_state(b), order_state(b2)
    if s1 == s2:
        return True
    if len(state_word(s1, b.m)) != len(state_word(s2, b.m)):
        return False
    return s2 in state_component(s1, b.m)


def all_states(m: int, d: int, length: int | None = None) -> Iterable[State]:
    """Every order type of period d on m strands, optionally with a fixed word length."""
    perms = list(itertools.permutations(range(m)))
    if length is None:
        yield from itertools.product(perms, repeat=d)
        return
    by_len: dict[int, list[Perm]] = {}
    for p in perms:
        by_len.setdefault(perm_length(p), []).append(p)

    def rec(k: int, left: int) -> Iterable[tuple[Perm, ...]]:
        if k == d:
            if left == 0:
                yield ()
            return
        for ln, ps in by_len.items():
            if ln <= left:
                for p in ps:
                    for rest in rec(k + 1, left - ln):
                        yield (p,) + rest

    yield from rec(0, length)


def topological_states(b: DiscretizedBraid) -> set[State]:
    """Order types of period d whose word is positively conjugate to the word of b."""
    m, d = b.m, b.d
    if math.factorial(m) ** d > MAX_ENUMERATION:
        raise DomainError(f'(m!)^d = {math.factorial(m) ** d} exceeds the enumeration cap', 'too-large')
    w = braid_word(b)
    members = {u.letters for u in conjugacy_class(w).members}
    return {s for s in all_states(m, d, len(w)) if state_word(s, m).letters in members}


def is_free(b: DiscretizedBraid, window: tuple[int, int] | None = None) -> bool:
    v = validate(b)
    if not v:
        raise InputError(f'invalid braid, clause ({v.clause}): {v.detail}')
    _check_window(b.m, window)
    if b.d > word_metric(b):
        return True
    comp = state_component(order_state(b), b.m)
    return len(comp) == len(topological_states(b))


# ---------------------------------------------------------------------------
# operators


def extend_E(b: DiscretizedBraid) -> DiscretizedBraid:
    return DiscretizedBraid.from_anchors([s.anchors + (s.anchors[-1],) for s in b.strands], b.perm)


def half_twist_T(b: DiscretizedBraid) -> DiscretizedBraid:
    """Append the negated last slice; the result closes up only after a second application."""
    return DiscretizedBraid.from_anchors([s.anchors + (-s.anchors[-1],) for s in b.strands])


def twist_T2(b: DiscretizedBraid) -> DiscretizedBraid:
    rows = [s.anchors + (-s.anchors[-1], s.anchors[-1]) for s in b.strands]
    return DiscretizedBraid.from_anchors(rows, b.perm)


def dual_D(b: DiscretizedBraid) -> DiscretizedBraid:
    if b.d % 2:
        raise DomainError(f'dual needs an even period, got {b.d}', 'period-parity')
    rows = [tuple(a if j % 2 == 0 else -a for j, a in enumerate(s.anchors)) for s in b.strands]
    return DiscretizedBraid.from_anchors(rows, b.perm)


def _extreme_rows(b: DiscretizedBraid, signed: bool) -> tuple[list[Fraction], list[Fraction]]:
    lo, hi = [], []
    for j in range(b.d + 1):
        sgn = -1 if signed and j % 2 else 1
        col = [sgn * s.anchors[j] for s in b.strands]
        lo.append(sgn * (min(col) - 1))
        hi.append(sgn * (max(col) + 1))
    return lo, hi


def augment_star(b: DiscretizedBraid) -> DiscretizedBraid:
    """Add b⁻ = min−1 and b⁺ = max+1 per slice; they are the last two strands."""
    lo, hi = _extreme_rows(b, signed=False)
    perm = tuple(b.perm) + (b.m, b.m + 1)
    return DiscretizedBraid.from_anchors([s.anchors for s in b.strands] + [lo, hi], perm)


def augment_saw(b: DiscretizedBraid) -> DiscretizedBraid:
    """
    Add the alternating strands b^s, b^n: the star strands of the dual braid, dualized back.

    Needs an even period so that the alternating strands close up.
    """
    if b.d % 2:
        raise DomainError(f'saw augmentation needs an even period, got {b.d}', 'period-parity')
    s, n = _extreme_rows(b, signed=True)
    perm = tuple(b.perm) + (b.m, b.m + 1)
    return DiscretizedBraid.from_anchors([st.anchors for st in b.strands] + [s, n], perm)


def normalize(b: DiscretizedBraid, window: tuple[int, int] | None = None) -> LatticeForm:
    """Slice-wise rank doubling to heights 2, 4, …, 2m (a positive isotopy)."""
    r = b if is_regular(b) else regularize(b)
    rows = [[Fraction(0)] * (r.d + 1) for _ in range(r.m)]
    for j in range(r.d + 1):
        rk = _ranks([s.anchors[j] for s in r.strands])
        for mu in range(r.m):
            rows[mu][j] = Fraction(2 * rk[mu] + 2)
    if window is None:
        window = (0, 2 * r.m + 2)
    _check_window(r.m, window)
    shift = window[0]
    rows = [[v + shift for v in row] for row in rows]
    return LatticeForm(DiscretizedBraid.from_anchors(rows, r.perm), window)


def components(b: DiscretizedBraid) -> list[tuple[int, ...]]:
    """Cycles of τ (closed components of the braid), 0-based strand labels."""
    from .word_algebra import cycles
    return cycles(b.perm)


def pair_crossings(b: DiscretizedBraid, mu: int, nu: int) -> int:
    """Crossings between strands mu and nu over one period, after regularization."""
    r = b if is_regular(b) else regularize(b)
    x = [list(s.anchors) for s in r.strands]
    return sum(1 for j in range(r.d) for _, a, c in _crossings(x, j) if {a, c} == {mu, nu})


# ---------------------------------------------------------------------------
# text format


def parse_braid(text: str) -> tuple[DiscretizedBraid, list[str]]:
    """
    Parse `braid m=<m> d=<d>` followed by one anchor line per strand.

    A strand line may end in `color: red` or `color: black`; the colors are returned alongside.
    Lines starting with '#' are comments.
    """
    lines = [ln.split('#', 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith('braid'):
        raise InputError('braid file must start with a `braid m=<m> d=<d>` header')
    head = dict(tok.split('=', 1) for tok in lines[0].split()[1:] if '=' in tok)
    try:
        m, d = int(head['m']), int(head['d'])
    except (KeyError, ValueError):
        raise InputError(f'bad header {lines[0]!r}') from None
    body = lines[1:]
    if len(body) != m:
        raise InputError(f'header says m={m} but {len(body)} strand lines follow')
    rows, colors = [], []
    for ln in body:
        color = 'black'
        if 'color:' in ln:
            ln, c = ln.split('color:', 1)
            color = c.strip().lower()
            if color not in ('red', 'black'):
                raise InputError(f'unknown color {color!r}')
        try:
            row = [Fraction(tok) for tok in ln.split()]
        except (ValueError, ZeroDivisionError):
            raise InputError(f'bad anchor line {ln!r}') from None
        if len(row) != d + 1:
            raise InputError(f'strand has {len(row)} anchors, expected d+1 = {d + 1}')
        rows.append(row)
        colors.append(color)
    if m == 0:
        raise InputError('braid needs at least one strand')
    return DiscretizedBraid.from_anchors(rows), colors


def format_braid(b: DiscretizedBraid, colors: Sequence[str] | None = None) -> str:
    out = [f'braid m={b.m} d={b.d}']
    for mu, s in enumerate(b.strands):
        line = ' '.join(str(a) for a in s.anchors)
        if colors is not None:
            line += f' color: {colors[mu]}'
        out.append(line)
    return '\n'.join(out) + '\n'
