"""
Positive braid monoid words, positive conjugacy, 2-colored words and Garside normal forms.

A word on m strands is a tuple of generator indices i in 1..m-1, where σ_i exchanges the strands at
positions i and i+1. The permutation induced by a word is the position map: the strand that starts at
position p ends at position perm[p] (both 1-based in the public API, 0-based internally).

Two routes decide equality in B⁺_m. The first is exhaustive rewriting under the braid relations, which
never change the length of a word, so the closure of a word is finite. The second is the left Garside
normal form over permutation braids. Short words use the first route, long words the second, and the
test-suite checks that both agree.
"""

from __future__ import annotations

import dataclasses
import itertools
import re
from collections import deque
from typing import Iterable, Iterator, Sequence

from .errors import InputError, DomainError

Perm = tuple[int, ...]

# closures above this length switch the auto routes to Garside normal forms
BFS_LENGTH_LIMIT = 14


@dataclasses.dataclass(frozen=True, order=True)
class PositiveWord:
    m: int
    letters: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, 'letters', tuple(int(i) for i in self.letters))
        if self.m < 1:
            raise InputError(f'strand count must be positive, got {self.m}')
        for i in self.letters:
            if not 1 <= i <= self.m - 1:
                raise InputError(f'generator σ{i} out of range for {self.m} strands')

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __mul__(self, other: PositiveWord) -> PositiveWord:
        if other.m != self.m:
            raise InputError('cannot multiply words on different strand counts')
        return PositiveWord(self.m, self.letters + other.letters)

    def __pow__(self, k: int) -> PositiveWord:
        return PositiveWord(self.m, self.letters * k)

    def __str__(self) -> str:
        return format_word(self)

    def permutation(self) -> Perm:
        """1-based position map τ with τ[p-1] = final position of the strand starting at p."""
        return tuple(p + 1 for p in word_perm(self.m, self.letters))

    def rotate(self, k: int = 1) -> PositiveWord:
        if not self.letters:
            return self
        k %= len(self.letters)
        return PositiveWord(self.m, self.letters[k:] + self.letters[:k])

    def sigma(self) -> str:
        return ' '.join(f's{i}' for i in self.letters)


@dataclasses.dataclass(frozen=True)
class ColoredWord:
    word: PositiveWord
    red: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'red', frozenset(int(a) for a in self.red))
        for a in self.red:
            if not 1 <= a <= self.word.m:
                raise InputError(f'red strand {a} out of range')

    @property
    def n(self) -> int:
        return len(self.red)

    @property
    def black(self) -> frozenset[int]:
        return frozenset(range(1, self.word.m + 1)) - self.red

    def is_valid(self) -> bool:
        tau = self.word.permutation()
        return all(tau[a - 1] in self.red for a in self.red)

    def __str__(self) -> str:
        return format_colored(self)


@dataclasses.dataclass(frozen=True)
class ConjugacyClass:
    representative: PositiveWord
    members: tuple[PositiveWord, ...]

    @property
    def canonical(self) -> PositiveWord:
        return self.members[0]

    def __contains__(self, w: object) -> bool:
        return w in set(self.members)

    def __len__(self) -> int:
        return len(self.members)


@dataclasses.dataclass(frozen=True)
class SymmetricNormalForm:
    power: int
    base: PositiveWord

    def reconstruct(self) -> PositiveWord:
        if self.power < 0:
            raise DomainError('negative full-twist power has no positive reconstruction')
        return full_twist(self.base.m) ** self.power * self.base


# ---------------------------------------------------------------------------
# permutations


def word_perm(m: int, letters: Iterable[int]) -> Perm:
    """0-based position map of a word."""
    where = list(range(m))   # where[strand] = current position
    at = list(range(m))      # at[position] = strand
    for i in letters:
        a, b = at[i - 1], at[i]
        at[i - 1], at[i] = b, a
        where[a], where[b] = i, i - 1
    return tuple(where)


def compose(p: Perm, q: Perm) -> Perm:
    """(p∘q)(x) = p(q(x))."""
    return tuple(p[x] for x in q)


def inverse(p: Perm) -> Perm:
    out = [0] * len(p)
    for x, y in enumerate(p):
        out[y] = x
    return tuple(out)


def swap(m: int, i: int) -> Perm:
    """0-based transposition of positions i-1 and i."""
    s = list(range(m))
    s[i - 1], s[i] = i, i - 1
    return tuple(s)


def cycles(p: Perm) -> list[tuple[int, ...]]:
    seen: set[int] = set()
    out = []
    for x in range(len(p)):
        if x in seen:
            continue
        cyc = []
        y = x
        while y not in seen:
            seen.add(y)
            cyc.append(y)
            y = p[y]
        out.append(tuple(cyc))
    return out


def perm_word(p: Perm) -> tuple[int, ...]:
    """Lexicographically smallest reduced word of the permutation braid with position map p."""
    m = len(p)
    p = tuple(p)
    out = []
    while True:
        for i in range(1, m):
            # σ_i starts the braid iff the strands starting at i-1, i cross
            if p[i - 1] > p[i]:
                out.append(i)
                p = compose(p, swap(m, i))
                break
        else:
            return tuple(out)


def perm_length(p: Perm) -> int:
    return sum(1 for a in range(len(p)) for b in range(a + 1, len(p)) if p[a] > p[b])


# ---------------------------------------------------------------------------
# rewriting closures


def _relation_neighbors(letters: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    n = len(letters)
    for k in range(n - 1):
        a, b = letters[k], letters[k + 1]
        if abs(a - b) >= 2:
            yield letters[:k] + (b, a) + letters[k + 2:]
    for k in range(n - 2):
        a, b, c = letters[k], letters[k + 1], letters[k + 2]
        if a == c and abs(a - b) == 1:
            yield letters[:k] + (b, a, b) + letters[k + 3:]


def _closure(start: tuple[int, ...], cyclic: bool, limit: int | None = None) -> set[tuple[int, ...]]:
    seen = {start}
    queue = deque([start])
    while queue:
        w = queue.popleft()
        nbrs = list(_relation_neighbors(w))
        if cyclic and w:
            nbrs.append(w[1:] + w[:1])
            nbrs.append(w[-1:] + w[:-1])
        for v in nbrs:
            if v not in seen:
                seen.add(v)
                queue.append(v)
                if limit is not None and len(seen) > limit:
                    raise DomainError(f'rewriting closure exceeds {limit} words')
    return seen


def equality_closure(u: PositiveWord) -> set[tuple[int, ...]]:
    """All words positively equal to u."""
    return _closure(u.letters, cyclic=False)


def positive_equal(u: PositiveWord, v: PositiveWord, method: str = 'auto') -> bool:
    if u.m != v.m:
        raise InputError('words on different strand counts')
    if len(u) != len(v):
        return False
    if u.letters == v.letters:
        return True
    if word_perm(u.m, u.letters) != word_perm(v.m, v.letters):
        return False
    if method == 'auto':
        method = 'bfs' if len(u) <= BFS_LENGTH_LIMIT else 'garside'
    if method == 'bfs':
        return v.letters in equality_closure(u)
    if method == 'garside':
        return left_normal_form(u) == left_normal_form(v)
    raise InputError(f'unknown method {method!r}')


def conjugacy_class(u: PositiveWord, limit: int | None = 200_000) -> ConjugacyClass:
    members = sorted(_closure(u.letters, cyclic=True, limit=limit))
    return ConjugacyClass(u, tuple(PositiveWord(u.m, w) for w in members))


def positively_conjugate(u: PositiveWord, v: PositiveWord) -> bool:
    if u.m != v.m or len(u) != len(v):
        return False
    pu, pv = word_perm(u.m, u.letters), word_perm(v.m, v.letters)
    if sorted(map(len, cycles(pu))) != sorted(map(len, cycles(pv))):
        return False
    return v.letters in _closure(u.letters, cyclic=True)


# ---------------------------------------------------------------------------
# colored words


def _check_coloring(gw: ColoredWord) -> None:
    if not gw.is_valid():
        raise DomainError(f'red set {sorted(gw.red)} is not a union of cycles of the word permutation')


def project_color(gw: ColoredWord, keep: str = 'black') -> PositiveWord:
    """
    Remove the strands of one color from a colored word.

    All red positions are carried through the word at once. A letter whose two strands are of mixed
    color disappears; a letter between two kept strands is renumbered by the rank of its lower strand
    among the kept strands.
    """
    _check_coloring(gw)
    if keep not in ('black', 'red'):
        raise InputError(f'keep must be black or red, got {keep!r}')
    m = gw.word.m
    red = [p in gw.red for p in range(1, m + 1)]  # red[position-1]
    out = []
    for i in gw.word.letters:
        lo, hi = red[i - 1], red[i]
        if keep == 'black' and not lo and not hi:
            out.append(i - sum(red[:i - 1]))
        elif keep == 'red' and lo and hi:
            out.append(sum(red[:i - 1]) + 1)
        red[i - 1], red[i] = hi, lo
    size = m - gw.n if keep == 'black' else gw.n
    return PositiveWord(max(size, 1), tuple(out))


def remove_strand(w: PositiveWord, pos: int) -> PositiveWord:
    """Delete one strand (starting at 1-based position pos) by tracing its position through the word."""
    k = pos
    out = []
    for i in w.letters:
        if k == i:
            k = i + 1
        elif k == i + 1:
            k = i
        elif k < i:
            out.append(i - 1)
        else:
            out.append(i)
    return PositiveWord(max(w.m - 1, 1), tuple(out))


def colored_neighbors(letters: tuple[int, ...], red: frozenset[int]) -> Iterator[tuple[tuple[int, ...], frozenset[int]]]:
    for v in _relation_neighbors(letters):
        yield v, red
    if letters:
        i = letters[0]
        # moving σ_i from the front to the back relabels start positions by s_i
        yield letters[1:] + letters[:1], frozenset(_s(i, a) for a in red)
        j = letters[-1]
        yield letters[-1:] + letters[:-1], frozenset(_s(j, a) for a in red)


def _s(i: int, a: int) -> int:
    if a == i:
        return i + 1
    if a == i + 1:
        return i
    return a


def colored_class(gw: ColoredWord, limit: int | None = 500_000) -> set[tuple[tuple[int, ...], frozenset[int]]]:
    _check_coloring(gw)
    start = (gw.word.letters, gw.red)
    seen = {start}
    queue = deque([start])
    while queue:
        w, a = queue.popleft()
        for nxt in colored_neighbors(w, a):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
                if limit is not None and len(seen) > limit:
                    raise DomainError(f'colored closure exceeds {limit} members')
    return seen


def colored_conjugate(gw: ColoredWord, gw2: ColoredWord) -> bool:
    if gw.word.m != gw2.word.m or gw.n != gw2.n or len(gw.word) != len(gw2.word):
        return False
    _check_coloring(gw)
    _check_coloring(gw2)
    tau, tau2 = gw.word.permutation(), gw2.word.permutation()

    def red_type(w: ColoredWord, t: Perm) -> tuple[list[int], list[int]]:
        cyc = cycles(tuple(x - 1 for x in t))
        r = sorted(len(c) for c in cyc if c[0] + 1 in w.red)
        b = sorted(len(c) for c in cyc if c[0] + 1 not in w.red)
        return r, b

    if red_type(gw, tau) != red_type(gw2, tau2):
        return False
    return (gw2.word.letters, gw2.red) in colored_class(gw)


def canonical_colored(gw: ColoredWord) -> ColoredWord:
    w, a = min(colored_class(gw), key=lambda x: (x[0], sorted(x[1])))
    return ColoredWord(PositiveWord(gw.word.m, w), a)


# ---------------------------------------------------------------------------
# Garside normal forms


def half_twist(m: int) -> PositiveWord:
    """Δ = (σ₁…σ_{m−1})(σ₁…σ_{m−2})…σ₁."""
    letters: list[int] = []
    for k in range(m - 1, 0, -1):
        letters.extend(range(1, k + 1))
    return PositiveWord(m, tuple(letters))


def full_twist(m: int) -> PositiveWord:
    return PositiveWord(m, tuple(range(1, m)) * m)


def _starting_set(p: Perm) -> list[int]:
    return [i for i in range(1, len(p)) if p[i - 1] > p[i]]


def _can_extend(p: Perm, i: int) -> bool:
    # A·σ_i is still simple iff the strands now at positions i-1, i have not crossed
    q = inverse(p)
    return q[i - 1] < q[i]


def simple_factors(w: PositiveWord) -> list[Perm]:
    """Greedy left-to-right split of a word into permutation braids."""
    m = w.m
    ident = tuple(range(m))
    out: list[Perm] = []
    cur = ident
    for i in w.letters:
        if _can_extend(cur, i):
            cur = compose(swap(m, i), cur)
        else:
            out.append(cur)
            cur = compose(swap(m, i), ident)
    if cur != ident or not out:
        out.append(cur)
    return [f for f in out if f != ident]


def left_normal_form(w: PositiveWord) -> tuple[int, tuple[Perm, ...]]:
    """(inf, canonical factors) of the left normal form Δ^inf A_1 … A_r of a positive word."""
    m = w.m
    ident = tuple(range(m))
    delta = tuple(range(m - 1, -1, -1))
    factors = simple_factors(w)
    changed = True
    while changed:
        changed = False
        for k in range(len(factors) - 1):
            a, b = factors[k], factors[k + 1]
            moved = True
            while moved:
                moved = False
                for i in _starting_set(b):
                    if _can_extend(a, i):
                        a = compose(swap(m, i), a)
                        b = compose(b, swap(m, i))
                        moved = changed = True
                        break
            factors[k], factors[k + 1] = a, b
        factors = [f for f in factors if f != ident]
    inf = 0
    while inf < len(factors) and factors[inf] == delta:
        inf += 1
    return inf, tuple(factors[inf:])


def normal_form_word(w: PositiveWord) -> PositiveWord:
    inf, factors = left_normal_form(w)
    letters = half_twist(w.m).letters * inf
    for f in factors:
        letters += perm_word(f)
    return PositiveWord(w.m, letters)


def symmetric_normal_form(lam_in: int, u: PositiveWord) -> SymmetricNormalForm:
    """
    Factor □^λ_in·u as □^λ·ε̄ with ε̄ prime to □.

    An odd total Garside power Δ^{2λ+1} keeps one half twist inside ε̄.
    """
    m = u.m
    inf, factors = left_normal_form(u)
    total = 2 * lam_in + inf
    lam = total // 2
    letters: tuple[int, ...] = half_twist(m).letters if total % 2 else ()
    for f in factors:
        letters += perm_word(f)
    return SymmetricNormalForm(lam, PositiveWord(m, letters))


def divisible_by_full_twist(u: PositiveWord, method: str = 'auto') -> bool:
    """Whether □ left-divides u."""
    if u.m == 1:
        return True
    sq = full_twist(u.m).letters
    if len(u) < len(sq):
        return False
    if method == 'auto':
        method = 'bfs' if len(u) <= BFS_LENGTH_LIMIT else 'garside'
    if method == 'bfs':
        return any(w[:len(sq)] == sq or positive_equal(PositiveWord(u.m, w[:len(sq)]), full_twist(u.m), 'bfs')
                   for w in equality_closure(u))
    return left_normal_form(u)[0] >= 2


def strip_full_twists(u: PositiveWord) -> tuple[int, PositiveWord]:
    """
    Largest λ with a cyclic rotation of u equal to □^λ·rest, and that rest.

    Rotations are positive conjugates, so the result is a conjugacy-level reduction usable for
    comparing words modulo full twists.
    """
    best = (-1, u)
    for k in range(max(len(u), 1)):
        r = u.rotate(k)
        nf = symmetric_normal_form(0, r)
        if nf.power > best[0]:
            best = (nf.power, nf.base)
    return best


def strip_full_twists_colored(gw: ColoredWord) -> tuple[int, ColoredWord]:
    """Colored version of strip_full_twists; the red set follows the cyclic moves."""
    u, red = gw.word, gw.red
    best = (-1, gw)
    for k in range(max(len(u), 1)):
        nf = symmetric_normal_form(0, u.rotate(k))
        if nf.power > best[0]:
            best = (nf.power, ColoredWord(nf.base, red))
        if u.letters:
            i = u.letters[k]
            red = frozenset(_s(i, a) for a in red)
    return best


def conjugate_mod_full_twist(u: PositiveWord, v: PositiveWord) -> int | None:
    """
    Return λ with u ~ v·□^λ (λ may be negative, meaning v ~ u·□^{-λ}), or None.

    Both words are reduced modulo full twists and the remainders are compared by positive conjugacy.
    """
    if u.m != v.m:
        return None
    lu, ru = strip_full_twists(u)
    lv, rv = strip_full_twists(v)
    if len(ru) != len(rv):
        return None
    if positively_conjugate(ru, rv):
        return lu - lv
    # remainders may still hide a half-twist pair; fall back to comparing with one □ restored
    sq = full_twist(u.m)
    for a, b, shift in ((ru, rv * sq, -1), (ru * sq, rv, 1)):
        if len(a) == len(b) and len(a) <= 2 * BFS_LENGTH_LIMIT and positively_conjugate(a, b):
            return lu - lv + shift
    return None


# ---------------------------------------------------------------------------
# text format

_WORD_RE = re.compile(r'^\s*m\s*=\s*(\d+)\s*:\s*(.*)$')


def parse_letters(text: str) -> tuple[int, ...]:
    out = []
    for tok in text.replace(',', ' ').split():
        tok = tok.strip()
        if not tok:
            continue
        if tok[0] in 'sσ':
            tok = tok[1:]
        if not tok.isdigit():
            raise InputError(f'bad generator token {tok!r}')
        out.append(int(tok))
    return tuple(out)


def parse_word(text: str, m: int | None = None) -> PositiveWord:
    """Parse `m=<m>: i1 i2 ...` or a bare list of indices (`1 2 2 1` or `s1 s2 s2 s1`)."""
    mt = _WORD_RE.match(text)
    if mt:
        m = int(mt.group(1))
        body = mt.group(2)
    else:
        body = text
    letters = parse_letters(body)
    if m is None:
        m = (max(letters) + 1) if letters else 1
    return PositiveWord(m, letters)


def parse_colored(text: str, m: int | None = None) -> ColoredWord:
    """Parse `m=<m>: i1 i2 ...; red={a,b}`; the `;` may be omitted before `red=`."""
    mt = re.search(r'red\s*=\s*\{([^}]*)\}', text)
    if not mt:
        raise InputError('colored word needs red={...}')
    red = frozenset(int(t) for t in mt.group(1).replace(',', ' ').split())
    body = text[:mt.start()].rstrip().rstrip(';').rstrip()
    word = parse_word(body, m)
    if red and word.m < max(red):
        word = PositiveWord(max(red), word.letters)
    gw = ColoredWord(word, red)
    return gw


def format_word(w: PositiveWord) -> str:
    return f'm={w.m}: ' + ' '.join(str(i) for i in w.letters)


def format_colored(gw: ColoredWord) -> str:
    return f'{format_word(gw.word)}; red={{{",".join(str(a) for a in sorted(gw.red))}}}'


def words(m: int, length: int) -> Iterator[PositiveWord]:
    """All positive words of a given length on m strands."""
    for t in itertools.product(range(1, m), repeat=length):
        yield PositiveWord(m, t)


def concat(ws: Sequence[PositiveWord]) -> PositiveWord:
    letters: tuple[int, ...] = ()
    for w in ws:
        letters += w.letters
    return PositiveWord(ws[0].m, letters)
