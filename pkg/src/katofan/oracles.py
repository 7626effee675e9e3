"""Slow reference computations used to cross-check the fast paths.

None of these call the Smith normal form or the cone machinery.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

from .abelian import FGAbelianGroup


def rational_rank(rows: Sequence[Sequence[int]]) -> int:
    m = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                f = m[i][c] / m[rank][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def _det(m: list[list[int]]) -> int:
    n = len(m)
    if n == 0:
        return 1
    total = 0
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = -1 if inversions % 2 else 1
        for i, j in enumerate(perm):
            term *= m[i][j]
        total += term
    return total


def determinantal_cokernel(rows: Sequence[Sequence[int]]) -> FGAbelianGroup:
    """``Z^m / colspan(A)`` from the gcds of all k x k minors."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    r = rational_rank(rows) if n else 0
    divisors = [1]
    for k in range(1, r + 1):
        g = 0
        for ri in itertools.combinations(range(m), k):
            for ci in itertools.combinations(range(n), k):
                g = math.gcd(g, _det([[rows[i][j] for j in ci] for i in ri]))
        divisors.append(g)
    invariants = [divisors[k] // divisors[k - 1] for k in range(1, r + 1)]
    return FGAbelianGroup.from_invariants(m - r, invariants)


def _solve(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Solve the nonsingular square system ``a t = b`` over the rationals."""
    n = len(a)
    m = [list(r) + [v] for r, v in zip(a, b)]
    for c in range(n):
        piv = next(i for i in range(c, n) if m[i][c])
        m[c], m[piv] = m[piv], m[c]
        for i in range(n):
            if i != c and m[i][c]:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


def coset_cokernel(rows: Sequence[Sequence[int]]) -> FGAbelianGroup:
    """``Z^m / colspan(A)`` by enumerating cosets.

    The free rank is ``m`` minus the rational rank.  For the torsion, pick
    independent columns ``C``; the integer points of the half-open
    parallelepiped spanned by ``C`` that lie in the rational span represent
    ``Sat / span(C)``, where ``Sat`` is the saturation of the image.  The
    remaining columns generate a subgroup ``H`` of that finite group, and
    the torsion is the quotient by ``H``.  Its structure is read off from the
    number of elements killed by each prime power.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    cols = [[rows[i][j] for i in range(m)] for j in range(n)]
    r = rational_rank(cols) if cols else 0
    if r == 0:
        return FGAbelianGroup(m)
    basis = next(c for c in itertools.combinations(range(n), r)
                 if rational_rank([cols[j] for j in c]) == r)
    C = [cols[j] for j in basis]
    pick = next(ri for ri in itertools.combinations(range(m), r)
                if _det([[C[k][i] for k in range(r)] for i in ri]))
    ci = [[Fraction(C[k][i]) for k in range(r)] for i in pick]

    def coords(x):
        """Parallelepiped coordinates of an integer point of the rational span, or None."""
        t = _solve(ci, [Fraction(x[i]) for i in pick])
        if any(sum(t[k] * C[k][i] for k in range(r)) != x[i] for i in range(m)):
            return None
        return tuple(v - math.floor(v) for v in t)

    # integer points y = C_I t, t in [0,1)^r, determine x = C t
    lo = [sum(min(0, C[k][i]) for k in range(r)) for i in pick]
    hi = [sum(max(0, C[k][i]) for k in range(r)) for i in pick]
    elements = set()
    for y in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        t = _solve(ci, [Fraction(v) for v in y])
        if all(0 <= v < 1 for v in t):
            x = [sum(t[k] * C[k][i] for k in range(r)) for i in range(m)]
            if all(v.denominator == 1 for v in x):
                elements.add(tuple(t))

    def add(a, b):
        return tuple((u + v) - math.floor(u + v) for u, v in zip(a, b))

    def times(q, a):
        return tuple((q * u) - math.floor(q * u) for u in a)

    zero = (Fraction(0),) * r
    gens = [coords(cols[j]) for j in range(n) if j not in basis]
    subgroup = {zero, *gens}
    frontier = list(subgroup)
    while frontier:
        new = {add(a, g) for a in frontier for g in gens} - subgroup
        subgroup |= new
        frontier = list(new)
    order = len(elements) // len(subgroup)

    def killed(q):
        return sum(1 for a in elements if times(q, a) in subgroup) // len(subgroup)

    invariants: list[int] = []
    for p in _primes(order):
        counts = [1]
        e = 1
        while True:
            counts.append(killed(p ** e))
            if counts[-1] == counts[-2]:
                break
            e += 1
        # number of cyclic factors of order >= p^k
        ge = [round(math.log(counts[k] // counts[k - 1], p)) for k in range(1, len(counts))]
        for k in range(len(ge)):
            exact = ge[k] - (ge[k + 1] if k + 1 < len(ge) else 0)
            invariants.extend([p ** (k + 1)] * exact)
    return FGAbelianGroup.from_invariants(m - r, _combine_primary(invariants))


def _primes(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _combine_primary(powers: list[int]) -> list[int]:
    """Invariant factors from elementary divisors."""
    by_prime: dict[int, list[int]] = {}
    for q in powers:
        by_prime.setdefault(_primes(q)[0], []).append(q)
    length = max((len(v) for v in by_prime.values()), default=0)
    out = [1] * length
    for v in by_prime.values():
        v.sort(reverse=True)
        for i, q in enumerate(v):
            out[length - 1 - i] *= q
    return [x for x in out if x > 1]


def membership_exhaustive(ambient: FGAbelianGroup, generators: Sequence[Sequence[int]],
                          x: Sequence[int], bound: int = 12) -> bool | None:
    """Search all combinations with coefficient sum at most ``bound``.

    ``True`` on a hit; ``False`` when the reachable set stops growing before
    the bound (the search is then complete); ``None`` otherwise.
    """
    target = ambient.reduce(x)
    gens = [ambient.reduce(g) for g in generators]
    reached = {ambient.zero()}
    layer = set(reached)
    for _ in range(bound):
        if target in reached:
            return True
        layer = {ambient.add(a, g) for a in layer for g in gens} - reached
        if not layer:
            return False
        reached |= layer
    return True if target in reached else None


def faces_by_functionals(generators: Sequence[Sequence[int]], rank: int, box: int = 3) -> set[frozenset]:
    """Zero sets of integer functionals in ``[-box, box]^rank`` nonnegative on the generators.

    Only the free coordinates matter; torsion coordinates are ignored.
    """
    out = set()
    for w in itertools.product(range(-box, box + 1), repeat=rank):
        vals = [sum(a * b for a, b in zip(w, g[:rank])) for g in generators]
        if all(v >= 0 for v in vals):
            out.add(frozenset(i for i, v in enumerate(vals) if v == 0))
    return out
