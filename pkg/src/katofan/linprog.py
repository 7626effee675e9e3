"""Exact rational feasibility for ``A z = b, z >= 0`` (phase-one simplex).

Only feasibility is ever needed here: cone containment and positive
relations.  Bland's rule keeps the pivoting finite.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def feasible_point(A: Sequence[Sequence[int]], b: Sequence[int]) -> list[Fraction] | None:
    """A nonnegative rational solution of ``A z = b`` or ``None``."""
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return [Fraction(0)] * n
    rows = []
    for i in range(m):
        sign = -1 if b[i] < 0 else 1
        rows.append([Fraction(sign * a) for a in A[i]] + [Fraction(int(i == j)) for j in range(m)]
                    + [Fraction(sign * b[i])])
    basis = [n + i for i in range(m)]
    width = n + m
    # objective: minimise the sum of artificials, i.e. reduced costs below
    cost = [-sum(r[j] for r in rows) if j < n else Fraction(0) for j in range(width)]
    cost.append(-sum(r[-1] for r in rows))

    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i, r in enumerate(rows):
            if r[enter] > 0:
                ratio = r[-1] / r[enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # unbounded cannot happen in phase one
            break
        i = best[1]
        piv = rows[i][enter]
        rows[i] = [x / piv for x in rows[i]]
        for k in range(m):
            if k != i and rows[k][enter]:
                f = rows[k][enter]
                rows[k] = [x - f * y for x, y in zip(rows[k], rows[i])]
        f = cost[enter]
        cost = [x - f * y for x, y in zip(cost, rows[i])]
        basis[i] = enter

    if cost[-1] != 0:
        return None
    z = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            z[j] = rows[i][-1]
        elif rows[i][-1] != 0:
            return None
    return z
