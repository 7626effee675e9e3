"""Exact integer linear algebra for finitely generated abelian groups.

Everything here works over Python ints, so there is no overflow.  Groups are
kept in canonical form ``Z^r + Z/d1 + ... + Z/dk`` with ``d1 | d2 | ... | dk``
and every ``di >= 2``; elements of such a group are integer tuples of length
``r + k`` whose torsion coordinates are reduced modulo the divisors.

A subgroup or subquotient is described by a :class:`Presentation`
(``Z^n`` modulo the column span of a relation matrix).  Presentations are
reduced through Smith normal form whenever a canonical form is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import prod
from typing import Iterable, Sequence

Vector = tuple[int, ...]


class IntMatrix:
    """Immutable integer matrix stored row-major."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Iterable[int]):
        entries = tuple(int(e) for e in entries)
        if rows < 0 or cols < 0 or len(entries) != rows * cols:
            raise ValueError(f"{rows}x{cols} matrix needs {rows * cols} entries, got {len(entries)}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("IntMatrix is immutable")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), cols, [e for r in rows for e in r])

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> IntMatrix:
        columns = [list(c) for c in columns]
        if any(len(c) != rows for c in columns):
            raise ValueError("ragged columns")
        return cls(rows, len(columns), [columns[j][i] for i in range(rows) for j in range(len(columns))])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        return cls(rows, cols, [0] * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(n, n, [int(i == j) for i in range(n) for j in range(n)])

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> Vector:
        return self.entries[j::self.cols] if self.cols else ()

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def tolist(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def T(self) -> IntMatrix:
        return IntMatrix.from_columns([self.row(i) for i in range(self.rows)], self.cols)

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            if self.cols != other.rows:
                raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
            ocols = other.columns()
            return IntMatrix(self.rows, other.cols,
                             [sum(a * b for a, b in zip(self.row(i), c)) for i in range(self.rows) for c in ocols])
        v = tuple(other)
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(sum(a * b for a, b in zip(self.row(i), v)) for i in range(self.rows))

    def hstack(self, other: IntMatrix) -> IntMatrix:
        if self.rows != other.rows:
            raise ValueError("row mismatch")
        return IntMatrix.from_columns(self.columns() + other.columns(), self.rows)

    def det(self) -> int:
        """Determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        a = self.tolist()
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1] if n else 1

    def is_diagonal(self) -> bool:
        return all(self[i, j] == 0 for i in range(self.rows) for j in range(self.cols) if i != j)

    def diagonal(self) -> list[int]:
        return [self[i, i] for i in range(min(self.rows, self.cols))]

    def __eq__(self, other):
        return (isinstance(other, IntMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self):
        return f"IntMatrix({self.tolist()!r})" if self.rows else f"IntMatrix.zeros(0, {self.cols})"


def _snf(a: list[list[int]], m: int, n: int):
    """Smith normal form on a mutable copy; returns D, U, Uinv, V, Vinv as lists."""
    d = [row[:] for row in a]
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    uinv = [r[:] for r in u]
    v = [[int(i == j) for j in range(n)] for i in range(n)]
    vinv = [r[:] for r in v]

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]
        for r in uinv:
            r[i], r[j] = r[j], r[i]

    def swap_cols(i, j):
        for r in d:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]
        vinv[i], vinv[j] = vinv[j], vinv[i]

    def add_row(i, j, c):  # row_i += c * row_j
        if c:
            d[i] = [x + c * y for x, y in zip(d[i], d[j])]
            u[i] = [x + c * y for x, y in zip(u[i], u[j])]
            for r in uinv:
                r[j] -= c * r[i]

    def add_col(i, j, c):  # col_i += c * col_j
        if c:
            for r in d:
                r[i] += c * r[j]
            for r in v:
                r[i] += c * r[j]
            vinv[j] = [x - c * y for x, y in zip(vinv[j], vinv[i])]

    t = 0
    while t < min(m, n):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if d[i][j] and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return d, u, uinv, v, vinv
            if best[0] != t:
                swap_rows(t, best[0])
            if best[1] != t:
                swap_cols(t, best[1])
            p = d[t][t]
            clean = True
            for i in range(t + 1, m):
                add_row(i, t, -(d[i][t] // p))
                clean = clean and d[i][t] == 0
            for j in range(t + 1, n):
                add_col(j, t, -(d[t][j] // p))
                clean = clean and d[t][j] == 0
            if not clean:
                continue
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if d[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
            for r in uinv:
                r[t] = -r[t]
        t += 1
    return d, u, uinv, v, vinv


def smith_normal_form(A: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(U, D, V)`` with ``D = U @ A @ V`` in Smith normal form.

    ``U`` and ``V`` are unimodular, ``D`` is diagonal with nonnegative entries
    ``d1 | d2 | ...``; zeros come last.
    """
    d, u, _, v, _ = _snf(A.tolist(), A.rows, A.cols)
    return (IntMatrix.from_rows(u, A.rows), IntMatrix.from_rows(d, A.cols),
            IntMatrix.from_rows(v, A.cols))


def _decompose(A: IntMatrix):
    d, u, uinv, v, vinv = _snf(A.tolist(), A.rows, A.cols)
    diag = [d[i][i] if i < A.cols else 0 for i in range(A.rows)]
    return diag, u, uinv, v


def integer_kernel(A: IntMatrix) -> list[Vector]:
    """A basis of ``{x in Z^cols : A x = 0}``."""
    d, _, _, v, _ = _snf(A.tolist(), A.rows, A.cols)
    rank = sum(1 for i in range(min(A.rows, A.cols)) if d[i][i])
    return [tuple(v[i][j] for i in range(A.cols)) for j in range(rank, A.cols)]


def solve_integer(A: IntMatrix, b: Sequence[int]) -> Vector | None:
    """Some integer ``x`` with ``A x = b``, or ``None`` if there is none."""
    if len(b) != A.rows:
        raise ValueError("right-hand side length mismatch")
    diag, u, _, v = _decompose(A)
    c = [sum(x * y for x, y in zip(row, b)) for row in u]
    y = [0] * A.cols
    for i, (ci, di) in enumerate(zip(c, diag)):
        if di == 0:
            if ci:
                return None
        elif ci % di:
            return None
        else:
            y[i] = ci // di
    return tuple(sum(v[i][j] * y[j] for j in range(A.cols)) for i in range(A.cols))


@dataclass(frozen=True)
class FGAbelianGroup:
    """``Z^rank + Z/d1 + ... + Z/dk`` in canonical form."""

    rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(int(t) for t in self.torsion))
        if self.rank < 0:
            raise ValueError("negative rank")
        if any(t < 2 for t in self.torsion):
            raise ValueError(f"torsion divisors must be >= 2: {self.torsion}")
        if any(b % a for a, b in zip(self.torsion, self.torsion[1:])):
            raise ValueError(f"torsion divisors must form a divisibility chain: {self.torsion}")

    @classmethod
    def free(cls, rank: int) -> FGAbelianGroup:
        return cls(rank, ())

    @classmethod
    def from_invariants(cls, rank: int, divisors: Iterable[int]) -> FGAbelianGroup:
        """Canonical form of ``Z^rank + sum Z/n`` for arbitrary ``n`` (units dropped)."""
        divisors = [abs(int(n)) for n in divisors]
        rank += divisors.count(0)
        nz = [n for n in divisors if n]
        if not nz:
            return cls(rank)
        diag, *_ = _decompose(IntMatrix.from_rows([[n if i == j else 0 for j in range(len(nz))]
                                                   for i, n in enumerate(nz)]))
        return cls(rank, tuple(n for n in diag if n > 1))

    @property
    def dim(self) -> int:
        """Number of coordinates of an element."""
        return self.rank + len(self.torsion)

    @property
    def torsion_order(self) -> int:
        return prod(self.torsion)

    @property
    def is_trivial(self) -> bool:
        return self.rank == 0 and not self.torsion

    @property
    def is_finite(self) -> bool:
        return self.rank == 0

    @property
    def order(self) -> int | None:
        """Group order, or ``None`` if infinite."""
        return self.torsion_order if self.rank == 0 else None

    def reduce(self, x: Sequence[int]) -> Vector:
        if len(x) != self.dim:
            raise ValueError(f"element {tuple(x)} has {len(x)} coordinates, ambient {self} needs {self.dim}")
        r = self.rank
        return tuple(int(a) for a in x[:r]) + tuple(int(a) % d for a, d in zip(x[r:], self.torsion))

    def zero(self) -> Vector:
        return (0,) * self.dim

    def add(self, x: Sequence[int], y: Sequence[int]) -> Vector:
        return self.reduce([a + b for a, b in zip(x, y)])

    def neg(self, x: Sequence[int]) -> Vector:
        return self.reduce([-a for a in x])

    def combination(self, coefficients: Sequence[int], elements: Sequence[Sequence[int]]) -> Vector:
        total = [0] * self.dim
        for c, e in zip(coefficients, elements):
            if c:
                for i, a in enumerate(e):
                    total[i] += c * a
        return self.reduce(total)

    def free_part(self, x: Sequence[int]) -> Vector:
        return tuple(x[:self.rank])

    def relation_matrix(self) -> IntMatrix:
        """Columns ``d_i e_{rank+i}``: the relations presenting this group on ``Z^dim``."""
        cols = []
        for i, d in enumerate(self.torsion):
            col = [0] * self.dim
            col[self.rank + i] = d
            cols.append(col)
        return IntMatrix.from_columns(cols, self.dim)

    def presentation(self) -> Presentation:
        return Presentation(self.dim, self.relation_matrix())

    def element_order(self, x: Sequence[int]) -> int | None:
        x = self.reduce(x)
        if any(x[:self.rank]):
            return None
        n = 1
        for a, d in zip(x[self.rank:], self.torsion):
            g = d // _gcd(a, d)
            n = n * g // _gcd(n, g)
        return n

    def __str__(self):
        parts = []
        if self.rank:
            parts.append("Z" if self.rank == 1 else f"Z^{self.rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts) if parts else "0"


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


@dataclass(frozen=True)
class Coordinates:
    """Explicit isomorphism between a presented group and its canonical form.

    ``project`` maps ``Z^n`` onto canonical coordinates (reduce afterwards);
    ``section`` lifts the i-th canonical basis element back into ``Z^n``.
    """

    group: FGAbelianGroup
    project: IntMatrix
    section: IntMatrix

    def __call__(self, x: Sequence[int]) -> Vector:
        return self.group.reduce(self.project @ x)

    def lift(self, y: Sequence[int]) -> Vector:
        return self.section @ y


@dataclass(frozen=True)
class Presentation:
    """The group ``Z^ngens`` modulo the column span of ``relations``."""

    ngens: int
    relations: IntMatrix = field(default=None)

    def __post_init__(self):
        rel = self.relations
        if rel is None:
            rel = IntMatrix.zeros(self.ngens, 0)
        elif not isinstance(rel, IntMatrix):
            rel = IntMatrix.from_columns(list(rel), self.ngens)
        if rel.rows != self.ngens:
            raise ValueError("relation matrix must have one row per generator")
        object.__setattr__(self, "relations", rel)

    @cached_property
    def coordinates(self) -> Coordinates:
        diag, u, uinv, _ = _decompose(self.relations)
        free_rows = [i for i, d in enumerate(diag) if d == 0]
        tors_rows = [i for i, d in enumerate(diag) if d > 1]
        keep = free_rows + tors_rows
        group = FGAbelianGroup(len(free_rows), tuple(diag[i] for i in tors_rows))
        project = IntMatrix.from_rows([u[i] for i in keep], self.ngens)
        section = IntMatrix.from_columns([[uinv[r][i] for r in range(self.ngens)] for i in keep], self.ngens)
        return Coordinates(group, project, section)

    @property
    def group(self) -> FGAbelianGroup:
        return self.coordinates.group

    def contains_relation(self, x: Sequence[int]) -> bool:
        """Whether ``x`` is zero in this group."""
        return solve_integer(self.relations, x) is not None

    def equal(self, x: Sequence[int], y: Sequence[int]) -> bool:
        return self.contains_relation([a - b for a, b in zip(x, y)])

    def span_contains(self, gens: Sequence[Sequence[int]], x: Sequence[int]) -> Vector | None:
        """Coefficients ``c`` with ``x = sum c_i gens_i`` in this group, or ``None``."""
        a = IntMatrix.from_columns(list(gens), self.ngens).hstack(self.relations)
        sol = solve_integer(a, x)
        return None if sol is None else sol[:len(gens)]


class GroupHom:
    """Homomorphism between presented groups, given on generators.

    ``matrix`` has one column per source generator holding its image in
    target generators.  Well-definedness (source relations land in the target
    relation span) is checked at construction.
    """

    def __init__(self, source: Presentation, target: Presentation, matrix: IntMatrix):
        if matrix.rows != target.ngens or matrix.cols != source.ngens:
            raise ValueError(f"matrix shape {matrix.rows}x{matrix.cols} does not match "
                             f"{source.ngens} -> {target.ngens} generators")
        for rel in source.relations.columns():
            if not target.contains_relation(matrix @ rel):
                raise ValueError(f"not well defined: relation {rel} maps to a nonzero element")
        self.source = source
        self.target = target
        self.matrix = matrix

    @classmethod
    def between(cls, source: FGAbelianGroup, target: FGAbelianGroup, matrix: IntMatrix) -> GroupHom:
        return cls(source.presentation(), target.presentation(), matrix)

    def __call__(self, x: Sequence[int]) -> Vector:
        return self.matrix @ x

    def compose(self, first: GroupHom) -> GroupHom:
        """``self`` after ``first``."""
        return GroupHom(first.source, self.target, self.matrix @ first.matrix)

    @cached_property
    def _kernel_lattice(self) -> list[Vector]:
        n = self.source.ngens
        basis = integer_kernel(self.matrix.hstack(self.target.relations))
        return _lattice_basis([b[:n] for b in basis], n)

    def kernel_generators(self) -> list[Vector]:
        """Generators (in source coordinates) of the kernel."""
        return list(self._kernel_lattice)

    def kernel_presentation(self) -> Presentation:
        kb = self._kernel_lattice
        if not kb:
            return Presentation(0)
        a = IntMatrix.from_columns(kb, self.source.ngens).hstack(self.source.relations)
        rels = _lattice_basis([r[:len(kb)] for r in integer_kernel(a)], len(kb))
        return Presentation(len(kb), IntMatrix.from_columns(rels, len(kb)))

    def image_presentation(self) -> Presentation:
        n = self.source.ngens
        return Presentation(n, IntMatrix.from_columns(self._kernel_lattice, n))

    def cokernel_presentation(self) -> Presentation:
        return Presentation(self.target.ngens, self.matrix.hstack(self.target.relations))

    def is_injective(self) -> bool:
        return self.kernel_presentation().group.is_trivial

    def is_surjective(self) -> bool:
        return self.cokernel_presentation().group.is_trivial

    def is_isomorphism(self) -> bool:
        return self.is_injective() and self.is_surjective()

    def __repr__(self):
        return f"GroupHom({self.source.group} -> {self.target.group}, {self.matrix.tolist()})"


def _lattice_basis(vectors: Sequence[Sequence[int]], n: int) -> list[Vector]:
    """A basis of the lattice spanned by ``vectors`` in ``Z^n``."""
    vectors = [tuple(v) for v in vectors if any(v)]
    if not vectors:
        return []
    a = IntMatrix.from_columns(vectors, n)
    diag, u, uinv, _ = _decompose(a)
    # span = Uinv * span(D); the nonzero diagonal entries scale Uinv's columns
    return [tuple(uinv[r][i] * diag[i] for r in range(n)) for i, d in enumerate(diag) if d]


def cokernel(h: GroupHom) -> FGAbelianGroup:
    """Canonical form of ``target / image(h)``."""
    return h.cokernel_presentation().group


def kernel_image(h: GroupHom) -> tuple[FGAbelianGroup, FGAbelianGroup]:
    return h.kernel_presentation().group, h.image_presentation().group


# -- subgroups of a canonical group ------------------------------------------------

def span_presentation(ambient: FGAbelianGroup, gens: Sequence[Sequence[int]]) -> Presentation:
    """The subgroup generated by ``gens``, presented on those generators."""
    k = len(gens)
    if not k:
        return Presentation(0)
    a = IntMatrix.from_columns([ambient.reduce(g) for g in gens], ambient.dim).hstack(ambient.relation_matrix())
    rels = _lattice_basis([r[:k] for r in integer_kernel(a)], k)
    return Presentation(k, IntMatrix.from_columns(rels, k))


def span_group(ambient: FGAbelianGroup, gens: Sequence[Sequence[int]]) -> FGAbelianGroup:
    return span_presentation(ambient, gens).group


def in_span(ambient: FGAbelianGroup, gens: Sequence[Sequence[int]], x: Sequence[int]) -> Vector | None:
    """Integer coefficients expressing ``x`` in the span of ``gens``, or ``None``."""
    return ambient.presentation().span_contains([ambient.reduce(g) for g in gens], ambient.reduce(x))


def quotient(ambient: FGAbelianGroup, gens: Sequence[Sequence[int]]) -> Coordinates:
    """Canonical coordinates on ``ambient / <gens>``."""
    rel = ambient.relation_matrix()
    if gens:
        rel = rel.hstack(IntMatrix.from_columns([ambient.reduce(g) for g in gens], ambient.dim))
    return Presentation(ambient.dim, rel).coordinates


@dataclass(frozen=True)
class ShortExactReport:
    """Outcome of checking ``0 -> B/A -> C/A -> C/B -> 0``."""

    sub: FGAbelianGroup
    middle: FGAbelianGroup
    quotient: FGAbelianGroup
    injective: bool
    exact_in_middle: bool
    surjective: bool

    @property
    def exact(self) -> bool:
        return self.injective and self.exact_in_middle and self.surjective

    def __bool__(self):
        return self.exact


def short_exact_check(ambient: FGAbelianGroup, a: Sequence[Sequence[int]],
                      b: Sequence[Sequence[int]], c: Sequence[Sequence[int]]) -> ShortExactReport:
    """Check the sequence ``0 -> B/A -> C/A -> C/B -> 0`` for nested ``A <= B <= C``.

    The three subgroups are given by generator lists in ``ambient``.
    Raises ``ValueError`` if an element has the wrong arity or the chain is
    not nested.
    """
    a, b, c = ([ambient.reduce(x) for x in gens] for gens in (a, b, c))
    pc = span_presentation(ambient, c)

    def lifts(gens, what):
        out = []
        for g in gens:
            coeff = in_span(ambient, c, g)
            if coeff is None:
                raise ValueError(f"{what} generator {g} does not lie in C")
            out.append(coeff)
        return out

    alift, blift = lifts(a, "A"), lifts(b, "B")
    for g in a:
        if in_span(ambient, b, g) is None:
            raise ValueError(f"A generator {g} does not lie in B")
    n = len(c)
    rel_c = pc.relations
    c_mod_a = Presentation(n, rel_c.hstack(IntMatrix.from_columns(alift, n)) if alift else rel_c)
    c_mod_b = Presentation(n, rel_c.hstack(IntMatrix.from_columns(blift, n)) if blift else rel_c)
    # B/A on B's generators: relations are coefficient vectors landing in A
    k = len(b)
    if k:
        stack = IntMatrix.from_columns(b + a, ambient.dim).hstack(ambient.relation_matrix())
        rels = _lattice_basis([r[:k] for r in integer_kernel(stack)], k)
        b_mod_a = Presentation(k, IntMatrix.from_columns(rels, k))
    else:
        b_mod_a = Presentation(0)
    incl = GroupHom(b_mod_a, c_mod_a, IntMatrix.from_columns(blift, n) if k else IntMatrix.zeros(n, 0))
    proj = GroupHom(c_mod_a, c_mod_b, IntMatrix.identity(n))
    image = incl.matrix.columns()
    kernel = proj.kernel_generators()
    middle_exact = (all(c_mod_a.span_contains(image, v) is not None for v in kernel)
                    and all(c_mod_a.span_contains(kernel, v) is not None for v in image))
    return ShortExactReport(b_mod_a.group, c_mod_a.group, c_mod_b.group,
                            incl.is_injective(), middle_exact, proj.is_surjective())
