"""Fine monoids as finitely generated submonoids of canonical abelian groups.

A :class:`FineMonoid` is a list of generators inside an ambient group
``Z^r + Z/d1 + ...``.  Integrality is automatic in this representation.
Cone-theoretic data (facets of the rational cone of the free parts, the unit
face, a degree functional) is computed once per monoid and cached; membership,
faces, saturation and isomorphism testing are all built on it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm
from typing import Iterator, Sequence

from .abelian import (
    Coordinates,
    FGAbelianGroup,
    GroupHom,
    IntMatrix,
    Presentation,
    Vector,
    in_span,
    integer_kernel,
    quotient,
    span_presentation,
)
from .linprog import feasible_point

DEFAULT_BOUND = 12


class SaturationBoundError(ValueError):
    """Raised when a Hilbert-basis enumeration would exceed its degree bound."""


class FineMonoid:
    """Submonoid of ``ambient`` generated by ``generators``.

    Generators are reduced, deduplicated, stripped of zeros and sorted in
    descending lexicographic order, so two monoids given by the same
    generating set compare equal.  The trivial monoid has no generators.
    """

    __slots__ = ("ambient", "generators", "__dict__")

    def __init__(self, ambient: FGAbelianGroup, generators: Sequence[Sequence[int]]):
        gens = {ambient.reduce(g) for g in generators}
        gens.discard(ambient.zero())
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "generators", tuple(sorted(gens, reverse=True)))

    def __setattr__(self, name, value):
        raise AttributeError("FineMonoid is immutable")

    @classmethod
    def free(cls, k: int) -> FineMonoid:
        """``N^k`` inside ``Z^k``."""
        return cls(FGAbelianGroup(k), [tuple(int(i == j) for j in range(k)) for i in range(k)])

    @classmethod
    def trivial(cls) -> FineMonoid:
        return cls(FGAbelianGroup(0), [])

    @classmethod
    def in_lattice(cls, generators: Sequence[Sequence[int]], rank: int | None = None) -> FineMonoid:
        generators = [tuple(g) for g in generators]
        if rank is None:
            rank = len(generators[0]) if generators else 0
        return cls(FGAbelianGroup(rank), generators)

    def __eq__(self, other):
        return (isinstance(other, FineMonoid) and self.ambient == other.ambient
                and self.generators == other.generators)

    def __hash__(self):
        return hash((self.ambient, self.generators))

    def __repr__(self):
        gens = " ".join(str(g) for g in self.generators)
        return f"FineMonoid({self.ambient}; {gens or '0'})"

    def __len__(self):
        return len(self.generators)

    @cached_property
    def _generator_index(self) -> dict[Vector, int]:
        return {g: i for i, g in enumerate(self.generators)}

    # -- cone data -------------------------------------------------------------

    @cached_property
    def _cone(self) -> _Cone:
        return _Cone([self.ambient.free_part(g) for g in self.generators], self.ambient.rank)

    @property
    def facet_normals(self) -> list[Vector]:
        return list(self._cone.facets)

    @cached_property
    def unit_indices(self) -> frozenset[int]:
        return frozenset(i for i, v in enumerate(self._cone.vectors) if self._cone.in_lineality(v))

    @cached_property
    def degree(self) -> Vector:
        """Integer functional vanishing on units and >= 1 on other generators."""
        r = self.ambient.rank
        return tuple(sum(w[i] for w in self._cone.facets) for i in range(r))

    def deg(self, x: Sequence[int]) -> int:
        return sum(a * b for a, b in zip(self.degree, x))

    @property
    def is_sharp(self) -> bool:
        return not self.unit_indices

    @cached_property
    def gp_presentation(self) -> Presentation:
        return span_presentation(self.ambient, self.generators)

    def in_group(self, x: Sequence[int]) -> Vector | None:
        """Integer coefficients on the generators expressing ``x``, if ``x`` is in ``M^gp``."""
        return in_span(self.ambient, self.generators, x)

    def in_cone(self, x: Sequence[int]) -> bool:
        return self._cone.contains(self.ambient.free_part(x))

    # -- membership ------------------------------------------------------------

    @cached_property
    def _unit_quotient(self) -> Coordinates:
        return quotient(self.ambient, [self.generators[i] for i in sorted(self.unit_indices)])

    @cached_property
    def _positive_unit_relation(self) -> Vector:
        """Coefficients ``a >= 1`` on the unit generators with ``sum a_u u = 0``."""
        units = [self.generators[i] for i in sorted(self.unit_indices)]
        if not units:
            return ()
        r = self.ambient.rank
        vecs = [u[:r] for u in units]
        rhs = [-sum(v[i] for v in vecs) for i in range(r)]
        z = feasible_point([[v[i] for v in vecs] for i in range(r)], rhs)
        assert z is not None, "unit generators must span a linear cone"
        den = lcm(*(Fraction(1 + t).denominator for t in z)) if z else 1
        a = [int((1 + t) * den) for t in z]
        order = self.ambient.element_order(self.ambient.combination(a, units))
        return tuple(order * x for x in a)

    def membership(self, x: Sequence[int], bound: int | None = DEFAULT_BOUND) -> Membership:
        """Decide ``x in M``.

        Returns ``true`` with a certificate (nonnegative coefficients on
        :attr:`generators`), ``false`` when the answer is certain, or
        ``unknown`` when the search with coefficient sum ``<= bound`` over the
        non-unit generators was not exhaustive.  ``bound=None`` searches
        until the answer is certain.
        """
        x = self.ambient.reduce(x)
        if bound is not None and bound < 0:
            raise ValueError("bound must be nonnegative")
        if self.in_group(x) is None or not self.in_cone(x):
            return Membership("false", None, bound)
        target_degree = self.deg(x)
        units = sorted(self.unit_indices)
        others = [i for i in range(len(self.generators)) if i not in self.unit_indices]
        q = self._unit_quotient
        goal = q(x)
        steps = [(i, q(self.generators[i]), self.deg(self.generators[i])) for i in others]
        start = q(self.ambient.zero())
        parent: dict[Vector, tuple[Vector, int] | None] = {start: None}
        degree = {start: 0}
        frontier = [start]
        depth = 0
        found = goal == start
        while frontier and not found:
            if bound is not None and depth >= bound:
                break
            depth += 1
            nxt = []
            for p in frontier:
                for i, step, dg in steps:
                    d = degree[p] + dg
                    if d > target_degree:
                        continue
                    s = q.group.reduce([a + b for a, b in zip(p, step)])
                    if s in parent:
                        continue
                    parent[s] = (p, i)
                    degree[s] = d
                    nxt.append(s)
                    if s == goal:
                        found = True
            frontier = nxt
        if not found:
            return Membership("unknown" if frontier else "false", None, bound)

        coeff = [0] * len(self.generators)
        p = goal
        while parent[p] is not None:
            p, i = parent[p]
            coeff[i] += 1
        if units:
            rest = self.ambient.combination([-c for c in coeff], self.generators)
            rest = self.ambient.add(x, rest)
            z = in_span(self.ambient, [self.generators[i] for i in units], rest)
            rel = self._positive_unit_relation
            k = max([0] + [(-zi + ai - 1) // ai for zi, ai in zip(z, rel)])
            for i, zi, ai in zip(units, z, rel):
                coeff[i] = zi + k * ai
        cert = tuple(coeff)
        assert self.ambient.combination(cert, self.generators) == x
        return Membership("true", cert, bound)

    def contains(self, x: Sequence[int]) -> bool:
        return self.membership(x, bound=None).status == "true"

    # -- structure -------------------------------------------------------------

    @cached_property
    def units(self) -> Face:
        return Face(self, self.unit_indices)

    @cached_property
    def faces(self) -> tuple[Face, ...]:
        """All faces, ordered by (size, sorted generator indices)."""
        n = len(self.generators)
        full = frozenset(range(n))
        facet_sets = {frozenset(i for i, v in enumerate(self._cone.vectors) if _dot(w, v) == 0)
                      for w in self._cone.facets}
        found = {full}
        frontier = [full]
        while frontier:
            nxt = []
            for s in frontier:
                for f in facet_sets:
                    t = s & f
                    if t not in found:
                        found.add(t)
                        nxt.append(t)
            frontier = nxt
        return tuple(Face(self, s) for s in sorted(found, key=lambda s: (len(s), sorted(s))))

    def face_index(self, face: Face) -> int:
        if face.parent != self:
            raise ValueError("face belongs to a different monoid")
        for k, f in enumerate(self.faces):
            if f.indices == face.indices:
                return k
        raise ValueError(f"generator set {sorted(face.indices)} is not a face of {self}")

    def face_of(self, elements: Sequence[Sequence[int]]) -> Face:
        """Smallest face containing the given elements of ``M``."""
        best = None
        for f in self.faces:
            if all(f.contains(e) for e in elements):
                if best is None or f.indices < best.indices:
                    best = f
        if best is None:
            raise ValueError("elements do not lie in the monoid")
        return best

    @cached_property
    def irreducibles(self) -> tuple[Vector, ...]:
        """The minimal generating set of a sharp monoid."""
        if not self.is_sharp:
            raise ValueError("irreducibles are only canonical for sharp monoids")
        out = []
        for i, g in enumerate(self.generators):
            rest = FineMonoid(self.ambient, self.generators[:i] + self.generators[i + 1:])
            if not rest.contains(g):
                out.append(g)
        return tuple(out)

    @cached_property
    def _sharp_localizations(self) -> dict:
        return {}


class _Cone:
    """Rational polyhedral cone generated by integer vectors in ``Q^r``.

    Facet normals are primitive integer vectors inside the span of the
    generators, found by brute force over (d-1)-subsets of generators.
    """

    def __init__(self, vectors: Sequence[Vector], r: int):
        self.vectors = [tuple(v) for v in vectors]
        self.r = r
        self.basis = _independent(self.vectors)
        self.dim = len(self.basis)
        self.facets = self._facets()

    def _facets(self) -> list[Vector]:
        d = self.dim
        if d == 0:
            return []
        nonzero = [v for v in self.vectors if any(v)]
        found = set()
        for subset in itertools.combinations(sorted(set(nonzero)), d - 1):
            if len(_independent(subset)) != d - 1:
                continue
            m = IntMatrix.from_rows([[_dot(b, s) for b in self.basis] for s in subset], d)
            ker = integer_kernel(m)
            if len(ker) != 1:
                continue
            w = [sum(beta * b[i] for beta, b in zip(ker[0], self.basis)) for i in range(self.r)]
            g = 0
            for a in w:
                g = gcd(g, a)
            w = tuple(a // g for a in w)
            vals = [_dot(w, v) for v in self.vectors]
            if all(x >= 0 for x in vals):
                found.add(w)
            elif all(x <= 0 for x in vals):
                found.add(tuple(-a for a in w))
        return sorted(found)

    def in_lineality(self, v: Sequence[int]) -> bool:
        return all(_dot(w, v) == 0 for w in self.facets)

    def in_span(self, v: Sequence[int]) -> bool:
        return len(_independent(self.basis + [tuple(v)])) == self.dim

    def contains(self, v: Sequence[int]) -> bool:
        return self.in_span(v) and all(_dot(w, v) >= 0 for w in self.facets)


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _independent(vectors: Sequence[Sequence[int]]) -> list[Vector]:
    """Greedy maximal linearly independent subset (over Q), in input order."""
    chosen: list[Vector] = []
    echelon: list[list[Fraction]] = []
    pivots: list[int] = []
    for v in vectors:
        row = [Fraction(a) for a in v]
        for e, p in zip(echelon, pivots):
            if row[p]:
                f = row[p] / e[p]
                row = [a - f * b for a, b in zip(row, e)]
        p = next((i for i, a in enumerate(row) if a), None)
        if p is not None:
            echelon.append(row)
            pivots.append(p)
            chosen.append(tuple(v))
    return chosen


@dataclass(frozen=True)
class Membership:
    status: str
    certificate: tuple[int, ...] | None = None
    bound: int | None = None

    def __bool__(self):
        return self.status == "true"


class Face:
    """A face of a fine monoid, recorded by the generators it contains."""

    __slots__ = ("parent", "indices")

    def __init__(self, parent: FineMonoid, indices):
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "indices", frozenset(indices))

    def __setattr__(self, name, value):
        raise AttributeError("Face is immutable")

    @property
    def generators(self) -> tuple[Vector, ...]:
        return tuple(self.parent.generators[i] for i in sorted(self.indices))

    @property
    def monoid(self) -> FineMonoid:
        return FineMonoid(self.parent.ambient, self.generators)

    def contains(self, x: Sequence[int]) -> bool:
        return self.monoid.contains(x)

    def __le__(self, other: Face) -> bool:
        return self.indices <= other.indices

    def __eq__(self, other):
        return isinstance(other, Face) and self.parent == other.parent and self.indices == other.indices

    def __hash__(self):
        return hash((self.parent, self.indices))

    def __repr__(self):
        return f"Face({sorted(self.indices)} of {self.parent})"


class MonoidHom:
    """Homomorphism of fine monoids, given by the images of the source generators.

    With ``check=True`` the assignment is verified to extend to the
    groupifications (every relation among source generators maps to zero)
    and every image is verified to lie in the target monoid.
    """

    __slots__ = ("source", "target", "images", "__dict__")

    def __init__(self, source: FineMonoid, target: FineMonoid, images: Sequence[Sequence[int]],
                 check: bool = True):
        images = tuple(target.ambient.reduce(x) for x in images)
        if len(images) != len(source.generators):
            raise ValueError(f"need {len(source.generators)} images, got {len(images)}")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "images", images)
        if check:
            for rel in source.gp_presentation.relations.columns():
                if any(target.ambient.combination(rel, images)):
                    raise ValueError(f"assignment does not respect the relation {rel} among source generators")
            for g, x in zip(source.generators, images):
                if not target.contains(x):
                    raise ValueError(f"image {x} of generator {g} is not in the target monoid")

    def __setattr__(self, name, value):
        raise AttributeError("MonoidHom is immutable")

    @classmethod
    def from_assignment(cls, source: FineMonoid, target: FineMonoid,
                        pairs: Sequence[tuple[Sequence[int], Sequence[int]]]) -> MonoidHom:
        """Build a hom from images of elements whose span contains every generator."""
        dom = [source.ambient.reduce(a) for a, _ in pairs]
        cod = [target.ambient.reduce(b) for _, b in pairs]
        for rel in span_presentation(source.ambient, dom).relations.columns():
            if any(target.ambient.combination(rel, cod)):
                raise ValueError("assignment is not compatible with the relations among its arguments")
        images = []
        for g in source.generators:
            c = in_span(source.ambient, dom, g)
            if c is None:
                raise ValueError(f"generator {g} is not in the span of the assigned elements")
            images.append(target.ambient.combination(c, cod))
        return cls(source, target, images)

    @classmethod
    def identity(cls, m: FineMonoid) -> MonoidHom:
        return cls(m, m, m.generators, check=False)

    def __call__(self, x: Sequence[int]) -> Vector:
        x = self.source.ambient.reduce(x)
        i = self.source._generator_index.get(x)
        if i is not None:
            return self.images[i]
        if not any(x):
            return self.target.ambient.zero()
        c = self.source.in_group(x)
        if c is None:
            raise ValueError(f"{tuple(x)} is not in the groupification of the source")
        return self.target.ambient.combination(c, self.images)

    def compose(self, first: MonoidHom) -> MonoidHom:
        """``self`` after ``first``."""
        if first.target != self.source:
            raise ValueError("composition of non-composable homs")
        return MonoidHom(first.source, self.target, [self(x) for x in first.images], check=False)

    @cached_property
    def gp_map(self) -> GroupHom:
        cols = []
        for x in self.images:
            c = self.target.in_group(x)
            cols.append(c)
        src, tgt = self.source.gp_presentation, self.target.gp_presentation
        return GroupHom(src, tgt, IntMatrix.from_columns(cols, tgt.ngens))

    def is_isomorphism(self) -> bool:
        return self.gp_map.is_injective() and all(
            FineMonoid(self.target.ambient, self.images).contains(g) for g in self.target.generators)

    def inverse(self) -> MonoidHom:
        """Inverse of an isomorphism."""
        key = (self.source, self.target, self.images)
        if key not in _INVERSES:
            _INVERSES[key] = self._inverse()
        return _INVERSES[key]

    def _inverse(self) -> MonoidHom:
        image_monoid = FineMonoid(self.target.ambient, self.images)
        pre = []
        for g in self.target.generators:
            m = image_monoid.membership(g, bound=None)
            if not m:
                raise ValueError("hom is not surjective")
            # certificate is on image_monoid's (sorted, deduplicated) generators
            lifts = {x: s for s, x in zip(self.source.generators, self.images)}
            pre.append(self.source.ambient.combination(
                m.certificate, [lifts[x] for x in image_monoid.generators]))
        inv = MonoidHom(self.target, self.source, pre, check=False)
        if any(inv(x) != s for s, x in zip(self.source.generators, self.images)):
            raise ValueError("hom is not injective")
        return inv

    def __eq__(self, other):
        return (isinstance(other, MonoidHom) and self.source == other.source
                and self.target == other.target and self.images == other.images)

    def __hash__(self):
        return hash((self.source, self.target, self.images))

    def __repr__(self):
        pairs = ", ".join(f"{g}->{x}" for g, x in zip(self.source.generators, self.images))
        return f"MonoidHom({pairs})"


_INVERSES: dict = {}


# -- operations ----------------------------------------------------------------------

def membership(m: FineMonoid, x: Sequence[int], bound: int | None = DEFAULT_BOUND) -> Membership:
    return m.membership(x, bound)


def units(m: FineMonoid) -> Face:
    return m.units


def groupify(m: FineMonoid) -> FGAbelianGroup:
    return m.gp_presentation.group


def faces(m: FineMonoid) -> list[Face]:
    return list(m.faces)


def sharpen(m: FineMonoid) -> tuple[FineMonoid, MonoidHom]:
    """The sharpening ``M / M*`` together with the projection."""
    if m.is_sharp:
        return m, MonoidHom.identity(m)
    q = m._unit_quotient
    images = [q(g) for g in m.generators]
    bar = FineMonoid(q.group, images)
    bar = FineMonoid(q.group, bar.irreducibles)
    return bar, MonoidHom(m, bar, images, check=False)


def localize(m: FineMonoid, face: Face) -> FineMonoid:
    """``M + (-F)``."""
    _check_face(m, face)
    return FineMonoid(m.ambient, m.generators + tuple(m.ambient.neg(g) for g in face.generators))


def sharp_localize(m: FineMonoid, face: Face) -> tuple[FineMonoid, MonoidHom]:
    """Sharpened localization at a face, with the canonical hom from ``M``."""
    _check_face(m, face)
    cache = m._sharp_localizations
    if face.indices not in cache:
        q = quotient(m.ambient, face.generators)
        images = [q(g) for g in m.generators]
        target = FineMonoid(q.group, images)
        target = FineMonoid(q.group, target.irreducibles)
        cache[face.indices] = (target, MonoidHom(m, target, images, check=False))
    return cache[face.indices]


def _check_face(m: FineMonoid, face: Face):
    if face.parent != m:
        raise ValueError("face belongs to a different monoid")
    m.face_index(face)


def saturate(m: FineMonoid, bound: int = DEFAULT_BOUND) -> FineMonoid:
    """``{x in M^gp : n x in M for some n >= 1}``.

    Every element of the saturation is a generator plus a lattice point of
    the zonotope spanned by the generators; those points are enumerated in the
    bounding box of the zonotope.  ``bound`` caps the box side length.
    """
    amb = m.ambient
    r = amb.rank
    lo = [sum(min(0, g[i]) for g in m.generators) for i in range(r)]
    hi = [sum(max(0, g[i]) for g in m.generators) for i in range(r)]
    for a, b in zip(lo, hi):
        if b - a > bound:
            raise SaturationBoundError(f"zonotope box side {b - a} exceeds the bound {bound}")
    candidates = set(m.generators)
    coords = m.gp_presentation.coordinates
    tors_start = coords.group.rank
    for k in range(len(coords.group.torsion)):
        e = [0] * coords.group.dim
        e[tors_start + k] = 1
        candidates.add(amb.combination(coords.lift(e), m.generators))
    tors_ranges = [range(d) for d in amb.torsion]
    for free in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        if not m._cone.contains(free):
            continue
        for tors in itertools.product(*tors_ranges):
            x = free + tors
            if m.in_group(x) is not None:
                candidates.add(amb.reduce(x))
    return _minimize(FineMonoid(amb, candidates))


def _minimize(m: FineMonoid) -> FineMonoid:
    gens = list(m.generators)
    i = 0
    while i < len(gens):
        rest = FineMonoid(m.ambient, gens[:i] + gens[i + 1:])
        if rest.contains(gens[i]):
            gens.pop(i)
        else:
            i += 1
    return FineMonoid(m.ambient, gens)


def is_saturated(m: FineMonoid, bound: int = DEFAULT_BOUND) -> bool:
    return all(m.contains(g) for g in saturate(m, bound).generators)


@dataclass(frozen=True)
class HomFlags:
    """Each flag is True, False or None (undecided within the bound)."""

    injective: bool | None
    surjective: bool | None
    local: bool | None
    exact: bool | None


def _is_unit(m: FineMonoid, x) -> bool:
    units_ = [m.generators[i] for i in sorted(m.unit_indices)]
    return in_span(m.ambient, units_, x) is not None


def hom_flags(u: MonoidHom, bound: int = DEFAULT_BOUND) -> HomFlags:
    injective = u.gp_map.is_injective()
    image = FineMonoid(u.target.ambient, u.images)
    surjective = all(image.contains(g) for g in u.target.generators)
    local = all(_is_unit(u.target, x) == (i in u.source.unit_indices)
                for i, x in enumerate(u.images))
    return HomFlags(injective, surjective, local, _exactness(u, bound))


def _exactness(u: MonoidHom, bound: int) -> bool | None:
    """Whether ``(u^gp)^{-1}(Q) = P`` inside ``P^gp``."""
    p, q = u.source, u.target
    if is_saturated(p) and is_saturated(q):
        # Both are lattice points of their cones: compare rational cones.
        r = q.ambient.rank
        k = len(p.generators)
        img = [x[:r] for x in u.images]
        qrows = [[_dot(w, x) for x in img] for w in q.facet_normals]
        for f in p.facet_normals:
            frow = [_dot(f, g[:p.ambient.rank]) for g in p.generators]
            # t = t+ - t-, slack s >= 0 for each Q facet
            a, b = [], []
            for j, row in enumerate(qrows):
                slack = [-int(i == j) for i in range(len(qrows))]
                a.append(row + [-c for c in row] + slack)
                b.append(0)
            a.append(frow + [-c for c in frow] + [0] * len(qrows))
            b.append(-1)
            if feasible_point(a, b) is not None:
                return False
        return True
    k = len(p.generators)
    radius = bound
    while radius > 0 and (2 * radius + 1) ** k > 20000:
        radius -= 1
    seen = set()
    for c in itertools.product(range(-radius, radius + 1), repeat=k):
        x = p.ambient.combination(c, p.generators)
        if x in seen:
            continue
        seen.add(x)
        if q.membership(u(x), bound) and p.membership(x, bound).status == "false":
            return False
    return None


def isomorphisms(m: FineMonoid, n: FineMonoid) -> Iterator[MonoidHom]:
    """All isomorphisms between two sharp monoids."""
    for images in _iso_images(m, n):
        yield MonoidHom(m, n, images, check=False)


_ISO_CACHE: dict = {}


def _iso_images(m: FineMonoid, n: FineMonoid) -> tuple:
    key = (m, n)
    if key in _ISO_CACHE:
        return _ISO_CACHE[key]
    if not (m.is_sharp and n.is_sharp):
        raise ValueError("isomorphism enumeration needs sharp monoids")
    out = []
    im, inn = m.irreducibles, n.irreducibles
    if len(im) == len(inn) and groupify(m) == groupify(n):
        rel_m = span_presentation(m.ambient, im).relations.columns()
        rel_n = span_presentation(n.ambient, inn).relations.columns()
        core = FineMonoid(m.ambient, im)
        expansions = [core.membership(g, bound=None).certificate for g in m.generators]
        irr_pos = [core.generators.index(x) for x in im]
        for perm in itertools.permutations(range(len(inn))):
            targets = [inn[j] for j in perm]
            if any(any(n.ambient.combination(rel, targets)) for rel in rel_m):
                continue
            inv = [None] * len(perm)
            for i, j in enumerate(perm):
                inv[j] = i
            back = [im[i] for i in inv]
            if any(any(m.ambient.combination(rel, back)) for rel in rel_n):
                continue
            # expand every generator of m over the irreducibles
            images = []
            for cert in expansions:
                coeff = [cert[pos] for pos in irr_pos]
                images.append(n.ambient.combination(coeff, targets))
            out.append(tuple(images))
    out = tuple(out)
    _ISO_CACHE[key] = out
    return out


def is_isomorphic(m: FineMonoid, n: FineMonoid) -> MonoidHom | None:
    """A witness isomorphism ``m -> n`` or ``None``.

    Non-sharp inputs are compared through their sharpenings after checking
    that the unit groups agree; the witness is then between the sharpenings.
    """
    if not (m.is_sharp and n.is_sharp):
        if groupify(m.units.monoid) != groupify(n.units.monoid):
            return None
        m, n = sharpen(m)[0], sharpen(n)[0]
    return next(isomorphisms(m, n), None)


def is_sharpened_localization(q: FineMonoid, q2: FineMonoid) -> Face | None:
    """First face ``F`` of ``q`` (canonical order) with ``sharp_localize(q, F) ~ q2``."""
    for f in q.faces:
        if is_isomorphic(sharp_localize(q, f)[0], q2) is not None:
            return f
    return None
