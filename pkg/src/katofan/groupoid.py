"""Joint faces, join fans and the truncated universal groupoid.

A joint face of ``Spec(Q_0), ..., Spec(Q_n)`` is stored rooted at index 0:
a face ``G_i`` of every ``Q_i`` together with isomorphisms
``psi_i: stalk_0 -> stalk_i`` (``i >= 1``) of the sharpened localizations,
compatible with the structure maps from the common base ``P``.  Rooting
identifies the abstract face with ``stalk_0``, so each isomorphism class has
exactly one such representative.

The join fan has one point per joint face; its stalks are the root stalks and
its generization maps those of ``Spec(Q_0)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .fan import Fan, FanError, FanMorphism, _iso_cached, etale_fiber_product, fan_isomorphic, induced_hom, is_etale, spec
from .monoid import FineMonoid, MonoidHom, _iso_images, sharpen


class PMonoid:
    """A fine monoid ``Q`` with a structure hom ``P -> Q``."""

    __slots__ = ("base", "monoid", "structure", "__dict__")

    def __init__(self, base: FineMonoid, monoid: FineMonoid, structure: MonoidHom | None = None):
        if structure is None:
            if base.generators:
                raise ValueError("a structure hom is required over a nontrivial base")
            structure = MonoidHom(base, monoid, [])
        if structure.source != base or structure.target != monoid:
            raise ValueError("structure hom must go from the base to the monoid")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "monoid", monoid)
        object.__setattr__(self, "structure", structure)

    def __setattr__(self, name, value):
        raise AttributeError("PMonoid is immutable")

    @classmethod
    def over_trivial(cls, q: FineMonoid) -> PMonoid:
        return cls(FineMonoid.trivial(), q)

    def __eq__(self, other):
        return isinstance(other, PMonoid) and self.structure == other.structure

    def __hash__(self):
        return hash(self.structure)

    def __repr__(self):
        return f"PMonoid({self.monoid} over {self.base})"

    @cached_property
    def spec(self) -> Fan:
        return spec(self.monoid)

    @property
    def labels(self):
        return self.spec.points

    def stalk(self, label) -> FineMonoid:
        return self.spec.stalks[label]

    @cached_property
    def _pstruct(self) -> dict:
        from .monoid import sharp_localize
        out = {}
        for f in self.monoid.faces:
            label = tuple(sorted(f.indices))
            proj = sharp_localize(self.monoid, f)[1]
            out[label] = tuple(proj(x) for x in self.structure.images)
        return out

    def pstruct(self, label) -> tuple:
        """Images of the base generators in the stalk at ``label``."""
        return self._pstruct[label]


@dataclass(frozen=True, order=True)
class JointFace:
    faces: tuple
    isos: tuple = field(default=())

    def __repr__(self):
        return f"JointFace({self.faces})"


def _check_base(members: Sequence[PMonoid]):
    if not members:
        raise ValueError("empty tuple")
    base = members[0].base
    for m in members[1:]:
        if m.base != base:
            raise ValueError(f"base mismatch: {m.base} vs {base}")


def _apply(m: FineMonoid, n: FineMonoid, images: tuple, x) -> tuple:
    return MonoidHom(m, n, images, check=False)(x)


class JoinFan:
    """The join ``J(Q_0, ..., Q_n)`` with its joint-face poset."""

    def __init__(self, members: Sequence[PMonoid]):
        members = tuple(members)
        _check_base(members)
        self.members = members
        self.joint_faces = _enumerate_joint_faces(members)
        self._index = set(self.joint_faces)
        self.fan = self._build_fan()

    def root_stalk(self, jf: JointFace) -> FineMonoid:
        return self.members[0].stalk(jf.faces[0])

    def iso(self, jf: JointFace, i: int) -> MonoidHom:
        s0 = self.root_stalk(jf)
        if i == 0:
            return MonoidHom.identity(s0)
        return MonoidHom(s0, self.members[i].stalk(jf.faces[i]), jf.isos[i - 1], check=False)

    def generizations(self, jf: JointFace) -> list[JointFace]:
        """The joint faces above ``jf``: one for each face of the root stalk."""
        m0 = self.members[0]
        out = []
        g0 = jf.faces[0]
        for g0b in m0.spec.up(g0):
            gen0 = m0.spec.genmap(g0, g0b)
            kernel0 = frozenset(i for i, x in enumerate(gen0.images) if not any(x))
            faces, isos = [g0b], []
            for i in range(1, len(self.members)):
                mi = self.members[i]
                psi = self.iso(jf, i)
                for gib in mi.spec.up(jf.faces[i]):
                    comp = mi.spec.genmap(jf.faces[i], gib).compose(psi)
                    if frozenset(k for k, x in enumerate(comp.images) if not any(x)) == kernel0:
                        faces.append(gib)
                        isos.append(induced_hom(gen0, comp).images)
                        break
                else:
                    raise FanError("joint face has no transported generization")
            up = JointFace(tuple(faces), tuple(isos))
            if up not in self._index:
                raise FanError(f"transported face {up} is missing from the poset")
            out.append(up)
        return out

    def _build_fan(self) -> Fan:
        m0 = self.members[0]
        stalks = {jf: self.root_stalk(jf) for jf in self.joint_faces}
        gm = {}
        for jf in self.joint_faces:
            for up in self.generizations(jf):
                if up != jf:
                    gm[(jf, up)] = m0.spec.genmap(jf.faces[0], up.faces[0])
        return Fan(self.joint_faces, stalks, gm, check=False, closed=True)

    def leq(self, a: JointFace, b: JointFace) -> bool:
        return self.fan.leq(a, b)

    def restriction(self, indices: Sequence[int], target: JoinFan) -> FanMorphism:
        """The map to the join of the sub-tuple at ``indices`` (increasing)."""
        root = indices[0]
        pm, sm = {}, {}
        for jf in self.joint_faces:
            inv = self.iso(jf, root).inverse() if root else None
            isos = []
            for i in indices[1:]:
                psi = self.iso(jf, i)
                isos.append((psi.compose(inv) if inv is not None else psi).images)
            image = JointFace(tuple(jf.faces[i] for i in indices), tuple(isos))
            if image not in target._index:
                raise FanError(f"restriction of {jf} is not a joint face of the target")
            pm[jf] = image
            sm[jf] = inv if inv is not None else MonoidHom.identity(self.root_stalk(jf))
        return FanMorphism(self.fan, target.fan, pm, sm, check=False)

    def degeneracy(self, j: int, target: JoinFan) -> FanMorphism:
        """The map repeating index ``j``."""
        pm, sm = {}, {}
        for jf in self.joint_faces:
            faces = jf.faces[:j + 1] + (jf.faces[j],) + jf.faces[j + 1:]
            isos = list(jf.isos)
            isos.insert(j, self.iso(jf, j).images)
            image = JointFace(faces, tuple(isos))
            if image not in target._index:
                raise FanError(f"degeneracy of {jf} is not a joint face of the target")
            pm[jf] = image
            sm[jf] = MonoidHom.identity(self.root_stalk(jf))
        return FanMorphism(self.fan, target.fan, pm, sm, check=False)

    def __len__(self):
        return len(self.joint_faces)

    def __repr__(self):
        return f"JoinFan({len(self.members)} members, {len(self.joint_faces)} joint faces)"


def _enumerate_joint_faces(members: Sequence[PMonoid]) -> list[JointFace]:
    m0 = members[0]
    out = []
    for g0 in m0.labels:
        s0 = m0.stalk(g0)
        p0 = m0.pstruct(g0)
        partial = [((g0,), ())]
        for mi in members[1:]:
            nxt = []
            for gi in mi.labels:
                si = mi.stalk(gi)
                pi = mi.pstruct(gi)
                for images in _iso_images(s0, si):
                    if tuple(_apply(s0, si, images, x) for x in p0) != pi:
                        continue
                    nxt.extend((faces + (gi,), isos + (images,)) for faces, isos in partial)
            partial = nxt
        out.extend(JointFace(faces, isos) for faces, isos in partial)
    return sorted(out, key=lambda jf: (len(jf.faces[0]), jf))


_JOINS: dict = {}


def join(members: Sequence[PMonoid]) -> JoinFan:
    key = tuple(members)
    if key not in _JOINS:
        _JOINS[key] = JoinFan(key)
    return _JOINS[key]


def joint_face_poset(members: Sequence[PMonoid]) -> JoinFan:
    """Joint faces with their order; the join fan carries the poset."""
    return join(members)


# -- J(Q_0..Q_n) versus J(Q_0..Q_l) x_{Spec Q_l} J(Q_l..Q_n) ------------------------------

@dataclass
class FacelemResult:
    passed: bool
    canonical_iso: bool
    witness: FanMorphism | None
    points: int

    def __bool__(self):
        return self.passed


def is_isomorphism(f: FanMorphism) -> bool:
    """Bijective on points, an order isomorphism, with invertible stalk maps."""
    X, Y = f.source, f.target
    pm = f.point_map
    if len(X.points) != len(Y.points) or len(set(pm.values())) != len(X.points):
        return False
    for x in X.points:
        if {pm[u] for u in X.up(x)} != Y.up(pm[x]):
            return False
    try:
        f.validate()
    except FanError:
        return False
    return all(_iso_cached(h) for h in f.stalk_maps.values())


def facelem_check(members: Sequence[PMonoid], split: int) -> FacelemResult:
    """Compare ``J(Q_0..Q_n)`` with ``J(Q_0..Q_l) x_{Spec Q_l} J(Q_l..Q_n)``."""
    members = tuple(members)
    _check_base(members)
    n = len(members) - 1
    if not 0 <= split <= n:
        raise ValueError(f"split index {split} outside 0..{n}")
    whole = join(members)
    left = join(members[:split + 1])
    right = join(members[split:])
    base = join((members[split],))
    f = left.restriction([split], base)
    g = right.restriction([0], base)
    prod, p1, p2 = etale_fiber_product(f, g)
    r1 = whole.restriction(list(range(split + 1)), left)
    r2 = whole.restriction(list(range(split, n + 1)), right)
    pm = {jf: (r1(jf), r2(jf)) for jf in whole.joint_faces}
    sm = {jf: MonoidHom.identity(whole.root_stalk(jf)) for jf in whole.joint_faces}
    if len(set(pm.values())) == len(pm) and set(pm.values()) == set(prod.points):
        comparison = FanMorphism(whole.fan, prod, pm, sm, check=False)
        if is_isomorphism(comparison):
            return FacelemResult(True, True, comparison, len(prod.points))
    witness = fan_isomorphic(whole.fan, prod)
    return FacelemResult(witness is not None, False, witness, len(prod.points))


# -- the truncated groupoid L_0..L_3 -------------------------------------------------------------

class GroupoidTruncation:
    """Levels ``L_0..L_top`` of the simplicial fan built from a finite chart set.

    ``L_n`` is the disjoint union of ``J(Q_{i_0}, ..., Q_{i_n})`` over all
    tuples of chart indices, points tagged by their tuple.  ``faces[(n, i)]``
    is ``d_i: L_n -> L_{n-1}`` and ``degeneracies[(n, j)]`` is
    ``s_j: L_n -> L_{n+1}``.
    """

    def __init__(self, base: FineMonoid, charts: Sequence[PMonoid], top: int = 3):
        charts = tuple(charts)
        if not charts:
            raise ValueError("at least one chart is required")
        for c in charts:
            if c.base != base:
                raise ValueError(f"chart {c} is not over the base {base}")
        self.base = base
        self.charts = charts
        self.top = top
        self.tuples = {n: list(itertools.product(range(len(charts)), repeat=n + 1)) for n in range(top + 1)}
        self.joins = {t: join([charts[i] for i in t]) for n in self.tuples for t in self.tuples[n]}
        self.levels = {n: Fan.disjoint_union([(t, self.joins[t].fan) for t in self.tuples[n]])
                       for n in self.tuples}
        self.faces = {}
        for n in range(1, top + 1):
            for i in range(n + 1):
                keep = [k for k in range(n + 1) if k != i]
                self.faces[(n, i)] = self._combine(n, n - 1, lambda t: (tuple(t[k] for k in keep), keep), "r")
        self.degeneracies = {}
        for n in range(top):
            for j in range(n + 1):
                self.degeneracies[(n, j)] = self._combine(
                    n, n + 1, lambda t, j=j: (t[:j + 1] + (t[j],) + t[j + 1:], j), "s")

    def _combine(self, n: int, m: int, rule, kind: str) -> FanMorphism:
        pm, sm = {}, {}
        for t in self.tuples[n]:
            t2, arg = rule(t)
            src, dst = self.joins[t], self.joins[t2]
            f = src.restriction(arg, dst) if kind == "r" else src.degeneracy(arg, dst)
            for jf in src.joint_faces:
                pm[(t, jf)] = (t2, f.point_map[jf])
                sm[(t, jf)] = f.stalk_maps[jf]
        return FanMorphism(self.levels[n], self.levels[m], pm, sm, check=False)

    def restriction(self, n: int, indices: Sequence[int]) -> FanMorphism:
        """``L_n -> L_{len(indices)-1}`` keeping the given tuple positions."""
        m = len(indices) - 1
        return self._combine(n, m, lambda t: (tuple(t[k] for k in indices), list(indices)), "r")

    @property
    def source(self) -> FanMorphism:
        return self.faces[(1, 1)]

    @property
    def target(self) -> FanMorphism:
        return self.faces[(1, 0)]

    def structure_at(self, point) -> tuple:
        """Images of the base generators in the stalk at a point of any level."""
        t, jf = point
        return self.charts[t[0]].pstruct(jf.faces[0])


def build_truncation(base: FineMonoid, charts: Sequence[PMonoid], top: int = 3) -> GroupoidTruncation:
    return GroupoidTruncation(base, charts, top)


@dataclass
class GroupoidReport:
    simplicial_checked: int = 0
    simplicial_failures: list = field(default_factory=list)
    segal: dict = field(default_factory=dict)
    associativity: bool = False
    unique_lift_counts: dict = field(default_factory=dict)
    scope: str = ""

    @property
    def simplicial(self) -> bool:
        return self.simplicial_checked > 0 and not self.simplicial_failures

    @property
    def unique_lift(self) -> bool:
        return bool(self.unique_lift_counts) and all(c == 1 for c in self.unique_lift_counts.values())

    @property
    def passed(self) -> bool:
        return self.simplicial and all(self.segal.values()) and self.associativity and self.unique_lift

    def axioms(self) -> dict[str, bool]:
        return {"simplicial identities": self.simplicial,
                "segal": all(self.segal.values()) and bool(self.segal),
                "associativity": self.associativity,
                "unique lift": self.unique_lift}


def etale_maps_from_affine(f_fan: Fan, y: Fan) -> list[FanMorphism]:
    """All étale maps from an affine fan to ``y``.

    Such a map is fixed by the image of the closed point and the stalk
    isomorphism there; every pair gives one.
    """
    from .fan import closed_point
    c = closed_point(f_fan)
    a = f_fan.stalks[c]
    out = []
    for yp in y.points:
        for images in _iso_images(y.stalks[yp], a):
            sigma = MonoidHom(y.stalks[yp], a, images, check=False)
            pm, sm = {c: yp}, {c: sigma}
            ok = True
            for x in f_fan.points:
                if x == c:
                    continue
                lower = f_fan.genmap(c, x).compose(sigma)
                kernel = {k for k, v in enumerate(lower.images) if not any(v)}
                target = None
                for yq in y.up(yp):
                    g = y.genmap(yp, yq)
                    if {k for k, v in enumerate(g.images) if not any(v)} == kernel:
                        target = yq
                        break
                if target is None:
                    ok = False
                    break
                pm[x] = target
                sm[x] = induced_hom(y.genmap(yp, target), lower)
            if not ok:
                continue
            fm = FanMorphism(f_fan, y, pm, sm, check=False)
            try:
                fm.validate()
            except FanError:
                continue
            if is_etale(fm):
                out.append(fm)
    return out


def verify_groupoid(t: GroupoidTruncation, test_monoids: Sequence[FineMonoid] = ()) -> GroupoidReport:
    """Check the groupoid axioms on a truncation.

    The unique-lift check runs over ``spec(A)`` for every ``A`` in
    ``test_monoids`` (default: the chart monoids) and every pair of étale maps
    to ``L_0`` inducing the same structure over the base.
    """
    if t.top < 3:
        raise ValueError("verification needs levels up to L_3")
    rep = GroupoidReport(scope=f"truncated at L_{t.top}; charts: {len(t.charts)} over base {t.base}")
    d, s = t.faces, t.degeneracies

    def check(name, lhs: FanMorphism, rhs: FanMorphism):
        rep.simplicial_checked += 1
        if not lhs.same_as(rhs):
            rep.simplicial_failures.append(name)

    for n in range(2, t.top + 1):
        for j in range(n + 1):
            for i in range(j):
                check(f"d{i}d{j}=d{j-1}d{i} on L{n}", d[(n - 1, i)].compose(d[(n, j)]),
                      d[(n - 1, j - 1)].compose(d[(n, i)]))
    for n in range(t.top - 1):
        for j in range(n + 1):
            for i in range(j + 1):
                check(f"s{i}s{j}=s{j+1}s{i} on L{n}", s[(n + 1, i)].compose(s[(n, j)]),
                      s[(n + 1, j + 1)].compose(s[(n, i)]))
    for n in range(t.top):
        for j in range(n + 1):
            ds = lambda i: d[(n + 1, i)].compose(s[(n, j)])
            ident = FanMorphism.identity(t.levels[n])
            for i in range(n + 2):
                if i < j:
                    rhs = s[(n - 1, j - 1)].compose(d[(n, i)])
                elif i in (j, j + 1):
                    rhs = ident
                elif i > j + 1:
                    rhs = s[(n - 1, j)].compose(d[(n, i - 1)])
                check(f"d{i}s{j} on L{n}", ds(i), rhs)

    # Segal maps L_n -> L_1 x_{s,L_0,t} ... x_{s,L_0,t} L_1
    src, tgt = t.source, t.target
    f2, a2, b2 = etale_fiber_product(src, tgt)
    r12, r01 = t.restriction(2, [1, 2]), t.restriction(2, [0, 1])
    rep.segal[2] = _comparison_is_iso(t.levels[2], f2, lambda x: (r12(x), r01(x)), r12)
    f3, a3, b3 = etale_fiber_product(src.compose(b2), tgt)
    r23, r12_3, r01_3 = t.restriction(3, [2, 3]), t.restriction(3, [1, 2]), t.restriction(3, [0, 1])
    rep.segal[3] = _comparison_is_iso(t.levels[3], f3, lambda x: ((r23(x), r12_3(x)), r01_3(x)), r23)

    # associativity: J(Q0..Q3) -> J(Q0,Q1,Q3) -> J(Q0,Q3) equals J(Q0..Q3) -> J(Q0,Q2,Q3) -> J(Q0,Q3)
    rep.associativity = d[(2, 1)].compose(d[(3, 2)]).same_as(d[(2, 1)].compose(d[(3, 1)]))

    for a in (test_monoids or [c.monoid for c in t.charts]):
        fa = spec(sharpen(a)[0])
        maps = etale_maps_from_affine(fa, t.levels[0])
        lifts = etale_maps_from_affine(fa, t.levels[1])
        from .fan import closed_point
        c = closed_point(fa)

        def induced_structure(m: FanMorphism):
            return tuple(m.stalk_maps[c](x) for x in t.structure_at(m.point_map[c]))

        for i, f in enumerate(maps):
            for j, g in enumerate(maps):
                if induced_structure(f) != induced_structure(g):
                    continue
                count = sum(1 for h in lifts
                            if src.compose(h).same_as(f) and tgt.compose(h).same_as(g))
                rep.unique_lift_counts[(repr(a), i, j)] = count
    return rep


def _comparison_is_iso(level: Fan, prod: Fan, point_rule, first: FanMorphism) -> bool:
    pm = {x: point_rule(x) for x in level.points}
    if len(set(pm.values())) != len(pm) or set(pm.values()) != set(prod.points):
        return False
    sm = {x: first.stalk_maps[x] for x in level.points}
    return is_isomorphism(FanMorphism(level, prod, pm, sm, check=False))
