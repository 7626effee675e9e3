"""Kato fans as finite monoidal posets.

A :class:`Fan` is a finite poset in which ``u <= v`` means that ``v`` is a
generization of ``u``.  Each point carries a sharp fine monoid (its stalk)
and each relation ``u < v`` carries the generization hom
``stalk(u) -> stalk(v)``.  A morphism ``f: X -> Y`` maps points forward and
stalks backward: ``stalk_Y(f(x)) -> stalk_X(x)``.
"""

from __future__ import annotations

from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

from .monoid import (
    FineMonoid,
    MonoidHom,
    faces,
    groupify,
    isomorphisms,
    sharp_localize,
    sharpen,
)

Point = Hashable


class FanError(ValueError):
    pass


class Fan:
    """Finite monoidal poset.

    ``genmaps`` may be given on any set of pairs generating the order; the
    remaining relations are filled in by composition and must agree along
    every path.
    """

    def __init__(self, points: Sequence[Point], stalks: Mapping[Point, FineMonoid],
                 genmaps: Mapping[tuple[Point, Point], MonoidHom], check: bool = True,
                 closed: bool = False):
        self.points = tuple(points)
        if len(set(self.points)) != len(self.points):
            raise FanError("duplicate points")
        self.stalks = dict(stalks)
        pts = set(self.points)
        for p in self.points:
            if p not in self.stalks:
                raise FanError(f"missing stalk at {p!r}")
        self.genmaps: dict[tuple[Point, Point], MonoidHom] = {}
        succ: dict[Point, list[Point]] = {p: [] for p in self.points}
        for (u, v), h in genmaps.items():
            if u not in pts or v not in pts or u == v:
                raise FanError(f"bad order pair {(u, v)!r}")
            succ[u].append(v)
            self.genmaps[(u, v)] = h
        # transitive closure by composition
        changed = not closed
        while changed:
            changed = False
            for (u, v), h in list(self.genmaps.items()):
                for w in succ[v]:
                    if u == w:
                        raise FanError(f"order has a cycle through {u!r} and {v!r}")
                    comp = self.genmaps[(v, w)].compose(h)
                    old = self.genmaps.get((u, w))
                    if old is None:
                        self.genmaps[(u, w)] = comp
                        succ[u].append(w)
                        changed = True
                    elif check and old.images != comp.images:
                        raise FanError(f"generization maps {u!r} -> {w!r} do not compose consistently")
        if check:
            self.validate()

    def validate(self):
        for p, m in self.stalks.items():
            if not m.is_sharp:
                raise FanError(f"stalk at {p!r} is not sharp")
        for (u, v), h in self.genmaps.items():
            if h.source != self.stalks[u] or h.target != self.stalks[v]:
                raise FanError(f"generization map {u!r} -> {v!r} has the wrong stalks")
            if not _is_sharpened_localization_map(h):
                raise FanError(f"generization map {u!r} -> {v!r} is not a sharpened localization")

    # -- poset ---------------------------------------------------------------------

    def leq(self, u: Point, v: Point) -> bool:
        return u == v or (u, v) in self.genmaps

    def genmap(self, u: Point, v: Point) -> MonoidHom:
        if u == v:
            return MonoidHom.identity(self.stalks[u])
        return self.genmaps[(u, v)]

    @cached_property
    def _up(self) -> dict[Point, frozenset]:
        up = {p: {p} for p in self.points}
        for u, v in self.genmaps:
            up[u].add(v)
        return {p: frozenset(s) for p, s in up.items()}

    @cached_property
    def _down(self) -> dict[Point, frozenset]:
        down = {p: {p} for p in self.points}
        for u, v in self.genmaps:
            down[v].add(u)
        return {p: frozenset(s) for p, s in down.items()}

    def up(self, p: Point) -> frozenset:
        if p not in self._up:
            raise FanError(f"unknown point {p!r}")
        return self._up[p]

    def down(self, p: Point) -> frozenset:
        return self._down[p]

    @cached_property
    def heights(self) -> dict[Point, int]:
        """Length of the longest chain of specializations below each point."""
        h: dict[Point, int] = {}
        for p in sorted(self.points, key=lambda q: len(self._down[q])):
            h[p] = max((h[q] + 1 for q in self._down[p] if q != p), default=0)
        return h

    def covers(self) -> list[tuple[Point, Point]]:
        """Hasse diagram edges ``u < v`` with nothing strictly between."""
        out = []
        for u, v in self.genmaps:
            if not any(w not in (u, v) and self.leq(u, w) and self.leq(w, v) for w in self.points):
                out.append((u, v))
        return out

    def canonical_order(self) -> list[Point]:
        return sorted(self.points, key=lambda p: (self.heights[p], _stalk_signature(self.stalks[p]), repr(p)))

    @cached_property
    def components(self) -> list[tuple[Point, ...]]:
        seen: set = set()
        out = []
        for p in self.points:
            if p in seen:
                continue
            comp, stack = [], [p]
            seen.add(p)
            while stack:
                q = stack.pop()
                comp.append(q)
                for r in self._up[q] | self._down[q]:
                    if r not in seen:
                        seen.add(r)
                        stack.append(r)
            out.append(tuple(x for x in self.points if x in set(comp)))
        return out

    def restrict(self, pts: Iterable[Point]) -> Fan:
        pts = [p for p in self.points if p in set(pts)]
        s = set(pts)
        return Fan(pts, {p: self.stalks[p] for p in pts},
                   {k: h for k, h in self.genmaps.items() if k[0] in s and k[1] in s}, check=False, closed=True)

    @staticmethod
    def disjoint_union(parts: Sequence[tuple[Hashable, Fan]]) -> Fan:
        points, stalks, gm = [], {}, {}
        for tag, fan in parts:
            for p in fan.points:
                points.append((tag, p))
                stalks[(tag, p)] = fan.stalks[p]
            for (u, v), h in fan.genmaps.items():
                gm[((tag, u), (tag, v))] = h
        return Fan(points, stalks, gm, check=False, closed=True)

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"Fan({len(self.points)} points, {len(self.covers())} covers)"


def _stalk_signature(m: FineMonoid):
    return (str(groupify(m)), len(m.irreducibles), len(m.faces))


def _is_sharpened_localization_map(h: MonoidHom) -> bool:
    a = h.source
    kernel = [i for i, x in enumerate(h.images) if not any(x)]
    face = next((f for f in a.faces if set(f.indices) == set(kernel)), None)
    if face is None:
        return False
    loc, q = sharp_localize(a, face)
    return induced_hom(q, h).is_isomorphism()


def induced_hom(s: MonoidHom, t: MonoidHom) -> MonoidHom:
    """The hom ``B -> C`` with ``t = result . s`` for ``s: A -> B`` onto generators."""
    lookup = {}
    for x, y in zip(s.images, t.images):
        lookup.setdefault(x, y)
    images = []
    for g in s.target.generators:
        if g not in lookup:
            raise FanError(f"{g} is not the image of a generator")
        images.append(lookup[g])
    return MonoidHom(s.target, t.target, images, check=False)


class FanMorphism:
    """Monotone point map with stalk maps ``stalk_Y(f(x)) -> stalk_X(x)``."""

    def __init__(self, source: Fan, target: Fan, point_map: Mapping[Point, Point],
                 stalk_maps: Mapping[Point, MonoidHom], check: bool = True):
        self.source = source
        self.target = target
        self.point_map = dict(point_map)
        self.stalk_maps = dict(stalk_maps)
        if check:
            self.validate()

    def validate(self):
        X, Y, f = self.source, self.target, self.point_map
        for x in X.points:
            if x not in f or f[x] not in Y._up:
                raise FanError(f"point {x!r} is not mapped into the target")
            h = self.stalk_maps[x]
            if h.source != Y.stalks[f[x]] or h.target != X.stalks[x]:
                raise FanError(f"stalk map at {x!r} has the wrong source or target")
            if any(not any(img) for img in h.images):
                raise FanError(f"stalk map at {x!r} is not local")
        for (u, v), g in X.genmaps.items():
            if not Y.leq(f[u], f[v]):
                raise FanError(f"point map is not monotone on {u!r} <= {v!r}")
            lhs = self.stalk_maps[v].compose(Y.genmap(f[u], f[v]))
            rhs = g.compose(self.stalk_maps[u])
            if lhs.images != rhs.images:
                raise FanError(f"stalk maps do not commute with generization {u!r} -> {v!r}")

    def __call__(self, x: Point) -> Point:
        return self.point_map[x]

    def compose(self, first: FanMorphism) -> FanMorphism:
        """``self`` after ``first``."""
        pm = {x: self.point_map[y] for x, y in first.point_map.items()}
        sm = {x: first.stalk_maps[x].compose(self.stalk_maps[first.point_map[x]]) for x in first.source.points}
        return FanMorphism(first.source, self.target, pm, sm, check=False)

    def same_as(self, other: FanMorphism) -> bool:
        return (self.point_map == other.point_map
                and all(self.stalk_maps[x].images == other.stalk_maps[x].images for x in self.source.points))

    @staticmethod
    def identity(x: Fan) -> FanMorphism:
        return FanMorphism(x, x, {p: p for p in x.points},
                           {p: MonoidHom.identity(x.stalks[p]) for p in x.points}, check=False)

    def __repr__(self):
        return f"FanMorphism({self.point_map})"


# -- constructions ---------------------------------------------------------------------

def face_label(face) -> tuple[int, ...]:
    return tuple(sorted(face.indices))


def spec(p: FineMonoid) -> Fan:
    """Affine fan: one point per face, generic point = the whole monoid."""
    fs = faces(p)
    locs = {face_label(f): sharp_localize(p, f) for f in fs}
    points = [face_label(f) for f in fs]
    stalks = {k: v[0] for k, v in locs.items()}
    gm = {}
    for f in fs:
        for g in fs:
            if f.indices < g.indices:
                a, b = face_label(f), face_label(g)
                gm[(a, b)] = induced_hom(locs[a][1], locs[b][1])
    return Fan(points, stalks, gm, check=False, closed=True)


def closed_point(x: Fan) -> Point:
    """The unique minimal point of a fan with one, e.g. an affine fan."""
    mins = [p for p in x.points if len(x.down(p)) == 1]
    if len(mins) != 1:
        raise FanError("fan has no unique closed point")
    return mins[0]


def open_subfan(x: Fan, p: Point) -> tuple[Fan, FanMorphism]:
    """Up-set of ``p`` with its open immersion into ``x``."""
    sub = x.restrict(x.up(p))
    inc = FanMorphism(sub, x, {q: q for q in sub.points},
                      {q: MonoidHom.identity(x.stalks[q]) for q in sub.points}, check=False)
    return sub, inc


def is_etale(f: FanMorphism) -> bool:
    """Whether ``f`` maps each up-set isomorphically onto the up-set of the image."""
    X, Y, pm = f.source, f.target, f.point_map
    for h in f.stalk_maps.values():
        if not _iso_cached(h):
            return False
    for x in X.points:
        up_x = X.up(x)
        image = {pm[u] for u in up_x}
        if len(image) != len(up_x) or image != set(Y.up(pm[x])):
            return False
        for u in up_x:
            for v in up_x:
                if X.leq(u, v) != Y.leq(pm[u], pm[v]):
                    return False
    return True


_ISO_FLAGS: dict = {}


def _iso_cached(h: MonoidHom) -> bool:
    key = (h.source, h.target, h.images)
    if key not in _ISO_FLAGS:
        _ISO_FLAGS[key] = h.is_isomorphism()
    return _ISO_FLAGS[key]


def etale_fiber_product(f: FanMorphism, g: FanMorphism) -> tuple[Fan, FanMorphism, FanMorphism]:
    """``X x_S Y`` for étale ``f: X -> S`` and ``g: Y -> S``, with both projections."""
    if f.target is not g.target and (f.target.points != g.target.points):
        raise FanError("maps have different targets")
    if not is_etale(f) or not is_etale(g):
        raise FanError("fiber products are only formed along étale maps")
    X, Y = f.source, g.source
    by_base: dict[Point, list[Point]] = {}
    for y in Y.points:
        by_base.setdefault(g(y), []).append(y)
    points = [(x, y) for x in X.points for y in by_base.get(f(x), [])]
    pts = set(points)
    stalks = {(x, y): X.stalks[x] for x, y in points}
    gm = {}
    for (x, y) in points:
        for x2 in X.up(x):
            for y2 in Y.up(y):
                if (x2, y2) in pts and (x2, y2) != (x, y):
                    gm[((x, y), (x2, y2))] = X.genmap(x, x2)
    prod = Fan(points, stalks, gm, check=False, closed=True)
    p1 = FanMorphism(prod, X, {q: q[0] for q in pts},
                     {q: MonoidHom.identity(X.stalks[q[0]]) for q in pts}, check=False)
    p2 = FanMorphism(prod, Y, {q: q[1] for q in pts},
                     {(x, y): f.stalk_maps[x].compose(g.stalk_maps[y].inverse()) for x, y in points},
                     check=False)
    return prod, p1, p2


def fan_isomorphic(x: Fan, y: Fan) -> FanMorphism | None:
    """A witness isomorphism ``x -> y`` or ``None``."""
    if len(x.points) != len(y.points):
        return None
    sig_x = sorted(_point_signature(x, p) for p in x.points)
    sig_y = sorted(_point_signature(y, p) for p in y.points)
    if sig_x != sig_y:
        return None
    point_map, stalk_maps = {}, {}
    used: set = set()
    for comp in x.components:
        cx = x.restrict(comp)
        for comp_y in y.components:
            if comp_y[0] in used or len(comp_y) != len(comp):
                continue
            w = _connected_iso(cx, y.restrict(comp_y))
            if w is not None:
                used.update(comp_y)
                point_map.update(w[0])
                stalk_maps.update(w[1])
                break
        else:
            return None
    return FanMorphism(x, y, point_map, stalk_maps, check=False)


def _point_signature(x: Fan, p: Point):
    return (len(x.up(p)), len(x.down(p)), _stalk_signature(x.stalks[p]))


def _connected_iso(x: Fan, y: Fan):
    order = sorted(x.points, key=lambda p: (len(x.down(p)), -len(x.up(p)), repr(p)))
    sig_y = {q: _point_signature(y, q) for q in y.points}
    pm: dict = {}
    sm: dict = {}
    used: set = set()

    def compatible(p, q, h) -> bool:
        for p2, q2 in pm.items():
            if x.leq(p, p2) != y.leq(q, q2) or x.leq(p2, p) != y.leq(q2, q):
                return False
            if x.leq(p, p2) and p != p2:
                lhs = sm[p2].compose(y.genmap(q, q2))
                rhs = x.genmap(p, p2).compose(h)
                if lhs.images != rhs.images:
                    return False
            elif x.leq(p2, p) and p != p2:
                lhs = h.compose(y.genmap(q2, q))
                rhs = x.genmap(p2, p).compose(sm[p2])
                if lhs.images != rhs.images:
                    return False
        return True

    def search(i: int) -> bool:
        if i == len(order):
            return True
        p = order[i]
        sp = _point_signature(x, p)
        for q in y.points:
            if q in used or sig_y[q] != sp:
                continue
            for h in isomorphisms(y.stalks[q], x.stalks[p]):
                if compatible(p, q, h):
                    pm[p], sm[p] = q, h
                    used.add(q)
                    if search(i + 1):
                        return True
                    del pm[p], sm[p]
                    used.discard(q)
        return False

    return (pm, sm) if search(0) else None


def sharp_spec_comparison(p: FineMonoid) -> FanMorphism | None:
    """Witness for ``spec(P) ~ spec(sharpen(P))``."""
    return fan_isomorphic(spec(p), spec(sharpen(p)[0]))
