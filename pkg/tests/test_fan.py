import pytest

from corpus import CORPUS, N, N2, ZERO
from katofan.fan import (
    Fan,
    FanError,
    FanMorphism,
    closed_point,
    etale_fiber_product,
    fan_isomorphic,
    is_etale,
    open_subfan,
    spec,
)
from katofan.monoid import FineMonoid, MonoidHom, groupify, is_isomorphic, sharpen

Z = FineMonoid.in_lattice([(1,), (-1,)])


def test_spec_n():
    x = spec(N)
    assert len(x.points) == 2 and len(x.covers()) == 1
    c = closed_point(x)
    assert x.stalks[c] == N
    generic = next(p for p in x.points if p != c)
    assert x.stalks[generic].generators == ()


def test_spec_n2():
    x = spec(N2)
    assert len(x.points) == 4 and len(x.covers()) == 4
    ranks = sorted(groupify(s).rank for s in x.stalks.values())
    assert ranks == [0, 1, 1, 2]
    for p, s in x.stalks.items():
        if groupify(s).rank == 1:
            assert is_isomorphic(s, N)


def test_spec_z():
    x = spec(Z)
    assert len(x.points) == 1
    assert next(iter(x.stalks.values())).generators == ()


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_spec_depends_on_sharpening(name):
    m = CORPUS[name]
    assert fan_isomorphic(spec(m), spec(sharpen(m)[0])) is not None


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_spec_matches_face_lattice(name):
    m = CORPUS[name]
    x = spec(m)
    assert len(x.points) == len(m.faces)
    for f in m.faces:
        for g in m.faces:
            a, b = tuple(sorted(f.indices)), tuple(sorted(g.indices))
            assert x.leq(a, b) == (f.indices <= g.indices)


def test_open_subfan():
    x = spec(N2)
    generic = max(x.points, key=len)
    sub, inc = open_subfan(x, generic)
    assert len(sub.points) == 1
    middle = next(p for p in x.points if len(p) == 1)
    sub, inc = open_subfan(x, middle)
    assert fan_isomorphic(sub, spec(N)) is not None
    assert is_etale(inc)
    sub, _ = open_subfan(x, closed_point(x))
    assert len(sub.points) == 4
    with pytest.raises(FanError):
        open_subfan(x, ("nowhere",))


def test_etale_examples():
    x = spec(N2)
    assert is_etale(FanMorphism.identity(x))
    sub, inc = open_subfan(x, next(p for p in x.points if len(p) == 1))
    assert is_etale(inc)
    sn, s0 = spec(N), spec(ZERO)
    only = s0.points[0]
    f = FanMorphism(sn, s0, {p: only for p in sn.points},
                    {p: MonoidHom(s0.stalks[only], sn.stalks[p], []) for p in sn.points})
    assert not is_etale(f)


def test_fiber_product_identity():
    x = spec(N2)
    ident = FanMorphism.identity(x)
    prod, p1, p2 = etale_fiber_product(ident, ident)
    assert fan_isomorphic(prod, x) is not None
    assert is_etale(p1) and is_etale(p2)


def test_fiber_product_open():
    sn = spec(N)
    generic = next(p for p in sn.points if p != closed_point(sn))
    sub, inc = open_subfan(sn, generic)
    prod, _, _ = etale_fiber_product(FanMorphism.identity(sn), inc)
    assert len(prod.points) == 1


def test_fiber_product_disjoint_union():
    sn = spec(N)
    two = Fan.disjoint_union([("a", sn), ("b", sn)])
    f = FanMorphism(two, sn, {p: p[1] for p in two.points},
                    {p: MonoidHom.identity(sn.stalks[p[1]]) for p in two.points})
    prod, p1, _ = etale_fiber_product(f, FanMorphism.identity(sn))
    assert fan_isomorphic(prod, two) is not None
    assert len(prod.components) == 2


def test_fiber_product_rejects_non_etale():
    sn, s0 = spec(N), spec(ZERO)
    only = s0.points[0]
    f = FanMorphism(sn, s0, {p: only for p in sn.points},
                    {p: MonoidHom(s0.stalks[only], sn.stalks[p], []) for p in sn.points})
    with pytest.raises(FanError):
        etale_fiber_product(f, FanMorphism.identity(s0))


def test_fiber_product_commutative():
    x = spec(N2)
    subs = [open_subfan(x, p) for p in x.points if len(p) == 1]
    (a, fa), (b, fb) = subs
    ab = etale_fiber_product(fa, fb)[0]
    ba = etale_fiber_product(fb, fa)[0]
    assert fan_isomorphic(ab, ba) is not None
    assert len(ab.points) == 1


def test_fan_isomorphic_examples():
    assert fan_isomorphic(spec(N), spec(N)) is not None
    flat = FineMonoid.in_lattice([(1, 0, 0), (0, 1, 0)])
    w = fan_isomorphic(spec(N2), spec(flat))
    assert w is not None
    w.validate()
    assert fan_isomorphic(spec(N), spec(N2)) is None


def test_fan_rejects_non_sharp_stalk():
    with pytest.raises(FanError):
        Fan(["p"], {"p": Z}, {})


def test_composition_of_etale_is_etale():
    x = spec(N2)
    middle = next(p for p in x.points if len(p) == 1)
    sub, inc = open_subfan(x, middle)
    generic = max(sub.points, key=len)
    sub2, inc2 = open_subfan(sub, generic)
    assert is_etale(inc.compose(inc2))
