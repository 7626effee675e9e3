import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import CORPUS, N, N2, ZERO, over_n, over_trivial
from katofan.fan import closed_point, fan_isomorphic, is_etale, spec
from katofan.groupoid import (
    PMonoid,
    build_truncation,
    facelem_check,
    join,
    joint_face_poset,
    verify_groupoid,
)
from katofan.monoid import MonoidHom

NAMES = sorted(CORPUS)


def test_single_member_poset_is_face_lattice():
    for m in CORPUS.values():
        assert len(joint_face_poset([over_trivial(m)])) == len(m.faces)


def test_joint_faces_n_n():
    j = joint_face_poset([over_trivial(N), over_trivial(N)])
    assert len(j) == 2


def test_joint_faces_n2_n():
    j = joint_face_poset([over_trivial(N2), over_trivial(N)])
    assert len(j) == 3
    ranks = sorted(len(j.root_stalk(jf).generators) for jf in j.joint_faces)
    assert ranks == [0, 1, 1]


def test_base_mismatch():
    with pytest.raises(ValueError):
        join([over_trivial(N), over_n(N)])


@pytest.mark.parametrize("name", NAMES)
def test_join_single_is_spec(name):
    m = CORPUS[name]
    assert fan_isomorphic(join([over_trivial(m)]).fan, spec(m)) is not None


def test_join_n_n_is_spec_n():
    assert fan_isomorphic(join([over_trivial(N), over_trivial(N)]).fan, spec(N)) is not None


def test_join_n2_n_is_punctured_spec():
    # the two rays of N^2 glued to N along the common generic point
    j = join([over_trivial(N2), over_trivial(N)]).fan
    x = spec(N2)
    punctured = x.restrict([p for p in x.points if p != closed_point(x)])
    assert len(j.points) == 3
    assert fan_isomorphic(j, punctured) is not None


def test_facelem_examples():
    q = over_trivial(N2)
    assert facelem_check([q], 0).passed
    n = over_trivial(N)
    r = facelem_check([n, n], 1)
    assert r.passed and r.canonical_iso
    assert fan_isomorphic(r.witness.target, spec(N)) is not None
    assert facelem_check([q, n, n], 1).passed


def test_facelem_split_range():
    with pytest.raises(ValueError):
        facelem_check([over_trivial(N)], 1)


def test_facelem_length_four():
    members = {n: over_trivial(m) for n, m in CORPUS.items()}
    for names in itertools.product(NAMES, repeat=4):
        for split in range(4):
            assert facelem_check([members[n] for n in names], split).passed, (names, split)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(NAMES), min_size=2, max_size=3), st.randoms(use_true_random=False))
def test_joint_face_count_symmetric(names, rnd):
    members = [over_trivial(CORPUS[n]) for n in names]
    shuffled = list(members)
    rnd.shuffle(shuffled)
    assert len(joint_face_poset(members)) == len(joint_face_poset(shuffled))


def test_truncation_identity_chart():
    p = over_n(N)
    assert p.structure == MonoidHom.identity(N)
    t = build_truncation(N, [p])
    for n in range(4):
        assert fan_isomorphic(t.levels[n], spec(N)) is not None
    for f in list(t.faces.values()) + list(t.degeneracies.values()):
        assert len(set(f.point_map.values())) == len(f.source.points)
        assert all(h.is_isomorphism() for h in f.stalk_maps.values())
    assert verify_groupoid(t).passed


def test_truncation_single_n():
    t = build_truncation(ZERO, [over_trivial(N)])
    assert fan_isomorphic(t.levels[0], spec(N)) is not None
    assert fan_isomorphic(t.levels[1], spec(N)) is not None
    assert t.source.same_as(t.target)
    rep = verify_groupoid(t)
    assert rep.passed
    assert list(rep.unique_lift_counts.values()) == [1]


def test_truncation_n_n2():
    t = build_truncation(ZERO, [over_trivial(N), over_trivial(N2)])
    assert len(t.levels[0].points) == 6
    assert len(t.tuples[1]) == 4
    assert len(t.levels[1].points) == sum(len(t.joins[k]) for k in t.tuples[1])
    rep = verify_groupoid(t)
    assert rep.passed, rep.axioms()
    assert rep.segal == {2: True, 3: True}


def test_structure_maps_are_etale():
    t = build_truncation(ZERO, [over_trivial(N), over_trivial(N2)])
    for f in list(t.faces.values()) + list(t.degeneracies.values()):
        f.validate()
        assert is_etale(f)


def test_truncation_requires_charts():
    with pytest.raises(ValueError):
        build_truncation(ZERO, [])
    with pytest.raises(ValueError):
        build_truncation(ZERO, [over_n(N)])


def test_report_states_scope():
    rep = verify_groupoid(build_truncation(ZERO, [over_trivial(N)]))
    assert "L_3" in rep.scope


@pytest.mark.parametrize("base", ["0", "N"])
def test_groupoid_three_charts(base):
    p, make = (ZERO, over_trivial) if base == "0" else (N, over_n)
    for names in itertools.combinations(NAMES, 3):
        charts = [make(CORPUS[n]) for n in names]
        assert verify_groupoid(build_truncation(p, charts)).passed, names


def test_pmonoid_needs_structure_over_nontrivial_base():
    with pytest.raises(ValueError):
        PMonoid(N, N2)
