import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from katofan.abelian import (
    FGAbelianGroup,
    GroupHom,
    IntMatrix,
    cokernel,
    kernel_image,
    short_exact_check,
    smith_normal_form,
)
from katofan.oracles import coset_cokernel, determinantal_cokernel


def hom(rows, n=None):
    n = len(rows[0]) if n is None else n
    a = IntMatrix.from_rows(rows, n)
    return GroupHom.between(FGAbelianGroup.free(a.cols), FGAbelianGroup.free(a.rows), a)


def G(rank=0, *torsion):
    return FGAbelianGroup(rank, torsion)


# Values below were produced by the coset oracle and frozen.
FROZEN_COKERNELS = [
    ([[2, 4], [6, 8]], G(0, 2, 4)),
    ([[2]], G(0, 2)),
    ([[1, 1], [1, 1]], G(1)),
    ([[4, 0], [0, 6]], G(0, 2, 12)),
    ([[3, 1, 2], [-1, 2, 0], [2, 0, -3]], G(0, 29)),
]


def test_snf_small_cases():
    u, d, v = smith_normal_form(IntMatrix.from_rows([[2]]))
    assert d.tolist() == [[2]] and u.tolist() == [[1]] and v.tolist() == [[1]]
    z = IntMatrix.zeros(2, 2)
    assert smith_normal_form(z)[1] == z
    a = IntMatrix.from_rows([[2, 4], [6, 8]])
    u, d, v = smith_normal_form(a)
    assert d.tolist() == [[2, 0], [0, 4]]
    assert u @ a @ v == d


@pytest.mark.parametrize("rows,expected", FROZEN_COKERNELS)
def test_cokernel_frozen(rows, expected):
    assert cokernel(hom(rows)) == expected
    assert coset_cokernel(rows) == expected


def test_cokernel_basic():
    assert cokernel(hom([[2]])) == G(0, 2)
    zero = GroupHom.between(G(0), G(1), IntMatrix.zeros(1, 0))
    assert cokernel(zero) == G(1)
    assert str(cokernel(hom([[2, 4], [6, 8]]))) == "Z/2 + Z/4"


def test_kernel_image():
    assert kernel_image(hom([[2]])) == (G(0), G(1))
    assert kernel_image(hom([[1, 0]])) == (G(1), G(1))
    assert kernel_image(hom([[1, 1], [1, 1]])) == (G(1), G(1))


def test_short_exact():
    z = G(1)
    r = short_exact_check(z, [(1,)], [(1,)], [(1,)])
    assert r.exact and r.sub == r.middle == r.quotient == G(0)
    z2 = G(2)
    r = short_exact_check(z2, [(2, 0)], [(2, 0), (0, 1)], [(1, 0), (0, 1)])
    assert r.exact
    assert (r.sub, r.middle, r.quotient) == (G(1), G(1, 2), G(0, 2))
    r = short_exact_check(z, [(2,)], [(1,)], [(1,)])
    assert r.exact and (r.sub, r.middle, r.quotient) == (G(0, 2), G(0, 2), G(0))


def test_short_exact_rejects_unnested():
    with pytest.raises(ValueError):
        short_exact_check(G(1), [(1,)], [(2,)], [(1,)])


def test_group_str_and_chain():
    assert str(G(2, 2)) == "Z^2 + Z/2"
    assert str(G()) == "0"
    with pytest.raises(ValueError):
        FGAbelianGroup(0, (2, 3))
    assert FGAbelianGroup.from_invariants(0, [2, 3]) == G(0, 6)


matrices = st.integers(1, 3).flatmap(lambda m: st.integers(1, 3).flatmap(
    lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=m, max_size=m)))


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_snf_properties(rows):
    a = IntMatrix.from_rows(rows, len(rows[0]))
    u, d, v = smith_normal_form(a)
    assert u @ a @ v == d
    assert abs(u.det()) == 1 and abs(v.det()) == 1
    assert d.is_diagonal()
    diag = d.diagonal()
    nz = [x for x in diag if x]
    assert all(x > 0 for x in nz)
    assert diag[:len(nz)] == nz
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_cokernel_matches_oracles(rows):
    c = cokernel(hom(rows))
    assert c == determinantal_cokernel(rows) == coset_cokernel(rows)


@settings(max_examples=100, deadline=None)
@given(matrices, st.integers(0, 10 ** 6))
def test_cokernel_unimodular_invariance(rows, seed):
    rng = random.Random(seed)
    m, n = len(rows), len(rows[0])

    def unimodular(k):
        e = IntMatrix.identity(k).tolist()
        for _ in range(4):
            i, j = rng.sample(range(k), 2) if k > 1 else (0, 0)
            if i != j:
                c = rng.randint(-2, 2)
                e = [[e[r][s] + (c * e[j][s] if r == i else 0) for s in range(k)] for r in range(k)]
        return IntMatrix.from_rows(e, k)

    a = IntMatrix.from_rows(rows, n)
    b = unimodular(m) @ a @ unimodular(n)
    assert cokernel(hom(b.tolist(), n)) == cokernel(hom(rows))


@settings(max_examples=100, deadline=None)
@given(matrices)
def test_rank_nullity(rows):
    k, i = kernel_image(hom(rows))
    assert k.rank + i.rank == len(rows[0])
