"""The eight test monoids shared by several test modules."""

from katofan.abelian import FGAbelianGroup
from katofan.monoid import FineMonoid, MonoidHom
from katofan.groupoid import PMonoid

ZERO = FineMonoid.trivial()
N = FineMonoid.free(1)
N2 = FineMonoid.free(2)
N3 = FineMonoid.free(3)
NUM23 = FineMonoid.in_lattice([(2,), (3,)])
CONE012 = FineMonoid.in_lattice([(1, 0), (1, 1), (1, 2)])
EVEN = FineMonoid.in_lattice([(2, 0), (1, 1), (0, 2)])
TWISTED = FineMonoid(FGAbelianGroup(1, (2,)), [(1, 1)])

CORPUS = {
    "0": ZERO, "N": N, "N2": N2, "N3": N3, "<2,3>": NUM23,
    "cone012": CONE012, "even": EVEN, "twisted": TWISTED,
}


def over_trivial(m):
    return PMonoid.over_trivial(m)


def over_n(m):
    """``m`` over ``N`` with ``1`` sent to the sum of the generators."""
    s = m.ambient.combination([1] * len(m.generators), m.generators) if m.generators else m.ambient.zero()
    return PMonoid(N, m, MonoidHom(N, m, [s]))
