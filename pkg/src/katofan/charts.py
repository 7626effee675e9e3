"""Monoid-level chart calculus: relative characteristic, neatness, invertibility.

A residue characteristic ``p`` (0 or a prime) stands in for the local ring:
an integer ``n`` is invertible iff ``p == 0`` or ``p`` does not divide ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .abelian import FGAbelianGroup, GroupHom, IntMatrix, _lattice_basis, cokernel, integer_kernel, solve_integer
from .monoid import FineMonoid, MonoidHom, groupify, hom_flags, is_saturated, sharpen


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % k for k in range(2, int(p ** 0.5) + 1))


def invertible(n: int, p: int) -> bool:
    """Whether ``n`` is a unit in a local ring of residue characteristic ``p``."""
    return p == 0 or n % p != 0


def _surjective(h: MonoidHom) -> bool:
    image = FineMonoid(h.target.ambient, h.images)
    return all(image.contains(g) for g in h.target.generators)


@dataclass(frozen=True)
class ChartDatum:
    """A chart ``u: P -> Q`` for a morphism at a point, over the stalk maps.

    ``cY: P -> My`` and ``cX: Q -> Mx`` land in the characteristic stalks and
    ``phi: My -> Mx`` is the map of stalks; ``cX . u = phi . cY``.
    ``notes`` collects non-fatal observations made during validation.
    """

    u: MonoidHom
    cY: MonoidHom
    cX: MonoidHom
    phi: MonoidHom
    residue_char: int = 0
    notes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        u, cY, cX, phi = self.u, self.cY, self.cX, self.phi
        if cY.source != u.source:
            raise ValueError("invalid datum: cY must start at the base monoid P")
        if cX.source != u.target:
            raise ValueError("invalid datum: cX must start at the chart monoid Q")
        if phi.source != cY.target or phi.target != cX.target:
            raise ValueError("invalid datum: phi must go from My to Mx")
        if not (phi.source.is_sharp and phi.target.is_sharp):
            raise ValueError("invalid datum: stalks My and Mx must be sharp")
        if not _surjective(cX):
            raise ValueError("invalid datum: cX is not surjective onto Mx")
        for g in u.source.generators:
            if cX(u(g)) != phi(cY(g)):
                raise ValueError(f"invalid datum: square does not commute on the generator {g}")
        if not (self.residue_char == 0 or _is_prime(self.residue_char)):
            raise ValueError(f"invalid datum: residue characteristic {self.residue_char} is neither 0 nor prime")
        notes = list(self.notes)
        if not _surjective(cY):
            notes.append("cY is not surjective onto My")
        object.__setattr__(self, "notes", tuple(notes))

    P = property(lambda self: self.u.source)
    Q = property(lambda self: self.u.target)
    My = property(lambda self: self.phi.source)
    Mx = property(lambda self: self.phi.target)

    def with_char(self, p: int) -> ChartDatum:
        return ChartDatum(self.u, self.cY, self.cX, self.phi, p)


def gp_cokernel(h: MonoidHom) -> FGAbelianGroup:
    """``coker(h^gp)`` in canonical form."""
    return cokernel(h.gp_map)


def gp_kernel(h: MonoidHom) -> FGAbelianGroup:
    return h.gp_map.kernel_presentation().group


@dataclass(frozen=True)
class RelChar:
    monoid: FineMonoid
    gp: FGAbelianGroup
    sharpened: FineMonoid


def rel_char(d: ChartDatum) -> RelChar:
    """The image of ``Mx`` in ``coker(phi^gp)``, that group, and the sharpened image."""
    coords = d.phi.gp_map.cokernel_presentation().coordinates
    n = len(d.Mx.generators)
    images = [coords([int(i == j) for i in range(n)]) for j in range(n)]
    m = FineMonoid(coords.group, images)
    return RelChar(m, coords.group, sharpen(m)[0])


@dataclass(frozen=True)
class NeatnessResult:
    neat: bool
    injective: bool
    chart_cokernel: FGAbelianGroup
    rel_cokernel: FGAbelianGroup
    diagnostics: tuple

    def __bool__(self):
        return self.neat


def neatness_check(d: ChartDatum, exact: bool = False) -> NeatnessResult:
    """Injectivity of ``u`` and bijectivity of ``coker(u^gp) -> coker(phi^gp)``.

    With ``exact`` the chart must also be exact; an undecided exactness
    test counts as a failure.
    """
    injective = d.u.gp_map.is_injective()
    src = d.u.gp_map.cokernel_presentation()
    tgt = d.phi.gp_map.cokernel_presentation()
    induced = GroupHom(src, tgt, d.cX.gp_map.matrix)
    diags = []
    if not injective:
        diags.append(f"u is not injective (kernel {gp_kernel(d.u)})")
    if src.group != tgt.group:
        diags.append(f"cokernel mismatch {src.group} vs {tgt.group}")
    elif not induced.is_isomorphism():
        diags.append(f"induced map {src.group} -> {tgt.group} is not an isomorphism")
    if exact:
        flag = hom_flags(d.u).exact
        if flag is not True:
            diags.append("u is not exact" if flag is False else "exactness of u undecided within the bound")
    return NeatnessResult(not diags, injective, src.group, tgt.group, tuple(diags))


def torsion_invertible(u: MonoidHom, p: int) -> bool:
    """Whether the torsion of ``coker(u^gp)`` has order invertible at ``p``."""
    return invertible(gp_cokernel(u).torsion_order, p)


@dataclass(frozen=True)
class SmoothReport:
    """Both readings of the smoothness condition.

    ``strict``: the whole cokernel is finite of invertible order.
    ``kato``: its torsion part has invertible order.
    ``discrepancy`` is set when the cokernel is infinite, where the two
    readings are about different groups.
    """

    strict: bool
    kato: bool
    discrepancy: bool
    cokernel: FGAbelianGroup
    p: int

    def __bool__(self):
        return self.kato

    @property
    def message(self) -> str:
        c = self.cokernel
        if self.strict and self.kato:
            return f"PASS: cokernel {c}"
        if self.kato:
            return f"PASS (torsion reading): cokernel {c} is infinite, strict reading fails"
        return f"FAIL: cokernel {c}, {self.p} not invertible mod {self.p}"


def log_smooth_condition(u: MonoidHom, p: int) -> SmoothReport:
    if not u.gp_map.is_injective():
        raise ValueError("the smoothness condition needs an injective hom")
    c = gp_cokernel(u)
    strict = c.is_finite and invertible(c.torsion_order, p)
    kato = invertible(c.torsion_order, p)
    return SmoothReport(strict, kato, not c.is_finite, c, p)


def log_etale_condition(u: MonoidHom, p: int) -> bool:
    """Kernel and cokernel of ``u^gp`` finite of invertible order."""
    k, c = gp_kernel(u), gp_cokernel(u)
    return k.is_finite and c.is_finite and invertible(k.order * c.order, p)


def _check_fs_torsion_free(m: FineMonoid, name: str):
    if groupify(m).torsion:
        raise ValueError(f"{name} has torsion in its groupification")
    if not is_saturated(m):
        raise ValueError(f"{name} is not saturated")


def construct_neat_chart(d: ChartDatum) -> ChartDatum:
    """A neat chart ``P -> Q'`` with the same stalk data.

    With ``s`` a section of ``Mx^gp -> coker(phi^gp) = Z^k`` and
    ``psi: P^gp + Z^k -> Mx^gp, (a, c) -> phi(cY(a)) + s(c)``, the new chart
    is ``Q' = psi^{-1}(Mx)``, generated by a kernel basis of ``psi`` with
    negatives and one lift of each generator of ``Mx``.
    """
    for m, name in ((d.P, "P"), (d.Q, "Q"), (d.My, "My"), (d.Mx, "Mx")):
        _check_fs_torsion_free(m, name)
    rc = rel_char(d)
    if rc.gp.torsion:
        raise ValueError(f"relative characteristic group {rc.gp} has torsion")
    mx, amb = d.Mx, d.Mx.ambient
    pc = d.P.gp_presentation.coordinates
    r, k = pc.group.rank, rc.gp.rank
    cols = []
    for i in range(r):
        x = d.P.ambient.combination(pc.lift([int(j == i) for j in range(r)]), d.P.generators)
        cols.append(d.phi(d.cY(x)))
    qc = d.phi.gp_map.cokernel_presentation().coordinates
    for i in range(k):
        cols.append(amb.combination(qc.lift([int(j == i) for j in range(k)]), mx.generators))
    n = r + k
    psi = IntMatrix.from_columns(cols, amb.dim) if cols else IntMatrix.zeros(amb.dim, 0)
    full = psi.hstack(amb.relation_matrix())
    kernel = _lattice_basis([v[:n] for v in integer_kernel(full)], n)
    lifts = []
    for g in mx.generators:
        z = solve_integer(full, g)
        if z is None:
            raise ValueError(f"generator {g} of Mx is not reached; cY^gp is not surjective")
        lifts.append(tuple(z[:n]))
    neg = [tuple(-c for c in v) for v in kernel]
    q2 = FineMonoid(FGAbelianGroup.free(n), list(kernel) + neg + lifts)

    def to_mx(z):
        return amb.combination(z, cols)

    u2 = MonoidHom(d.P, q2, [tuple(pc(d.P.in_group(g))) + (0,) * k for g in d.P.generators])
    cx2 = MonoidHom(q2, mx, [to_mx(z) for z in q2.generators])
    return ChartDatum(u2, d.cY, cx2, d.phi, d.residue_char)


@dataclass(frozen=True)
class CriterionReport:
    injective: bool
    torsion_order: int
    torsion_invertible: bool
    neat: bool
    underlying_regular: bool
    p: int

    @property
    def combinatorial(self) -> bool:
        return self.injective and self.torsion_invertible

    @property
    def verdict(self) -> str:
        if self.combinatorial:
            text = "combinatorial conditions of the chart criterion hold"
            if not self.underlying_regular:
                text += "; the underlying morphism is not regular (external input)"
            return text
        reasons = []
        if not self.injective:
            reasons.append("u is not injective")
        if not self.torsion_invertible:
            reasons.append(f"torsion of order {self.torsion_order} is not invertible at p={self.p}")
        return "combinatorial conditions fail: " + "; ".join(reasons)


def criterion_report(d: ChartDatum, underlying_regular: bool) -> CriterionReport:
    return CriterionReport(
        injective=d.u.gp_map.is_injective(),
        torsion_order=gp_cokernel(d.u).torsion_order,
        torsion_invertible=torsion_invertible(d.u, d.residue_char),
        neat=neatness_check(d).neat,
        underlying_regular=bool(underlying_regular),
        p=d.residue_char,
    )


def gp_rank(m: FineMonoid) -> int:
    return groupify(m).rank
