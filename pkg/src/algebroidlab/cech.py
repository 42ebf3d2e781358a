"""Formal covers, the Cech-de Rham total complex, and characteristic cocycles.

Covers are purely combinatorial: charts share one polynomial context, the
nerve is a declared list of index tuples, and transitions are invertible
polynomial chart maps.  Forms on a simplex live in the chart of the LAST
index; the Cech differential pulls back exactly one face (the one that
drops the last index), which pins all transport ambiguity and is validated
by the delta-squared tests.

The assembled cocycles: the curvature-pairing 4-cocycle and its half, the
primitive-corrected 2-cocycle in (2-forms -> closed 3-forms), and the
frame-difference cocycle of the vertex layer.  coboundary_solve searches
for exact primitives by a bounded monomial ansatz over the rationals.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .algebroid import AtiyahChart, Connection, curvature
from .cartan import (
    ChartMap,
    DiffForm,
    MatrixForm,
    ext_d,
    mat_conjugate,
    mat_ext_d,
    mat_pullback,
    mat_wedge_pair,
    pullback,
    pushforward_vf,
    wedge,
)
from .checks import CheckReport
from .courant import cs_form
from .linsolve import solve_sparse
from .ring import Context, ContextMismatch, RatFunc, RingError, partial
from .vertex import FrameEVA, eva_difference


class MissingSimplex(RingError):
    """A requested simplex or face is not declared in the nerve."""


class CocycleViolation(RingError):
    """Transition or bundle matrices fail a compatibility identity."""


class FrameInvalid(RingError):
    """A per-chart frame does not live on its chart."""


class PrimitiveInvalid(RingError):
    """A supplied 3-form primitive does not differentiate to the target."""


class NotClosed(RingError):
    """coboundary_solve target is not a total cocycle."""


class NoSolutionWithinBound(RingError):
    """The bounded ansatz has no solution (not a proof of non-exactness)."""


# ------------------------------------------------------------------ covers


class CoverSpec:
    """A formal cover: named charts over one shared context, invertible
    transitions for every nerve pair, and an explicitly declared nerve."""

    def __init__(self, context: Context, names: Sequence[str],
                 transitions: Mapping[tuple[int, int], ChartMap],
                 nerve: Sequence[tuple[int, ...]]):
        if len(set(names)) != len(names) or not names:
            raise ValueError("chart names must be unique and non-empty")
        self.context = context
        self.names = tuple(names)
        n = len(self.names)
        seen = set()
        for simplex in nerve:
            t = tuple(simplex)
            if len(t) < 2 or list(t) != sorted(set(t)):
                raise ValueError("nerve entries must be strictly increasing tuples: %r" % (t,))
            if t[-1] >= n or t[0] < 0:
                raise ValueError("nerve entry %r names an unknown chart" % (t,))
            seen.add(t)
        self.nerve = tuple(sorted(seen, key=lambda t: (len(t), t)))
        for t in self.nerve:
            if len(t) > 2:
                for m in range(len(t)):
                    face = t[:m] + t[m + 1:]
                    if face not in seen:
                        raise MissingSimplex("face %r of %r is not declared" % (face, t))
        self._transitions: dict[tuple[int, int], ChartMap] = {}
        for (i, j), phi in transitions.items():
            if phi.source != context or phi.target != context:
                raise ContextMismatch("transition %r is not a self-map of the shared context" % ((i, j),))
            self._transitions[(i, j)] = phi
        for (i, j) in self.pairs():
            fwd, bwd = self.transition(i, j), self.transition(j, i)
            if not fwd.compose(bwd).is_identity() or not bwd.compose(fwd).is_identity():
                raise CocycleViolation("transitions for pair (%d, %d) are not mutually inverse" % (i, j))
        for (i, j, k) in self.triples():
            chained = self.transition(i, j).compose(self.transition(j, k))
            if chained != self.transition(i, k):
                raise CocycleViolation("transitions fail to compose on (%d, %d, %d)" % (i, j, k))

    def pairs(self) -> list[tuple[int, int]]:
        return [t for t in self.nerve if len(t) == 2]

    def triples(self) -> list[tuple[int, int, int]]:
        return [t for t in self.nerve if len(t) == 3]

    def simplices(self, p: int) -> list[tuple[int, ...]]:
        if p == 0:
            return [(i,) for i in range(len(self.names))]
        return [t for t in self.nerve if len(t) == p + 1]

    def transition(self, i: int, j: int) -> ChartMap:
        if i == j:
            return ChartMap.identity(self.context)
        phi = self._transitions.get((i, j))
        if phi is None:
            raise MissingSimplex("no transition declared for (%d, %d)" % (i, j))
        return phi

    def pull(self, i: int, j: int, form: DiffForm) -> DiffForm:
        """Carry a form expressed in chart i into chart j."""
        if i == j:
            return form
        return pullback(self.transition(i, j), form)


class BundleCocycle:
    """Trivialized bundle data: invertible transition matrices g_{ij},
    stored in chart j, satisfying the cocycle condition on triples."""

    def __init__(self, cover: CoverSpec, rank: int,
                 mats: Mapping[tuple[int, int], MatrixForm]):
        self.cover = cover
        self.rank = rank
        self._g: dict[tuple[int, int], MatrixForm] = {}
        for pair in cover.pairs():
            if pair not in mats:
                raise MissingSimplex("no bundle matrix for pair %r" % (pair,))
        for pair, g in mats.items():
            if pair not in cover.pairs():
                raise MissingSimplex("bundle matrix on undeclared pair %r" % (pair,))
            if g.rank != rank or g.degree != 0 or g.context != cover.context:
                raise CocycleViolation("bundle matrix on %r has the wrong shape" % (pair,))
            try:
                g.inverse()
            except Exception:
                raise CocycleViolation("bundle matrix on %r is singular" % (pair,))
            self._g[pair] = g
        for (i, j, k) in cover.triples():
            lhs = mat_pullback(cover.transition(j, k), self.g(i, j)).matmul(self.g(j, k))
            if lhs != self.g(i, k):
                raise CocycleViolation("bundle cocycle fails on (%d, %d, %d)" % (i, j, k))

    def g(self, i: int, j: int) -> MatrixForm:
        if i == j:
            return MatrixForm.identity(self.cover.context, self.rank)
        if (i, j) in self._g:
            return self._g[(i, j)]
        rev = self._g.get((j, i))
        if rev is None:
            raise MissingSimplex("no bundle matrix for pair (%d, %d)" % (i, j))
        return mat_pullback(self.cover.transition(j, i), rev.inverse())


# ------------------------------------------------------------------ cochains


class CechCochain:
    """Degree-(p, q): one q-form per declared p-simplex, expressed in the
    chart of the simplex's last index."""

    def __init__(self, cover: CoverSpec, p: int, q: int,
                 values: Mapping[tuple[int, ...], DiffForm]):
        self.cover = cover
        self.p = p
        self.q = q
        vals = {}
        declared = cover.simplices(p)
        for simplex in declared:
            if simplex not in values:
                raise MissingSimplex("cochain missing value on %r" % (simplex,))
        for simplex, form in values.items():
            if tuple(simplex) not in declared:
                raise MissingSimplex("cochain value on undeclared simplex %r" % (simplex,))
            if form.context != cover.context:
                raise ContextMismatch("cochain value on %r lives off the cover" % (simplex,))
            if not form.is_homogeneous(q):
                raise ValueError("cochain value on %r is not homogeneous of degree %d" % (simplex, q))
            vals[tuple(simplex)] = form
        self.values = vals

    @staticmethod
    def zero(cover: CoverSpec, p: int, q: int) -> "CechCochain":
        return CechCochain(cover, p, q,
                           {s: DiffForm.zero(cover.context) for s in cover.simplices(p)})

    def value(self, simplex: Sequence[int]) -> DiffForm:
        key = tuple(simplex)
        if key not in self.values:
            raise MissingSimplex("no value on simplex %r" % (key,))
        return self.values[key]

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values.values())

    def _match(self, other: "CechCochain") -> None:
        if self.cover is not other.cover and self.cover.nerve != other.cover.nerve:
            raise ContextMismatch("cochains on different covers")
        if (self.p, self.q) != (other.p, other.q):
            raise ValueError("cochain bidegrees differ")

    def __add__(self, other: "CechCochain") -> "CechCochain":
        self._match(other)
        return CechCochain(self.cover, self.p, self.q,
                           {s: v + other.values[s] for s, v in self.values.items()})

    def __sub__(self, other: "CechCochain") -> "CechCochain":
        self._match(other)
        return CechCochain(self.cover, self.p, self.q,
                           {s: v - other.values[s] for s, v in self.values.items()})

    def __neg__(self) -> "CechCochain":
        return CechCochain(self.cover, self.p, self.q,
                           {s: -v for s, v in self.values.items()})

    def scale(self, factor: Fraction) -> "CechCochain":
        c = self.cover.context.const(factor)
        return CechCochain(self.cover, self.p, self.q,
                           {s: v * c for s, v in self.values.items()})

    def __eq__(self, other):
        if not isinstance(other, CechCochain):
            return NotImplemented
        return (self.p, self.q) == (other.p, other.q) and self.values == other.values


def cech_d(c: CechCochain) -> CechCochain:
    """Alternating face sum; only the dropped-last-index face changes the
    reference chart and is pulled back."""
    cover = c.cover
    out = {}
    for simplex in cover.simplices(c.p + 1):
        acc = DiffForm.zero(cover.context)
        last = len(simplex) - 1
        for m in range(len(simplex)):
            face = simplex[:m] + simplex[m + 1:]
            val = c.value(face)
            if m == last:
                val = cover.pull(simplex[-2], simplex[-1], val)
            acc = acc + (val if m % 2 == 0 else -val)
        out[simplex] = acc
    return CechCochain(cover, c.p + 1, c.q, out)


def form_d(c: CechCochain) -> CechCochain:
    return CechCochain(c.cover, c.p, c.q + 1,
                       {s: ext_d(v) for s, v in c.values.items()})


class TotalCochain:
    """A finite collection of bidegree components of the total complex."""

    def __init__(self, components: Mapping[tuple[int, int], CechCochain]):
        comps = {}
        for (p, q), c in components.items():
            if (c.p, c.q) != (p, q):
                raise ValueError("component filed under the wrong bidegree")
            if not c.is_zero():
                comps[(p, q)] = c
        self.components = comps

    def component(self, p: int, q: int, cover: CoverSpec | None = None) -> CechCochain:
        got = self.components.get((p, q))
        if got is not None:
            return got
        if cover is None:
            raise KeyError("no (%d, %d) component and no cover to build zero" % (p, q))
        return CechCochain.zero(cover, p, q)

    def d(self) -> "TotalCochain":
        """d + (-1)^q cech-delta, accumulated per bidegree."""
        acc: dict[tuple[int, int], CechCochain] = {}

        def put(key, val):
            acc[key] = acc[key] + val if key in acc else val

        for (p, q), c in self.components.items():
            put((p, q + 1), form_d(c))
            delta = cech_d(c)
            put((p + 1, q), delta if q % 2 == 0 else -delta)
        return TotalCochain(acc)

    def is_zero(self) -> bool:
        return not self.components

    def __add__(self, other: "TotalCochain") -> "TotalCochain":
        acc = dict(self.components)
        for key, c in other.components.items():
            acc[key] = acc[key] + c if key in acc else c
        return TotalCochain(acc)

    def __neg__(self) -> "TotalCochain":
        return TotalCochain({k: -c for k, c in self.components.items()})

    def __sub__(self, other: "TotalCochain") -> "TotalCochain":
        return self + (-other)

    def scale(self, factor: Fraction) -> "TotalCochain":
        return TotalCochain({k: c.scale(factor) for k, c in self.components.items()})

    def __eq__(self, other):
        if not isinstance(other, TotalCochain):
            return NotImplemented
        return (self - other).is_zero()


def closure_report(total: TotalCochain, label: str = "closure") -> CheckReport:
    report = CheckReport()
    boundary = total.d()
    if boundary.is_zero():
        report.add("%s[total]" % label, True)
        return report
    for (p, q), c in sorted(boundary.components.items()):
        bad = [s for s, v in c.values.items() if not v.is_zero()]
        report.add("%s[%d,%d]" % (label, p, q), not bad,
                   "" if not bad else "nonzero at %r" % (bad[0],))
    return report


# ------------------------------------------------------------------ connections


def cotangent_bundle(cover: CoverSpec) -> BundleCocycle:
    """Transition matrices for components of 1-forms along the cover.

    If s_i are the coefficient tuples of one global 1-form in each chart,
    then phi_ij(s_i) = g_ij . s_j with g_ij[a][m] the pushed-forward
    partial of the backward coordinate image (chain rule; checked as a
    property in the tests).
    """
    ctx = cover.context
    names = ctx.variables
    n = len(names)
    mats = {}
    for (i, j) in cover.pairs():
        fwd, bwd = cover.transition(i, j), cover.transition(j, i)
        grid = [[fwd.apply_scalar(partial(bwd.images[names[m]], names[a]))
                 for m in range(n)] for a in range(n)]
        mats[(i, j)] = MatrixForm.from_scalars(ctx, grid)
    return BundleCocycle(cover, n, mats)


def transport_connection(cover: CoverSpec, bundle: BundleCocycle,
                         i: int, j: int, conn: Connection) -> Connection:
    """Gauge rule: omega |-> g^-1 pb(omega) g + g^-1 dg for g = g_{ij}."""
    g = bundle.g(i, j)
    w = mat_conjugate(g, mat_pullback(cover.transition(i, j), conn.omega))
    w = w + g.inverse().matmul(mat_ext_d(g))
    return Connection(AtiyahChart(cover.context, bundle.rank), w)


def gauge_transport(cover: CoverSpec, bundle: BundleCocycle,
                    i: int, j: int, m: MatrixForm) -> MatrixForm:
    """Conjugation transport of a matrix-valued form from chart i to j."""
    return mat_conjugate(bundle.g(i, j), mat_pullback(cover.transition(i, j), m))


def induced_connections(cover: CoverSpec, bundle: BundleCocycle,
                        seed="flat") -> tuple[dict[int, Connection], dict[tuple[int, int], MatrixForm]]:
    """Per-chart connections plus the difference cochain A_{ij} in chart j.

    The gauge consistency A_{ik} = transported A_{ij} + A_{jk} is enforced
    on every declared triple.
    """
    chart = AtiyahChart(cover.context, bundle.rank)
    if seed == "flat":
        conns = {i: Connection.flat(chart) for i in range(len(cover.names))}
    else:
        conns = dict(seed)
        for i in range(len(cover.names)):
            if i not in conns:
                raise MissingSimplex("no seed connection for chart %d" % i)
            if conns[i].chart.context != cover.context or conns[i].chart.rank != bundle.rank:
                raise ContextMismatch("seed connection %d has the wrong shape" % i)
    diffs = {}
    for (i, j) in cover.pairs():
        diffs[(i, j)] = transport_connection(cover, bundle, i, j, conns[i]).omega - conns[j].omega
    for (i, j, k) in cover.triples():
        lhs = gauge_transport(cover, bundle, j, k, diffs[(i, j)]) + diffs[(j, k)]
        if lhs != diffs[(i, k)]:
            raise CocycleViolation("connection differences fail gauge consistency on (%d, %d, %d)" % (i, j, k))
    return conns, diffs


# ------------------------------------------------------------------ characteristic cocycles


def pontryagin_cocycle(cover: CoverSpec, bundle: BundleCocycle,
                       conns: Mapping[int, Connection]) -> TotalCochain:
    """Components (0,4), (1,3), (2,2) of the curvature-pairing cocycle."""
    ctx = cover.context
    _, diffs = induced_connections(cover, bundle, seed=conns)
    p40 = {}
    for (i,) in cover.simplices(0):
        c = curvature(conns[i])
        p40[(i,)] = mat_wedge_pair(c, c)
    p31 = {}
    for (i, j) in cover.pairs():
        moved = transport_connection(cover, bundle, i, j, conns[i])
        p31[(i, j)] = cs_form(moved, conns[j]) * ctx.const(-2)
    p22 = {}
    for (i, j, k) in cover.triples():
        p22[(i, j, k)] = -mat_wedge_pair(
            gauge_transport(cover, bundle, j, k, diffs[(i, j)]), diffs[(j, k)])
    return TotalCochain({
        (0, 4): CechCochain(cover, 0, 4, p40),
        (1, 3): CechCochain(cover, 1, 3, p31),
        (2, 2): CechCochain(cover, 2, 2, p22),
    })


def ch2_cocycle(cover: CoverSpec, bundle: BundleCocycle,
                conns: Mapping[int, Connection]) -> TotalCochain:
    return pontryagin_cocycle(cover, bundle, conns).scale(Fraction(1, 2))


def hat_P_assembly(cover: CoverSpec, bundle: BundleCocycle,
                   conns: Mapping[int, Connection],
                   primitives: Mapping[int, DiffForm]) -> tuple[TotalCochain, CheckReport]:
    """The primitive-corrected 2-cocycle in (2-forms -> closed 3-forms).

    Requires d(H_i) to be half the curvature self-pairing per chart.  The
    pair component is -H_j + pulled H_i + transgression; the triple
    component is minus half the transported-difference pairing.  The sign
    of the mixed closure identity is the one that holds mechanically:
    d(hat22) + cech(hat31) = 0.
    """
    ctx = cover.context
    half = ctx.const(Fraction(1, 2))
    for i in range(len(cover.names)):
        if i not in primitives:
            raise PrimitiveInvalid("no primitive supplied for chart %d" % i)
        c = curvature(conns[i])
        if ext_d(primitives[i]) != mat_wedge_pair(c, c) * half:
            raise PrimitiveInvalid("primitive on chart %d does not differentiate "
                                   "to half the curvature pairing" % i)
    _, diffs = induced_connections(cover, bundle, seed=conns)
    p31 = {}
    for (i, j) in cover.pairs():
        moved = transport_connection(cover, bundle, i, j, conns[i])
        p31[(i, j)] = (-primitives[j] + cover.pull(i, j, primitives[i])
                       + cs_form(moved, conns[j]))
    p22 = {}
    for (i, j, k) in cover.triples():
        p22[(i, j, k)] = -mat_wedge_pair(
            gauge_transport(cover, bundle, j, k, diffs[(i, j)]), diffs[(j, k)]) * half
    hat31 = CechCochain(cover, 1, 3, p31)
    hat22 = CechCochain(cover, 2, 2, p22)

    report = CheckReport()
    closed = form_d(hat31)
    bad = [s for s, v in closed.values.items() if not v.is_zero()]
    report.add("hat31-closed", not bad, "" if not bad else "nonzero d at %r" % (bad[0],))
    mixed = form_d(hat22) + cech_d(hat31)
    bad = [s for s, v in mixed.values.items() if not v.is_zero()]
    report.add("hat22-mixed-closure", not bad, "" if not bad else "nonzero at %r" % (bad[0],))
    if cover.simplices(3):
        top = cech_d(hat22)
        bad = [s for s, v in top.values.items() if not v.is_zero()]
        report.add("hat22-cech-closed", not bad, "" if not bad else "nonzero at %r" % (bad[0],))
    # assembly identity: the sign-flipped pair equals ch2 minus the total
    # differential of the primitives
    lhs = TotalCochain({(1, 3): -hat31, (2, 2): hat22})
    h_total = TotalCochain({(0, 3): CechCochain(
        cover, 0, 3, {(i,): primitives[i] for i in range(len(cover.names))})})
    rhs = ch2_cocycle(cover, bundle, conns) - h_total.d()
    report.add("assembly-identity", lhs == rhs)
    return TotalCochain({(1, 3): hat31, (2, 2): hat22}), report


def hat_P_closed_total(hatp: TotalCochain, cover: CoverSpec) -> TotalCochain:
    """The orientation of the assembled pair that is closed under the total
    differential: negated pair component, unchanged triple component."""
    out = {}
    if (1, 3) in hatp.components:
        out[(1, 3)] = -hatp.components[(1, 3)]
    if (2, 2) in hatp.components:
        out[(2, 2)] = hatp.components[(2, 2)]
    return TotalCochain(out)


# ------------------------------------------------------------------ frame-difference cocycle


def eva_class_cocycle(cover: CoverSpec,
                      frames: Mapping[int, FrameEVA]) -> tuple[TotalCochain, CheckReport]:
    """Pair component: curvature representative of the difference between
    the transported frame structure and the local one.  Triple component:
    the 2-form comparing the three isotropized splittings, extracted from
    the composite trivialization."""
    ctx = cover.context
    n = len(ctx.variables)
    for i in range(len(cover.names)):
        if i not in frames:
            raise FrameInvalid("no frame for chart %d" % i)
        if frames[i].context != ctx:
            raise FrameInvalid("frame for chart %d lives off the cover" % i)

    def moved_frame(i, j):
        if i == j:
            return frames[i]
        fwd, bwd = cover.transition(i, j), cover.transition(j, i)
        try:
            return FrameEVA(ctx, [pushforward_vf(t, fwd, bwd) for t in frames[i].frame])
        except ValueError as exc:
            raise FrameInvalid("transported frame (%d -> %d) is invalid: %s" % (i, j, exc))

    report = CheckReport()
    diffs = {}
    h_vals = {}
    for (i, j) in cover.pairs():
        diff = eva_difference(moved_frame(i, j), frames[j])
        diffs[(i, j)] = diff
        h_vals[(i, j)] = diff.structure.H
        ok = ext_d(diff.structure.H).is_zero()
        report.add("h-closed[%d,%d]" % (i, j), ok,
                   "" if ok else "dH = %s" % (ext_d(diff.structure.H),))
    h_c = CechCochain(cover, 1, 3, h_vals)

    b_vals = {}
    for (i, j, k) in cover.triples():
        pair_ij_in_k = eva_difference(moved_frame(i, k), moved_frame(j, k))
        moved_h = cover.pull(j, k, h_vals[(i, j)])
        report.add("h-transport[%d,%d,%d]" % (i, j, k),
                   moved_h == pair_ij_in_k.structure.H,
                   "" if moved_h == pair_ij_in_k.structure.H else
                   "pulled H differs from recomputed H")
        acc = DiffForm.zero(ctx)
        for m in range(n):
            beta = (pair_ij_in_k._phi[m] + diffs[(j, k)]._phi[m] - diffs[(i, k)]._phi[m])
            acc = acc + wedge(DiffForm.dx(ctx, m), beta)
        b_vals[(i, j, k)] = acc * ctx.const(Fraction(1, 2))
    b_c = CechCochain(cover, 2, 2, b_vals)

    delta_h = cech_d(h_c)
    for (i, j, k) in cover.triples():
        ok = ext_d(b_c.value((i, j, k))) == delta_h.value((i, j, k))
        report.add("mixed-closure[%d,%d,%d]" % (i, j, k), ok,
                   "" if ok else "dB and cech(H) disagree")
    total = TotalCochain({(1, 3): h_c, (2, 2): b_c})
    report.merge(closure_report(total, label="total-closure"))
    return total, report


# ------------------------------------------------------------------ coboundary solving


def _monomials_upto(nvars: int, bound: int) -> list[tuple[int, ...]]:
    out = []

    def rec(prefix, remaining, slots):
        if slots == 0:
            out.append(tuple(prefix))
            return
        for e in range(remaining + 1):
            rec(prefix + [e], remaining - e, slots - 1)

    rec([], bound, nvars)
    return out


def _mono_scalar(ctx: Context, exp: tuple[int, ...]) -> RatFunc:
    f = ctx.one
    for name, e in zip(ctx.variables, exp):
        if e:
            f = f * ctx.var(name) ** e
    return f


def _form_rows(form: DiffForm) -> list[tuple[tuple[int, ...], tuple[int, ...], Fraction]]:
    """(component index tuple, monomial exponents, coefficient) triples."""
    out = []
    for idx, coeff in form.terms.items():
        for exp, frac in coeff.poly_terms():
            out.append((idx, exp, frac))
    return out


def coboundary_solve(cover: CoverSpec, target: TotalCochain,
                     degree_bound: int = 6) -> TotalCochain:
    """Search for a degree-1 primitive of a (1,3)+(2,2) total cocycle.

    Unknowns are polynomial 2-forms: one per declared pair (the Cech-1
    part) and one per chart whose exterior derivative realizes the closed
    3-form part.  Coefficients up to the degree bound are solved exactly
    over the rationals; the reconstructed primitive is re-verified
    symbolically before being returned.
    """
    if not target.d().is_zero():
        raise NotClosed("coboundary_solve target is not closed")
    for key in target.components:
        if key not in ((1, 3), (2, 2)):
            raise ValueError("coboundary_solve only handles (1,3)+(2,2) targets, got %r" % (key,))
    ctx = cover.context
    t31 = target.component(1, 3, cover)
    t22 = target.component(2, 2, cover)
    for c in (t31, t22):
        for simplex, form in c.values.items():
            for coeff in form.terms.values():
                if not coeff.is_polynomial():
                    raise NoSolutionWithinBound(
                        "target coefficient on %r is not polynomial" % (simplex,))

    nvars = len(ctx.variables)
    monos = _monomials_upto(nvars, degree_bound)
    comps2 = [(a, b) for a in range(nvars) for b in range(a + 1, nvars)]
    pairs = cover.pairs()
    charts = list(range(len(cover.names)))

    columns: list[tuple] = []
    col_index: dict[tuple, int] = {}
    for pair in pairs:
        for comp in comps2:
            for exp in monos:
                key = ("u", pair, comp, exp)
                col_index[key] = len(columns)
                columns.append(key)
    for i in charts:
        for comp in comps2:
            for exp in monos:
                key = ("b", i, comp, exp)
                col_index[key] = len(columns)
                columns.append(key)

    rows_map: dict[tuple, dict[int, Fraction]] = {}

    def add_form(slot_kind, slot, form, col, sign):
        for idx, exp, frac in _form_rows(form):
            row = rows_map.setdefault((slot_kind, slot, idx, exp), {})
            val = row.get(col, Fraction(0)) + sign * frac
            if val:
                row[col] = val
            else:
                row.pop(col, None)

    triples = cover.triples()
    by_pair: dict[tuple[int, int], list[tuple]] = {}
    for t in triples:
        for pr, role in (((t[1], t[2]), "jk"), ((t[0], t[2]), "ik"), ((t[0], t[1]), "ij")):
            by_pair.setdefault(pr, []).append((t, role))

    for pair in pairs:
        for comp in comps2:
            for exp in monos:
                col = col_index[("u", pair, comp, exp)]
                base = wedge(DiffForm.dx(ctx, comp[0]),
                             DiffForm.dx(ctx, comp[1])) * _mono_scalar(ctx, exp)
                add_form("31", pair, ext_d(base), col, Fraction(1))
                for t, role in by_pair.get(pair, ()):
                    if role == "jk":
                        add_form("22", t, base, col, Fraction(1))
                    elif role == "ik":
                        add_form("22", t, base, col, Fraction(-1))
                    else:
                        add_form("22", t, cover.pull(t[1], t[2], base), col, Fraction(1))
    for i in charts:
        for comp in comps2:
            for exp in monos:
                col = col_index[("b", i, comp, exp)]
                base = wedge(DiffForm.dx(ctx, comp[0]),
                             DiffForm.dx(ctx, comp[1])) * _mono_scalar(ctx, exp)
                v = ext_d(base)
                for (p, q) in pairs:
                    if q == i:
                        add_form("31", (p, q), v, col, Fraction(-1))
                    if p == i:
                        add_form("31", (p, q), cover.pull(p, q, v), col, Fraction(1))

    rhs_map: dict[tuple, Fraction] = {}
    for pair in pairs:
        for idx, exp, frac in _form_rows(t31.value(pair)):
            rhs_map[("31", pair, idx, exp)] = rhs_map.get(("31", pair, idx, exp), Fraction(0)) + frac
    for t in triples:
        for idx, exp, frac in _form_rows(t22.value(t)):
            rhs_map[("22", t, idx, exp)] = rhs_map.get(("22", t, idx, exp), Fraction(0)) + frac

    all_rows = sorted(set(rows_map) | set(rhs_map))
    rows = [rows_map.get(key, {}) for key in all_rows]
    rhs = [rhs_map.get(key, Fraction(0)) for key in all_rows]
    solution = solve_sparse(rows, rhs, len(columns))
    if solution is None:
        raise NoSolutionWithinBound("no primitive with coefficients of degree <= %d" % degree_bound)

    def build_two_form(kind, slot):
        acc = DiffForm.zero(ctx)
        for comp in comps2:
            for exp in monos:
                val = solution[col_index[(kind, slot, comp, exp)]]
                if val:
                    acc = acc + wedge(DiffForm.dx(ctx, comp[0]), DiffForm.dx(ctx, comp[1])) \
                        * (_mono_scalar(ctx, exp) * ctx.const(val))
        return acc

    u_c = CechCochain(cover, 1, 2, {pair: build_two_form("u", pair) for pair in pairs})
    b_c = CechCochain(cover, 0, 2, {(i,): build_two_form("b", i) for i in charts})
    sol = TotalCochain({(1, 2): u_c, (0, 3): form_d(b_c)})
    if not (sol.d() - target).is_zero():
        raise NoSolutionWithinBound("reconstructed primitive failed symbolic verification")
    return sol


def _solve_escalating(cover: CoverSpec, target: TotalCochain, degree_bound: int) -> TotalCochain:
    """Try cheap low-degree ansatz bounds before the requested one."""
    bounds = sorted({b for b in (2, 4) if b < degree_bound} | {degree_bound})
    for bound in bounds[:-1]:
        try:
            return coboundary_solve(cover, target, bound)
        except NoSolutionWithinBound:
            continue
    return coboundary_solve(cover, target, bounds[-1])


def compare_classes(cover: CoverSpec, eva_total: TotalCochain,
                    ch2_total: TotalCochain,
                    degree_bound: int = 6) -> tuple[str, TotalCochain]:
    """Exhibit the two degree-2 cocycles as cohomologous, trying both
    relative orientations; returns the orientation label and primitive."""
    try:
        return "difference", _solve_escalating(cover, eva_total - ch2_total, degree_bound)
    except NoSolutionWithinBound:
        return "sum", _solve_escalating(cover, eva_total + ch2_total, degree_bound)
