"""Courant structures on a chart: brackets, axioms, morphisms, arithmetic.

A structure is the split model Omega^1 + gl_r + T with a connection matrix
and a 3-form; rank 0 drops the matrix summand (the exact case).  The
bracket is *not* a hand-derived closed formula: it is computed by
structural recursion from the bracket values on constant generators
(coordinate differentials, matrix units, coordinate fields), extended by
the right-Leibniz rule and the symmetry relation.  Everything downstream
(axiom checks, Jacobiator comparisons, morphism defects) therefore tests
the generator table and the recursion, not a formula copied twice.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

from .algebroid import (
    AtiyahChart,
    ChartMismatch,
    Connection,
    curvature,
    leibniz_cocycle,
    mat_commutator,
)
from .cartan import (
    DiffForm,
    MatrixForm,
    VectorField,
    covariant_d,
    d_scalar,
    ext_d,
    evaluate,
    interior,
    mat_bracket,
    mat_interior,
    mat_wedge_pair,
    to_one_form,
    vf_bracket,
    wedge,
)
from .checks import CheckReport
from .ring import Context, RatFunc, RingError


class StructureMismatch(RingError):
    """Element shape does not match the Courant structure."""


class CompositionNotExpB(RingError):
    """A composite of connection-change maps failed to be exponential."""


class NotIsotropic(RingError):
    """A lift has nonvanishing self-pairing."""


class NotLinear(RingError):
    """A lift is not an anchor-splitting on coordinate fields."""


class PairingMismatch(RingError):
    """Structures have different kernel pairings (different ranks)."""


class InconsistentPresentation(RingError):
    """Torsor presentation violates c(s + a) = c(s) + da."""


class CourantStructure:
    """The split extension with connection ``conn`` and 3-form ``H``.

    ``conn`` is None exactly when the rank is 0 (the exact case).  The
    admissibility flag records whether dH equals half the curvature
    self-pairing (dH = 0 when rank 0); inadmissible structures are legal
    and are used to witness Jacobiator defects.
    """

    def __init__(self, context: Context, H: DiffForm, conn: Connection | None = None):
        if H.context != context:
            raise ChartMismatch("3-form lives off the chart")
        if not H.is_homogeneous(3):
            raise ValueError("H must be a 3-form")
        if conn is not None and conn.chart.context != context:
            raise ChartMismatch("connection lives off the chart")
        self.context = context
        self.H = H
        self.conn = conn
        self.rank = 0 if conn is None else conn.chart.rank
        self._curv = None if conn is None else curvature(conn)
        self._gen_cache: dict = {}
        if conn is None:
            self.admissible = ext_d(H).is_zero()
        else:
            target = mat_wedge_pair(self._curv, self._curv) * context.const(Fraction(1, 2))
            self.admissible = ext_d(H) == target

    @property
    def curv(self) -> MatrixForm | None:
        return self._curv

    def __eq__(self, other):
        if not isinstance(other, CourantStructure):
            return NotImplemented
        return (self.context == other.context and self.rank == other.rank
                and self.H == other.H and self.conn == other.conn)

    def __repr__(self):
        return "CourantStructure(rank=%d, H=%s)" % (self.rank, self.H)

    # -- element constructors -----------------------------------------------

    def element(self, alpha: DiffForm | None = None, a: MatrixForm | None = None,
                xi: VectorField | None = None) -> "CourantElement":
        ctx = self.context
        if alpha is None:
            alpha = DiffForm.zero(ctx)
        if xi is None:
            xi = VectorField(ctx, [ctx.zero] * len(ctx.variables))
        if self.rank == 0:
            if a is not None and not a.is_zero():
                raise StructureMismatch("rank-0 structure has no matrix summand")
            a = None
        elif a is None:
            a = MatrixForm.zero(ctx, self.rank, 0)
        return CourantElement(ctx, alpha, a, xi)

    def d(self, f: RatFunc) -> "CourantElement":
        return self.element(alpha=d_scalar(f))

    def i(self, alpha: DiffForm) -> "CourantElement":
        return self.element(alpha=alpha)

    def check_element(self, e: "CourantElement") -> None:
        if e.context != self.context:
            raise StructureMismatch("element lives off the structure's chart")
        if self.rank == 0:
            if e.a is not None:
                raise StructureMismatch("rank-0 element must not carry a matrix part")
        else:
            if e.a is None or e.a.rank != self.rank:
                raise StructureMismatch("matrix part missing or of wrong rank")


class CourantElement:
    """A split-presentation element (alpha, a, xi); ``a`` is None at rank 0."""

    __slots__ = ("context", "alpha", "a", "xi")

    def __init__(self, context: Context, alpha: DiffForm, a: MatrixForm | None, xi: VectorField):
        if alpha.context != context or xi.context != context:
            raise ChartMismatch("element parts live off the chart")
        if not alpha.is_homogeneous(1):
            raise ValueError("the form part must be a 1-form")
        if a is not None and (a.context != context or a.degree != 0):
            raise ValueError("the matrix part must be a degree-0 matrix on the chart")
        self.context = context
        self.alpha = alpha
        self.a = a
        self.xi = xi

    def _like(self, alpha, a, xi) -> "CourantElement":
        return CourantElement(self.context, alpha, a, xi)

    def __add__(self, other: "CourantElement") -> "CourantElement":
        _match(self, other)
        a = None if self.a is None else self.a + other.a
        return self._like(self.alpha + other.alpha, a, self.xi + other.xi)

    def __sub__(self, other: "CourantElement") -> "CourantElement":
        _match(self, other)
        a = None if self.a is None else self.a - other.a
        return self._like(self.alpha - other.alpha, a, self.xi - other.xi)

    def __neg__(self) -> "CourantElement":
        return self._like(-self.alpha, None if self.a is None else -self.a, -self.xi)

    def __mul__(self, scalar) -> "CourantElement":
        a = None if self.a is None else self.a * scalar
        return self._like(self.alpha * scalar, a, self.xi * scalar)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, CourantElement):
            return NotImplemented
        return (self.context == other.context and self.alpha == other.alpha
                and self.a == other.a and self.xi == other.xi)

    def is_zero(self) -> bool:
        return (self.alpha.is_zero() and self.xi.is_zero()
                and (self.a is None or self.a.is_zero()))

    def __repr__(self):
        return "CourantElement(alpha=%s, a=%r, xi=%r)" % (self.alpha, self.a, self.xi)


def _match(e1: CourantElement, e2: CourantElement) -> None:
    if e1.context != e2.context:
        raise ChartMismatch("elements on different charts")
    if (e1.a is None) != (e2.a is None):
        raise StructureMismatch("elements disagree about the matrix summand")


class TwoFormMorphism:
    """The shear by a 2-form: adds the contraction of B to the form part."""

    def __init__(self, B: DiffForm):
        if not B.is_homogeneous(2):
            raise ValueError("expected a 2-form")
        self.B = B

    def __eq__(self, other):
        if not isinstance(other, TwoFormMorphism):
            return NotImplemented
        return self.B == other.B

    def __repr__(self):
        return "TwoFormMorphism(%s)" % (self.B,)


def anchor(e: CourantElement) -> VectorField:
    return e.xi


def courant_pairing(s: CourantStructure, e1: CourantElement, e2: CourantElement) -> RatFunc:
    s.check_element(e1)
    s.check_element(e2)
    out = interior(e2.xi, e1.alpha).scalar() + interior(e1.xi, e2.alpha).scalar()
    if e1.a is not None:
        out = out + mat_wedge_pair(e1.a, e2.a).scalar()
    return out


# -- the bracket by structural recursion --------------------------------------

# generators are tagged tuples:  ("dx", m) | ("E", p, q) | ("T", k)


def _decompose(s: CourantStructure, e: CourantElement):
    terms = []
    for idx, coeff in e.alpha.terms.items():
        terms.append((coeff, ("dx", idx[0])))
    if e.a is not None:
        for p in range(s.rank):
            for q in range(s.rank):
                c = e.a.entries[p][q].scalar()
                if not c.is_zero():
                    terms.append((c, ("E", p, q)))
    for k, c in enumerate(e.xi.components):
        if not c.is_zero():
            terms.append((c, ("T", k)))
    return terms


class _Acc:
    """Mutable accumulator for bracket assembly."""

    def __init__(self, s: CourantStructure):
        ctx = s.context
        n = len(ctx.variables)
        self.s = s
        self.alpha = [ctx.zero] * n
        self.a = None if s.rank == 0 else [[ctx.zero] * s.rank for _ in range(s.rank)]
        self.xi = [ctx.zero] * n

    def add_gen(self, scale: RatFunc, gen) -> None:
        if scale.is_zero():
            return
        kind = gen[0]
        if kind == "dx":
            self.alpha[gen[1]] = self.alpha[gen[1]] + scale
        elif kind == "E":
            self.a[gen[1]][gen[2]] = self.a[gen[1]][gen[2]] + scale
        else:
            self.xi[gen[1]] = self.xi[gen[1]] + scale

    def add_element(self, scale: RatFunc, e: CourantElement) -> None:
        if scale.is_zero():
            return
        for idx, coeff in e.alpha.terms.items():
            m = idx[0]
            self.alpha[m] = self.alpha[m] + scale * coeff
        if e.a is not None:
            for p in range(self.s.rank):
                for q in range(self.s.rank):
                    c = e.a.entries[p][q].scalar()
                    if not c.is_zero():
                        self.a[p][q] = self.a[p][q] + scale * c
        for k, c in enumerate(e.xi.components):
            if not c.is_zero():
                self.xi[k] = self.xi[k] + scale * c

    def build(self) -> CourantElement:
        ctx = self.s.context
        alpha = to_one_form(ctx, self.alpha)
        a = None
        if self.a is not None:
            a = MatrixForm.from_scalars(ctx, self.a)
        xi = VectorField(ctx, self.xi)
        return CourantElement(ctx, alpha, a, xi)


def _gen_anchor_apply(s: CourantStructure, gen, f: RatFunc) -> RatFunc:
    if gen[0] == "T":
        return f.diff(s.context.variables[gen[1]])
    return s.context.zero


def _gen_pairing(s: CourantStructure, g1, g2) -> RatFunc:
    k1, k2 = g1[0], g2[0]
    if k1 == "T" and k2 == "dx":
        return s.context.one if g1[1] == g2[1] else s.context.zero
    if k1 == "dx" and k2 == "T":
        return s.context.one if g1[1] == g2[1] else s.context.zero
    if k1 == "E" and k2 == "E":
        # Tr(E_pq E_rs) = [q == r][s == p]
        return s.context.one if (g1[2] == g2[1] and g2[2] == g1[1]) else s.context.zero
    return s.context.zero


def _unit_matrix(ctx: Context, rank: int, p: int, q: int) -> MatrixForm:
    return MatrixForm.single(ctx, rank, p, q, DiffForm.function(ctx.one), degree=0)


def _gen_bracket(s: CourantStructure, g1, g2) -> CourantElement | None:
    """Bracket of two constant generators; None encodes zero."""
    key = (g1, g2)
    if key in s._gen_cache:
        return s._gen_cache[key]
    ctx = s.context
    k1, k2 = g1[0], g2[0]
    result: CourantElement | None = None
    if k1 == "T" and k2 == "T":
        i, j = g1[1], g2[1]
        di = VectorField.basis(ctx, i)
        dj = VectorField.basis(ctx, j)
        alpha = interior(dj, interior(di, s.H))
        a = None
        if s.rank:
            a = s.curv.map_entries(
                lambda e: DiffForm.function(evaluate(e, [di, dj])), degree=0)
        result = CourantElement(ctx, alpha, a, _zero_vf(ctx))
    elif k1 == "T" and k2 == "E" and s.rank:
        i = g1[1]
        di = VectorField.basis(ctx, i)
        unit = _unit_matrix(ctx, s.rank, g2[1], g2[2])
        coeffs = []
        for m in range(len(ctx.variables)):
            dm = VectorField.basis(ctx, m)
            c_im = s.curv.map_entries(
                lambda e: DiffForm.function(evaluate(e, [di, dm])), degree=0)
            coeffs.append(-mat_wedge_pair(c_im, unit).scalar())
        omega_i = mat_interior(di, s.conn.omega)
        result = CourantElement(ctx, to_one_form(ctx, coeffs),
                                mat_commutator(omega_i, unit), _zero_vf(ctx))
    elif k1 == "E" and k2 == "T" and s.rank:
        flipped = _gen_bracket(s, g2, g1)
        result = None if flipped is None else -flipped
    elif k1 == "E" and k2 == "E" and s.rank:
        u1 = _unit_matrix(ctx, s.rank, g1[1], g1[2])
        u2 = _unit_matrix(ctx, s.rank, g2[1], g2[2])
        alpha = leibniz_cocycle(s.conn, u1, u2)
        result = CourantElement(ctx, alpha, mat_commutator(u1, u2), _zero_vf(ctx))
    # brackets involving coordinate differentials vanish on generators
    if result is not None and result.is_zero():
        result = None
    s._gen_cache[key] = result
    return result


def _zero_vf(ctx: Context) -> VectorField:
    return VectorField(ctx, [ctx.zero] * len(ctx.variables))


def dorfman_bracket(s: CourantStructure, e1: CourantElement, e2: CourantElement) -> CourantElement:
    """[e1, e2] assembled from generator brackets, Leibniz, and symmetry.

    For terms f*X and g*Y with X, Y constant generators:

        [fX, gY] = g*(-f*[Y,X] - pi(Y)(f)*X + d(f*<X,Y>)) + f*pi(X)(g)*Y

    which is exactly the right-Leibniz extension combined with the symmetry
    relation for the left argument.
    """
    s.check_element(e1)
    s.check_element(e2)
    ctx = s.context
    names = ctx.variables
    acc = _Acc(s)
    terms1 = _decompose(s, e1)
    terms2 = _decompose(s, e2)
    for f, X in terms1:
        for g, Y in terms2:
            # g * (-f) * [Y, X]
            yx = _gen_bracket(s, Y, X)
            if yx is not None:
                acc.add_element(-(f * g), yx)
            # -g * pi(Y)(f) * X
            pyf = _gen_anchor_apply(s, Y, f)
            if not pyf.is_zero():
                acc.add_gen(-(g * pyf), X)
            # g * d(f * <X,Y>)  (the pairing of generators is constant)
            pxy = _gen_pairing(s, X, Y)
            if not pxy.is_zero():
                for m in range(len(names)):
                    dm = (f * pxy).diff(names[m])
                    if not dm.is_zero():
                        acc.add_gen(g * dm, ("dx", m))
            # f * pi(X)(g) * Y
            pxg = _gen_anchor_apply(s, X, g)
            if not pxg.is_zero():
                acc.add_gen(f * pxg, Y)
    return acc.build()


# -- axioms, Jacobiator, twists ------------------------------------------------


def check_courant_axioms(s: CourantStructure,
                         sample_elements: Sequence[CourantElement],
                         sample_functions: Sequence[RatFunc]) -> CheckReport:
    """Evaluate the six defining identities (plus two structural
    consequences) on rotating tuples drawn from the samples."""
    report = CheckReport()
    elems = list(sample_elements)
    funcs = list(sample_functions)
    n = len(elems)
    br = lambda a, b: dorfman_bracket(s, a, b)
    ip = lambda a, b: courant_pairing(s, a, b)

    for t in range(n):
        q = elems[t]
        q1 = elems[(t + 1) % n]
        q2 = elems[(t + 2) % n]
        f = funcs[t % len(funcs)]
        g = funcs[(t + 1) % len(funcs)]

        _row(report, "complex[%d]" % t, s.d(f).xi.is_zero(),
             lambda: "anchor of d(%s) nonzero" % (f,))

        lhs = br(q, q1 * f)
        rhs = br(q, q1) * f + q1 * q.xi.apply(f)
        _row(report, "leibniz[%d]" % t, lhs == rhs, lambda: _diff_witness(lhs, rhs))

        lhs2 = q.xi.apply(ip(q1, q2))
        rhs2 = ip(br(q, q1), q2) + ip(q1, br(q, q2))
        _row(report, "pairing-invariance[%d]" % t, lhs2 == rhs2,
             lambda: "lhs=%s rhs=%s" % (lhs2, rhs2))

        lhs3 = br(q, s.d(g))
        rhs3 = s.d(q.xi.apply(g))
        _row(report, "bracket-partial[%d]" % t, lhs3 == rhs3, lambda: _diff_witness(lhs3, rhs3))

        lhs4 = ip(q, s.d(g))
        rhs4 = q.xi.apply(g)
        _row(report, "pairing-partial[%d]" % t, lhs4 == rhs4,
             lambda: "lhs=%s rhs=%s" % (lhs4, rhs4))

        lhs5 = br(q1, q2) + br(q2, q1)
        rhs5 = s.d(ip(q1, q2))
        _row(report, "pairing-symmetry[%d]" % t, lhs5 == rhs5, lambda: _diff_witness(lhs5, rhs5))

        jac = jacobiator(s, q, q1, q2)
        _row(report, "jacobi-leibniz[%d]" % t, jac.is_zero(),
             lambda: "jacobiator = %r" % (jac,))

        lhs6 = br(q1, q2).xi
        rhs6 = vf_bracket(q1.xi, q2.xi)
        _row(report, "anchor-morphism[%d]" % t, lhs6 == rhs6,
             lambda: "lhs=%r rhs=%r" % (lhs6, rhs6))
    return report


def _row(report: CheckReport, name: str, ok: bool, witness: Callable[[], str]) -> None:
    report.add(name, ok, "" if ok else witness())


def _diff_witness(lhs: CourantElement, rhs: CourantElement) -> str:
    return "difference = %r" % (lhs - rhs,)


def jacobiator(s: CourantStructure, e0: CourantElement, e1: CourantElement,
               e2: CourantElement) -> CourantElement:
    """The literal defect of the Leibniz identity for the bracket."""
    br = lambda a, b: dorfman_bracket(s, a, b)
    return br(e0, br(e1, e2)) - br(br(e0, e1), e2) - br(e1, br(e0, e2))


def jacobiator_predicted(s: CourantStructure, xi0: VectorField, xi1: VectorField,
                         xi2: VectorField) -> DiffForm:
    """Triple contraction of (dH - half the curvature self-pairing)."""
    ctx = s.context
    defect = ext_d(s.H)
    if s.rank:
        defect = defect - mat_wedge_pair(s.curv, s.curv) * ctx.const(Fraction(1, 2))
    return interior(xi2, interior(xi1, interior(xi0, defect)))


def twist_by_H(s: CourantStructure, extra: DiffForm) -> CourantStructure:
    if not extra.is_homogeneous(3):
        raise ValueError("twist requires a 3-form")
    return CourantStructure(s.context, s.H + extra, s.conn)


def exp_B(s: CourantStructure, morphism: TwoFormMorphism, e: CourantElement) -> CourantElement:
    s.check_element(e)
    return e._like(e.alpha + interior(e.xi, morphism.B), e.a, e.xi)


# -- connection changes ---------------------------------------------------------


def cs_form(conn: Connection, conn_prime: Connection) -> DiffForm:
    """The transgression 3-form between two connections.

    Built as <c ^ A> + (1/2)<DA ^ A> + (1/6)<[A,A] ^ A> with A the
    connection difference and D the covariant derivative of the first
    connection; its exterior derivative is the difference of the curvature
    self-pairings (checked in tests).
    """
    if conn.chart != conn_prime.chart:
        raise ChartMismatch("connections on different charts")
    ctx = conn.chart.context
    A = conn_prime.omega - conn.omega
    c = curvature(conn)
    term1 = mat_wedge_pair(c, A)
    term2 = mat_wedge_pair(covariant_d(conn.omega, A), A) * ctx.const(Fraction(1, 2))
    term3 = mat_wedge_pair(mat_bracket(A, A), A) * ctx.const(Fraction(1, 6))
    return term1 + term2 + term3


def _phi_map(target: Connection, source: Connection, e: CourantElement) -> CourantElement:
    """Move an element presented over `source` to the presentation over
    `target`; A is source minus target."""
    ctx = target.chart.context
    A = source.omega - target.omega
    a_xi = mat_interior(e.xi, A)
    n = len(ctx.variables)
    coeffs = []
    for m in range(n):
        Am = mat_interior(VectorField.basis(ctx, m), A)
        val = ctx.zero
        if e.a is not None:
            val = val + mat_wedge_pair(e.a, Am).scalar()
        val = val + mat_wedge_pair(a_xi, Am).scalar() * ctx.const(Fraction(1, 2))
        coeffs.append(-val)
    new_alpha = e.alpha + to_one_form(ctx, coeffs)
    new_a = a_xi if e.a is None else e.a + a_xi
    return CourantElement(ctx, new_alpha, new_a, e.xi)


def phi_change(s: CourantStructure, conn_prime: Connection, e: CourantElement) -> CourantElement:
    """The connection-change morphism into ``s`` (which holds the target
    connection); the source presentation uses ``conn_prime`` and the
    matching shifted 3-form."""
    if s.rank == 0 or s.conn is None:
        raise StructureMismatch("connection change needs a positive-rank structure")
    if conn_prime.chart != s.conn.chart:
        raise ChartMismatch("connections on different charts")
    s.check_element(e)
    return _phi_map(s.conn, conn_prime, e)


def triple_composition(conn: Connection, conn_prime: Connection,
                       conn_second: Connection) -> TwoFormMorphism:
    """Compose the three connection-change maps around the loop
    base -> second -> prime -> base and extract the resulting 2-form shear.

    The composite fixes the form and matrix summands of every generator and
    shears the coordinate fields; the extracted B equals half the pairing
    of the two successive connection increments,

        B = (1/2) <A ^ A'>,   A = prime - base,  A' = second - prime,

    equivalently -(1/2)<A' ^ A>.  Both equalities are asserted.
    """
    chart = conn.chart
    if conn_prime.chart != chart or conn_second.chart != chart:
        raise ChartMismatch("connections on different charts")
    ctx = chart.context
    rank = chart.rank
    n = len(ctx.variables)

    def loop(e: CourantElement) -> CourantElement:
        e = _phi_map(conn_second, conn, e)          # base presentation -> second
        e = _phi_map(conn_prime, conn_second, e)    # second -> prime
        return _phi_map(conn, conn_prime, e)        # prime -> base

    zero_a = MatrixForm.zero(ctx, rank, 0)
    zvf = _zero_vf(ctx)
    # matrix units and coordinate differentials must be fixed
    for p in range(rank):
        for q in range(rank):
            gen = CourantElement(ctx, DiffForm.zero(ctx), _unit_matrix(ctx, rank, p, q), zvf)
            if loop(gen) != gen:
                raise CompositionNotExpB("composite moves a matrix unit")
    for m in range(n):
        gen = CourantElement(ctx, DiffForm.dx(ctx, m), zero_a, zvf)
        if loop(gen) != gen:
            raise CompositionNotExpB("composite moves a coordinate differential")
    # coordinate fields determine B
    slices = []
    for k in range(n):
        gen = CourantElement(ctx, DiffForm.zero(ctx), zero_a, VectorField.basis(ctx, k))
        img = loop(gen)
        if img.xi != gen.xi or not img.a.is_zero():
            raise CompositionNotExpB("composite is not a pure form shear on fields")
        slices.append(img.alpha)
    B = DiffForm.zero(ctx)
    for k in range(n):
        B = B + wedge(DiffForm.dx(ctx, k), slices[k]) * ctx.const(Fraction(1, 2))
    # cross-check against the exponential on the same generators
    morphism = TwoFormMorphism(B)
    for k in range(n):
        gen = CourantElement(ctx, DiffForm.zero(ctx), zero_a, VectorField.basis(ctx, k))
        if loop(gen) != exp_B_raw(morphism, gen):
            raise CompositionNotExpB("shear does not reproduce the composite")
    A1 = conn_prime.omega - conn.omega
    A2 = conn_second.omega - conn_prime.omega
    expected = mat_wedge_pair(A1, A2) * ctx.const(Fraction(1, 2))
    assert B == expected, "loop shear differs from half the increment pairing"
    assert B == mat_wedge_pair(A2, A1) * ctx.const(Fraction(-1, 2))
    return morphism


def exp_B_raw(morphism: TwoFormMorphism, e: CourantElement) -> CourantElement:
    return e._like(e.alpha + interior(e.xi, morphism.B), e.a, e.xi)


# -- curvature of lifts -----------------------------------------------------------


def curvature_courant(s: CourantStructure, lift: Sequence[CourantElement]):
    """Curvature data of a lift given by its images on coordinate fields.

    Returns (matrix curvature, relative curvature 3-form); the matrix part
    is None at rank 0.  The lift must be an anchor splitting on coordinate
    fields and isotropic.
    """
    ctx = s.context
    n = len(ctx.variables)
    if len(lift) != n:
        raise NotLinear("expected one image per coordinate field")
    for k, e in enumerate(lift):
        s.check_element(e)
        if e.xi != VectorField.basis(ctx, k):
            raise NotLinear("image %d fails to split the anchor" % (k,))
    for i in range(n):
        for j in range(i, n):
            if not courant_pairing(s, lift[i], lift[j]).is_zero():
                raise NotIsotropic("images %d and %d pair nontrivially" % (i, j))

    F = {}
    for i in range(n):
        for j in range(n):
            F[(i, j)] = dorfman_bracket(s, lift[i], lift[j])

    c_g = None
    if s.rank:
        grid = [[DiffForm.zero(ctx) for _ in range(s.rank)] for _ in range(s.rank)]
        for i in range(n):
            for j in range(i + 1, n):
                two = DiffForm(ctx, {(i, j): ctx.one})
                for p in range(s.rank):
                    for q in range(s.rank):
                        coeff = F[(i, j)].a.entries[p][q].scalar()
                        if not coeff.is_zero():
                            grid[p][q] = grid[p][q] + two * coeff
        c_g = MatrixForm(ctx, s.rank, 2, grid)

    # total skewness of the relative curvature
    T = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                T[(i, j, k)] = courant_pairing(s, F[(i, j)], lift[k])
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if T[(i, j, k)] != -T[(j, i, k)] or T[(i, j, k)] != -T[(i, k, j)]:
                    raise NotIsotropic("relative curvature is not totally skew at (%d,%d,%d)" % (i, j, k))
    c_rel = DiffForm(ctx, {(i, j, k): T[(i, j, k)]
                           for i in range(n) for j in range(i + 1, n) for k in range(j + 1, n)})
    return c_g, c_rel


def canonical_lift(s: CourantStructure) -> list[CourantElement]:
    ctx = s.context
    return [s.element(xi=VectorField.basis(ctx, k)) for k in range(len(ctx.variables))]


def isotropize(s: CourantStructure, section: Sequence[CourantElement]) -> list[CourantElement]:
    """Correct a function-linear anchor splitting to an isotropic one by
    subtracting half the self-pairing as a form shift."""
    ctx = s.context
    n = len(ctx.variables)
    if len(section) != n:
        raise NotLinear("expected one image per coordinate field")
    for k, e in enumerate(section):
        s.check_element(e)
        if e.xi != VectorField.basis(ctx, k):
            raise NotLinear("image %d fails to split the anchor" % (k,))
    out = []
    for k in range(n):
        coeffs = [courant_pairing(s, section[k], section[l]) * ctx.const(Fraction(-1, 2))
                  for l in range(n)]
        out.append(section[k] + s.i(to_one_form(ctx, coeffs)))
    return out


# -- Baer arithmetic ---------------------------------------------------------------


def baer_sum(q: CourantStructure, s: CourantStructure,
             samples: Sequence[tuple[CourantElement, CourantElement]] | None = None) -> CourantStructure:
    """Sum of an exact structure and a structure with connection.

    The result keeps s's connection and adds the 3-forms.  When sample
    pairs (exact element, element of s with the same anchor) are provided,
    the element-level pushout map is verified to intertwine brackets and
    pairings.
    """
    if q.context != s.context:
        raise ChartMismatch("structures on different charts")
    if q.rank != 0:
        raise StructureMismatch("first summand must be exact (rank 0)")
    total = CourantStructure(s.context, s.H + q.H, s.conn)
    if samples:
        report = baer_pushout_check(q, s, total, samples)
        if not report.ok:
            raise StructureMismatch("pushout verification failed:\n%r" % (report,))
    return total


def baer_pushout(total: CourantStructure, qe: CourantElement, se: CourantElement) -> CourantElement:
    if qe.xi != se.xi:
        raise StructureMismatch("pair components have different anchors")
    return total.element(alpha=qe.alpha + se.alpha,
                         a=None if total.rank == 0 else se.a, xi=se.xi)


def baer_pushout_check(q: CourantStructure, s: CourantStructure, total: CourantStructure,
                       samples: Sequence[tuple[CourantElement, CourantElement]]) -> CheckReport:
    report = CheckReport()
    for t, (qe1, se1) in enumerate(samples):
        qe2, se2 = samples[(t + 1) % len(samples)]
        p1 = baer_pushout(total, qe1, se1)
        p2 = baer_pushout(total, qe2, se2)
        qb = dorfman_bracket(q, qe1, qe2)
        sb = dorfman_bracket(s, se1, se2)
        ok_b = dorfman_bracket(total, p1, p2) == baer_pushout(total, qb, sb)
        report.add("pushout-bracket[%d]" % t, ok_b)
        lhs = courant_pairing(total, p1, p2)
        rhs = courant_pairing(q, qe1, qe2) + courant_pairing(s, se1, se2)
        report.add("pushout-pairing[%d]" % t, lhs == rhs,
                   "" if lhs == rhs else "lhs=%s rhs=%s" % (lhs, rhs))
    return report


def courant_difference(s2: CourantStructure, s1: CourantStructure) -> CourantStructure:
    """The exact structure Q with s2 isomorphic to Q + s1.

    Representatives are normalized over the first argument's connection;
    the 3-form is the difference corrected by the transgression between
    the connections.
    """
    if s2.context != s1.context:
        raise ChartMismatch("structures on different charts")
    if s2.rank != s1.rank:
        raise PairingMismatch("kernel pairings differ: ranks %d vs %d" % (s2.rank, s1.rank))
    if s2.rank == 0:
        K = s2.H - s1.H
    else:
        K = s2.H - s1.H + cs_form(s2.conn, s1.conn)
    return CourantStructure(s2.context, K, None)


def structures_isomorphic(sa: CourantStructure, sb: CourantStructure) -> bool:
    """Equality of presentations after normalizing over sb's connection."""
    if sa.context != sb.context or sa.rank != sb.rank:
        return False
    if sa.rank == 0:
        return sa.H == sb.H
    return sa.H - cs_form(sb.conn, sa.conn) == sb.H


# -- torsor of twists ---------------------------------------------------------------


def torsor_twist(context: Context,
                 presentation: Sequence[tuple[str, DiffForm, DiffForm]],
                 sample_elements: Sequence[CourantElement]):
    """Assemble the exact structure from a torsor presentation.

    Each presentation item is (label, offset 2-form, curvature 3-form);
    consistency requires the curvatures to differ by the exterior
    derivatives of the offset differences.  Returns the structure built at
    the first label together with a report checking that the labeled
    bracket is independent of the labeling and agrees with the structure's
    own bracket.
    """
    if not presentation:
        raise InconsistentPresentation("empty presentation")
    labels = [p[0] for p in presentation]
    if len(set(labels)) != len(labels):
        raise InconsistentPresentation("duplicate labels")
    offsets = {}
    curvs = {}
    for label, alpha, c in presentation:
        if not alpha.is_homogeneous(2) or not c.is_homogeneous(3):
            raise InconsistentPresentation("wrong degrees for label %r" % (label,))
        offsets[label] = alpha
        curvs[label] = c
    for la in labels:
        for lb in labels:
            if curvs[lb] - curvs[la] != ext_d(offsets[lb] - offsets[la]):
                raise InconsistentPresentation(
                    "labels %r and %r violate curvature/offset compatibility" % (la, lb))

    base = labels[0]
    flat = CourantStructure(context, DiffForm.zero(context), None)
    structure = CourantStructure(context, curvs[base], None)

    def labeled_bracket(s1: str, q1: CourantElement, s2: str, q2: CourantElement):
        # transport the second argument to the first label, then bracket
        # there in the structure twisted by that label's curvature
        shift = structure.i(interior(q2.xi, offsets[s2] - offsets[s1]))
        inner = dorfman_bracket(flat, q1, q2 + shift)
        twist = structure.i(interior(q2.xi, interior(q1.xi, curvs[s1])))
        return s1, inner + twist

    def relabel(s: str, q: CourantElement, to: str):
        return to, q + structure.i(interior(q.xi, offsets[s] - offsets[to]))

    report = CheckReport()
    n = len(sample_elements)
    for t in range(n):
        q1 = sample_elements[t]
        q2 = sample_elements[(t + 1) % n]
        base_val = None
        for la in labels:
            for lb in labels:
                s1, r1 = relabel(base, q1, la)
                s2, r2 = relabel(base, q2, lb)
                lab, val = labeled_bracket(s1, r1, s2, r2)
                _, val0 = relabel(lab, val, base)
                if base_val is None:
                    base_val = val0
                else:
                    report.add("well-defined[%d,%s,%s]" % (t, la, lb), val0 == base_val,
                               "" if val0 == base_val else _diff_witness(val0, base_val))
        direct = dorfman_bracket(structure, q1, q2)
        report.add("base-agreement[%d]" % t, base_val == direct,
                   "" if base_val == direct else _diff_witness(base_val, direct))
    return structure, report
