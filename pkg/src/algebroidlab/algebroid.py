"""Chart-local transitive Lie algebroids of gauge type.

The model is gl_r-valued: an element is a pair (m, xi) of a degree-0 matrix
and a vector field, the bracket differentiates the matrix parts along the
anchors, and the invariant pairing on the kernel is the matrix trace.  On
top of this sit connections (degree-1 matrices), their curvature, and the
trace-dual central extension of the kernel whose bracket produces the
1-form cocycle used by the Courant constructions.
"""

from __future__ import annotations

from typing import Sequence

from .cartan import (
    DiffForm,
    MatrixForm,
    VectorField,
    curvature_matrix,
    mat_interior,
    mat_wedge_pair,
    to_one_form,
    vf_bracket,
)
from .checks import CheckReport
from .ring import Context, RingError


class ChartMismatch(RingError):
    """Elements belong to different Atiyah charts."""


class ReportsViolation(RingError):
    """An identity that must hold exactly was violated."""


class AtiyahChart:
    """A trivialized rank-r gauge algebroid over a coordinate chart."""

    def __init__(self, context: Context, rank: int):
        if rank < 1:
            raise ValueError("rank must be at least 1")
        self.context = context
        self.rank = rank

    def __eq__(self, other):
        return (isinstance(other, AtiyahChart)
                and self.context == other.context and self.rank == other.rank)

    def __hash__(self):
        return hash((self.context.variables, self.rank))

    def __repr__(self):
        return "AtiyahChart(rank=%d, %r)" % (self.rank, self.context)

    def element(self, m: MatrixForm | None = None, xi: VectorField | None = None) -> "AlgElement":
        if m is None:
            m = MatrixForm.zero(self.context, self.rank, 0)
        if xi is None:
            xi = VectorField(self.context, [self.context.zero] * len(self.context.variables))
        return AlgElement(self, m, xi)


class AlgElement:
    """A pair (matrix, vector field); the vector field is the anchor image."""

    __slots__ = ("chart", "m", "xi")

    def __init__(self, chart: AtiyahChart, m: MatrixForm, xi: VectorField):
        if m.context != chart.context or xi.context != chart.context:
            raise ChartMismatch("element parts live off the chart")
        if m.rank != chart.rank:
            raise ChartMismatch("matrix rank differs from chart rank")
        if m.degree != 0:
            raise ValueError("matrix part must have degree 0")
        self.chart = chart
        self.m = m
        self.xi = xi

    def __add__(self, other: "AlgElement") -> "AlgElement":
        _same_chart(self, other)
        return AlgElement(self.chart, self.m + other.m, self.xi + other.xi)

    def __sub__(self, other: "AlgElement") -> "AlgElement":
        _same_chart(self, other)
        return AlgElement(self.chart, self.m - other.m, self.xi - other.xi)

    def __neg__(self) -> "AlgElement":
        return AlgElement(self.chart, -self.m, -self.xi)

    def __mul__(self, scalar) -> "AlgElement":
        return AlgElement(self.chart, self.m * scalar, self.xi * scalar)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, AlgElement):
            return NotImplemented
        return self.chart == other.chart and self.m == other.m and self.xi == other.xi

    def __repr__(self):
        return "AlgElement(m=%r, xi=%r)" % (self.m, self.xi)


def _same_chart(e1, e2) -> None:
    if e1.chart != e2.chart:
        raise ChartMismatch("elements on different charts")


def vf_on_matrix(xi: VectorField, m: MatrixForm) -> MatrixForm:
    """Apply a vector field entrywise to a degree-0 matrix."""
    return m.map_entries(lambda e: DiffForm.function(xi.apply(e.scalar())))


def atiyah_bracket(e1: AlgElement, e2: AlgElement) -> AlgElement:
    _same_chart(e1, e2)
    m = mat_commutator(e1.m, e2.m) + vf_on_matrix(e1.xi, e2.m) - vf_on_matrix(e2.xi, e1.m)
    return AlgElement(e1.chart, m, vf_bracket(e1.xi, e2.xi))


def mat_commutator(a: MatrixForm, b: MatrixForm) -> MatrixForm:
    return a.matmul(b) - b.matmul(a)


def anchor(e: AlgElement) -> VectorField:
    return e.xi


def kernel_pairing(a: MatrixForm, b: MatrixForm):
    """Trace pairing on the gauge kernel."""
    return mat_wedge_pair(a, b).scalar()


class Connection:
    """A splitting of the anchor, stored as its degree-1 matrix."""

    def __init__(self, chart: AtiyahChart, omega: MatrixForm):
        if omega.context != chart.context:
            raise ChartMismatch("connection matrix lives off the chart")
        if omega.rank != chart.rank:
            raise ChartMismatch("connection rank differs from chart rank")
        if omega.degree != 1:
            raise ValueError("connection matrix must have degree 1")
        self.chart = chart
        self.omega = omega

    @staticmethod
    def flat(chart: AtiyahChart) -> "Connection":
        return Connection(chart, MatrixForm.zero(chart.context, chart.rank, 1))

    def nabla(self, xi: VectorField) -> AlgElement:
        return AlgElement(self.chart, mat_interior(xi, self.omega), xi)

    def __eq__(self, other):
        if not isinstance(other, Connection):
            return NotImplemented
        return self.chart == other.chart and self.omega == other.omega

    def __repr__(self):
        return "Connection(%r)" % (self.omega,)


def curvature(conn: Connection) -> MatrixForm:
    """The degree-2 matrix d(omega) + (1/2)[omega, omega]."""
    return curvature_matrix(conn.omega)


def pairing_invariance_check(chart: AtiyahChart, samples: Sequence[tuple[AlgElement, MatrixForm, MatrixForm]]) -> CheckReport:
    """Assert invariance of the trace pairing under the adjoint action.

    Each sample is (a, b, c) with a an AlgElement and b, c kernel elements;
    the identity checked is pi(a)<b,c> = <[a,b],c> + <b,[a,c]>.
    """
    report = CheckReport()
    for k, (a, b, c) in enumerate(samples):
        kb = AlgElement(chart, b, _zero_vf(chart))
        kc = AlgElement(chart, c, _zero_vf(chart))
        lhs = a.xi.apply(kernel_pairing(b, c))
        rhs = (kernel_pairing(atiyah_bracket(a, kb).m, c)
               + kernel_pairing(b, atiyah_bracket(a, kc).m))
        report.add("pairing-invariance[%d]" % k, lhs == rhs,
                   "" if lhs == rhs else "lhs=%s rhs=%s" % (lhs, rhs))
    if not report.ok:
        raise ReportsViolation("trace pairing invariance failed:\n%r" % (report,))
    return report


def _zero_vf(chart: AtiyahChart) -> VectorField:
    return VectorField(chart.context, [chart.context.zero] * len(chart.context.variables))


class GhatElement:
    """An element of the trace-dual extension of the gauge kernel.

    The functional on algebroid elements is stored concretely as the pair
    (trace part, 1-form part): it sends (m, xi) to Tr(tmat * m) + <oneform, xi>.
    The trace part must agree with the kernel element b (the fiber-product
    compatibility), which makes the Omega^1 summand the true kernel of the
    projection to the gauge part.
    """

    __slots__ = ("chart", "tmat", "oneform", "b")

    def __init__(self, chart: AtiyahChart, tmat: MatrixForm, oneform: DiffForm, b: MatrixForm):
        ctx = chart.context
        if tmat.context != ctx or oneform.context != ctx or b.context != ctx:
            raise ChartMismatch("element parts live off the chart")
        if tmat.rank != chart.rank or b.rank != chart.rank:
            raise ChartMismatch("matrix rank differs from chart rank")
        if not oneform.is_homogeneous(1):
            raise ValueError("the form part must be a 1-form")
        if tmat != b:
            raise ValueError("functional does not restrict to Tr(b . -) on the kernel")
        self.chart = chart
        self.tmat = tmat
        self.oneform = oneform
        self.b = b

    @staticmethod
    def from_parts(chart: AtiyahChart, b: MatrixForm, oneform: DiffForm) -> "GhatElement":
        return GhatElement(chart, b, oneform, b)

    def functional(self, e: AlgElement):
        """Evaluate the stored functional on an algebroid element."""
        from .cartan import interior
        tr = kernel_pairing(self.tmat, e.m)
        return tr + interior(e.xi, self.oneform).scalar()

    def __add__(self, other: "GhatElement") -> "GhatElement":
        _same_chart(self, other)
        return GhatElement(self.chart, self.tmat + other.tmat,
                           self.oneform + other.oneform, self.b + other.b)

    def __sub__(self, other: "GhatElement") -> "GhatElement":
        _same_chart(self, other)
        return GhatElement(self.chart, self.tmat - other.tmat,
                           self.oneform - other.oneform, self.b - other.b)

    def __eq__(self, other):
        if not isinstance(other, GhatElement):
            return NotImplemented
        return (self.chart == other.chart and self.tmat == other.tmat
                and self.oneform == other.oneform and self.b == other.b)

    def __repr__(self):
        return "GhatElement(b=%r, oneform=%r)" % (self.b, self.oneform)


def ghat_bracket(g1: GhatElement, g2: GhatElement) -> GhatElement:
    """Bracket on the trace-dual extension.

    The result's functional sends e to <[e, b1], b2>; on the kernel that is
    the trace against [b1, b2], and the 1-form part records the derivative
    action of the anchor on b1 paired with b2.
    """
    _same_chart(g1, g2)
    chart = g1.chart
    ctx = chart.context
    lie = mat_commutator(g1.b, g2.b)
    coeffs = []
    for name in ctx.variables:
        dvf = VectorField.basis(ctx, ctx.index(name))
        coeffs.append(kernel_pairing(vf_on_matrix(dvf, g1.b), g2.b))
    return GhatElement(chart, lie, to_one_form(ctx, coeffs), lie)


def leibniz_cocycle(conn: Connection, a: MatrixForm, b: MatrixForm) -> DiffForm:
    """The 1-form whose contraction by xi is <[omega(xi), a], b>."""
    chart = conn.chart
    ctx = chart.context
    if a.context != ctx or b.context != ctx:
        raise ChartMismatch("kernel elements live off the chart")
    coeffs = []
    for name in ctx.variables:
        dvf = VectorField.basis(ctx, ctx.index(name))
        omega_k = mat_interior(dvf, conn.omega)
        coeffs.append(kernel_pairing(mat_commutator(omega_k, a), b))
    return to_one_form(ctx, coeffs)
