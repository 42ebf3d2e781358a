"""Exterior calculus over exact rational-function coefficients.

Differential forms are stored sparsely: a mapping from strictly increasing
tuples of variable indices to nonzero coefficients.  Mixed degrees are
allowed in one :class:`DiffForm`; matrix-valued forms are degree-homogeneous
by contract.  All conventions are pinned here once and reused everywhere:

* wedge uses the shuffle sign (no factorial normalisations),
* interior product inserts the vector into the *first* slot,
* evaluation folds interior products left to right, so
  ``evaluate(w, [v1, ..., vp]) = i(vp) ... i(v1) w``,
* the Lie derivative is Cartan's homotopy ``d i + i d``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .ring import (
    Context,
    ContextMismatch,
    ExpressionSyntaxError,
    RatFunc,
    RingError,
    UnknownVariable,
    _ScalarParser,
)


class RankMismatch(RingError):
    """Matrix shapes or ranks are incompatible."""


Index = tuple[int, ...]


def _merge_sign(left: Index, right: Index) -> tuple[Index, int] | None:
    """Merge two increasing index tuples; None if they intersect.

    The sign is (-1) to the number of transpositions needed to sort the
    concatenation, i.e. the number of pairs (i, j) with i in left, j in
    right, i > j.
    """
    if set(left) & set(right):
        return None
    inversions = 0
    for i in left:
        for j in right:
            if i > j:
                inversions += 1
    merged = tuple(sorted(left + right))
    return merged, (-1) ** inversions


class DiffForm:
    """A differential form with rational-function coefficients."""

    __slots__ = ("context", "terms")

    def __init__(self, context: Context, terms: Mapping[Index, RatFunc] | None = None):
        self.context = context
        clean: dict[Index, RatFunc] = {}
        if terms:
            n = len(context.variables)
            for idx, coeff in terms.items():
                idx = tuple(idx)
                if list(idx) != sorted(set(idx)):
                    raise ValueError("index tuple %r is not strictly increasing" % (idx,))
                if idx and (idx[0] < 0 or idx[-1] >= n):
                    raise ValueError("index tuple %r out of range for %d variables" % (idx, n))
                if not isinstance(coeff, RatFunc):
                    coeff = context.const(coeff)
                if coeff.context != context:
                    raise ContextMismatch("coefficient context differs from form context")
                if not coeff.is_zero():
                    clean[idx] = clean[idx] + coeff if idx in clean else coeff
        self.terms = {k: v for k, v in clean.items() if not v.is_zero()}

    # -- constructors --------------------------------------------------

    @staticmethod
    def function(f: RatFunc) -> "DiffForm":
        return DiffForm(f.context, {(): f})

    @staticmethod
    def zero(context: Context) -> "DiffForm":
        return DiffForm(context, {})

    @staticmethod
    def dx(context: Context, i: int) -> "DiffForm":
        return DiffForm(context, {(i,): context.one})

    # -- structure -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set[int]:
        return {len(k) for k in self.terms}

    def component(self, p: int) -> "DiffForm":
        return DiffForm(self.context, {k: v for k, v in self.terms.items() if len(k) == p})

    def is_homogeneous(self, p: int) -> bool:
        return all(len(k) == p for k in self.terms)

    def scalar(self) -> RatFunc:
        """The degree-0 part as a plain function."""
        return self.terms.get((), self.context.zero)

    def coefficient(self, idx: Sequence[int]) -> RatFunc:
        return self.terms.get(tuple(idx), self.context.zero)

    def map_coefficients(self, fn: Callable[[RatFunc], RatFunc]) -> "DiffForm":
        return DiffForm(self.context, {k: fn(v) for k, v in self.terms.items()})

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "DiffForm") -> None:
        if not isinstance(other, DiffForm):
            raise TypeError("expected a DiffForm")
        if other.context != self.context:
            raise ContextMismatch("forms live on different contexts")

    def __add__(self, other: "DiffForm") -> "DiffForm":
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return DiffForm(self.context, out)

    def __sub__(self, other: "DiffForm") -> "DiffForm":
        self._check(other)
        return self + (-other)

    def __neg__(self) -> "DiffForm":
        return DiffForm(self.context, {k: -v for k, v in self.terms.items()})

    def __mul__(self, scalar) -> "DiffForm":
        if isinstance(scalar, DiffForm):
            raise TypeError("use wedge() for form products")
        f = scalar if isinstance(scalar, RatFunc) else self.context.const(scalar)
        return DiffForm(self.context, {k: v * f for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        return self.context == other.context and self.terms == other.terms

    def __hash__(self):
        return hash((self.context.variables, frozenset((k, str(v)) for k, v in self.terms.items())))

    def __str__(self):
        return form_to_literal(self)

    def __repr__(self):
        return "DiffForm(%s)" % (self,)


class VectorField:
    """A derivation of the coordinate ring, given by its components."""

    __slots__ = ("context", "components")

    def __init__(self, context: Context, components: Sequence[RatFunc]):
        if len(components) != len(context.variables):
            raise ValueError("expected %d components" % (len(context.variables),))
        comps = []
        for c in components:
            if not isinstance(c, RatFunc):
                c = context.const(c)
            if c.context != context:
                raise ContextMismatch("component context differs")
            comps.append(c)
        self.context = context
        self.components = tuple(comps)

    @staticmethod
    def basis(context: Context, i: int) -> "VectorField":
        comps = [context.zero] * len(context.variables)
        comps[i] = context.one
        return VectorField(context, comps)

    def apply(self, f: RatFunc) -> RatFunc:
        if f.context != self.context:
            raise ContextMismatch("function lives on a different context")
        acc = self.context.zero
        for i, c in enumerate(self.components):
            if not c.is_zero():
                acc = acc + c * f.diff(self.context.variables[i])
        return acc

    def __add__(self, other: "VectorField") -> "VectorField":
        if other.context != self.context:
            raise ContextMismatch("vector fields on different contexts")
        return VectorField(self.context, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def __neg__(self) -> "VectorField":
        return VectorField(self.context, [-c for c in self.components])

    def __mul__(self, scalar) -> "VectorField":
        f = scalar if isinstance(scalar, RatFunc) else self.context.const(scalar)
        return VectorField(self.context, [c * f for c in self.components])

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.context == other.context and self.components == other.components

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __repr__(self):
        names = self.context.variables
        parts = ["(%s)*D_%s" % (c, names[i]) for i, c in enumerate(self.components) if not c.is_zero()]
        return " + ".join(parts) if parts else "0"


# -- core operations ---------------------------------------------------------


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    a._check(b)
    out: dict[Index, RatFunc] = {}
    for ka, va in a.terms.items():
        for kb, vb in b.terms.items():
            merged = _merge_sign(ka, kb)
            if merged is None:
                continue
            key, sign = merged
            contrib = va * vb if sign > 0 else -(va * vb)
            out[key] = out[key] + contrib if key in out else contrib
    return DiffForm(a.context, out)


def wedge_all(forms: Sequence[DiffForm]) -> DiffForm:
    if not forms:
        raise ValueError("empty wedge")
    acc = forms[0]
    for f in forms[1:]:
        acc = wedge(acc, f)
    return acc


def ext_d(a: DiffForm) -> DiffForm:
    ctx = a.context
    names = ctx.variables
    out: dict[Index, RatFunc] = {}
    for idx, coeff in a.terms.items():
        for k in range(len(names)):
            if k in idx:
                continue
            dcoeff = coeff.diff(names[k])
            if dcoeff.is_zero():
                continue
            pos = sum(1 for i in idx if i < k)
            key = tuple(sorted(idx + (k,)))
            contrib = dcoeff if pos % 2 == 0 else -dcoeff
            out[key] = out[key] + contrib if key in out else contrib
    return DiffForm(ctx, out)


def interior(v: VectorField, a: DiffForm) -> DiffForm:
    if v.context != a.context:
        raise ContextMismatch("vector field and form on different contexts")
    out: dict[Index, RatFunc] = {}
    for idx, coeff in a.terms.items():
        for t, i in enumerate(idx):
            comp = v.components[i]
            if comp.is_zero():
                continue
            key = idx[:t] + idx[t + 1:]
            contrib = coeff * comp
            if t % 2 == 1:
                contrib = -contrib
            out[key] = out[key] + contrib if key in out else contrib
    return DiffForm(a.context, out)


def evaluate(a: DiffForm, vectors: Sequence[VectorField]) -> RatFunc:
    """Evaluate a p-form on p vector fields (first argument inserted first)."""
    acc = a
    for v in vectors:
        acc = interior(v, acc)
    return acc.scalar()


def lie_derivative(v: VectorField, a: DiffForm) -> DiffForm:
    return ext_d(interior(v, a)) + interior(v, ext_d(a))


def vf_bracket(v: VectorField, w: VectorField) -> VectorField:
    if v.context != w.context:
        raise ContextMismatch("vector fields on different contexts")
    comps = [v.apply(wc) - w.apply(vc) for vc, wc in zip(v.components, w.components)]
    return VectorField(v.context, comps)


def to_one_form(ctx: Context, coefficients: Sequence[RatFunc]) -> DiffForm:
    return DiffForm(ctx, {(i,): c for i, c in enumerate(coefficients)})


def d_scalar(f: RatFunc) -> DiffForm:
    return ext_d(DiffForm.function(f))


# -- chart maps --------------------------------------------------------------


class ChartMap:
    """A ring map between coordinate charts, given by variable images.

    ``images[name]`` is the image, in the target chart, of the source
    variable ``name``.  Pullback carries source-chart forms to target-chart
    forms.
    """

    def __init__(self, source: Context, target: Context, images: Mapping[str, RatFunc]):
        self.source = source
        self.target = target
        full: dict[str, RatFunc] = {}
        for name in source.variables:
            if name in images:
                img = images[name]
                if not isinstance(img, RatFunc):
                    img = target.const(img)
                if img.context != target:
                    raise ContextMismatch("image of %r lives off the target context" % (name,))
                full[name] = img
            else:
                # identity default: requires the name to exist in the target
                full[name] = target.var(name)
        extra = [v for v in images if v not in source._index]
        if extra:
            raise UnknownVariable("chart map names unknown variables: %s" % (", ".join(sorted(extra))))
        self.images = full

    @staticmethod
    def identity(ctx: Context) -> "ChartMap":
        return ChartMap(ctx, ctx, {v: ctx.var(v) for v in ctx.variables})

    def apply_scalar(self, f: RatFunc) -> RatFunc:
        if f.context != self.source:
            raise ContextMismatch("function is not on the source chart")
        return f.subs(self.images)

    def compose(self, then: "ChartMap") -> "ChartMap":
        """The composite map: first self, then `then` applied to the images."""
        if self.target != then.source:
            raise ContextMismatch("chart maps do not chain")
        imgs = {v: then.apply_scalar(img) for v, img in self.images.items()}
        return ChartMap(self.source, then.target, imgs)

    def is_identity(self) -> bool:
        if self.source != self.target:
            return False
        return all(img == self.target.var(v) for v, img in self.images.items())

    def __eq__(self, other):
        if not isinstance(other, ChartMap):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self.images == other.images)

    def __repr__(self):
        body = ", ".join("%s -> %s" % (v, self.images[v]) for v in self.source.variables)
        return "ChartMap(%s)" % (body,)


def pullback(phi: ChartMap, a: DiffForm) -> DiffForm:
    """Carry a form on the source chart to the target chart along phi."""
    if a.context != phi.source:
        raise ContextMismatch("form is not on the source chart")
    tgt = phi.target
    diffs = {v: d_scalar(phi.images[v]) for v in phi.source.variables}
    out = DiffForm.zero(tgt)
    names = phi.source.variables
    for idx, coeff in a.terms.items():
        term = DiffForm.function(phi.apply_scalar(coeff))
        for i in idx:
            term = wedge(term, diffs[names[i]])
        out = out + term
    return out


def pushforward_vf(v: VectorField, fwd: ChartMap, bwd: ChartMap) -> VectorField:
    """Carry a vector field along an invertible chart map.

    ``fwd`` sends source functions to the target chart, ``bwd`` is its
    inverse.  Component m of the image is fwd(v(bwd(y_m))).
    """
    if v.context != fwd.source or bwd.target != fwd.source or bwd.source != fwd.target:
        raise ContextMismatch("pushforward needs mutually inverse chart maps")
    comps = []
    for name in fwd.target.variables:
        pre = bwd.images[name]          # y_m written in source coordinates
        comps.append(fwd.apply_scalar(v.apply(pre)))
    return VectorField(fwd.target, comps)


# -- matrix-valued forms -----------------------------------------------------


class MatrixForm:
    """A square matrix of forms, homogeneous of one exterior degree."""

    __slots__ = ("context", "rank", "degree", "entries")

    def __init__(self, context: Context, rank: int, degree: int, entries: Sequence[Sequence[DiffForm]]):
        if rank < 0:
            raise RankMismatch("negative rank")
        if len(entries) != rank or any(len(row) != rank for row in entries):
            raise RankMismatch("expected a %dx%d grid of entries" % (rank, rank))
        grid = []
        for row in entries:
            new_row = []
            for e in row:
                if not isinstance(e, DiffForm):
                    raise TypeError("matrix entries must be DiffForm values")
                if e.context != context:
                    raise ContextMismatch("matrix entry on a different context")
                if not e.is_homogeneous(degree):
                    raise ValueError("entry %s is not homogeneous of degree %d" % (e, degree))
                new_row.append(e)
            grid.append(tuple(new_row))
        self.context = context
        self.rank = rank
        self.degree = degree
        self.entries = tuple(grid)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(context: Context, rank: int, degree: int) -> "MatrixForm":
        z = DiffForm.zero(context)
        return MatrixForm(context, rank, degree, [[z] * rank for _ in range(rank)])

    @staticmethod
    def identity(context: Context, rank: int) -> "MatrixForm":
        z = DiffForm.zero(context)
        one = DiffForm.function(context.one)
        return MatrixForm(context, rank, 0,
                          [[one if i == j else z for j in range(rank)] for i in range(rank)])

    @staticmethod
    def single(context: Context, rank: int, i: int, j: int, form: DiffForm, degree: int | None = None) -> "MatrixForm":
        if degree is None:
            degs = form.degrees()
            if len(degs) > 1:
                raise ValueError("mixed-degree entry needs an explicit degree")
            degree = degs.pop() if degs else 0
        m = [[DiffForm.zero(context) for _ in range(rank)] for _ in range(rank)]
        m[i][j] = form
        return MatrixForm(context, rank, degree, m)

    @staticmethod
    def from_scalars(context: Context, grid: Sequence[Sequence[RatFunc]]) -> "MatrixForm":
        rank = len(grid)
        entries = [[DiffForm.function(v if isinstance(v, RatFunc) else context.const(v)) for v in row] for row in grid]
        return MatrixForm(context, rank, 0, entries)

    # -- structure ---------------------------------------------------------

    def _check(self, other: "MatrixForm") -> None:
        if other.context != self.context:
            raise ContextMismatch("matrices on different contexts")
        if other.rank != self.rank:
            raise RankMismatch("ranks differ: %d vs %d" % (self.rank, other.rank))

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def map_entries(self, fn: Callable[[DiffForm], DiffForm], degree: int | None = None) -> "MatrixForm":
        deg = self.degree if degree is None else degree
        return MatrixForm(self.context, self.rank, deg,
                          [[fn(e) for e in row] for row in self.entries])

    def __add__(self, other: "MatrixForm") -> "MatrixForm":
        self._check(other)
        if other.degree != self.degree and not (self.is_zero() or other.is_zero()):
            raise ValueError("cannot add matrices of degrees %d and %d" % (self.degree, other.degree))
        deg = other.degree if self.is_zero() else self.degree
        return MatrixForm(self.context, self.rank, deg,
                          [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)])

    def __sub__(self, other: "MatrixForm") -> "MatrixForm":
        return self + (-other)

    def __neg__(self) -> "MatrixForm":
        return self.map_entries(lambda e: -e)

    def __mul__(self, scalar) -> "MatrixForm":
        return self.map_entries(lambda e: e * scalar)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, MatrixForm):
            return NotImplemented
        return (self.context == other.context and self.rank == other.rank
                and self.entries == other.entries)

    def matmul(self, other: "MatrixForm") -> "MatrixForm":
        """Entrywise wedge-composition; exterior degrees add."""
        self._check(other)
        r = self.rank
        out = []
        for i in range(r):
            row = []
            for j in range(r):
                acc = DiffForm.zero(self.context)
                for k in range(r):
                    acc = acc + wedge(self.entries[i][k], other.entries[k][j])
                row.append(acc)
            out.append(row)
        return MatrixForm(self.context, r, self.degree + other.degree, out)

    def trace(self) -> DiffForm:
        acc = DiffForm.zero(self.context)
        for i in range(self.rank):
            acc = acc + self.entries[i][i]
        return acc

    def apply(self, vector_of_forms: Sequence[DiffForm]) -> list[DiffForm]:
        if len(vector_of_forms) != self.rank:
            raise RankMismatch("vector length differs from rank")
        out = []
        for i in range(self.rank):
            acc = DiffForm.zero(self.context)
            for j in range(self.rank):
                acc = acc + wedge(self.entries[i][j], vector_of_forms[j])
            out.append(acc)
        return out

    def inverse(self) -> "MatrixForm":
        """Exact inverse of a degree-0 matrix via Gaussian elimination."""
        if self.degree != 0:
            raise ValueError("only degree-0 matrices are invertible")
        grid = [[e.scalar() for e in row] for row in self.entries]
        inv = invert_scalar_matrix(self.context, grid)
        return MatrixForm.from_scalars(self.context, inv)

    def det(self) -> RatFunc:
        if self.degree != 0:
            raise ValueError("determinant needs a degree-0 matrix")
        grid = [[e.scalar() for e in row] for row in self.entries]
        return _det(self.context, grid)

    def __repr__(self):
        rows = "; ".join("[" + ", ".join(str(e) for e in row) + "]" for row in self.entries)
        return "MatrixForm(rank=%d, degree=%d, %s)" % (self.rank, self.degree, rows)


def mat_bracket(a: MatrixForm, b: MatrixForm) -> MatrixForm:
    """Graded commutator of matrix forms."""
    ab = a.matmul(b)
    ba = b.matmul(a)
    if (a.degree * b.degree) % 2 == 1:
        return ab + ba
    return ab - ba


def mat_wedge_pair(a: MatrixForm, b: MatrixForm) -> DiffForm:
    """The invariant pairing: wedge entries and take the matrix trace."""
    a._check(b)
    acc = DiffForm.zero(a.context)
    for i in range(a.rank):
        for j in range(a.rank):
            acc = acc + wedge(a.entries[i][j], b.entries[j][i])
    return acc


def mat_ext_d(a: MatrixForm) -> MatrixForm:
    return a.map_entries(ext_d, degree=a.degree + 1)


def covariant_d(omega: MatrixForm, a: MatrixForm) -> MatrixForm:
    """Entrywise exterior derivative plus the bracket with the connection."""
    if omega.degree != 1:
        raise ValueError("connection matrix must have degree 1")
    return mat_ext_d(a) + mat_bracket(omega, a)


def curvature_matrix(omega: MatrixForm) -> MatrixForm:
    """dw + (1/2)[w, w] for a degree-1 connection matrix."""
    if omega.degree != 1:
        raise ValueError("connection matrix must have degree 1")
    half = Fraction(1, 2)
    return mat_ext_d(omega) + mat_bracket(omega, omega) * omega.context.const(half)


def mat_pullback(phi: ChartMap, a: MatrixForm) -> MatrixForm:
    return MatrixForm(phi.target, a.rank, a.degree,
                      [[pullback(phi, e) for e in row] for row in a.entries])


def mat_interior(v: VectorField, a: MatrixForm) -> MatrixForm:
    if a.degree == 0:
        return MatrixForm.zero(a.context, a.rank, 0)
    return a.map_entries(lambda e: interior(v, e), degree=a.degree - 1)


def mat_conjugate(g: MatrixForm, a: MatrixForm) -> MatrixForm:
    """g^-1 * a * g for an invertible degree-0 matrix g."""
    return g.inverse().matmul(a).matmul(g)


def invert_scalar_matrix(ctx: Context, grid: Sequence[Sequence[RatFunc]]) -> list[list[RatFunc]]:
    """Exact inverse over the rational-function field."""
    r = len(grid)
    aug = [[grid[i][j] for j in range(r)] + [ctx.one if i == j else ctx.zero for j in range(r)]
           for i in range(r)]
    for col in range(r):
        pivot = None
        for row in range(col, r):
            if not aug[row][col].is_zero():
                pivot = row
                break
        if pivot is None:
            raise ValueError("matrix is not invertible")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = ctx.one / aug[col][col]
        aug[col] = [e * inv for e in aug[col]]
        for row in range(r):
            if row == col or aug[row][col].is_zero():
                continue
            factor = aug[row][col]
            aug[row] = [e - factor * p for e, p in zip(aug[row], aug[col])]
    return [row[r:] for row in aug]


def _det(ctx: Context, grid: Sequence[Sequence[RatFunc]]) -> RatFunc:
    r = len(grid)
    mat = [list(row) for row in grid]
    det = ctx.one
    for col in range(r):
        pivot = None
        for row in range(col, r):
            if not mat[row][col].is_zero():
                pivot = row
                break
        if pivot is None:
            return ctx.zero
        if pivot != col:
            mat[col], mat[pivot] = mat[pivot], mat[col]
            det = -det
        det = det * mat[col][col]
        inv = ctx.one / mat[col][col]
        for row in range(col + 1, r):
            if mat[row][col].is_zero():
                continue
            factor = mat[row][col] * inv
            mat[row] = [e - factor * p for e, p in zip(mat[row], mat[col])]
    return det


# -- polynomial homotopy primitive -------------------------------------------


def euler_interior(a: DiffForm) -> DiffForm:
    """Interior product with the radial field sum_i x_i D_i."""
    ctx = a.context
    field = VectorField(ctx, [ctx.var(v) for v in ctx.variables])
    return interior(field, a)


def poincare_primitive(a: DiffForm) -> DiffForm:
    """An exact primitive of a closed polynomial form of positive degree.

    Works term by term: a monomial coefficient of polynomial degree m in a
    p-form contributes its radial contraction divided by m + p.  The result
    k satisfies d(k) = a whenever a is closed; this is asserted.
    """
    ctx = a.context
    out = DiffForm.zero(ctx)
    for idx, coeff in a.terms.items():
        p = len(idx)
        if p == 0:
            if not coeff.is_zero():
                raise ValueError("form has a degree-0 part; no primitive exists")
            continue
        if not coeff.is_polynomial():
            raise ValueError("coefficient %s is not polynomial" % (coeff,))
        piece = DiffForm(ctx, {idx: ctx.one})
        for monom, q in coeff.poly_terms():
            m = sum(monom)
            mono = ctx.const(q)
            for i, e in enumerate(monom):
                if e:
                    mono = mono * ctx.var(ctx.variables[i]) ** e
            scaled = euler_interior(piece * mono) * ctx.const(Fraction(1, m + p))
            out = out + scaled
    if ext_d(out) != a:
        raise ValueError("form is not closed; homotopy primitive failed")
    return out


# -- form literals ------------------------------------------------------------


def form_to_literal(a: DiffForm) -> str:
    """Canonical text for a form; parses back via parse_form."""
    if not a.terms:
        return "0"
    names = a.context.variables
    keys = sorted(a.terms, key=lambda k: (len(k), k))
    chunks = []
    for k in keys:
        coeff = "(%s)" % (a.terms[k],)
        if not k:
            chunks.append(coeff)
        else:
            chain = "^".join("d(%s)" % (names[i],) for i in k)
            chunks.append("%s*%s" % (coeff, chain))
    return " + ".join(chunks)


class _FormParser(_ScalarParser):
    """Extends the scalar grammar with d(x) factors; '^' wedges d-chains."""

    def _power(self):
        base = self._atom()
        while True:
            kind, val = self._peek()
            if kind == "op" and val == "^":
                save = self.pos
                self.pos += 1
                nkind, nval = self._peek()
                if nkind == "int":
                    self.pos += 1
                    if isinstance(base, DiffForm):
                        base = _as_scalar(base, self.text) ** int(nval)
                    else:
                        base = base ** int(nval)
                elif nkind == "name" and nval == "d":
                    rhs = self._atom()
                    base = _wedge_any(self.ctx, base, rhs)
                else:
                    self.pos = save
                    return base
            else:
                return base

    def _term(self):
        value = self._unary()
        while True:
            kind, val = self._peek()
            if kind == "op" and val in "*/":
                self.pos += 1
                rhs = self._unary()
                if val == "*":
                    value = _wedge_any(self.ctx, value, rhs)
                else:
                    value = _divide_any(self.ctx, value, rhs, self.text)
            else:
                return value

    def _expr(self):
        value = self._unary_start()
        while True:
            kind, val = self._peek()
            if kind == "op" and val in "+-":
                self.pos += 1
                rhs = self._term()
                value = _add_any(self.ctx, value, rhs, val == "-")
            else:
                return value

    def _unary_start(self):
        return self._term()

    def _unary(self):
        kind, val = self._peek()
        if kind == "op" and val == "-":
            self.pos += 1
            inner = self._unary()
            return -inner
        if kind == "op" and val == "+":
            self.pos += 1
            return self._unary()
        return self._power()

    def _atom(self):
        kind, val = self._peek()
        if kind == "name" and val == "d":
            nkind, nval = self.toks[self.pos + 1] if self.pos + 1 < len(self.toks) else (None, None)
            if nkind == "op" and nval == "(":
                self.pos += 2
                vkind, vval = self._next()
                if vkind != "name":
                    raise ExpressionSyntaxError("expected a variable inside d(...) in %r" % (self.text,))
                self._expect_op(")")
                return DiffForm.dx(self.ctx, self.ctx.index(vval))
        return super()._atom()


def _as_scalar(v, text) -> RatFunc:
    if isinstance(v, DiffForm):
        if v.degrees() - {0}:
            raise ExpressionSyntaxError("expected a scalar value in %r" % (text,))
        return v.scalar()
    return v


def _lift(ctx: Context, v) -> DiffForm:
    return v if isinstance(v, DiffForm) else DiffForm.function(v)


def _wedge_any(ctx, a, b):
    if isinstance(a, DiffForm) or isinstance(b, DiffForm):
        return wedge(_lift(ctx, a), _lift(ctx, b))
    return a * b


def _divide_any(ctx, a, b, text):
    if isinstance(b, DiffForm):
        b = _as_scalar(b, text)
    if isinstance(a, DiffForm):
        return a * (ctx.one / b)
    return a / b


def _add_any(ctx, a, b, subtract):
    if isinstance(a, DiffForm) or isinstance(b, DiffForm):
        a = _lift(ctx, a)
        b = _lift(ctx, b)
    return a - b if subtract else a + b


def parse_form(ctx: Context, text: str) -> DiffForm:
    """Parse a form literal like ``(x2/x1)*d(x1)^d(x3) + (-1)*d(x2)``."""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionSyntaxError("empty form literal")
    value = _FormParser(ctx, text).parse()
    return _lift(ctx, value)


def parse_matrix_form(ctx: Context, rows: Sequence[Sequence[str]], degree: int) -> MatrixForm:
    entries = [[parse_form(ctx, cell) for cell in row] for row in rows]
    return MatrixForm(ctx, len(rows), degree, entries)
