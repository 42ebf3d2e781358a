import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from algebroidlab.ring import Context, ContextMismatch
from algebroidlab.cartan import (
    ChartMap,
    DiffForm,
    MatrixForm,
    RankMismatch,
    VectorField,
    covariant_d,
    curvature_matrix,
    d_scalar,
    evaluate,
    ext_d,
    form_to_literal,
    interior,
    invert_scalar_matrix,
    lie_derivative,
    mat_bracket,
    mat_ext_d,
    mat_pullback,
    mat_wedge_pair,
    parse_form,
    poincare_primitive,
    pullback,
    pushforward_vf,
    vf_bracket,
    wedge,
)

CTX = Context(["x1", "x2", "x3", "x4"])
X = CTX.vars()
DX = [DiffForm.dx(CTX, i) for i in range(4)]
DD = [VectorField.basis(CTX, i) for i in range(4)]


def rand_poly(rng, ctx=CTX, deg=2, terms=3):
    acc = ctx.const(rng.randint(-2, 2))
    gens = ctx.vars()
    for _ in range(terms):
        t = ctx.const(rng.randint(-3, 3))
        budget = deg
        for g in gens:
            e = rng.randint(0, budget)
            budget -= e
            t = t * g ** e
        acc = acc + t
    return acc


def rand_form(rng, degree, ctx=CTX, terms=2):
    n = len(ctx.variables)
    out = DiffForm.zero(ctx)
    idxs = [tuple(sorted(c)) for c in _combos(n, degree)]
    for _ in range(terms):
        idx = idxs[rng.randrange(len(idxs))]
        out = out + DiffForm(ctx, {idx: rand_poly(rng, ctx)})
    return out


def _combos(n, k, start=0):
    if k == 0:
        return [()]
    return [(i,) + rest for i in range(start, n) for rest in _combos(n, k - 1, i + 1)]


def rand_vf(rng, ctx=CTX):
    return VectorField(ctx, [rand_poly(rng, ctx, deg=1, terms=2) for _ in ctx.variables])


def rand_matrix(rng, degree, rank=2, ctx=CTX):
    return MatrixForm(ctx, rank, degree,
                      [[rand_form(rng, degree, ctx) for _ in range(rank)] for _ in range(rank)])


# -- wedge / evaluation conventions -------------------------------------------


def test_wedge_basics():
    assert wedge(DX[0], DX[1]) == -wedge(DX[1], DX[0])
    assert wedge(DX[0], DX[0]).is_zero()
    w = wedge(DX[0], DX[1])
    assert evaluate(w, [DD[0], DD[1]]) == CTX.one
    assert evaluate(w, [DD[1], DD[0]]) == -CTX.one


def test_interior_first_slot():
    w = wedge(DX[0], DX[1])
    assert interior(DD[0], w) == DX[1]
    assert interior(DD[1], w) == -DX[0]


def test_triple_contraction_order():
    h = wedge(wedge(DX[1], DX[2]), DX[3]) * X[0]  # x1 dx2^dx3^dx4
    # inserting D2 then D3 leaves x1 dx4
    res = interior(DD[2], interior(DD[1], h))
    assert res == DiffForm(CTX, {(3,): X[0]})
    assert evaluate(h, [DD[1], DD[2], DD[3]]) == X[0]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 2), st.integers(1, 2))
def test_wedge_graded_commutativity(seed, p, q):
    rng = random.Random(seed)
    a = rand_form(rng, p)
    b = rand_form(rng, q)
    sign = (-1) ** (p * q)
    assert wedge(a, b) == wedge(b, a) * CTX.const(sign)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_wedge_associative(seed):
    rng = random.Random(seed)
    a, b, c = rand_form(rng, 1), rand_form(rng, 1), rand_form(rng, 2)
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


# -- exterior derivative -------------------------------------------------------


def test_ext_d_example():
    f = X[0] ** 2 * X[1]
    df = ext_d(DiffForm.function(f))
    assert df == DiffForm(CTX, {(0,): 2 * X[0] * X[1], (1,): X[0] ** 2})


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 2))
def test_d_squared_zero(seed, p):
    rng = random.Random(seed)
    assert ext_d(ext_d(rand_form(rng, p))).is_zero()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 2), st.integers(1, 2))
def test_d_leibniz(seed, p, q):
    rng = random.Random(seed)
    a = rand_form(rng, p)
    b = rand_form(rng, q)
    lhs = ext_d(wedge(a, b))
    rhs = wedge(ext_d(a), b) + wedge(a, ext_d(b)) * CTX.const((-1) ** p)
    assert lhs == rhs


def test_d_on_vector_fields_formula():
    rng = random.Random(7)
    for _ in range(10):
        w = rand_form(rng, 1)
        v1, v2 = rand_vf(rng), rand_vf(rng)
        lhs = evaluate(ext_d(w), [v1, v2])
        rhs = v1.apply(evaluate(w, [v2])) - v2.apply(evaluate(w, [v1])) - evaluate(w, [vf_bracket(v1, v2)])
        assert lhs == rhs


# -- Lie calculus ---------------------------------------------------------------


def test_vf_bracket_example():
    v = X[0] * DD[1]
    w = X[1] * DD[0]
    assert vf_bracket(v, w) == X[0] * DD[0] - X[1] * DD[1]


def test_vf_bracket_jacobi():
    rng = random.Random(3)
    for _ in range(5):
        a, b, c = rand_vf(rng), rand_vf(rng), rand_vf(rng)
        lhs = vf_bracket(a, vf_bracket(b, c))
        rhs = vf_bracket(vf_bracket(a, b), c) + vf_bracket(b, vf_bracket(a, c))
        assert lhs == rhs


def test_lie_derivative_rules():
    rng = random.Random(11)
    for _ in range(6):
        v = rand_vf(rng)
        f = rand_poly(rng)
        g = rand_poly(rng)
        assert lie_derivative(v, DiffForm.function(f)).scalar() == v.apply(f)
        assert lie_derivative(v, d_scalar(g)) == d_scalar(v.apply(g))
        a, b = rand_form(rng, 1), rand_form(rng, 1)
        assert lie_derivative(v, wedge(a, b)) == wedge(lie_derivative(v, a), b) + wedge(a, lie_derivative(v, b))


def test_lie_bracket_compatibility():
    rng = random.Random(13)
    for _ in range(4):
        v, w = rand_vf(rng), rand_vf(rng)
        a = rand_form(rng, 2)
        lhs = lie_derivative(v, lie_derivative(w, a)) - lie_derivative(w, lie_derivative(v, a))
        assert lhs == lie_derivative(vf_bracket(v, w), a)


# -- chart maps and pullbacks ----------------------------------------------------


def test_pullback_dlog_example():
    src = Context(["x1"])
    tgt = Context(["x1", "x2"])
    phi = ChartMap(src, tgt, {"x1": tgt.var("x1") * tgt.var("x2")})
    a = DiffForm(src, {(0,): 1 / src.var("x1")})
    image = pullback(phi, a)
    t1, t2 = tgt.var("x1"), tgt.var("x2")
    assert image == DiffForm(tgt, {(0,): 1 / t1, (1,): 1 / t2})


def test_pullback_commutes_with_d():
    rng = random.Random(5)
    tgt = Context(["y1", "y2", "y3", "y4"])
    phi = ChartMap(CTX, tgt, {
        "x1": tgt.var("y1") + tgt.var("y2") ** 2,
        "x2": tgt.var("y2"),
        "x3": tgt.var("y3") * tgt.var("y1") + 1,
        "x4": tgt.var("y4"),
    })
    for p in (0, 1, 2):
        a = rand_form(rng, p)
        assert pullback(phi, ext_d(a)) == ext_d(pullback(phi, a))
        b = rand_form(rng, 1)
        assert pullback(phi, wedge(a, b)) == wedge(pullback(phi, a), pullback(phi, b))


def test_chart_map_compose_and_identity():
    phi = ChartMap(CTX, CTX, {"x1": X[0], "x2": X[1] + X[0] ** 2, "x3": X[2], "x4": X[3]})
    inv = ChartMap(CTX, CTX, {"x1": X[0], "x2": X[1] - X[0] ** 2, "x3": X[2], "x4": X[3]})
    assert phi.compose(inv).is_identity()
    assert inv.compose(phi).is_identity()


def test_pushforward_vf():
    phi = ChartMap(CTX, CTX, {"x1": X[0], "x2": X[1] + X[0] ** 2, "x3": X[2], "x4": X[3]})
    inv = ChartMap(CTX, CTX, {"x1": X[0], "x2": X[1] - X[0] ** 2, "x3": X[2], "x4": X[3]})
    img = pushforward_vf(DD[0], phi, inv)
    assert img == DD[0] - 2 * X[0] * DD[1]
    # pushforward respects brackets
    rng = random.Random(17)
    for _ in range(4):
        v, w = rand_vf(rng), rand_vf(rng)
        lhs = pushforward_vf(vf_bracket(v, w), phi, inv)
        rhs = vf_bracket(pushforward_vf(v, phi, inv), pushforward_vf(w, phi, inv))
        assert lhs == rhs


def test_pullback_evaluate_duality():
    # <pb(w), push(v)> = pb(<w, v>)
    phi = ChartMap(CTX, CTX, {"x1": X[0], "x2": X[1] + X[0] ** 2, "x3": X[2] + X[1] * X[0], "x4": X[3]})
    inv = ChartMap(CTX, CTX, {"x1": X[0], "x2": X[1] - X[0] ** 2, "x3": X[2] - (X[1] - X[0] ** 2) * X[0], "x4": X[3]})
    assert phi.compose(inv).is_identity() and inv.compose(phi).is_identity()
    rng = random.Random(23)
    for _ in range(4):
        w = rand_form(rng, 1)
        v = rand_vf(rng)
        lhs = evaluate(pullback(phi, w), [pushforward_vf(v, phi, inv)])
        rhs = phi.apply_scalar(evaluate(w, [v]))
        assert lhs == rhs


# -- matrix forms -----------------------------------------------------------------


def test_mat_wedge_pair_examples():
    a = MatrixForm.single(CTX, 2, 0, 1, DX[0])  # dx1 in slot (1,2)
    b = MatrixForm.single(CTX, 2, 1, 0, DX[1])  # dx2 in slot (2,1)
    assert mat_wedge_pair(a, b) == wedge(DX[0], DX[1])
    ida = MatrixForm.identity(CTX, 2)
    s = ida.map_entries(lambda e: wedge(DX[0], e) if not e.is_zero() else e, degree=1)
    t = ida.map_entries(lambda e: wedge(DX[1], e) if not e.is_zero() else e, degree=1)
    assert mat_wedge_pair(s, t) == 2 * wedge(DX[0], DX[1])


def test_mat_wedge_pair_graded_symmetry():
    rng = random.Random(29)
    for p, q in [(1, 1), (1, 2), (2, 2), (0, 1)]:
        a = rand_matrix(rng, p)
        b = rand_matrix(rng, q)
        assert mat_wedge_pair(a, b) == mat_wedge_pair(b, a) * CTX.const((-1) ** (p * q))


def test_mat_bracket_ad_invariance():
    rng = random.Random(31)
    for pc, pa, pb in [(0, 1, 1), (1, 1, 1), (1, 1, 2)]:
        c = rand_matrix(rng, pc)
        a = rand_matrix(rng, pa)
        b = rand_matrix(rng, pb)
        lhs = mat_wedge_pair(mat_bracket(c, a), b)
        rhs = mat_wedge_pair(a, mat_bracket(c, b)) * CTX.const((-1) ** (pc * pa))
        assert (lhs + rhs).is_zero()


def test_pairing_derivative_rule():
    rng = random.Random(37)
    for p, q in [(1, 1), (1, 2)]:
        a = rand_matrix(rng, p)
        b = rand_matrix(rng, q)
        lhs = ext_d(mat_wedge_pair(a, b))
        rhs = mat_wedge_pair(mat_ext_d(a), b) + mat_wedge_pair(a, mat_ext_d(b)) * CTX.const((-1) ** p)
        assert lhs == rhs


def test_curvature_example_rank1():
    ctx = Context(["x1", "x2"])
    omega = MatrixForm(ctx, 1, 1, [[DiffForm(ctx, {(1,): ctx.var("x1")})]])  # x1 dx2
    c = curvature_matrix(omega)
    assert c.entries[0][0] == DiffForm(ctx, {(0, 1): ctx.one})


def test_bianchi():
    rng = random.Random(41)
    for _ in range(4):
        omega = rand_matrix(rng, 1)
        c = curvature_matrix(omega)
        assert covariant_d(omega, c).is_zero()


def test_covariant_d_pairing_rule():
    rng = random.Random(43)
    omega = rand_matrix(rng, 1)
    a = rand_matrix(rng, 1)
    b = rand_matrix(rng, 2)
    lhs = ext_d(mat_wedge_pair(a, b))
    rhs = mat_wedge_pair(covariant_d(omega, a), b) + mat_wedge_pair(a, covariant_d(omega, b)) * CTX.const(-1)
    assert lhs == rhs


def test_matrix_inverse():
    rng = random.Random(47)
    g = MatrixForm.from_scalars(CTX, [[CTX.one, X[0]], [CTX.zero, CTX.one]])
    assert g.matmul(g.inverse()) == MatrixForm.identity(CTX, 2)
    h = MatrixForm.from_scalars(CTX, [[X[0], CTX.one], [CTX.one, X[1]]])
    assert h.matmul(h.inverse()) == MatrixForm.identity(CTX, 2)
    assert h.det() == X[0] * X[1] - 1
    with pytest.raises(ValueError):
        MatrixForm.from_scalars(CTX, [[X[0], X[0]], [X[0], X[0]]]).inverse()


def test_rank_mismatch():
    with pytest.raises(RankMismatch):
        MatrixForm(CTX, 2, 1, [[DiffForm.zero(CTX)]])
    a = MatrixForm.zero(CTX, 2, 1)
    b = MatrixForm.zero(CTX, 3, 1)
    with pytest.raises(RankMismatch):
        a.matmul(b)


def test_context_mismatch():
    other = Context(["x1", "x2"])
    with pytest.raises(ContextMismatch):
        wedge(DX[0], DiffForm.dx(other, 0))


def test_mat_pullback_is_multiplicative():
    tgt = Context(["y1", "y2", "y3", "y4"])
    phi = ChartMap(CTX, tgt, {"x1": tgt.var("y1"), "x2": tgt.var("y2") + tgt.var("y1") ** 2,
                              "x3": tgt.var("y3"), "x4": tgt.var("y4")})
    rng = random.Random(53)
    a = rand_matrix(rng, 1)
    b = rand_matrix(rng, 1)
    assert mat_pullback(phi, a.matmul(b)) == mat_pullback(phi, a).matmul(mat_pullback(phi, b))
    assert mat_pullback(phi, mat_ext_d(a)) == mat_ext_d(mat_pullback(phi, a))


# -- homotopy primitive ------------------------------------------------------------


def test_poincare_primitive_round_trip():
    rng = random.Random(59)
    for p in (1, 2, 3):
        for _ in range(4):
            a = ext_d(rand_form(rng, p))
            if a.is_zero():
                continue
            k = poincare_primitive(a)
            assert ext_d(k) == a


def test_poincare_primitive_rejects_non_closed():
    w = DiffForm(CTX, {(0,): X[1]})  # x2 dx1 is not closed
    with pytest.raises(ValueError):
        poincare_primitive(w)


def test_poincare_primitive_rejects_rational():
    w = DiffForm(CTX, {(0,): 1 / X[0]})
    with pytest.raises(ValueError):
        poincare_primitive(w)


# -- literals -----------------------------------------------------------------------


def test_form_literal_round_trip():
    rng = random.Random(61)
    for p in (0, 1, 2, 3):
        for _ in range(4):
            a = rand_form(rng, p)
            assert parse_form(CTX, form_to_literal(a)) == a
    mixed = rand_form(rng, 0) + rand_form(rng, 2)
    assert parse_form(CTX, form_to_literal(mixed)) == mixed


def test_form_literal_examples():
    a = parse_form(CTX, "x1 * d(x1)^d(x3)")
    assert a == DiffForm(CTX, {(0, 2): X[0]})
    b = parse_form(CTX, "d(x3)^d(x1)")
    assert b == DiffForm(CTX, {(0, 2): -CTX.one})
    c = parse_form(CTX, "(x1 + x2)/x1 * d(x2) + 5")
    assert c == DiffForm(CTX, {(1,): (X[0] + X[1]) / X[0], (): CTX.const(5)})
    assert form_to_literal(DiffForm.zero(CTX)) == "0"
