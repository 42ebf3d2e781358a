"""Exact multivariate rational-function arithmetic.

A :class:`Context` fixes an ordered list of variable names and provides the
field Q(x1, ..., xn).  :class:`RatFunc` values are immutable, automatically
reduced to lowest terms, and print in a canonical graded-lexicographic form,
so two values are equal iff their canonical strings are equal.

The heavy lifting (gcd cancellation, polynomial arithmetic) is delegated to
sympy's sparse polynomial rings; this module owns the canonical printing,
the substitution semantics and the error contract.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from sympy.polys.domains import QQ
from sympy.polys.fields import FracElement, field
from sympy.polys.orderings import grlex


class RingError(Exception):
    """Base class for all arithmetic-layer errors."""


class ContextMismatch(RingError):
    """Operands belong to different variable contexts."""


class DivisionByZero(RingError):
    """Division by the zero rational function."""


class UnknownVariable(RingError):
    """A variable name is not part of the context."""


class DenominatorVanishes(RingError):
    """A substitution sent some denominator to zero."""


class ExpressionSyntaxError(RingError):
    """A scalar expression string could not be parsed."""


Scalar = Union["RatFunc", int, Fraction]


class Context:
    """An ordered set of variable names defining the field Q(x1,...,xn)."""

    def __init__(self, variables: Sequence[str]):
        names = list(variables)
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names: %r" % (names,))
        for nm in names:
            if not nm.isidentifier():
                raise ValueError("variable name %r is not an identifier" % (nm,))
        self.variables: tuple[str, ...] = tuple(names)
        self._field, *gens = field(names, QQ, order=grlex)
        self._gens = {nm: g for nm, g in zip(names, gens)}
        self._index = {nm: i for i, nm in enumerate(names)}

    # -- constructors ------------------------------------------------------

    def var(self, name: str) -> "RatFunc":
        if name not in self._gens:
            raise UnknownVariable("unknown variable %r (context has %s)" % (name, ", ".join(self.variables)))
        return RatFunc(self, self._gens[name])

    def vars(self) -> list["RatFunc"]:
        return [self.var(nm) for nm in self.variables]

    def const(self, value) -> "RatFunc":
        q = Fraction(value)
        elem = (self._field.one * q.numerator) / q.denominator
        return RatFunc(self, elem)

    @property
    def zero(self) -> "RatFunc":
        return RatFunc(self, self._field.zero)

    @property
    def one(self) -> "RatFunc":
        return RatFunc(self, self._field.one)

    def index(self, name: str) -> int:
        if name not in self._index:
            raise UnknownVariable("unknown variable %r" % (name,))
        return self._index[name]

    def __eq__(self, other):
        return isinstance(other, Context) and self.variables == other.variables

    def __hash__(self):
        return hash(self.variables)

    def __repr__(self):
        return "Context(%s)" % (", ".join(self.variables))


def _same_context(a: Context, b: Context) -> None:
    if a != b:
        raise ContextMismatch("contexts differ: %r vs %r" % (a, b))


def _coerce(ctx: Context, value: Scalar) -> "RatFunc":
    if isinstance(value, RatFunc):
        _same_context(ctx, value.context)
        return value
    if isinstance(value, (int, Fraction)):
        return ctx.const(value)
    raise TypeError("cannot coerce %r into a rational function" % (value,))


def _try_coerce(ctx: Context, value) -> "RatFunc | None":
    if isinstance(value, (RatFunc, int, Fraction)):
        return _coerce(ctx, value)
    return None


class RatFunc:
    """An element of Q(x1,...,xn), reduced and canonically printable.

    The stored fraction is in lowest terms with a *monic* denominator (its
    graded-lex leading coefficient is 1), which makes the printed form a
    normal form: two values are equal iff their strings agree.
    """

    __slots__ = ("context", "_elem")

    def __init__(self, context: Context, elem: FracElement):
        self.context = context
        self._elem = _monicize(elem)

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self._elem

    def is_polynomial(self) -> bool:
        return self._elem.denom == self._elem.field.ring.one

    def is_constant(self) -> bool:
        return (not self._elem.numer or self._elem.numer.is_ground) and self._elem.denom.is_ground

    def as_fraction(self) -> Fraction:
        """The value as an exact rational number; raises if non-constant."""
        if not self.is_constant():
            raise ValueError("not a constant: %s" % (self,))
        num = self._elem.numer.coeff(1) if self._elem.numer else QQ(0)
        den = self._elem.denom.coeff(1)
        q = num / den
        return Fraction(int(q.numerator), int(q.denominator))

    def total_degree(self) -> int:
        """Total degree of the numerator (0 for the zero function)."""
        if self.is_zero():
            return 0
        return max(sum(m) for m in self._elem.numer.monoms())

    # -- term access (numerator/denominator as sparse polynomials) ---------

    def numer_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        return _poly_terms(self._elem.numer)

    def denom_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        return _poly_terms(self._elem.denom)

    def poly_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Sparse terms of a polynomial value, graded-lex descending."""
        if not self.is_polynomial():
            raise ValueError("not a polynomial: %s" % (self,))
        return self.numer_terms()

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        o = _try_coerce(self.context, other)
        if o is None:
            return NotImplemented
        return RatFunc(self.context, self._elem + o._elem)

    __radd__ = __add__

    def __sub__(self, other):
        o = _try_coerce(self.context, other)
        if o is None:
            return NotImplemented
        return RatFunc(self.context, self._elem - o._elem)

    def __rsub__(self, other):
        o = _try_coerce(self.context, other)
        if o is None:
            return NotImplemented
        return RatFunc(self.context, o._elem - self._elem)

    def __mul__(self, other):
        o = _try_coerce(self.context, other)
        if o is None:
            return NotImplemented
        return RatFunc(self.context, self._elem * o._elem)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(self.context, other)
        if o.is_zero():
            raise DivisionByZero("division by zero rational function")
        return RatFunc(self.context, self._elem / o._elem)

    def __rtruediv__(self, other):
        o = _coerce(self.context, other)
        if self.is_zero():
            raise DivisionByZero("division by zero rational function")
        return RatFunc(self.context, o._elem / self._elem)

    def __neg__(self):
        return RatFunc(self.context, -self._elem)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n < 0:
            if self.is_zero():
                raise DivisionByZero("zero to a negative power")
            return (self.context.one / self) ** (-n)
        return RatFunc(self.context, self._elem ** n)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.context.const(other)
        if not isinstance(other, RatFunc):
            return NotImplemented
        if self.context != other.context:
            return False
        return self._elem == other._elem

    def __hash__(self):
        return hash((self.context.variables, self._elem))

    def __bool__(self):
        return not self.is_zero()

    # -- calculus ----------------------------------------------------------

    def diff(self, var: str) -> "RatFunc":
        if var not in self.context._gens:
            raise UnknownVariable("unknown variable %r" % (var,))
        return RatFunc(self.context, self._elem.diff(self.context._gens[var]))

    def subs(self, mapping: Mapping[str, Scalar]) -> "RatFunc":
        """Substitute an image for every context variable.

        The mapping must cover all variables; images must live in one common
        (target) context.  Raises DenominatorVanishes if the substitution
        kills a denominator.
        """
        ctx = self.context
        missing = [v for v in ctx.variables if v not in mapping]
        if missing:
            raise UnknownVariable("substitution misses variables: %s" % (", ".join(missing)))
        extra = [v for v in mapping if v not in ctx._index]
        if extra:
            raise UnknownVariable("substitution names unknown variables: %s" % (", ".join(sorted(extra))))
        target: Context | None = None
        for v in ctx.variables:
            img = mapping[v]
            if isinstance(img, RatFunc):
                if target is None:
                    target = img.context
                else:
                    _same_context(target, img.context)
        if target is None:
            target = ctx
        images = [_coerce(target, mapping[v]) for v in ctx.variables]
        num = _eval_poly(self._elem.numer, images, target)
        den = _eval_poly(self._elem.denom, images, target)
        if den.is_zero():
            raise DenominatorVanishes("denominator %s vanishes under substitution" % (_poly_str(self._elem.denom, ctx.variables),))
        return num / den

    # -- printing ----------------------------------------------------------

    def __str__(self):
        names = self.context.variables
        num = self._elem.numer
        den = self._elem.denom
        if den == den.ring.one:
            return _poly_str(num, names)
        ns = _poly_str(num, names)
        ds = _poly_str(den, names)
        if len(num.terms()) > 1:
            ns = "(%s)" % ns
        # the denominator binds to '/' only if it is a single power like x1^2;
        # anything with '*' or several terms needs parentheses to round-trip
        if len(den.terms()) > 1 or "*" in ds:
            ds = "(%s)" % ds
        return "%s/%s" % (ns, ds)

    def __repr__(self):
        return "RatFunc(%s)" % (self,)


class MultiPoly:
    """A read-only sparse-dictionary view of a polynomial RatFunc.

    Maps exponent tuples to Fraction coefficients; useful for coefficient
    extraction in exact linear solving.
    """

    def __init__(self, value: RatFunc):
        if not value.is_polynomial():
            raise ValueError("MultiPoly requires a polynomial value")
        self.context = value.context
        self.terms = dict(value.poly_terms())

    def coefficient(self, exponents: tuple[int, ...]) -> Fraction:
        return self.terms.get(tuple(exponents), Fraction(0))

    def monomials(self) -> list[tuple[int, ...]]:
        return sorted(self.terms, key=grlex, reverse=True)

    def __iter__(self):
        return iter(sorted(self.terms.items(), key=lambda kv: grlex(kv[0]), reverse=True))

    def __len__(self):
        return len(self.terms)


# -- helpers ---------------------------------------------------------------


def _monicize(elem: FracElement) -> FracElement:
    """Scale numerator and denominator so the denominator is monic."""
    den = elem.denom
    ring = den.ring
    lc = den.LC
    if lc == ring.domain.one:
        return elem
    inv = ring.domain.one / lc
    return elem.field.raw_new(elem.numer.mul_ground(inv), den.mul_ground(inv))


def _poly_terms(poly) -> list[tuple[tuple[int, ...], Fraction]]:
    out = []
    for monom, coeff in poly.terms():
        out.append((tuple(monom), Fraction(int(coeff.numerator), int(coeff.denominator))))
    out.sort(key=lambda t: grlex(t[0]), reverse=True)
    return out


def _eval_poly(poly, images: list[RatFunc], target: Context) -> RatFunc:
    acc = target.zero
    powers: dict[tuple[int, int], RatFunc] = {}
    for monom, coeff in poly.terms():
        q = Fraction(int(coeff.numerator), int(coeff.denominator))
        term = target.const(q)
        for i, e in enumerate(monom):
            if e == 0:
                continue
            key = (i, e)
            if key not in powers:
                powers[key] = images[i] ** e
            term = term * powers[key]
        acc = acc + term
    return acc


def _monom_str(monom: tuple[int, ...], names: Sequence[str]) -> str:
    parts = []
    for nm, e in zip(names, monom):
        if e == 0:
            continue
        parts.append(nm if e == 1 else "%s^%d" % (nm, e))
    return "*".join(parts)


def _poly_str(poly, names: Sequence[str]) -> str:
    terms = _poly_terms(poly)
    if not terms:
        return "0"
    chunks = []
    for monom, coeff in terms:
        mono = _monom_str(monom, names)
        if not mono:
            body = str(abs(coeff))
        elif abs(coeff) == 1:
            body = mono
        else:
            body = "%s*%s" % (abs(coeff), mono)
        chunks.append(("-" if coeff < 0 else "+", body))
    sign, body = chunks[0]
    out = ("-" + body) if sign == "-" else body
    for sign, body in chunks[1:]:
        out += " %s %s" % (sign, body)
    return out


# -- module-level operation surface ----------------------------------------


def ring_arith(a: Scalar, b: Scalar, op: str) -> RatFunc:
    """Apply a field operation ('add' | 'sub' | 'mul' | 'div') exactly."""
    if isinstance(a, RatFunc):
        ctx = a.context
    elif isinstance(b, RatFunc):
        ctx = b.context
    else:
        raise TypeError("at least one operand must be a RatFunc")
    x = _coerce(ctx, a)
    y = _coerce(ctx, b)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError("unknown operation %r" % (op,))


def partial(f: RatFunc, var: str) -> RatFunc:
    """Exact partial derivative with the quotient rule built in."""
    return f.diff(var)


def substitute(f: RatFunc, mapping: Mapping[str, Scalar]) -> RatFunc:
    """Substitute images (possibly in another context) for all variables."""
    return f.subs(mapping)


# -- expression parsing ------------------------------------------------------

_OPS = set("+-*/^()")


def _tokenize(text: str) -> list[tuple[str, str]]:
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            toks.append(("op", ch))
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("int", text[i:j]))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[i:j]))
            i = j
            continue
        raise ExpressionSyntaxError("unexpected character %r in %r" % (ch, text))
    return toks


class _ScalarParser:
    """Recursive-descent parser for +, -, *, /, ^, parentheses, ints, vars."""

    def __init__(self, ctx: Context, text: str):
        self.ctx = ctx
        self.text = text
        self.toks = _tokenize(text)
        self.pos = 0

    def _peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else (None, None)

    def _next(self):
        tok = self._peek()
        self.pos += 1
        return tok

    def _expect_op(self, ch):
        kind, val = self._next()
        if kind != "op" or val != ch:
            raise ExpressionSyntaxError("expected %r in %r" % (ch, self.text))

    def parse(self) -> RatFunc:
        value = self._expr()
        if self.pos != len(self.toks):
            raise ExpressionSyntaxError("trailing input in %r" % (self.text,))
        return value

    def _expr(self) -> RatFunc:
        value = self._term()
        while True:
            kind, val = self._peek()
            if kind == "op" and val in "+-":
                self.pos += 1
                rhs = self._term()
                value = value + rhs if val == "+" else value - rhs
            else:
                return value

    def _term(self) -> RatFunc:
        value = self._unary()
        while True:
            kind, val = self._peek()
            if kind == "op" and val in "*/":
                self.pos += 1
                rhs = self._unary()
                value = value * rhs if val == "*" else value / rhs
            else:
                return value

    def _unary(self) -> RatFunc:
        kind, val = self._peek()
        if kind == "op" and val == "-":
            self.pos += 1
            return -self._unary()
        if kind == "op" and val == "+":
            self.pos += 1
            return self._unary()
        return self._power()

    def _power(self) -> RatFunc:
        base = self._atom()
        kind, val = self._peek()
        if kind == "op" and val == "^":
            self.pos += 1
            ekind, eval_ = self._next()
            if ekind != "int":
                raise ExpressionSyntaxError("exponent must be a nonnegative integer in %r" % (self.text,))
            return base ** int(eval_)
        return base

    def _atom(self) -> RatFunc:
        kind, val = self._next()
        if kind == "int":
            return self.ctx.const(int(val))
        if kind == "name":
            try:
                return self.ctx.var(val)
            except UnknownVariable:
                raise UnknownVariable("unknown variable %r in %r (context: %s)" % (val, self.text, ", ".join(self.ctx.variables)))
        if kind == "op" and val == "(":
            inner = self._expr()
            self._expect_op(")")
            return inner
        raise ExpressionSyntaxError("unexpected token %r in %r" % (val, self.text))


def parse_scalar(ctx: Context, text: str) -> RatFunc:
    """Parse an expression over integers and context variables."""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionSyntaxError("empty scalar expression")
    return _ScalarParser(ctx, text).parse()
