"""Exact truncated power series (jets) at a base point.

A jet is a polynomial in the local coordinates ``x = (z1..zn, zbar1..zbarn)``
centered at a base point, known modulo monomials of total degree above its
*precision*.  Holomorphic and antiholomorphic coordinates are independent
formal variables.

Monomials are packed into integers: each exponent occupies one digit in base
``order + 1`` and the total degree sits in the leading digit, so that
multiplying monomials is integer addition, degree is an integer division and
sorting keys gives graded order.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial

from gmpy2 import mpq

__all__ = [
    "GaussianRational",
    "I",
    "exact",
    "parse_scalar",
    "format_scalar",
    "JetContext",
    "Jet",
    "JetShapeError",
    "SingularConstantTerm",
]


class JetShapeError(ValueError):
    """Operands live on different jet contexts."""


class SingularConstantTerm(ZeroDivisionError):
    """A jet with vanishing constant term was inverted."""


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts.

    Arithmetic collapses to a plain ``mpq`` whenever the imaginary part
    cancels, so real computations never pay for the complex wrapper.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = mpq(re)
        self.im = mpq(im)

    @staticmethod
    def make(re, im):
        if im == 0:
            return mpq(re)
        return GaussianRational(re, im)

    @staticmethod
    def _parts(x):
        if isinstance(x, GaussianRational):
            return x.re, x.im
        return mpq(x), mpq(0)

    def __add__(self, other):
        a, b = self._parts(other)
        return GaussianRational.make(self.re + a, self.im + b)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._parts(other)
        return GaussianRational.make(self.re - a, self.im - b)

    def __rsub__(self, other):
        a, b = self._parts(other)
        return GaussianRational.make(a - self.re, b - self.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        a, b = self._parts(other)
        return GaussianRational.make(self.re * a - self.im * b, self.re * b + self.im * a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self._parts(other)
        d = a * a + b * b
        if d == 0:
            raise ZeroDivisionError("division by zero")
        return GaussianRational.make((self.re * a + self.im * b) / d, (self.im * a - self.re * b) / d)

    def __rtruediv__(self, other):
        a, b = self._parts(other)
        return GaussianRational.make(a, b) / self if b else GaussianRational(a, 0) / self

    def conjugate(self):
        return GaussianRational.make(self.re, -self.im)

    def __eq__(self, other):
        try:
            a, b = self._parts(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == a and self.im == b

    def __hash__(self):
        return hash((self.re, self.im)) if self.im else hash(self.re)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return format_scalar(self)


I = GaussianRational(0, 1)

_SCALARS = (int, Fraction, type(mpq(0)), GaussianRational)


def exact(x):
    """Coerce ``x`` to an exact scalar (``mpq`` or :class:`GaussianRational`)."""
    if isinstance(x, GaussianRational):
        return GaussianRational.make(x.re, x.im)
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction or a string")
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def parse_scalar(text: str):
    """Parse ``"p/q"``, ``"a+b*i"``, ``"b*i"`` or ``"i"`` into an exact scalar."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty scalar literal")
    if not s.endswith("i"):
        return mpq(s.lstrip("+"))
    body = s[:-1]
    # find the split between a real part and the imaginary part
    cut = max(body.rfind("+", 1), body.rfind("-", 1))
    re_txt, im_txt = (body[:cut], body[cut:]) if cut > 0 else ("0", body)
    if im_txt.endswith("*"):
        im_txt = im_txt[:-1]
    if im_txt in ("", "+"):
        im_txt = "1"
    elif im_txt == "-":
        im_txt = "-1"
    return GaussianRational.make(mpq(re_txt.lstrip("+")), mpq(im_txt.lstrip("+")))


def format_scalar(c) -> str:
    """Canonical text for an exact scalar: ``p/q`` or ``a+b*i``."""
    if isinstance(c, GaussianRational):
        sign = "+" if c.im >= 0 else "-"
        return f"{c.re}{sign}{abs(c.im)}*i"
    return str(mpq(c))


class JetContext:
    """Shape shared by a family of jets: dimension, order cap and base point.

    Parameters
    ----------
    n : int
        Complex dimension; jets are series in ``2n`` variables.
    order : int
        Maximal total degree ever stored.
    base : sequence, optional
        The ``2n`` coordinates ``(z1..zn, zbar1..zbarn)`` of the base point.
    """

    def __init__(self, n: int, order: int, base=None):
        if n < 1:
            raise ValueError("dimension must be positive")
        if order < 0:
            raise ValueError("jet order must be non-negative")
        self.n = n
        self.order = order
        if base is None:
            base = (0,) * (2 * n)
        if len(base) != 2 * n:
            raise ValueError(f"base point needs {2 * n} coordinates, got {len(base)}")
        self.base = tuple(exact(b) for b in base)
        self.radix = order + 1
        self.units = tuple(self.radix ** i for i in range(2 * n))
        self.deg_unit = self.radix ** (2 * n)
        self.names = tuple(f"z{k + 1}" for k in range(n)) + tuple(f"zbar{k + 1}" for k in range(n))

    def __eq__(self, other):
        return (
            isinstance(other, JetContext)
            and self.n == other.n
            and self.order == other.order
            and self.base == other.base
        )

    def __hash__(self):
        return hash((self.n, self.order, self.base))

    def __repr__(self):
        return f"JetContext(n={self.n}, order={self.order}, base={tuple(map(format_scalar, self.base))})"

    # monomial keys

    def encode(self, exps) -> int:
        return sum(exps) * self.deg_unit + sum(e * u for e, u in zip(exps, self.units))

    def decode(self, key: int) -> tuple:
        rest = key % self.deg_unit
        out = []
        for _ in range(2 * self.n):
            rest, e = divmod(rest, self.radix)
            out.append(e)
        return tuple(out)

    def degree(self, key: int) -> int:
        return key // self.deg_unit

    # constructors

    def zero(self, prec=None) -> "Jet":
        return Jet(self, {}, self.order if prec is None else prec)

    def constant(self, c) -> "Jet":
        c = exact(c)
        return Jet(self, {0: c} if c else {}, self.order)

    def one(self) -> "Jet":
        return self.constant(1)

    def monomial(self, exps, coeff=1) -> "Jet":
        """The jet ``coeff * x**exps`` in local (base-centered) coordinates."""
        if len(exps) != 2 * self.n:
            raise ValueError("exponent vector has wrong length")
        coeff = exact(coeff)
        if sum(exps) > self.order or not coeff:
            return self.zero()
        return Jet(self, {self.encode(exps): coeff}, self.order)

    def local(self, i: int) -> "Jet":
        """Local coordinate ``x_i`` (vanishing at the base point)."""
        exps = [0] * (2 * self.n)
        exps[i] = 1
        return self.monomial(exps)

    def coordinate(self, i: int) -> "Jet":
        """Global coordinate function ``base_i + x_i``."""
        return self.local(i) + self.constant(self.base[i])

    def from_dict(self, coeffs: dict, prec=None) -> "Jet":
        """Build a jet from ``{exponent tuple: coefficient}``."""
        prec = self.order if prec is None else prec
        data = {}
        for exps, c in coeffs.items():
            if sum(exps) <= prec:
                c = exact(c)
                if c:
                    data[self.encode(exps)] = c
        return Jet(self, data, prec)

    def monomials(self, max_degree: int):
        """All exponent vectors of total degree <= ``max_degree``, graded order."""
        out = []

        def rec(prefix, left, slots):
            if slots == 0:
                out.append(tuple(prefix))
                return
            for e in range(left + 1):
                rec(prefix + [e], left - e, slots - 1)

        rec([], max_degree, 2 * self.n)
        return sorted(out, key=self.encode)


class Jet:
    """A truncated power series with exact coefficients.

    ``coeffs`` maps packed monomial keys to nonzero exact scalars; every
    monomial of degree <= ``prec`` that is absent has coefficient zero, and
    nothing is known about higher degrees.  ``prec`` may drop below zero, in
    which case the jet carries no information at all.
    """

    __slots__ = ("ctx", "coeffs", "prec")

    def __init__(self, ctx: JetContext, coeffs: dict, prec: int):
        self.ctx = ctx
        self.coeffs = coeffs
        self.prec = min(prec, ctx.order)

    # inspection

    @property
    def valuation(self) -> int:
        """Lowest degree present, or ``prec + 1`` for a zero jet."""
        if not self.coeffs:
            return self.prec + 1
        return min(self.coeffs) // self.ctx.deg_unit

    def is_zero(self) -> bool:
        return not self.coeffs

    def constant_term(self):
        return self.coeffs.get(0, mpq(0))

    def coefficient(self, exps):
        return self.coeffs.get(self.ctx.encode(tuple(exps)), mpq(0))

    def items(self):
        """``(exponent tuple, coefficient)`` pairs in graded order."""
        return [(self.ctx.decode(k), self.coeffs[k]) for k in sorted(self.coeffs)]

    def is_real(self) -> bool:
        return not any(isinstance(c, GaussianRational) for c in self.coeffs.values())

    def _check(self, other: "Jet"):
        if other.ctx is not self.ctx and other.ctx != self.ctx:
            raise JetShapeError(f"{self.ctx!r} vs {other.ctx!r}")

    def truncate(self, prec: int) -> "Jet":
        if prec >= self.prec:
            return self
        lim = (prec + 1) * self.ctx.deg_unit
        return Jet(self.ctx, {k: c for k, c in self.coeffs.items() if k < lim}, prec)

    def agrees_with(self, other: "Jet") -> bool:
        """Equality on the degrees both operands know."""
        return (self - other).is_zero()

    # arithmetic

    def __add__(self, other):
        if not isinstance(other, Jet):
            if isinstance(other, _SCALARS):
                return self + self.ctx.constant(other)
            return NotImplemented
        self._check(other)
        p = min(self.prec, other.prec)
        lim = (p + 1) * self.ctx.deg_unit
        out = {k: c for k, c in self.coeffs.items() if k < lim}
        for k, c in other.coeffs.items():
            if k < lim:
                s = out.get(k, 0) + c
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return Jet(self.ctx, out, p)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.ctx, {k: -c for k, c in self.coeffs.items()}, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Jet":
        c = exact(c)
        if not c:
            return Jet(self.ctx, {}, self.prec)
        return Jet(self.ctx, {k: v * c for k, v in self.coeffs.items()}, self.prec)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            if isinstance(other, _SCALARS):
                return self.scale(other)
            return NotImplemented
        self._check(other)
        a, b = self.coeffs, other.coeffs
        p = min(self.prec + other.valuation, other.prec + self.valuation, self.ctx.order)
        if not a or not b:
            return Jet(self.ctx, {}, p)
        if len(a) > len(b):
            a, b = b, a
        lim = (p + 1) * self.ctx.deg_unit
        bs = sorted(b.items())
        out = {}
        get = out.get
        for k1, c1 in a.items():
            room = lim - k1
            for k2, c2 in bs:
                if k2 >= room:
                    break
                k = k1 + k2
                out[k] = get(k, 0) + c1 * c2
        return Jet(self.ctx, {k: c for k, c in out.items() if c}, p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.invert()
        return self.scale(1 / exact(other))

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers of jets are supported")
        if k < 0:
            return self.invert() ** (-k)
        result = self.ctx.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def invert(self) -> "Jet":
        """Multiplicative inverse, by a Neumann series in the non-constant part."""
        c0 = self.constant_term()
        if not c0 or self.prec < 0:
            raise SingularConstantTerm("jet has zero constant term")
        inv0 = 1 / c0
        u = -(self.scale(inv0) - 1)  # 1 - f/c0, valuation >= 1
        result = self.ctx.one().truncate(self.prec)
        power = result
        for _ in range(self.prec):
            power = power * u
            if power.is_zero() and power.prec >= self.prec:
                break
            result = result + power
        return result.scale(inv0)

    def log1p_of_unit(self) -> "Jet":
        """``log(f)`` for a jet whose constant term is exactly one."""
        if self.constant_term() != 1:
            raise ValueError("log argument must equal 1 at the base point")
        h = self - 1
        result = self.ctx.zero(self.prec)
        power = self.ctx.one()
        for k in range(1, self.prec + 1):
            power = power * h
            term = power.scale(mpq(1 if k % 2 else -1, k))
            result = result + term
        return result

    def partial(self, i: int) -> "Jet":
        """Partial derivative along local coordinate ``i`` (``z`` first, then ``zbar``)."""
        ctx = self.ctx
        unit = ctx.units[i]
        radix = ctx.radix
        shift = unit + ctx.deg_unit
        out = {}
        for k, c in self.coeffs.items():
            e = (k // unit) % radix
            if e:
                out[k - shift] = c * e
        return Jet(ctx, out, self.prec - 1)

    def d(self, k: int) -> "Jet":
        """Holomorphic derivative d/dz^k (0-based)."""
        return self.partial(k)

    def dbar(self, l: int) -> "Jet":
        """Antiholomorphic derivative d/dzbar^l (0-based)."""
        return self.partial(self.ctx.n + l)

    def partial_multi(self, exps) -> "Jet":
        out = self
        for i, e in enumerate(exps):
            for _ in range(e):
                out = out.partial(i)
        return out

    def __eq__(self, other):
        if isinstance(other, Jet):
            return self.ctx == other.ctx and self.prec == other.prec and self.coeffs == other.coeffs
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"Jet({self.format()})"

    def __str__(self):
        return self.format()

    def format(self, decimal: int | None = None, big_o: bool = True) -> str:
        """Render in graded order, e.g. ``1 - 2*z1*zbar1 + O(5)``."""
        parts = []
        for exps, c in self.items():
            mono = []
            for name, e in zip(self.ctx.names, exps):
                if e == 1:
                    mono.append(name)
                elif e > 1:
                    mono.append(f"{name}^{e}")
            parts.append((_coeff_text(c, decimal), mono))
        text = _join_terms(parts)
        if big_o:
            text += f" + O({self.prec + 1})"
        return text


def _coeff_text(c, decimal):
    if decimal is None:
        return format_scalar(c)
    if isinstance(c, GaussianRational):
        return f"~({float(c.re):.{decimal}f}{float(c.im):+.{decimal}f}*i)"
    return f"~{float(c):.{decimal}f}"


def _join_terms(parts) -> str:
    if not parts:
        return "0"
    out = []
    for idx, (ctext, mono) in enumerate(parts):
        neg = ctext.startswith("-") and "*i" not in ctext
        body = ctext[1:] if neg else ctext
        if "*i" in body and mono:
            body = f"({body})"
        if mono:
            if body == "1":
                piece = "*".join(mono)
            else:
                piece = body + "*" + "*".join(mono)
        else:
            piece = body
        if idx == 0:
            out.append(("-" if neg else "") + piece)
        else:
            out.append((" - " if neg else " + ") + piece)
    return "".join(out)


def multinomial_factorial(exps) -> int:
    out = 1
    for e in exps:
        out *= factorial(e)
    return out
