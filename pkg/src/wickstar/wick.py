"""The formal Wick algebra bundle over a coordinate chart.

Elements of ``W ⊗ Λ`` are finite sums of terms

    coefficient(z, zbar) * nu^r * zeta^alpha * zetabar^beta * dx^form

stored as ``{(form, r, alpha, beta): Jet}``.  ``alpha`` and ``beta`` are
exponent vectors (the canonical form of a symmetric multi-index), ``form``
is a strictly increasing tuple over the canonical order
``dz1 < ... < dzn < dzbar1 < ... < dzbarn`` (indices ``0..2n-1``).

Every element is known modulo terms of total degree
``Deg = 2 r + |alpha| + |beta|`` above its ``prec``; coefficient jets carry
their own precision on top of that.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial

from gmpy2 import mpq

from .jets import Jet, JetContext, JetShapeError, exact

__all__ = [
    "wick_product",
    "graded_commutator",
    "grading_decompose",
    "normal_op_apply",
    "proj_pi",
    "proj_pi_prime",
    "proj_pi_doubleprime",
    "Fibre",
    "FormWick",
    "FormalScalar",
    "wedge_sign",
    "GRADINGS",
    "EXACT",
]


@lru_cache(maxsize=None)
def wedge_sign(f1: tuple, f2: tuple):
    """``dx^f1 ∧ dx^f2 = sign * dx^merged``; ``None`` when they overlap."""
    if set(f1) & set(f2):
        return None
    inversions = sum(1 for a in f1 for b in f2 if a > b)
    return (-1 if inversions % 2 else 1), tuple(sorted(f1 + f2))


@lru_cache(maxsize=None)
def _contractions(beta: tuple, alpha: tuple, min_total: int, max_total: int):
    """Count matrices ``M[l][k]`` with row sums <= beta and column sums <= alpha.

    Returns ``(M, rho, kappa, m, factor)`` where ``factor`` is the integer
    falling-factorial weight of differentiating ``zetabar^beta`` by
    ``rho`` and ``zeta^alpha`` by ``kappa``.
    """
    n = len(beta)
    cells = [(l, k) for l in range(n) for k in range(n)]
    out = []

    def rec(idx, M, rows, cols, total):
        if idx == len(cells):
            if total < min_total:
                return
            fac = 1
            for l in range(n):
                fac *= factorial(beta[l]) // factorial(beta[l] - rows[l])
            for k in range(n):
                fac *= factorial(alpha[k]) // factorial(alpha[k] - cols[k])
            out.append((tuple(M), tuple(rows), tuple(cols), total, fac))
            return
        l, k = cells[idx]
        top = min(beta[l] - rows[l], alpha[k] - cols[k], max_total - total)
        for m in range(top + 1):
            M.append(m)
            rows[l] += m
            cols[k] += m
            rec(idx + 1, M, rows, cols, total + m)
            rows[l] -= m
            cols[k] -= m
            M.pop()

    rec(0, [], [0] * n, [0] * n, 0)
    return tuple(out)


def _deg(key) -> int:
    return 2 * key[1] + sum(key[2]) + sum(key[3])


def _sub(a: tuple, b: tuple) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def _add(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


# Deg precision for exactly known homogeneous data
EXACT = 10 ** 6

# grading name -> function of a term key
GRADINGS = {
    "deg_nu": lambda k: k[1],
    "deg_s'": lambda k: sum(k[2]),
    "deg_s''": lambda k: sum(k[3]),
    "deg_s": lambda k: sum(k[2]) + sum(k[3]),
    "Deg'": lambda k: k[1] + sum(k[2]),
    "Deg''": lambda k: k[1] + sum(k[3]),
    "Deg": _deg,
    "deg_a": lambda k: len(k[0]),
}


class Fibre:
    """Fibre data for the Wick product: the jet context and ``g^{lk}``.

    Parameters
    ----------
    ctx : JetContext
    ginv : list of list of Jet
        ``ginv[l][k]`` is the inverse metric ``g^{lk}``.
    deg_cap : int
        Default Deg precision of freshly built elements.
    """

    def __init__(self, ctx: JetContext, ginv, deg_cap: int = 8):
        self.ctx = ctx
        self.n = ctx.n
        self.ginv = [list(row) for row in ginv]
        self.deg_cap = deg_cap
        self._weights = {}

    @classmethod
    def constant(cls, ctx: JetContext, g=None, deg_cap: int = 8) -> "Fibre":
        """Fibre of a constant Hermitian metric ``g_{kl}`` (identity by default)."""
        n = ctx.n
        if g is None:
            g = [[1 if k == l else 0 for l in range(n)] for k in range(n)]
        inv = _invert_matrix([[exact(x) for x in row] for row in g])
        # inv[l][k] satisfies sum_l g[k][l] inv[l][s] = delta
        ginv = [[ctx.constant(inv[l][k]) for k in range(n)] for l in range(n)]
        return cls(ctx, ginv, deg_cap)

    def weight(self, M: tuple) -> Jet:
        """``prod (g^{lk})^{M_lk} / M_lk!`` for a flattened count matrix."""
        w = self._weights.get(M)
        if w is None:
            n = self.n
            w = self.ctx.one()
            for idx, m in enumerate(M):
                if m:
                    l, k = divmod(idx, n)
                    w = w * (self.ginv[l][k] ** m)
                    w = w.scale(mpq(1, factorial(m)))
            self._weights[M] = w
        return w

    def zero(self, prec=None) -> "FormWick":
        return FormWick(self, {}, self.deg_cap if prec is None else prec)

    def element(self, terms: dict, prec=None) -> "FormWick":
        return FormWick(self, dict(terms), self.deg_cap if prec is None else prec)

    def scalar(self, f, prec=None) -> "FormWick":
        """Embed a jet or exact scalar as a Deg-0 element."""
        if not isinstance(f, Jet):
            f = self.ctx.constant(f)
        z = (0,) * self.n
        return self.element({((), 0, z, z): f}, prec)

    def monomial(self, r=0, alpha=None, beta=None, form=(), coeff=None, prec=None) -> "FormWick":
        z = (0,) * self.n
        alpha = z if alpha is None else tuple(alpha)
        beta = z if beta is None else tuple(beta)
        if coeff is None:
            coeff = self.ctx.one()
        elif not isinstance(coeff, Jet):
            coeff = self.ctx.constant(coeff)
        return self.element({(tuple(form), r, alpha, beta): coeff}, prec)

    def zeta(self, k: int, prec=None) -> "FormWick":
        a = [0] * self.n
        a[k] = 1
        return self.monomial(alpha=a, prec=prec)

    def zetabar(self, l: int, prec=None) -> "FormWick":
        b = [0] * self.n
        b[l] = 1
        return self.monomial(beta=b, prec=prec)

    def dz(self, k: int, prec=None) -> "FormWick":
        return self.monomial(form=(k,), prec=prec)

    def dzbar(self, l: int, prec=None) -> "FormWick":
        return self.monomial(form=(self.n + l,), prec=prec)


def merge_holes(*hs) -> dict:
    out = {}
    for h in hs:
        for d, p in h.items():
            if p < out.get(d, p + 1):
                out[d] = p
    return out


def shift_holes(h: dict, by: int, dprec: int = 0) -> dict:
    return {d + by: p + dprec for d, p in h.items()}


def _invert_matrix(a):
    n = len(a)
    m = [list(row) + [mpq(1) if i == j else mpq(0) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[c], m[piv] = m[piv], m[c]
        p = m[c][c]
        m[c] = [x / p for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [row[n:] for row in m]


class FormWick:
    """An element of ``W ⊗ Λ`` over a coordinate chart.

    Form-degree-zero elements play the role of plain Wick elements, and
    elements with every ``beta`` empty are Fock-space elements.
    """

    __slots__ = ("fibre", "terms", "prec", "holes")

    def __init__(self, fibre: Fibre, terms: dict, prec: int, holes: dict | None = None):
        self.fibre = fibre
        self.prec = prec
        # holes[d]: absent Deg-d terms are only known to vanish to this jet degree
        order = fibre.ctx.order
        hs = {d: p for d, p in (holes or {}).items() if p < order and d <= prec}
        kept = {}
        for k, v in terms.items():
            d = _deg(k)
            if d > prec:
                continue
            if not v.coeffs:
                if v.prec < order and v.prec < hs.get(d, order):
                    hs[d] = v.prec
                continue
            kept[k] = v
        if hs:
            for k, v in kept.items():
                h = hs.get(_deg(k))
                if h is not None and v.prec > h:
                    kept[k] = v.truncate(h)
        kept = {k: v for k, v in kept.items() if v.coeffs}
        self.terms = kept
        self.holes = hs

    def hole(self, d: int) -> int:
        return self.holes.get(d, self.fibre.ctx.order)

    # inspection

    @property
    def n(self):
        return self.fibre.n

    def min_deg(self) -> int:
        if not self.terms:
            return self.prec + 1
        return min(_deg(k) for k in self.terms)

    def is_zero(self) -> bool:
        """True when every retained coefficient vanishes to its precision."""
        return not self.terms

    def nonzero_terms(self):
        return {k: j for k, j in self.terms.items() if not j.is_zero()}

    def jet_floor(self):
        """Smallest coefficient precision, absent (zero) terms included."""
        return min(list(self.holes.values()) + [j.prec for j in self.terms.values()], default=self.fibre.ctx.order)

    def is_fock(self) -> bool:
        return all(not any(k[3]) for k in self.terms)

    def form_degrees(self) -> set:
        return {len(k[0]) for k in self.terms}

    def _check(self, other: "FormWick"):
        if not isinstance(other, FormWick):
            raise TypeError(f"expected FormWick, got {type(other).__name__}")
        if other.fibre is not self.fibre and other.fibre.ctx != self.fibre.ctx:
            raise JetShapeError("elements live on different fibres")

    def with_prec(self, prec: int) -> "FormWick":
        return FormWick(self.fibre, self.terms, min(prec, self.prec), self.holes)

    def reprec(self, prec: int) -> "FormWick":
        """Same terms, Deg precision set to ``prec`` (for exactly known pieces)."""
        return FormWick(self.fibre, self.terms, prec, self.holes)

    def filter(self, pred) -> "FormWick":
        return FormWick(self.fibre, {k: v for k, v in self.terms.items() if pred(k)}, self.prec, self.holes)

    def component(self, grading: str, degree: int) -> "FormWick":
        fn = GRADINGS[grading]
        return self.filter(lambda k: fn(k) == degree)

    def decompose(self, grading: str) -> dict:
        """Homogeneous components ``{degree: element}`` for a named grading."""
        fn = GRADINGS[grading]
        out = {}
        for k, v in self.terms.items():
            out.setdefault(fn(k), {})[k] = v
        return {d: FormWick(self.fibre, t, self.prec, self.holes) for d, t in sorted(out.items())}

    # linear structure

    def __add__(self, other):
        self._check(other)
        p = min(self.prec, other.prec)
        out = {k: v for k, v in self.terms.items() if _deg(k) <= p}
        for k, v in other.terms.items():
            if _deg(k) <= p:
                out[k] = out[k] + v if k in out else v
        return FormWick(self.fibre, out, p, merge_holes(self.holes, other.holes))

    def __neg__(self):
        return FormWick(self.fibre, {k: -v for k, v in self.terms.items()}, self.prec, self.holes)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "FormWick":
        """Multiply by an exact scalar or, pointwise, by a scalar jet."""
        if isinstance(c, Jet):
            return FormWick(self.fibre, {k: v * c for k, v in self.terms.items()}, self.prec, self.holes)
        c = exact(c)
        return FormWick(self.fibre, {k: v.scale(c) for k, v in self.terms.items()}, self.prec, self.holes)

    def nu_shift(self, s: int) -> "FormWick":
        """Multiply by ``nu**s``."""
        return FormWick(
            self.fibre,
            {(k[0], k[1] + s, k[2], k[3]): v for k, v in self.terms.items()},
            self.prec + 2 * s,
            shift_holes(self.holes, 2 * s),
        )

    def map_jets(self, fn, prec=None) -> "FormWick":
        return FormWick(
            self.fibre,
            {k: fn(v) for k, v in self.terms.items()},
            self.prec if prec is None else prec,
            self.holes,
        )

    # the Wick product

    def _product_holes(self, other: "FormWick", p: int) -> dict:
        """Holes of a Deg-preserving product: an absent factor spoils its partners."""
        if not self.holes and not other.holes:
            return {}
        order = self.fibre.ctx.order

        def span(x):
            ds = [_deg(k) for k in x.terms] + list(x.holes)
            return (min(ds), max(ds)) if ds else None

        sa, sb = span(self), span(other)
        if sa is None or sb is None:
            return {}
        out = {}
        for d in range(sa[0] + sb[0], min(p, sa[1] + sb[1]) + 1):
            c = order
            for da, h in self.holes.items():
                if sb[0] <= d - da <= sb[1] and h < c:
                    c = h
            for db, h in other.holes.items():
                if sa[0] <= d - db <= sa[1] and h < c:
                    c = h
            if c < order:
                out[d] = c
        return out

    def wick(
        self,
        other: "FormWick",
        min_contractions: int = 0,
        project: str | None = None,
        max_deg: int | None = None,
    ) -> "FormWick":
        """Fibrewise Wick product combined with the wedge product of forms.

        ``project`` restricts the output to ``'prime'`` (no zetabar),
        ``'dprime'`` (no zeta) or ``'pi'`` (neither); the pruning happens
        before any coefficient is computed.  ``max_deg`` caps the Deg of
        the output.
        """
        self._check(other)
        fib = self.fibre
        p = min(self.prec + other.min_deg(), other.prec + self.min_deg())
        if max_deg is not None:
            p = min(p, max_deg)
        out: dict = {}
        need_b_free = project in ("prime", "pi")
        need_a_free = project in ("dprime", "pi")
        b_terms = [(k, v, _deg(k)) for k, v in other.terms.items()]
        if need_b_free:
            b_terms = [t for t in b_terms if not any(t[0][3])]
        for ka, ca in self.terms.items():
            fa, ra, aa, ba = ka
            da = _deg(ka)
            if need_a_free and any(aa):
                continue
            for kb, cb, db in b_terms:
                if da + db > p:
                    continue
                ws = wedge_sign(fa, kb[0])
                if ws is None:
                    continue
                sign, form = ws
                _, rb, ab, bb = kb
                lo = min_contractions
                hi = sum(ba)
                if need_b_free:
                    lo = max(lo, sum(ba))
                for M, rho, kappa, m, fac in _contractions(ba, ab, lo, hi):
                    alpha = _add(aa, _sub(ab, kappa))
                    beta = _add(_sub(ba, rho), bb)
                    if need_b_free and any(beta):
                        continue
                    if need_a_free and any(alpha):
                        continue
                    coeff = ca * fib.weight(M) if m else ca
                    coeff = coeff * cb
                    if sign * fac != 1:
                        coeff = coeff.scale(sign * fac)
                    key = (form, ra + rb + m, alpha, beta)
                    out[key] = out[key] + coeff if key in out else coeff
        return FormWick(fib, out, p, self._product_holes(other, p))

    def __matmul__(self, other):
        return self.wick(other)

    def commutator(self, other: "FormWick", max_deg: int | None = None) -> "FormWick":
        """``deg_a``-graded commutator ``a∘b - (-1)^{|a||b|} b∘a``.

        The contraction-free parts cancel identically and are never formed.
        """
        self._check(other)
        # terms without fibre variables are central
        a_nc = self.filter(lambda k: any(k[2]) or any(k[3]))
        b_nc = other.filter(lambda k: any(k[2]) or any(k[3]))
        out = None
        for pa, a in a_nc.decompose("deg_a").items():
            for pb, b in b_nc.decompose("deg_a").items():
                ab = a.wick(b, min_contractions=1, max_deg=max_deg)
                ba = b.wick(a, min_contractions=1, max_deg=max_deg)
                term = ab - ba if (pa * pb) % 2 == 0 else ab + ba
                out = term if out is None else out + term
        if out is None:
            p = min(self.prec + b_nc.min_deg(), other.prec + a_nc.min_deg())
            if max_deg is not None:
                p = min(p, max_deg)
            return FormWick(self.fibre, {}, p, a_nc._product_holes(b_nc, p))
        return out

    # projections

    def proj_prime(self) -> "FormWick":
        """Set zetabar = 0."""
        return self.filter(lambda k: not any(k[3]))

    def proj_dprime(self) -> "FormWick":
        """Set zeta = 0."""
        return self.filter(lambda k: not any(k[2]))

    def proj_pi(self) -> "FormWick":
        """Set zeta = zetabar = 0 (keeps forms)."""
        return self.filter(lambda k: not any(k[2]) and not any(k[3]))

    def to_scalar(self) -> "FormalScalar":
        """The form-free scalar part ``Π w`` as a formal scalar."""
        data = {}
        for (form, r, a, b), v in self.terms.items():
            if not form and not any(a) and not any(b):
                data[r] = v
        order = self.prec // 2
        ctx = self.fibre.ctx
        for d, h in self.holes.items():
            if d % 2 == 0 and d // 2 <= order:
                data.setdefault(d // 2, ctx.zero(h))
        return FormalScalar(ctx, data, order)

    # rendering

    def sorted_terms(self):
        def order(item):
            k = item[0]
            return (_deg(k), k[1], k[2], k[3], len(k[0]), k[0])

        return sorted(self.terms.items(), key=order)

    def format(self, decimal: int | None = None, big_o: bool = True, skip_zero: bool = True) -> str:
        lines = []
        for k, v in self.sorted_terms():
            if skip_zero and v.is_zero():
                continue
            lines.append(f"({v.format(decimal, big_o)}) {_key_text(k, self.n)}".rstrip())
        if not lines:
            return "0"
        return "\n".join(lines)

    def __repr__(self):
        return f"FormWick(prec={self.prec}, terms={len(self.terms)})"

    def __str__(self):
        return self.format()


def _key_text(key, n: int) -> str:
    form, r, alpha, beta = key
    parts = []
    if r:
        parts.append("nu" if r == 1 else f"nu^{r}")
    for name, exps in (("zeta", alpha), ("zetabar", beta)):
        for i, e in enumerate(exps):
            if e:
                parts.append(f"{name}{i + 1}" + (f"^{e}" if e > 1 else ""))
    text = "*".join(parts)
    if form:
        names = [f"dz{i + 1}" if i < n else f"dzbar{i - n + 1}" for i in form]
        text = (text + " " if text else "") + "^".join(names)
    return text


class FormalScalar:
    """A formal Laurent series ``sum_r nu^r f_r`` of jets, known through ``nu^order``."""

    __slots__ = ("ctx", "coeffs", "order")

    def __init__(self, ctx: JetContext, coeffs: dict, order: int):
        self.ctx = ctx
        self.order = order
        self.coeffs = {r: v for r, v in coeffs.items() if r <= order}

    @classmethod
    def of(cls, f, order: int, shift: int = 0) -> "FormalScalar":
        """``nu**shift * f`` for a jet ``f``."""
        return cls(f.ctx, {shift: f}, order)

    def __getitem__(self, r: int) -> Jet:
        if r > self.order:
            raise KeyError(f"nu^{r} is beyond the known order {self.order}")
        return self.coeffs.get(r) or self.ctx.zero()

    def min_power(self) -> int:
        return min(self.coeffs, default=self.order + 1)

    def __add__(self, other):
        if isinstance(other, Jet):
            other = FormalScalar.of(other, self.order)
        n = min(self.order, other.order)
        out = {r: v for r, v in self.coeffs.items() if r <= n}
        for r, v in other.coeffs.items():
            if r <= n:
                out[r] = out[r] + v if r in out else v
        return FormalScalar(self.ctx, out, n)

    __radd__ = __add__

    def __neg__(self):
        return FormalScalar(self.ctx, {r: -v for r, v in self.coeffs.items()}, self.order)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "FormalScalar":
        return FormalScalar(self.ctx, {r: v * c for r, v in self.coeffs.items()}, self.order)

    def nu_shift(self, s: int) -> "FormalScalar":
        return FormalScalar(self.ctx, {r + s: v for r, v in self.coeffs.items()}, self.order + s)

    def __mul__(self, other):
        """Pointwise (commutative) product of formal functions."""
        if not isinstance(other, FormalScalar):
            if isinstance(other, Jet):
                return self.scale(other)
            return self.scale(exact(other))
        n = min(self.order + other.min_power(), other.order + self.min_power())
        out = {}
        for r1, a in self.coeffs.items():
            for r2, b in other.coeffs.items():
                if r1 + r2 <= n:
                    out[r1 + r2] = out[r1 + r2] + a * b if r1 + r2 in out else a * b
        return FormalScalar(self.ctx, out, n)

    __rmul__ = __mul__

    def partial(self, i: int) -> "FormalScalar":
        return FormalScalar(self.ctx, {r: v.partial(i) for r, v in self.coeffs.items()}, self.order)

    def truncate(self, order: int) -> "FormalScalar":
        return FormalScalar(self.ctx, self.coeffs, min(order, self.order))

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.coeffs.values())

    def agrees_with(self, other) -> bool:
        return (self - other).is_zero()

    def jet_floor(self):
        return min((v.prec for v in self.coeffs.values()), default=None)

    def to_wick(self, fibre: Fibre) -> FormWick:
        z = (0,) * fibre.n
        return FormWick(fibre, {((), r, z, z): v for r, v in self.coeffs.items()}, 2 * self.order + 1)

    def format(self, decimal: int | None = None, big_o: bool = False) -> str:
        lo = min(self.coeffs, default=0)
        lines = []
        for r in range(min(lo, 0), self.order + 1):
            v = self.coeffs.get(r)
            if v is None and r < 0:
                continue
            text = v.format(decimal, big_o) if v is not None else "0"
            lines.append(f"nu^{r}: {text}")
        return "\n".join(lines)

    def __repr__(self):
        return f"FormalScalar(order={self.order}, powers={sorted(self.coeffs)})"

    def __str__(self):
        return self.format()


def wick_product(a: FormWick, b: FormWick) -> FormWick:
    return a.wick(b)


def graded_commutator(a: FormWick, b: FormWick) -> FormWick:
    return a.commutator(b)


def grading_decompose(w: FormWick, which: str) -> dict:
    return w.decompose(which)


def normal_op_apply(w: FormWick, v: FormWick) -> FormWick:
    """Action ``T_w v = Π'(w ∘ v)`` of a Wick symbol on a Fock element."""
    if not v.is_fock():
        raise ValueError("normal_op_apply needs a zetabar-free (Fock) argument")
    return w.wick(v, project="prime")


def proj_pi(w: FormWick) -> FormalScalar:
    return w.to_scalar()


def proj_pi_prime(w: FormWick) -> FormWick:
    return w.proj_prime()


def proj_pi_doubleprime(w: FormWick) -> FormWick:
    return w.proj_dprime()
