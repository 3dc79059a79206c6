"""Star product with separation of variables, built directly from a formal potential.

Left star-multiplication by ``f`` is the unique formal operator

    A = sum_r nu^r sum_alpha a_{r,alpha}(z, zbar) d_z^alpha

with holomorphic derivatives only, ``A 1 = f`` and ``[A, dΦ/dzbar^l + d/dzbar^l] = 0``
for every ``l``.  Writing ``φ_l = dΦ/dzbar^l = sum_s nu^s φ_{l,s}``, the commutation
condition at order ``nu^r`` and derivative ``d^γ`` reads

    sum_{alpha > γ} a_{r+1,alpha} C(alpha, γ) d^{alpha-γ} φ_{l,-1}
        = dbar_l a_{r,γ} - sum_{s>=0} sum_{alpha > γ} a_{r-s,alpha} C(alpha, γ) d^{alpha-γ} φ_{l,s}.

Its terms with ``|alpha| = |γ| + 1`` involve ``g_{kl}``, so taking derivative
orders from the top down makes the system triangular.  Every redundant
equation is checked, which certifies both existence and uniqueness of the
solution within truncation.
"""

from __future__ import annotations

from math import comb

from gmpy2 import mpq

from .geometry import _inverse_metric
from .jets import Jet, JetContext
from .star import StarSeries, multi_indices
from .wick import EXACT, FormalScalar, _invert_matrix

__all__ = [
    "SystemSingular",
    "FormalPotential",
    "HoloDiffOp",
    "build_left_mult",
    "oracle_star",
    "OracleStar",
]


class SystemSingular(ArithmeticError):
    """The commutation system has no solution (or the metric is degenerate)."""


class FormalPotential:
    """``Φ = (1/ν) Φ_{-1} + Φ_0 + ν Φ_1 + ...`` as ``{power: Jet}``.

    Parameters
    ----------
    parts : dict
        Jets keyed by the power of ``nu``; the ``-1`` entry is required.
    order : int, optional
        Highest power of ``nu`` that is known.  Defaults to exact data.
    """

    def __init__(self, parts: dict, order: int = EXACT):
        if -1 not in parts:
            raise ValueError("a formal potential needs its nu^-1 part")
        if min(parts) < -1:
            raise ValueError("a formal potential starts at nu^-1")
        self.parts = dict(parts)
        self.order = order
        self.ctx: JetContext = parts[-1].ctx
        n = self.ctx.n
        g0 = [[parts[-1].d(k).dbar(l).constant_term() for l in range(n)] for k in range(n)]
        try:
            _invert_matrix(g0)
        except ZeroDivisionError:
            raise SystemSingular("the nu^-1 part has a singular Hessian at the base point") from None

    @classmethod
    def trivial(cls, phi_minus_one: Jet) -> "FormalPotential":
        return cls({-1: phi_minus_one})

    def phi_bar(self, l: int) -> dict:
        """``{s: dΦ_s/dzbar^l}``."""
        return {s: p.dbar(l) for s, p in self.parts.items()}


class HoloDiffOp:
    """``sum_r nu^r sum_alpha a_{r,alpha} d_z^alpha`` known through ``nu^order``."""

    def __init__(self, ctx: JetContext, terms: dict, order: int):
        self.ctx = ctx
        self.order = order
        self.terms = {k: v for k, v in terms.items() if k[0] <= order}

    def coefficient(self, r: int, alpha) -> Jet:
        return self.terms.get((r, tuple(alpha))) or self.ctx.zero()

    def min_power(self) -> int:
        return min((k[0] for k in self.terms), default=self.order + 1)

    def apply(self, g) -> FormalScalar:
        ctx = self.ctx
        if isinstance(g, Jet):
            g = FormalScalar(ctx, {0: g}, EXACT)
        n = ctx.n
        order = min(self.order + g.min_power(), g.order + self.min_power())
        out = {}
        for (r, alpha), a in self.terms.items():
            for s, gs in g.coeffs.items():
                if r + s > order:
                    continue
                full = tuple(alpha) + (0,) * n
                term = a * gs.partial_multi(full)
                out[r + s] = out[r + s] + term if r + s in out else term
        return FormalScalar(ctx, out, order)

    def is_multiplication(self) -> bool:
        """True when every retained derivative term vanishes."""
        return all(v.is_zero() for (r, a), v in self.terms.items() if any(a))

    def format(self, decimal=None) -> str:
        lines = []
        for (r, alpha), v in sorted(self.terms.items(), key=lambda kv: (kv[0][0], sum(kv[0][1]), kv[0][1])):
            if v.is_zero():
                continue
            d = "*".join(f"d_z{k + 1}" + (f"^{e}" if e > 1 else "") for k, e in enumerate(alpha) if e)
            lines.append(f"nu^{r} ({v.format(decimal)})" + (f" {d}" if d else ""))
        return "\n".join(lines) if lines else "0"

    def __repr__(self):
        return f"HoloDiffOp(order={self.order}, terms={len(self.terms)})"


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _leq(a, b):
    return all(x <= y for x, y in zip(a, b))


def _binom(alpha, gamma) -> int:
    out = 1
    for a, c in zip(alpha, gamma):
        out *= comb(a, c)
    return out


def build_left_mult(f, phi: FormalPotential, N: int) -> HoloDiffOp:
    """Left star-multiplication by ``f`` as a holomorphic formal differential operator.

    ``f`` is a jet or a :class:`FormalScalar`; the operator is known through
    ``nu^N``.

    Raises
    ------
    SystemSingular
        When two equations that determine the same coefficient disagree.
    """
    ctx = phi.ctx
    n = ctx.n
    if isinstance(f, Jet):
        f = FormalScalar(ctx, {0: f}, EXACT)
    lo = f.min_power()
    top = min(N, f.order, phi.order + lo + 1)
    # inverse metric jets from the nu^-1 part
    gjet = [[phi.parts[-1].d(k).dbar(l) for l in range(n)] for k in range(n)]
    ginv = _inverse_metric(gjet)
    phib = [phi.phi_bar(l) for l in range(n)]
    # d^mu phi_{l,s} for holomorphic mu, cached
    dcache = {}

    def dphi(l, s, mu):
        key = (l, s, mu)
        v = dcache.get(key)
        if v is None:
            v = phib[l][s].partial_multi(tuple(mu) + (0,) * n)
            dcache[key] = v
        return v

    zero_alpha = (0,) * n
    a: dict = {}
    for r in range(lo, top + 1):
        a[(r, zero_alpha)] = f[r] if r in f.coeffs else ctx.zero()
    for r in range(lo - 1, top):
        # determine a_{r+1, beta} for 1 <= |beta| <= (r + 1) - lo, top-down
        M = r + 1 - lo
        for m in range(M - 1, -1, -1):
            solved = {}
            for gamma in _indices_of_order(n, m):
                for l in range(n):
                    e = _rhs(a, r, gamma, l, phib, dphi, n, M)
                    # subtract higher-alpha contributions from a_{r+1}
                    for alpha, coeff in _higher(a, r + 1, gamma, m + 2):
                        e = e - coeff * dphi(l, -1, _sub(alpha, gamma)).scale(_binom(alpha, gamma))
                    solved.setdefault(gamma, []).append(e)
            for gamma, es in solved.items():
                # es[l]: sum_k (gamma_k + 1) a_{r+1, gamma + e_k} g_{kl}
                for k in range(n):
                    beta = tuple(x + (1 if i == k else 0) for i, x in enumerate(gamma))
                    val = sum((es[l] * ginv[l][k] for l in range(n)), ctx.zero()).scale(
                        mpq(1, gamma[k] + 1)
                    )
                    key = (r + 1, beta)
                    if key in a:
                        if not (a[key] - val).is_zero():
                            raise SystemSingular(
                                f"inconsistent equations for the nu^{r + 1} coefficient of d^{beta}"
                            )
                        if val.prec > a[key].prec:
                            a[key] = val
                    else:
                        a[key] = val
        # the equations with |gamma| >= M have no unknowns left; they must hold
        for gamma in _indices_of_order(n, M):
            for l in range(n):
                e = _rhs(a, r, gamma, l, phib, dphi, n, M)
                if not e.is_zero():
                    raise SystemSingular(f"nu^{r} equation for d^{gamma} has no solution within truncation")
    return HoloDiffOp(ctx, {k: v for k, v in a.items() if k[0] <= top}, top)


def _indices_of_order(n, m):
    return [a for a in multi_indices(n, m) if sum(a) == m]


def _higher(a: dict, r: int, gamma, min_order: int):
    for (rr, alpha), coeff in a.items():
        if rr == r and sum(alpha) >= min_order and _leq(gamma, alpha):
            yield alpha, coeff


def _rhs(a, r, gamma, l, phib, dphi, n, M):
    """``dbar_l a_{r,γ} - sum_{s>=0} sum_{alpha>γ} a_{r-s,alpha} C(alpha,γ) d^{alpha-γ} φ_{l,s}``."""
    ctx = next(iter(a.values())).ctx
    base = a.get((r, gamma))
    e = base.dbar(l) if base is not None else ctx.zero()
    for s in phib[l]:
        if s < 0:
            continue
        for (rr, alpha), coeff in a.items():
            if rr != r - s or alpha == gamma or not _leq(gamma, alpha):
                continue
            e = e - coeff * dphi(l, s, _sub(alpha, gamma)).scale(_binom(alpha, gamma))
    return e


def oracle_star(f, g, phi: FormalPotential, N: int) -> StarSeries:
    """``f * g = L_f g`` modulo ``nu**(N+1)``."""
    return OracleStar(phi).star(f, g, N)


class OracleStar:
    """Star-product engine backed by :func:`build_left_mult`."""

    def __init__(self, phi: FormalPotential):
        self.phi = phi
        self.ctx = phi.ctx

    def star(self, f, g, N: int) -> StarSeries:
        ctx = self.ctx
        if isinstance(g, Jet):
            g = FormalScalar(ctx, {0: g}, EXACT)
        if isinstance(f, Jet):
            f = FormalScalar(ctx, {0: f}, EXACT)
        A = build_left_mult(f, self.phi, N - g.min_power())
        out = A.apply(g)
        return StarSeries.wrap(out.truncate(N), self)

    def pairwise(self, fs, gs, r_order: int) -> dict:
        out = {}
        for i, f in enumerate(fs):
            A = build_left_mult(f, self.phi, r_order)
            for j, g in enumerate(gs):
                out[(i, j)] = A.apply(g)[r_order]
        return out
