"""Fedosov construction of the Wick-type star product and its Fock-space side.

Everything is graded: ``r`` is built one Deg-homogeneous component at a time,
flat sections are lifted Deg by Deg, and the ``D''``-flat lifts used by the
Fock product are built Deg'' by Deg''.  Each construction checks its defining
equation before returning.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import (
    KaehlerData,
    delta_apply,
    delta_dp_apply,
    delta_dp_inv_apply,
    delta_inv_apply,
    form_component,
    nabla_apply,
    nabla_dprime,
    nabla_prime,
    theta,
)
from .jets import Jet
from .star import StarSeries
from .wick import EXACT, FormalScalar, FormWick

__all__ = [
    "ResidualNonzero",
    "LiftInconsistent",
    "RElement",
    "FlatSection",
    "solve_r",
    "fedosov_D_apply",
    "fedosov_D_dprime_apply",
    "fedosov_D_prime_apply",
    "flat_lift",
    "star_product",
    "gamma",
    "dhat_apply",
    "dhat_component",
    "dpp_lift",
    "fock_product",
    "FedosovStar",
    "EXACT",
]

class ResidualNonzero(ArithmeticError):
    """The computed r fails its own equation (a convention bug)."""


class LiftInconsistent(ArithmeticError):
    """A constructed lift is not annihilated by its connection."""


class RElement:
    """Solution of ``δr = R + ∇r + (1/ν) r∘r`` with ``δ^{-1} r = 0``.

    ``components[q]`` is the Deg-``q`` part; the element is known through
    ``self.deg`` and can be extended in place with :meth:`ensure`.
    """

    def __init__(self, K: KaehlerData):
        self.K = K
        self.components: dict[int, FormWick] = {}
        self.deg = 2
        self._total = None
        self._dprime = None

    def ensure(self, deg: int) -> "RElement":
        K = self.K
        while self.deg < deg:
            q = self.deg  # compute component q + 1 from the Deg-q equation
            if q == 2:
                rhs = K.R
            else:
                rhs = nabla_apply(self.components[q], K)
                for a in range(3, q):
                    b = q + 2 - a
                    if b < 3:
                        continue
                    rhs = rhs + self.components[a].wick(
                        self.components[b], min_contractions=1, max_deg=q + 2
                    ).nu_shift(-1)
            nxt = delta_inv_apply(rhs).component("Deg", q + 1)
            self.components[q + 1] = nxt.reprec(EXACT)
            self.deg = q + 1
            self._total = None
            self._dprime = None
        return self

    @property
    def total(self) -> FormWick:
        if self._total is None:
            out = self.K.fibre.zero(self.deg)
            for c in self.components.values():
                out = out + c.with_prec(self.deg)
            self._total = out.reprec(self.deg)
        return self._total

    def component(self, q: int) -> FormWick:
        self.ensure(q)
        return self.components.get(q, self.K.fibre.zero(EXACT))

    def dprime_components(self) -> dict:
        """Deg''-components of the (0,1)-part ``r''``."""
        if self._dprime is None:
            n = self.K.n
            acc = {}
            for c in self.components.values():
                for d, part in c.filter(lambda k: k[0][0] >= n).decompose("Deg''").items():
                    acc[d] = acc[d] + part if d in acc else part
            self._dprime = {d: acc[d].reprec(EXACT) for d in sorted(acc)}
        return self._dprime

    def residual(self) -> FormWick:
        """``δr - R - ∇r - (1/ν) r∘r``, known through Deg ``deg - 1``."""
        r = self.total
        top = self.deg - 1
        rr = r.wick(r, min_contractions=1, max_deg=top + 2).nu_shift(-1)
        res = delta_apply(r) - self.K.R.with_prec(top) - nabla_apply(r, self.K) - rr
        return res.with_prec(top)

    def check(self) -> None:
        r = self.total
        if not self.residual().is_zero():
            raise ResidualNonzero("r does not satisfy its defining equation")
        if not delta_inv_apply(r).is_zero():
            raise ResidualNonzero("delta^{-1} r != 0")
        if not r.proj_prime().is_zero() or not r.proj_dprime().is_zero():
            raise ResidualNonzero("r has terms free of zeta or of zetabar")
        if any(k[1] < 0 for k in r.terms):
            raise ResidualNonzero("r has negative powers of nu")

    def __repr__(self):
        return f"RElement(deg={self.deg})"


def solve_r(K: KaehlerData, T: int, check: bool = True) -> RElement:
    """Deg-graded fixed point ``r = δ^{-1}(R + ∇r + (1/ν) r∘r)`` through Deg ``T``."""
    if T < 3:
        raise ValueError("the Deg bound must be at least 3")
    r = RElement(K).ensure(T)
    if check:
        r.check()
    return r


def fedosov_D_apply(w: FormWick, r: RElement) -> FormWick:
    """``D w = -δw + ∇w + (1/ν)[r, w]``."""
    K = r.K
    ad = r.total.commutator(w).nu_shift(-1)
    return -delta_apply(w) + nabla_apply(w, K) + ad


def fedosov_D_dprime_apply(w: FormWick, r: RElement) -> FormWick:
    """The (0,1)-part ``D'' = -δ'' + ∇'' + (1/ν)[r'', ·]``."""
    K = r.K
    n = K.n
    r2 = r.total.filter(lambda k: k[0][0] >= n)
    return -delta_dp_apply(w) + nabla_dprime(w, K) + r2.commutator(w).nu_shift(-1)


def fedosov_D_prime_apply(w: FormWick, r: RElement) -> FormWick:
    """The (1,0)-part ``D' = -δ' + ∇' + (1/ν)[r', ·]``."""
    K = r.K
    n = K.n
    r1 = r.total.filter(lambda k: k[0][0] < n)
    d1 = delta_apply(w) - delta_dp_apply(w)
    return -d1 + nabla_prime(w, K) + r1.commutator(w).nu_shift(-1)


@dataclass
class FlatSection:
    w: FormWick
    f: FormalScalar

    @property
    def scalar(self):
        return self.f


def _as_formal(f, ctx, order: int) -> FormalScalar:
    if isinstance(f, FormalScalar):
        return f
    if isinstance(f, Jet):
        return FormalScalar.of(f, order)
    return FormalScalar.of(ctx.constant(f), order)


def _lift_jet(f: Jet, r: RElement, deg: int) -> FormWick:
    K = r.K
    fib = K.fibre
    r.ensure(deg)
    comps = {0: fib.scalar(f, prec=EXACT)}
    for k in range(deg):
        x = nabla_apply(comps[k], K)
        for b in range(1, k):
            a = k + 2 - b
            if a < 3 or a > r.deg:
                continue
            x = x + r.components[a].commutator(comps[b], max_deg=k + 2).nu_shift(-1)
        comps[k + 1] = delta_inv_apply(x).component("Deg", k + 1).reprec(EXACT)
    return _assemble(comps, deg)


def _assemble(comps: dict, deg: int) -> FormWick:
    """Sum of components with disjoint supports, known through Deg ``deg``."""
    out = None
    for c in comps.values():
        out = c if out is None else out + c
    return out.reprec(deg)


def flat_lift(f, r: RElement, deg: int | None = None, verify: bool = True) -> FlatSection:
    """The D-flat section ``w`` with ``Π w = f``, known through Deg ``deg``.

    ``w = f + δ^{-1}(∇w + (1/ν)[r, w])`` solved one Deg at a time.
    """
    K = r.K
    deg = r.deg if deg is None else deg
    fs = _as_formal(f, K.ctx, deg // 2)
    w = K.fibre.zero(deg)
    for s, part in fs.coeffs.items():
        w = w + _lift_jet(part, r, deg - 2 * s).nu_shift(s)
    w = w.reprec(deg)
    if verify:
        res = fedosov_D_apply(w, r)
        if not res.is_zero():
            raise LiftInconsistent("D w != 0 for the constructed flat lift")
    return FlatSection(w, fs)


def _pi_product(wa: FormWick, wb: FormWick, max_deg: int) -> FormalScalar:
    return wa.wick(wb, project="pi", max_deg=max_deg).to_scalar()


def star_product(f, g, r: RElement, N: int) -> StarSeries:
    """``Π(w_f ∘ w_g)`` modulo ``nu**(N+1)``."""
    return FedosovStar(r.K, r=r).star(f, g, N)


def gamma(r: RElement) -> FormWick:
    """``γ = -ϑ + r``."""
    return -theta(r.K).with_prec(EXACT) + r.total


def dhat_apply(v: FormWick, r: RElement) -> FormWick:
    """Fock-space connection ``D̂ v = ∇̂ v + (1/ν) Π'(γ ∘ v)``."""
    gam = gamma(r)
    return nabla_apply(v, r.K) + gam.wick(v, project="prime").nu_shift(-1)


def dhat_component(v: FormWick, index: int, r: RElement) -> FormWick:
    """``D̂_k`` (index < n) or ``D̂_l`` (index = n + l) applied to a 0-form."""
    return form_component(dhat_apply(v, r), index)


def _dpp_lift_homog(u: FormWick, r: RElement, deg: int) -> FormWick:
    K = r.K
    r2 = r.dprime_components()
    min_dp = u.min_deg() if u.terms else 0
    comps = {0: u.reprec(EXACT)}
    q = 0
    while q < deg - min_dp:
        x = nabla_dprime(comps[q], K)
        for p in range(q + 1):
            rc = r2.get(p + 1)
            wc = comps.get(q - p)
            if rc is None or wc is None or not wc.terms:
                continue
            x = x + rc.commutator(wc, max_deg=deg + 2).nu_shift(-1)
        comps[q + 1] = delta_dp_inv_apply(x).component("Deg''", q + 1).reprec(EXACT)
        q += 1
    return _assemble(comps, deg)


def dpp_lift(v: FormWick, r: RElement, deg: int | None = None, verify: bool = True) -> FormWick:
    """The ``D''``-flat ``w`` with ``Π' w = v``, by the Deg'' recursion.

    Elements that depend on ``nu`` are lifted one ``nu``-power at a time.
    """
    if not v.is_fock() or v.form_degrees() - {0}:
        raise ValueError("dpp_lift needs a zetabar-free 0-form")
    K = r.K
    deg = min(v.prec, r.deg) if deg is None else deg
    w = K.fibre.zero(deg)
    for s, part in v.decompose("deg_nu").items():
        w = w + _dpp_lift_homog(part.nu_shift(-s), r, deg - 2 * s).nu_shift(s)
    w = w.reprec(deg)
    if verify:
        res = fedosov_D_dprime_apply(w, r)
        if not res.is_zero():
            raise LiftInconsistent("D'' w != 0 for the constructed lift")
    return w


def fock_product(v1: FormWick, v2: FormWick, r: RElement, deg: int | None = None) -> FormWick:
    """``v1 • v2 = Π'(w1 ∘ w2)`` with ``w_i`` the ``D''``-flat lifts."""
    w1 = dpp_lift(v1, r, deg)
    w2 = dpp_lift(v2, r, deg)
    return w1.wick(w2, project="prime")


class FedosovStar:
    """Star-product engine: owns ``r`` and caches flat lifts of jets."""

    def __init__(self, K: KaehlerData, T: int | None = None, r: RElement | None = None, verify: bool = True):
        self.K = K
        self.ctx = K.ctx
        self.r = r if r is not None else RElement(K)
        if T is not None:
            self.r.ensure(T)
        self.verify = verify
        self._lifts = {}

    def lift(self, f: Jet, deg: int) -> FormWick:
        key = (tuple(sorted(f.coeffs.items())), f.prec)
        hit = self._lifts.get(key)
        if hit is not None and hit.prec >= deg:
            return hit.with_prec(deg)
        w = flat_lift(f, self.r, deg, verify=self.verify).w
        self._lifts[key] = w
        return w

    def star(self, f, g, N: int) -> StarSeries:
        ctx = self.ctx
        # plain jets are exact in nu
        fs = _as_formal(f, ctx, EXACT)
        gs = _as_formal(g, ctx, EXACT)
        lo_f, lo_g = fs.min_power(), gs.min_power()
        order = min(N, fs.order + lo_g, gs.order + lo_f)
        out = FormalScalar(ctx, {}, order)
        for s1, a in fs.coeffs.items():
            for s2, b in gs.coeffs.items():
                top = order - s1 - s2
                if top < 0:
                    continue
                wa = self.lift(a, 2 * top)
                wb = self.lift(b, 2 * top)
                part = _pi_product(wa, wb, 2 * top).nu_shift(s1 + s2)
                out = out + FormalScalar(ctx, part.coeffs, order)
        return StarSeries.wrap(out, self)

    def pairwise(self, fs, gs, r_order: int) -> dict:
        out = {}
        for i, a in enumerate(fs):
            wa = self.lift(a, 2 * r_order)
            for j, b in enumerate(gs):
                wb = self.lift(b, 2 * r_order)
                out[(i, j)] = _pi_product(wa, wb, 2 * r_order)[r_order]
        return out
