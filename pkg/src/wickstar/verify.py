"""Executable checks of the identities behind the Wick-type Fedosov product.

Every check is an exact equality.  Operator identities are evaluated on all
Fock monomials ``zeta^alpha`` with ``|alpha| <= basis_degree``; algebra
identities on seeded random elements.  A check whose truncation leaves
nothing to compare reports ``budget`` instead of passing.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from math import factorial

from gmpy2 import mpq

from .fedosov import (
    FedosovStar,
    LiftInconsistent,
    RElement,
    ResidualNonzero,
    dhat_apply,
    dhat_component,
    dpp_lift,
    fedosov_D_apply,
    fedosov_D_dprime_apply,
    flat_lift,
    fock_product,
)
from .geometry import KaehlerData, delta_apply, delta_inv_apply, eta, nabla_apply, omega, theta
from .jets import I, GaussianRational, Jet, JetContext
from .sov_oracle import FormalPotential, OracleStar, build_left_mult
from .star import bidifferential_table, is_separated_slot, multi_indices
from .wick import EXACT, FormalScalar, FormWick

__all__ = [
    "BudgetTooTight",
    "CheckParams",
    "CheckReport",
    "Session",
    "CHECKS",
    "run_check",
    "run_suite",
    "render_table",
    "render_lines",
    "random_jet",
    "random_wick",
    "fock_basis",
    "wick_formula_star",
]


class BudgetTooTight(ValueError):
    """Jet or Deg truncation is too small for the requested check."""


@dataclass(frozen=True)
class CheckParams:
    """Truncation and sampling parameters shared by the checks.

    Attributes
    ----------
    N : int
        Star products are compared modulo ``nu**(N+1)``.
    T : int
        Deg bound for ``r`` and the lifts.
    samples : int
        Number of random samples for algebra identities.
    seed : int
    basis_degree : int
        Fock monomials ``zeta^alpha`` with ``|alpha| <=`` this are the test basis.
    jet_degree : int
        Polynomial degree of random coefficient jets.
    """

    N: int = 3
    T: int = 8
    samples: int = 10
    seed: int = 0
    basis_degree: int = 3
    jet_degree: int = 3


@dataclass
class CheckReport:
    name: str
    statement: str
    N: int
    T: int
    J: int
    seed: int
    sample: str
    status: str  # "pass", "fail", "budget" or "skip"
    witness: str | None = None
    floor: int | None = None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status in ("pass", "skip")


class Session:
    """Shared state for a run: the Kähler data, ``r`` and both star engines."""

    def __init__(self, K: KaehlerData, params: CheckParams):
        self.K = K
        self.params = params
        self.ctx = K.ctx
        self.fibre = K.fibre
        self._r = None
        self._fed = None
        self._oracle = None

    @property
    def r(self) -> RElement:
        if self._r is None:
            self._r = RElement(self.K).ensure(self.params.T)
        return self._r

    @property
    def fedosov(self) -> FedosovStar:
        if self._fed is None:
            self._fed = FedosovStar(self.K, r=self.r)
        return self._fed

    @property
    def oracle(self) -> OracleStar:
        if self._oracle is None:
            self._oracle = OracleStar(FormalPotential.trivial(self.K.potential))
        return self._oracle

    def rng(self, salt: str) -> random.Random:
        return random.Random(f"{self.params.seed}:{salt}")


# random data and bases


def _small_scalar(rng: random.Random, complex_ok: bool):
    re = mpq(rng.randint(-3, 3), rng.randint(1, 3))
    if complex_ok and rng.random() < 0.3:
        return GaussianRational.make(re, mpq(rng.randint(-2, 2), rng.randint(1, 2)))
    return re


def random_jet(ctx: JetContext, rng: random.Random, degree: int = 3, terms: int = 4, complex_ok: bool = False) -> Jet:
    """A random polynomial jet of total degree ``<= degree``."""
    monos = ctx.monomials(min(degree, ctx.order))
    data = {}
    for _ in range(terms):
        data[rng.choice(monos)] = _small_scalar(rng, complex_ok)
    j = ctx.from_dict(data)
    if j.is_zero():
        j = ctx.from_dict({rng.choice(monos[1:] or monos): 1})
    return j


def random_wick(fibre, rng: random.Random, deg_max: int = 3, terms: int = 4, form: int = 0,
                jet_degree: int = 2, prec: int = 8) -> FormWick:
    """A random element of Deg ``<= deg_max`` whose terms are ``form``-forms."""
    n = fibre.n
    ctx = fibre.ctx
    out = fibre.zero(prec)
    for _ in range(terms):
        r = rng.randint(0, deg_max // 2)
        left = deg_max - 2 * r
        alpha = [0] * n
        beta = [0] * n
        for _ in range(rng.randint(0, left)):
            (alpha if rng.random() < 0.5 else beta)[rng.randrange(n)] += 1
        f = tuple(sorted(rng.sample(range(2 * n), form)))
        c = random_jet(ctx, rng, jet_degree, 3)
        out = out + fibre.monomial(r, alpha, beta, f, c, prec)
    return out


def random_fock(fibre, rng, deg_max=3, terms=3, jet_degree=2, prec=8) -> FormWick:
    n = fibre.n
    out = fibre.zero(prec)
    for _ in range(terms):
        d = rng.randint(0, deg_max)
        alpha = [0] * n
        for _ in range(d):
            alpha[rng.randrange(n)] += 1
        out = out + fibre.monomial(0, alpha, None, (), random_jet(fibre.ctx, rng, jet_degree, 3), prec)
    return out


def fock_basis(fibre, degree: int, prec: int):
    """Fock monomials ``zeta^alpha`` with ``|alpha| <= degree``."""
    return [fibre.monomial(alpha=a, prec=prec) for a in multi_indices(fibre.n, degree)]


def basis_jets(ctx: JetContext, count: int):
    """The first ``count`` monomials of the jet context in graded order."""
    out = []
    d = 0
    while len(out) < count and d <= ctx.order:
        out.extend(m for m in ctx.monomials(d) if sum(m) == d)
        d += 1
    return [ctx.monomial(m) for m in out[:count]]


# the explicit Wick formula on scalar jets, for constant metrics


def _count_matrices(n: int, total: int):
    cells = [(l, k) for l in range(n) for k in range(n)]
    out = []

    def rec(i, left, acc):
        if i == len(cells) - 1:
            out.append(acc + [left])
            return
        for m in range(left + 1):
            rec(i + 1, left - m, acc + [m])

    rec(0, total, [])
    return out


def wick_formula_star(f: Jet, g: Jet, ginv_const, N: int) -> FormalScalar:
    """``sum_r nu^r/r! g^{l1k1}...g^{lrkr} dbar_{l..} f d_{k..} g`` for constant ``g^{lk}``."""
    ctx = f.ctx
    n = ctx.n
    out = {}
    for r in range(N + 1):
        acc = ctx.zero()
        for M in _count_matrices(n, r):
            w = mpq(1)
            rows = [0] * n
            cols = [0] * n
            for idx, m in enumerate(M):
                l, k = divmod(idx, n)
                for _ in range(m):
                    w = w * ginv_const[l][k]
                w = w / factorial(m)
                rows[l] += m
                cols[k] += m
            if not w:
                continue
            df = f.partial_multi((0,) * n + tuple(rows))
            dg = g.partial_multi(tuple(cols) + (0,) * n)
            acc = acc + (df * dg).scale(w)
        out[r] = acc
    return FormalScalar(ctx, out, N)


# helpers


def _witness(x) -> str | None:
    if isinstance(x, FormWick):
        for k, v in x.sorted_terms():
            return f"({v.format()}) {_key(k, x.n)}"
        return None
    if isinstance(x, FormalScalar):
        for r in sorted(x.coeffs):
            if not x.coeffs[r].is_zero():
                return f"nu^{r}: {x.coeffs[r].format()}"
        return None
    if isinstance(x, Jet):
        return None if x.is_zero() else x.format()
    return str(x)


def _key(k, n):
    from .wick import _key_text

    return _key_text(k, n) or "1"


class _Acc:
    """Collects comparisons: the first failure and the attained jet floor."""

    def __init__(self):
        self.witness = None
        self.floor = None
        self.count = 0
        self.vacuous = False
        self.notes = []

    def _floor(self, x):
        if isinstance(x, FormWick):
            f = x.jet_floor()
            if x.prec < 0:
                self.vacuous = True
        elif isinstance(x, FormalScalar):
            f = x.jet_floor()
            if f is None:
                f = x.ctx.order
            if x.order < 0:
                self.vacuous = True
        elif isinstance(x, Jet):
            f = x.prec
        else:
            return
        if f is not None:
            if f < 0:
                self.vacuous = True
            self.floor = f if self.floor is None else min(self.floor, f)

    def zero(self, x, label: str = ""):
        """Record that ``x`` should vanish."""
        self.count += 1
        self._floor(x)
        ok = x.is_zero()
        if not ok and self.witness is None:
            self.witness = (label + ": " if label else "") + (_witness(x) or "nonzero")
        return ok

    def true(self, cond: bool, label: str):
        self.count += 1
        if not cond and self.witness is None:
            self.witness = label
        return cond


def _fock_hat(w: FormWick):
    return lambda v: w.wick(v, project="prime")


def _graded_op_commutator(A, B, deg_a: int, deg_b: int, v):
    """``[A, B] v = A(Bv) - (-1)^{deg_a deg_b} B(Av)``."""
    ab = A(B(v))
    ba = B(A(v))
    return ab - ba if (deg_a * deg_b) % 2 == 0 else ab + ba


def _is_flat(K: KaehlerData) -> bool:
    return all(not any(k for k in gj.coeffs if k) for row in K.g for gj in row)


def _budget(ses: Session, star: bool):
    p = ses.params
    J = ses.ctx.order
    if p.T < 3:
        raise BudgetTooTight(f"Deg bound {p.T} is below 3")
    if star:
        if p.T < 2 * p.N + 2:
            raise BudgetTooTight(f"Deg bound {p.T} < 2N+2 = {2 * p.N + 2}")
        if J < 2 * p.N + 4:
            raise BudgetTooTight(f"jet order {J} < 2N+4 = {2 * p.N + 4}")
    elif J < 4:
        raise BudgetTooTight(f"jet order {J} is below 4")


# the checks; each returns (accumulator, sample description)


def _check_lemma1(ses: Session):
    _budget(ses, False)
    fib, T = ses.fibre, ses.params.T
    rng = ses.rng("lemma1")
    acc = _Acc()
    one = fib.scalar(1, prec=T)
    basis = fock_basis(fib, ses.params.basis_degree, T)
    for _ in range(ses.params.samples):
        w = random_wick(fib, rng, 3, 5, prec=T)
        acc.zero(_fock_hat(w)(one) - w.proj_prime(), "T_w 1 = Pi' w")
        k1 = w - w.proj_prime()
        acc.zero(_fock_hat(k1)(one), "Pi' w = 0 kills constants")
        if not w.proj_prime().is_zero():
            acc.true(not _fock_hat(w)(one).is_zero(), "Pi' w != 0 but T_w 1 = 0")
        k2 = w - w.proj_dprime()
        for v in basis:
            acc.zero(_fock_hat(k2)(v).proj_pi(), "Pi'' w = 0 gives Pi T_w v = 0")
        if not w.proj_dprime().is_zero():
            hit = any(not _fock_hat(w)(v).proj_pi().is_zero() for v in basis)
            acc.true(hit, "Pi'' w != 0 but Pi T_w v = 0 on the whole basis")
    return acc, f"{ses.params.samples} random elements, Fock basis |alpha|<={ses.params.basis_degree}"


def _check_lemma2(ses: Session):
    _budget(ses, False)
    K, fib, T = ses.K, ses.fibre, ses.params.T
    rng = ses.rng("lemma2")
    acc = _Acc()
    for v in fock_basis(fib, ses.params.basis_degree, T):
        lhs = nabla_apply(nabla_apply(v, K), K)
        rhs = K.R.wick(v, project="prime").nu_shift(-1)
        acc.zero(lhs - rhs, "nabla-hat squared")
    for _ in range(ses.params.samples):
        w = random_wick(fib, rng, 3, 4, prec=T)
        lhs = nabla_apply(nabla_apply(w, K), K)
        rhs = K.R.commutator(w).nu_shift(-1)
        acc.zero(lhs - rhs, "nabla squared = ad R / nu")
        acc.zero(delta_apply(w) - theta(K).commutator(w).nu_shift(-1), "delta = ad theta / nu")
    return acc, "Fock basis and random elements"


def _check_lemma3(ses: Session):
    _budget(ses, False)
    K, fib, T = ses.K, ses.fibre, ses.params.T
    r = ses.r
    acc = _Acc()
    acc.zero(r.residual(), "r equation residual")
    for q, c in sorted(r.components.items()):
        kills = [
            acc.zero(c.proj_prime(), f"Pi' r({q})"),
            acc.zero(c.proj_dprime(), f"Pi'' r({q})"),
            acc.zero(delta_inv_apply(c), f"delta^-1 r({q})"),
        ]
        acc.true(all(k[1] >= 0 for k in c.terms), f"negative nu power in r({q})")
        marks = ["0" if k else "NONZERO" for k in kills]
        acc.notes.append(f"r({q}): {len(c.terms)} terms; Pi' r = {marks[0]}, Pi'' r = {marks[1]}, "
                         f"delta^-1 r = {marks[2]}")
    acc.zero(delta_apply(r.component(3)) - K.R.with_prec(2), "delta r(3) = R")
    rng = ses.rng("lemma3")
    rt = r.total
    for _ in range(ses.params.samples):
        f = fib.scalar(random_jet(ses.ctx, rng, ses.params.jet_degree), prec=T)
        acc.zero(rt.wick(f, project="prime"), "r-hat on a scalar")
    for v in fock_basis(fib, ses.params.basis_degree, T):
        acc.zero(rt.wick(v, project="pi"), "Pi r-hat v")
    return acc, f"r through Deg {r.deg}, components {sorted(r.components)}"


def _check_lemma4(ses: Session):
    _budget(ses, False)
    fib, T = ses.fibre, ses.params.T
    rng = ses.rng("lemma4")
    acc = _Acc()
    for _ in range(ses.params.samples):
        f = random_jet(ses.ctx, rng, ses.params.jet_degree, complex_ok=True)
        fv = fib.scalar(f, prec=T)
        for k in range(fib.n):
            acc.zero(dhat_component(fv, k, ses.r) - fib.scalar(f.d(k), prec=T), "D-hat_k f = df/dz^k")
    return acc, f"{ses.params.samples} random jets"


def _ops_commutator_check(ses: Session, acc: _Acc, op, op_of, label: str, salt: str):
    fib, T = ses.fibre, ses.params.T
    rng = ses.rng(salt)
    basis = fock_basis(fib, ses.params.basis_degree, T)
    for i in range(ses.params.samples):
        form = i % 2
        w = random_wick(fib, rng, 3, 4, form=form, prec=T)
        W = _fock_hat(w)
        Wd = _fock_hat(op_of(w))
        for v in basis:
            lhs = _graded_op_commutator(op, W, 1, form, v)
            acc.zero(lhs - Wd(v), label)


def _check_lemma5(ses: Session):
    _budget(ses, False)
    K = ses.K
    acc = _Acc()
    _ops_commutator_check(ses, acc, lambda v: nabla_apply(v, K), lambda w: nabla_apply(w, K),
                          "[nabla-hat, w-hat] = (nabla w)-hat", "lemma5")
    return acc, f"{ses.params.samples} random elements on the Fock basis"


def _check_prop1(ses: Session):
    _budget(ses, False)
    r = ses.r
    acc = _Acc()
    _ops_commutator_check(ses, acc, lambda v: dhat_apply(v, r), lambda w: fedosov_D_apply(w, r),
                          "[D-hat, w-hat] = (Dw)-hat", "prop1")
    return acc, f"{ses.params.samples} random elements on the Fock basis"


def _check_lemma6(ses: Session):
    _budget(ses, False)
    K, fib, T = ses.K, ses.fibre, ses.params.T
    r = ses.r
    acc = _Acc()
    th = _fock_hat(theta(K))
    rh = _fock_hat(r.total)
    drh = _fock_hat(delta_apply(r.total))
    nab = lambda v: nabla_apply(v, K)  # noqa: E731
    i_nu2_omega = omega(K).scale(I).nu_shift(2)
    for v in fock_basis(fib, ses.params.basis_degree, T):
        acc.zero(_graded_op_commutator(nab, th, 1, 1, v), "[nabla-hat, theta-hat] = 0")
        lhs = _graded_op_commutator(th, rh, 1, 1, v).nu_shift(-1)
        acc.zero(lhs - drh(v), "[theta-hat, r-hat]/nu = (delta r)-hat")
        acc.zero(th(th(v)) - i_nu2_omega.wick(v), "theta-hat^2 = i nu^2 omega")
    return acc, f"Fock basis |alpha|<={ses.params.basis_degree}"


def _check_prop2(ses: Session):
    _budget(ses, False)
    K, fib, T = ses.K, ses.fibre, ses.params.T
    r = ses.r
    acc = _Acc()
    iom = omega(K).scale(I)
    for v in fock_basis(fib, ses.params.basis_degree, T):
        acc.zero(dhat_apply(dhat_apply(v, r), r) - iom.wick(v), "D-hat^2 = i omega")
    return acc, f"Fock basis |alpha|<={ses.params.basis_degree}"


def _check_prop3(ses: Session):
    _budget(ses, False)
    fib, T = ses.fibre, ses.params.T
    r = ses.r
    rng = ses.rng("prop3")
    acc = _Acc()
    for i in range(ses.params.samples):
        v = random_fock(fib, rng, 2, 3, ses.params.jet_degree, T)
        if i % 2:
            v = v + random_fock(fib, rng, 1, 2, ses.params.jet_degree, T).nu_shift(1)
        try:
            w = dpp_lift(v, r, T, verify=False)
        except LiftInconsistent as exc:
            acc.true(False, str(exc))
            continue
        acc.zero(fedosov_D_dprime_apply(w, r), "D'' w = 0")
        acc.zero(w.proj_prime() - v, "Pi' w = v")
    return acc, f"{ses.params.samples} random Fock elements (half nu-dependent)"


def _check_lemma7(ses: Session):
    _budget(ses, False)
    fib, T = ses.fibre, ses.params.T
    r = ses.r
    rng = ses.rng("lemma7")
    acc = _Acc()
    for _ in range(ses.params.samples):
        v1 = random_fock(fib, rng, 2, 3, ses.params.jet_degree, T)
        v2 = random_fock(fib, rng, 2, 3, ses.params.jet_degree, T)
        w1 = dpp_lift(v1, r, T)
        acc.zero(w1.wick(v2, project="prime") - fock_product(v1, v2, r, T), "w-hat v2 = v1 . v2")
    return acc, f"{ses.params.samples} random pairs"


def _check_lemma8(ses: Session):
    _budget(ses, False)
    K, fib, T = ses.K, ses.fibre, ses.params.T
    r = ses.r
    rng = ses.rng("lemma8")
    acc = _Acc()
    one = fib.scalar(1, prec=T)
    for l in range(fib.n):
        acc.zero(dhat_component(one, fib.n + l, r) - eta(l, K), "D-hat_l 1 = eta_l")
    for _ in range(ses.params.samples):
        v = random_fock(fib, rng, 2, 3, ses.params.jet_degree, T)
        for l in range(fib.n):
            lhs = dhat_component(v, fib.n + l, r)
            rhs = fock_product(v, eta(l, K, T), r, T)
            acc.zero(lhs - rhs, "D-hat_l v = v . eta_l")
        f = random_jet(ses.ctx, rng, ses.params.jet_degree)
        acc.zero(fock_product(v, fib.scalar(f, prec=T), r, T) - v.scale(f), "v . f = f v")
    return acc, f"{ses.params.samples} random Fock elements"


def _check_lemma9(ses: Session):
    _budget(ses, False)
    fib, T = ses.fibre, ses.params.T
    r = ses.r
    rng = ses.rng("lemma9")
    acc = _Acc()
    basis = fock_basis(fib, min(ses.params.basis_degree, 2), T)
    for _ in range(ses.params.samples):
        v = random_fock(fib, rng, 2, 2, ses.params.jet_degree, T)
        w = dpp_lift(v, r, T)
        Dw = fedosov_D_apply(w, r)
        for k in range(fib.n):
            Dkv = dhat_component(v, k, r)
            Dkw = _form_part(Dw, k)
            for u in basis:
                lhs = dhat_component(fock_product(v, u, r, T), k, r) - fock_product(v, dhat_component(u, k, r), r, T)
                acc.zero(lhs - Dkw.wick(u, project="prime"), "[D-hat_k, L_v] = (D_k w)-hat")
                acc.zero(lhs - fock_product(Dkv, u, r, T), "[D-hat_k, L_v] = L_{D-hat_k v}")
    return acc, f"{ses.params.samples} random Fock elements on the basis |alpha|<=2"


def _form_part(w: FormWick, index: int) -> FormWick:
    from .geometry import form_component

    return form_component(w, index)


def _check_prop4(ses: Session):
    _budget(ses, False)
    fib, T = ses.fibre, ses.params.T
    r = ses.r
    rng = ses.rng("prop4")
    acc = _Acc()
    for _ in range(ses.params.samples):
        f = random_jet(ses.ctx, rng, ses.params.jet_degree)
        w = flat_lift(f, r, T).w
        v = w.proj_prime()
        for k in range(fib.n):
            acc.zero(dhat_component(v, k, r), "D-hat' (Pi' w) = 0")
        w2 = dpp_lift(v, r, T)
        acc.zero(fedosov_D_apply(w2, r), "D (lift of Pi' w) = 0")
        acc.zero(w2 - w, "lift of Pi' w = w")
    return acc, f"{ses.params.samples} random functions, both inclusions"


def _check_prop5(ses: Session):
    _budget(ses, False)
    K, fib, T = ses.K, ses.fibre, ses.params.T
    r = ses.r
    acc = _Acc()
    for l in range(fib.n):
        phi_l = fib.scalar(K.potential.dbar(l), prec=EXACT).nu_shift(-1)
        Q = (phi_l + eta(l, K)).with_prec(T)
        for k in range(fib.n):
            acc.zero(dhat_component(Q, k, r), f"D-hat_{k + 1} Q_{l + 1} = 0")
    return acc, "Q_l = dPhi/dzbar^l + eta_l"


def _phi_parts(ses: Session):
    P = ses.K.potential
    big = EXACT
    n = ses.ctx.n
    bars = [FormalScalar.of(P.dbar(l), big, -1) for l in range(n)]
    holos = [FormalScalar.of(P.d(k), big, -1) for k in range(n)]
    return bars, holos


def _check_theorem(ses: Session):
    _budget(ses, True)
    N = ses.params.N
    E = ses.fedosov
    ctx = ses.ctx
    n = ctx.n
    acc = _Acc()
    bars, holos = _phi_parts(ses)
    for f in basis_jets(ctx, 10):
        for l in range(n):
            lhs = E.star(f, bars[l], N)
            rhs = (bars[l] * f + FormalScalar.of(f.dbar(l), EXACT)).truncate(N)
            acc.zero(lhs - rhs, f"f * dPhi/dzbar^{l + 1}")
            acc.zero(E.star(f, ctx.coordinate(n + l), N) - FormalScalar.of(f * ctx.coordinate(n + l), N),
                     f"f * zbar{l + 1} = f zbar{l + 1}")
        for k in range(n):
            lhs = E.star(holos[k], f, N)
            rhs = (holos[k] * f + FormalScalar.of(f.d(k), EXACT)).truncate(N)
            acc.zero(lhs - rhs, f"dPhi/dz^{k + 1} * f")
            acc.zero(E.star(ctx.coordinate(k), f, N) - FormalScalar.of(f * ctx.coordinate(k), N),
                     f"z{k + 1} * f = z{k + 1} f")
    _sov_table(ses, acc, E, max_order=2)
    return acc, "10 basis jets, both identities, separation of variables up to order 2"


def _sov_table(ses: Session, acc: _Acc, engine, max_order: int):
    n = ses.ctx.n
    N = ses.params.N
    for r in range(N + 1):
        table = bidifferential_table(engine, r, max_order)
        for (a, b), c in table.items():
            if not is_separated_slot(a, b, n):
                acc.zero(c, f"C_{r} mixed slot {a},{b}")
        if r == 1:
            ginv = ses.K.ginv
            for l in range(n):
                for k in range(n):
                    a = tuple(1 if i == n + l else 0 for i in range(2 * n))
                    b = tuple(1 if i == k else 0 for i in range(2 * n))
                    acc.zero(table[(a, b)] - ginv[l][k], f"C_1 coefficient g^({l + 1},{k + 1})")
        if r == 0:
            z = (0,) * (2 * n)
            acc.zero(table[(z, z)] - ses.ctx.one(), "C_0 = pointwise product")


def _check_sov_shape(ses: Session):
    _budget(ses, True)
    N = ses.params.N
    E = ses.fedosov
    ctx = ses.ctx
    n = ctx.n
    rng = ses.rng("sov-shape")
    acc = _Acc()
    _sov_table(ses, acc, E, max_order=2)
    for _ in range(ses.params.samples):
        f = random_jet(ctx, rng, ses.params.jet_degree)
        for k in range(n):
            for a in (ctx.coordinate(k), ctx.coordinate(k) ** 2):
                acc.zero(E.star(a, f, N) - FormalScalar.of(a * f, N), "a * f = a f")
        for l in range(n):
            for b in (ctx.coordinate(n + l), ctx.coordinate(n + l) ** 2):
                acc.zero(E.star(f, b, N) - FormalScalar.of(f * b, N), "f * b = f b")
    return acc, f"C_r tables to order 2 and {ses.params.samples} random jets"


def _check_assoc(ses: Session):
    _budget(ses, True)
    N = ses.params.N
    E = ses.fedosov
    rng = ses.rng("assoc")
    acc = _Acc()
    for _ in range(ses.params.samples):
        f, g, h = (random_jet(ses.ctx, rng, ses.params.jet_degree) for _ in range(3))
        left = E.star(E.star(f, g, N), h, N)
        right = E.star(f, E.star(g, h, N), N)
        acc.zero(left - right, "(f*g)*h = f*(g*h)")
    return acc, f"{ses.params.samples} random triples"


def _check_unit(ses: Session):
    _budget(ses, True)
    N = ses.params.N
    E = ses.fedosov
    rng = ses.rng("unit")
    acc = _Acc()
    one = ses.ctx.one()
    for _ in range(ses.params.samples):
        f = random_jet(ses.ctx, rng, ses.params.jet_degree, complex_ok=True)
        acc.zero(E.star(one, f, N) - FormalScalar.of(f, N), "1*f = f")
        acc.zero(E.star(f, one, N) - FormalScalar.of(f, N), "f*1 = f")
    return acc, f"{ses.params.samples} random jets"


def _check_oracle_equiv(ses: Session):
    _budget(ses, True)
    N = ses.params.N
    E = ses.fedosov
    O = ses.oracle
    rng = ses.rng("oracle-equiv")
    acc = _Acc()
    for _ in range(ses.params.samples):
        f, g = (random_jet(ses.ctx, rng, ses.params.jet_degree, complex_ok=True) for _ in range(2))
        acc.zero(E.star(f, g, N) - O.star(f, g, N), "fedosov = oracle")
    # left multiplication by dPhi/dz^k is dPhi/dz^k + d/dz^k
    _, holos = _phi_parts(ses)
    for k, h in enumerate(holos):
        A = build_left_mult(h, O.phi, N)
        for (rr, alpha), c in A.terms.items():
            want = ses.ctx.zero()
            if rr == -1 and not any(alpha):
                want = ses.K.potential.d(k)
            elif rr == 0 and sum(alpha) == 1 and alpha[k] == 1:
                want = ses.ctx.one()
            acc.zero(c - want, f"L of dPhi/dz^{k + 1}")
    return acc, f"{ses.params.samples} random pairs"


def _check_flat_wick(ses: Session):
    if not _is_flat(ses.K):
        return None, "metric is not constant"
    _budget(ses, True)
    N = ses.params.N
    E = ses.fedosov
    rng = ses.rng("flat-wick")
    acc = _Acc()
    ginv = [[x.constant_term() for x in row] for row in ses.K.ginv]
    count = max(ses.params.samples, 1)
    for _ in range(count):
        f, g = (random_jet(ses.ctx, rng, ses.params.jet_degree, complex_ok=True) for _ in range(2))
        acc.zero(E.star(f, g, N) - wick_formula_star(f, g, ginv, N), "fedosov = Wick formula")
    return acc, f"{count} random pairs of degree <= {ses.params.jet_degree}"


# registry: id -> (statement, function)
CHECKS = {
    "lemma1": ("Pi' w = 0 iff w-hat kills constants; Pi'' w = 0 iff Pi w-hat = 0", _check_lemma1),
    "lemma2": ("nabla-hat^2 = R-hat / nu; nabla^2 = ad(R)/nu; delta = ad(theta)/nu", _check_lemma2),
    "lemma3": ("r solves its equation; Pi' r = Pi'' r = delta^-1 r = 0; Pi r-hat = 0", _check_lemma3),
    "lemma4": ("D-hat_k f = df/dz^k", _check_lemma4),
    "lemma5": ("[nabla-hat, w-hat] = (nabla w)-hat", _check_lemma5),
    "prop1": ("[D-hat, w-hat] = (Dw)-hat", _check_prop1),
    "lemma6": ("[nabla-hat, theta-hat] = 0; [theta-hat, r-hat]/nu = (delta r)-hat; theta-hat^2 = i nu^2 omega",
               _check_lemma6),
    "prop2": ("D-hat^2 = i omega", _check_prop2),
    "prop3": ("the Deg'' recursion gives D'' w = 0 with Pi' w = v", _check_prop3),
    "lemma7": ("w-hat is left multiplication in the Fock product", _check_lemma7),
    "lemma8": ("D-hat_l is right multiplication by eta_l", _check_lemma8),
    "lemma9": ("[D-hat_k, L_v] = (D_k w)-hat = L_{D-hat_k v}", _check_lemma9),
    "prop4": ("Pi' of flat sections is D-hat'-flat, and lifts back to flat sections", _check_prop4),
    "prop5": ("D-hat_k Q_l = 0", _check_prop5),
    "theorem": ("f * dPhi/dzbar = (dPhi/dzbar + d/dzbar) f and its mirror", _check_theorem),
    "assoc": ("(f*g)*h = f*(g*h)", _check_assoc),
    "unit": ("1*f = f*1 = f", _check_unit),
    "sov-shape": ("C_r has separated slots; a*f = af, f*b = fb", _check_sov_shape),
    "oracle-equiv": ("fedosov product = separation-of-variables product", _check_oracle_equiv),
    "flat-wick": ("flat fedosov product = explicit Wick formula", _check_flat_wick),
}

ALIASES = {"lemma6i": "lemma6", "lemma6ii": "lemma6", "lemma6iii": "lemma6"}


def run_check(name: str, K: KaehlerData, params: CheckParams | None = None, session: Session | None = None) -> CheckReport:
    """Run one check; never raises for budget or consistency failures."""
    params = params or CheckParams()
    ses = session if session is not None else Session(K, params)
    key = ALIASES.get(name, name)
    if key not in CHECKS:
        raise KeyError(f"unknown check {name!r}; known: {', '.join(CHECKS)}")
    statement, fn = CHECKS[key]
    J = ses.ctx.order
    base = dict(name=name, statement=statement, N=params.N, T=params.T, J=J, seed=params.seed)
    try:
        acc, sample = fn(ses)
    except BudgetTooTight as exc:
        return CheckReport(sample="-", status="budget", witness=str(exc), **base)
    except (ResidualNonzero, LiftInconsistent) as exc:
        return CheckReport(sample="-", status="fail", witness=f"{type(exc).__name__}: {exc}", **base)
    if acc is None:
        return CheckReport(sample=sample, status="skip", **base)
    if acc.witness is not None:
        status = "fail"
    elif acc.vacuous or acc.count == 0:
        status = "budget"
        acc.witness = "truncation leaves no retained coefficients to compare"
    else:
        status = "pass"
    return CheckReport(sample=f"{sample}; {acc.count} comparisons", status=status, witness=acc.witness,
                       floor=acc.floor, notes=list(acc.notes), **base)


def run_suite(K: KaehlerData, params: CheckParams | None = None, names=None) -> list:
    """All (or the named) checks in registry order, sharing one session."""
    params = params or CheckParams()
    ses = Session(K, params)
    names = list(CHECKS) if names is None else list(names)
    return [run_check(name, K, params, ses) for name in names]


def render_table(reports) -> str:
    rows = [("check", "status", "N", "T", "J", "floor", "sample")]
    for rep in reports:
        rows.append((rep.name, rep.status, str(rep.N), str(rep.T), str(rep.J),
                     "-" if rep.floor is None else str(rep.floor), rep.sample))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]) - 1)]
    lines = []
    for idx, r in enumerate(rows):
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)) + "  " + r[-1])
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths) + "  " + "-" * len(r[-1]))
    for rep in reports:
        if rep.witness and rep.status != "pass":
            lines.append(f"{rep.name}: {rep.witness}")
    return "\n".join(lines)


def render_lines(reports) -> str:
    """One machine-readable line per check."""
    out = []
    for rep in reports:
        w = "-" if not rep.witness or rep.status == "pass" else rep.witness.replace("\n", " ")
        out.append(f"{rep.name}\t{rep.status}\tN={rep.N}\tT={rep.T}\tJ={rep.J}\tseed={rep.seed}\t{w}")
    return "\n".join(out)


def with_params(params: CheckParams, **kw) -> CheckParams:
    return replace(params, **kw)
