"""Kähler data from a local potential, and the first-order operators on ``W ⊗ Λ``.

Index conventions: ``g[k][l]`` is ``g_{k lbar}``, ``ginv[l][k]`` is the
inverse ``g^{lbar k}``.  Holomorphic quantities come first everywhere
(``dz`` before ``dzbar``, ``zeta`` before ``zetabar``).
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .jets import I, Jet
from .wick import EXACT, Fibre, FormWick, _invert_matrix, shift_holes, wedge_sign

__all__ = [
    "DegenerateMetric",
    "KaehlerData",
    "build_kaehler",
    "nabla_apply",
    "nabla_prime",
    "nabla_dprime",
    "delta_apply",
    "delta_inv_apply",
    "delta_dp_apply",
    "delta_dp_inv_apply",
    "theta",
    "eta",
    "omega",
    "form_component",
]


class DegenerateMetric(ValueError):
    """The Hessian of the potential is singular at the base point."""


@dataclass(frozen=True)
class KaehlerData:
    potential: Jet
    g: list
    ginv: list
    gamma: list       # gamma[s][k][i] = Γ^s_{ki}
    gamma_bar: list   # gamma_bar[t][l][j] = Γ^t_{lj} (antiholomorphic)
    fibre: Fibre
    R: FormWick
    theta: FormWick

    @property
    def n(self) -> int:
        return self.fibre.n

    @property
    def ctx(self):
        return self.fibre.ctx


def _inverse_metric(g):
    """Inverse metric jets by Neumann iteration around the constant part."""
    n = len(g)
    ctx = g[0][0].ctx
    g0 = [[g[k][l].constant_term() for l in range(n)] for k in range(n)]
    try:
        h0 = _invert_matrix(g0)  # h0[l][k]
    except ZeroDivisionError:
        raise DegenerateMetric("Hessian of the potential is singular at the base point") from None
    prec = min(x.prec for row in g for x in row)
    H0 = [[ctx.constant(h0[l][k]) for k in range(n)] for l in range(n)]
    # E = 1 - H0 * g   (as an antiholo x antiholo matrix), valuation >= 1
    E = [[(ctx.one() if a == b else ctx.zero()) - sum((H0[a][k] * g[k][b] for k in range(n)), ctx.zero())
          for b in range(n)] for a in range(n)]
    # ginv = (sum_m E^m) H0
    total = [[ctx.one() if a == b else ctx.zero() for b in range(n)] for a in range(n)]
    power = total
    for _ in range(max(prec, 0)):
        power = [[sum((power[a][c] * E[c][b] for c in range(n)), ctx.zero()) for b in range(n)] for a in range(n)]
        total = [[total[a][b] + power[a][b] for b in range(n)] for a in range(n)]
    ginv = [[sum((total[l][c] * H0[c][k] for c in range(n)), ctx.zero()) for k in range(n)] for l in range(n)]
    return [[x.truncate(prec) for x in row] for row in ginv]


def build_kaehler(potential: Jet, deg_cap: int = 8) -> KaehlerData:
    """Metric, Christoffel symbols, ``R`` and ``ϑ`` from a potential jet."""
    ctx = potential.ctx
    n = ctx.n
    g = [[potential.d(k).dbar(l) for l in range(n)] for k in range(n)]
    ginv = _inverse_metric(g)
    fibre = Fibre(ctx, ginv, deg_cap)
    zero = ctx.zero()
    gamma = [[[sum((ginv[l][s] * g[k][l].d(i) for l in range(n)), zero)
               for i in range(n)] for k in range(n)] for s in range(n)]
    gamma_bar = [[[sum((ginv[t][k] * g[k][l].dbar(j) for k in range(n)), zero)
                   for j in range(n)] for l in range(n)] for t in range(n)]

    terms = {}
    for k in range(n):
        for l in range(n):
            alpha = tuple(1 if x == k else 0 for x in range(n))
            beta = tuple(1 if x == l else 0 for x in range(n))
            for i in range(n):
                for j in range(n):
                    c = g[k][l].d(i).dbar(j)
                    for t in range(n):
                        for s in range(n):
                            c = c - ginv[t][s] * g[k][t].d(i) * g[s][l].dbar(j)
                    terms[((i, n + j), 0, alpha, beta)] = c
    R = FormWick(fibre, terms, EXACT)
    return KaehlerData(potential, g, ginv, gamma, gamma_bar, fibre, R, theta_from_metric(fibre, g))


def theta_from_metric(fibre: Fibre, g) -> FormWick:
    n = fibre.n
    terms = {}
    for k in range(n):
        for l in range(n):
            e_k = tuple(1 if x == k else 0 for x in range(n))
            e_l = tuple(1 if x == l else 0 for x in range(n))
            z = (0,) * n
            _add_term(terms, ((k,), 0, z, e_l), g[k][l])
            _add_term(terms, ((n + l,), 0, e_k, z), -g[k][l])
    return FormWick(fibre, terms, EXACT)


def theta(K: KaehlerData) -> FormWick:
    """``ϑ = g_{kl} zetabar^l dz^k - g_{kl} zeta^k dzbar^l``."""
    return K.theta


def eta(l: int, K: KaehlerData, prec=None) -> FormWick:
    """``η_l = (1/ν) g_{kl} zeta^k``."""
    n = K.n
    z = (0,) * n
    terms = {((), -1, tuple(1 if x == k else 0 for x in range(n)), z): K.g[k][l] for k in range(n)}
    return FormWick(K.fibre, terms, EXACT if prec is None else prec)


def omega(K: KaehlerData, prec=None) -> FormWick:
    """``ω = (i/ν) g_{kl} dz^k ∧ dzbar^l`` as a scalar-valued 2-form."""
    n = K.n
    z = (0,) * n
    terms = {((k, n + l), -1, z, z): K.g[k][l].scale(I) for k in range(n) for l in range(n)}
    return FormWick(K.fibre, terms, EXACT if prec is None else prec)


def _add_term(terms: dict, key, value: Jet):
    if key in terms:
        terms[key] = terms[key] + value
    else:
        terms[key] = value


def _wedge_left(i: int, form: tuple):
    """``dx^i ∧ dx^form`` as ``(sign, form)`` or ``None``."""
    return wedge_sign((i,), form)


def _bump(t: tuple, i: int, by: int) -> tuple:
    return t[:i] + (t[i] + by,) + t[i + 1:]


def _nabla(w: FormWick, K: KaehlerData, holo: bool, antiholo: bool) -> FormWick:
    n = K.n
    out = {}
    for (form, r, alpha, beta), c in w.terms.items():
        if holo:
            for i in range(n):
                ws = _wedge_left(i, form)
                if ws is None:
                    continue
                sign, f2 = ws
                _add_term(out, (f2, r, alpha, beta), c.d(i).scale(sign))
                for s in range(n):
                    if alpha[s]:
                        base = _bump(alpha, s, -1)
                        cs = c.scale(-sign * alpha[s])
                        for kk in range(n):
                            _add_term(out, (f2, r, _bump(base, kk, 1), beta), K.gamma[s][i][kk] * cs)
        if antiholo:
            for j in range(n):
                ws = _wedge_left(n + j, form)
                if ws is None:
                    continue
                sign, f2 = ws
                _add_term(out, (f2, r, alpha, beta), c.dbar(j).scale(sign))
                for t in range(n):
                    if beta[t]:
                        base = _bump(beta, t, -1)
                        cs = c.scale(-sign * beta[t])
                        for ll in range(n):
                            _add_term(out, (f2, r, alpha, _bump(base, ll, 1)), K.gamma_bar[t][j][ll] * cs)
    return FormWick(w.fibre, out, w.prec, shift_holes(w.holes, 0, -1))


def nabla_apply(w: FormWick, K: KaehlerData) -> FormWick:
    """Kähler connection ``∇ = d - Γ ζ ∂_ζ dz - Γbar ζbar ∂_ζbar dzbar`` (left wedge)."""
    return _nabla(w, K, True, True)


def nabla_prime(w: FormWick, K: KaehlerData) -> FormWick:
    return _nabla(w, K, True, False)


def nabla_dprime(w: FormWick, K: KaehlerData) -> FormWick:
    return _nabla(w, K, False, True)


def _delta(w: FormWick, holo: bool, antiholo: bool) -> FormWick:
    n = w.n
    out = {}
    for (form, r, alpha, beta), c in w.terms.items():
        if holo:
            for k in range(n):
                if alpha[k]:
                    ws = _wedge_left(k, form)
                    if ws is not None:
                        sign, f2 = ws
                        _add_term(out, (f2, r, _bump(alpha, k, -1), beta), c.scale(sign * alpha[k]))
        if antiholo:
            for l in range(n):
                if beta[l]:
                    ws = _wedge_left(n + l, form)
                    if ws is not None:
                        sign, f2 = ws
                        _add_term(out, (f2, r, alpha, _bump(beta, l, -1)), c.scale(sign * beta[l]))
    return FormWick(w.fibre, out, w.prec - 1, shift_holes(w.holes, -1))


def _delta_inv(w: FormWick, holo: bool, antiholo: bool) -> FormWick:
    n = w.n
    out = {}
    for (form, r, alpha, beta), c in w.terms.items():
        if holo and antiholo:
            p, q = sum(alpha) + sum(beta), len(form)
        else:
            p, q = sum(beta), sum(1 for x in form if x >= n)
        if p + q == 0:
            continue
        for pos, x in enumerate(form):
            if x < n and not holo:
                continue
            sign = -1 if pos % 2 else 1
            f2 = form[:pos] + form[pos + 1:]
            if x < n:
                key = (f2, r, _bump(alpha, x, 1), beta)
            else:
                key = (f2, r, alpha, _bump(beta, x - n, 1))
            _add_term(out, key, c.scale(mpq(sign, p + q)))
    return FormWick(w.fibre, out, w.prec + 1, shift_holes(w.holes, 1))


def delta_apply(w: FormWick) -> FormWick:
    """``δ = dz^k ∂/∂ζ^k + dzbar^l ∂/∂ζbar^l``."""
    return _delta(w, True, True)


def delta_inv_apply(w: FormWick) -> FormWick:
    """``δ^{-1}``: contract forms into fibre variables, divide by ``deg_s + deg_a``."""
    return _delta_inv(w, True, True)


def delta_dp_apply(w: FormWick) -> FormWick:
    """``δ'' = dzbar^l ∂/∂ζbar^l``."""
    return _delta(w, False, True)


def delta_dp_inv_apply(w: FormWick) -> FormWick:
    """``δ''^{-1}``, normalized by ``deg''_s + deg''_a``."""
    return _delta_inv(w, False, True)


def form_component(w: FormWick, index: int) -> FormWick:
    """Interior product ``i(∂/∂x^index) w``; on a 1-form this reads off a component."""
    out = {}
    for (form, r, alpha, beta), c in w.terms.items():
        if index in form:
            pos = form.index(index)
            f2 = form[:pos] + form[pos + 1:]
            _add_term(out, (f2, r, alpha, beta), c if pos % 2 == 0 else -c)
    return FormWick(w.fibre, out, w.prec, w.holes)
