import random

import pytest

from wickstar.expr import jet_from_text
from wickstar.fedosov import (
    FedosovStar,
    LiftInconsistent,
    RElement,
    ResidualNonzero,
    dpp_lift,
    fedosov_D_apply,
    fedosov_D_dprime_apply,
    flat_lift,
    fock_product,
    solve_r,
    star_product,
)
from wickstar.geometry import delta_apply
from wickstar.verify import random_fock
from wickstar.wick import FormalScalar

from conftest import FLAT1, FLAT2, FS, HYP, jet, kaehler

GENERIC = "z1*zbar1 + 1/4*z1^2*zbar1^2 + 1/3*z1^2*zbar1 + 1/2*z1*zbar1^3"


def same(a, b):
    return (a - b).is_zero()


def test_flat_r_vanishes():
    r = solve_r(kaehler(FLAT2, 2, 8, 8), 8)
    assert all(c.is_zero() for c in r.components.values())


def test_fubini_study_first_r_component():
    K = kaehler(FS, 1, 10, 8)
    r3 = solve_r(K, 3).component(3)
    assert same(delta_apply(r3), K.R)
    # R = -2 (1+zz̄)^-4 zeta zetabar dz^dzbar, so delta^-1 R = ±(1/2)(1+zz̄)^-4 (...)
    c = jet_from_text("1/2*(1 + z1*zbar1)^(-4)", K.ctx)
    assert r3.terms[((0,), 0, (1,), (2,))].agrees_with(c)
    assert r3.terms[((1,), 0, (2,), (1,))].agrees_with(-c)
    assert len(r3.terms) == 2


@pytest.mark.parametrize("pot", [FS, HYP])
def test_symmetric_spaces_have_odd_r(pot):
    r = solve_r(kaehler(pot, 1, 10, 8), 8)
    for q in (4, 6, 8):
        assert r.component(q).is_zero()
    assert not r.component(5).is_zero()


@pytest.mark.parametrize("pot", [FS, HYP, GENERIC])
def test_r_certificates(pot):
    r = solve_r(kaehler(pot, 1, 10, 8), 8)
    r.check()
    assert r.residual().is_zero()


def test_generic_potential_has_even_components():
    r = solve_r(kaehler(GENERIC, 1, 10, 8), 6)
    assert not r.component(4).is_zero()


def test_corrupted_r_is_detected():
    K = kaehler(FS, 1, 10, 8)
    good = solve_r(K, 6)
    bad = RElement(K)
    bad.components = dict(good.components)
    bad.deg = good.deg
    bad.components[3] = good.components[3].scale(2)
    with pytest.raises(ResidualNonzero):
        bad.check()
    with pytest.raises(LiftInconsistent):
        flat_lift(K.ctx.local(0), bad, 6)


def test_flat_lift_of_z():
    K = kaehler(FLAT1, 1, 8, 8)
    r = solve_r(K, 6)
    w = flat_lift(K.ctx.local(0), r, 6).w
    fib = K.fibre
    assert same(w, fib.scalar(K.ctx.local(0)) + fib.zeta(0))


def test_flat_lift_is_flat_on_curved_chart():
    K = kaehler(FS, 1, 10, 8)
    r = solve_r(K, 6)
    f = jet("z1^2*zbar1 + 3*zbar1", K.ctx)
    sec = flat_lift(f, r, 6)
    assert fedosov_D_apply(sec.w, r).is_zero()
    assert sec.w.to_scalar()[0].agrees_with(f)


def test_flat_star_of_coordinates():
    K = kaehler(FLAT1, 1, 10, 8)
    s = FedosovStar(K, T=8).star(K.ctx.local(1), K.ctx.local(0), 3)
    assert s[0] == jet("z1*zbar1", K.ctx).truncate(s[0].prec)
    assert s[1].agrees_with(K.ctx.one())
    assert s[2].is_zero() and s[3].is_zero()


def test_fubini_study_nu_coefficient():
    K = kaehler(FS, 1, 10, 8)
    s = FedosovStar(K, T=8).star(K.ctx.local(1), K.ctx.local(0), 3)
    assert s[1].agrees_with(K.ginv[0][0])


def test_unit():
    K = kaehler(FS, 1, 10, 8)
    E = FedosovStar(K, T=8)
    g = jet("z1^2*zbar1 - zbar1^2", K.ctx)
    for s in (E.star(K.ctx.one(), g, 3), E.star(g, K.ctx.one(), 3)):
        assert s[0].agrees_with(g)
        assert all(s[k].is_zero() for k in (1, 2, 3))


def test_star_product_function_matches_engine():
    K = kaehler(HYP, 1, 10, 8)
    r = solve_r(K, 8)
    f, g = jet("zbar1^2", K.ctx), jet("z1 + z1*zbar1", K.ctx)
    a = star_product(f, g, r, 3)
    b = FedosovStar(K, r=r).star(f, g, 3)
    assert all(a[k] == b[k] for k in range(4))


def test_star_of_formal_inputs():
    # f = nu * zbar gives nu * (zbar * z)
    K = kaehler(FS, 1, 10, 8)
    E = FedosovStar(K, T=8)
    zb, z = K.ctx.local(1), K.ctx.local(0)
    plain = E.star(zb, z, 2)
    shifted = E.star(FormalScalar(K.ctx, {1: zb}, 10), z, 3)
    assert shifted[0].is_zero()
    for k in range(3):
        assert shifted[k + 1].agrees_with(plain[k])


def test_dprime_lift():
    K = kaehler(FS, 1, 10, 8)
    r = solve_r(K, 8)
    rng = random.Random(4)
    for _ in range(3):
        v = random_fock(K.fibre, rng, 3, 3, prec=6)
        w = dpp_lift(v, r, 6)
        assert fedosov_D_dprime_apply(w, r).is_zero()
        assert same(w.proj_prime(), v.with_prec(w.prec))


def test_fock_product_unit():
    K = kaehler(FS, 1, 10, 8)
    r = solve_r(K, 8)
    v = random_fock(K.fibre, random.Random(1), 3, 3, prec=6)
    one = K.fibre.scalar(1, prec=6)
    assert same(fock_product(one, v, r, 6), v.with_prec(6))
