import random

import pytest
from gmpy2 import mpq

from wickstar.jets import JetContext
from wickstar.verify import random_fock, random_wick
from wickstar.wick import EXACT, Fibre, FormWick, normal_op_apply, wedge_sign

from conftest import FS, kaehler


def same(a, b):
    return (a - b).is_zero()


@pytest.fixture
def flat():
    return Fibre.constant(JetContext(1, 6), deg_cap=8)


@pytest.fixture
def flat2():
    return Fibre.constant(JetContext(2, 6), deg_cap=8)


def test_zetabar_zeta_contracts(flat):
    zb, z = flat.zetabar(0), flat.zeta(0)
    expected = flat.monomial(alpha=(1,), beta=(1,)) + flat.monomial(r=1)
    assert same(zb @ z, expected)
    # no contraction the other way round
    assert same(z @ zb, flat.monomial(alpha=(1,), beta=(1,)))


def test_commutator_of_generators(flat2):
    for l in range(2):
        for k in range(2):
            c = flat2.zetabar(l).commutator(flat2.zeta(k))
            assert same(c, flat2.monomial(r=1).scale(1 if k == l else 0))


def test_double_contraction(flat):
    # zbar^2 o zeta^2 = zeta^2 zbar^2 + 4 nu zeta zbar + 2 nu^2
    zb2 = flat.monomial(beta=(2,))
    z2 = flat.monomial(alpha=(2,))
    expected = (flat.monomial(alpha=(2,), beta=(2,)) + flat.monomial(1, (1,), (1,)).scale(4)
                + flat.monomial(r=2).scale(2))
    assert same(zb2 @ z2, expected)


def test_curved_fibre_weighs_by_inverse_metric():
    K = kaehler(FS, 1, 8, 8)
    fib = K.fibre
    prod = fib.zetabar(0) @ fib.zeta(0)
    nu_part = prod.component("deg_nu", 1)
    assert same(nu_part, fib.monomial(r=1, coeff=K.ginv[0][0]))


def test_wedge_sign():
    assert wedge_sign((0,), (1,)) == (1, (0, 1))
    assert wedge_sign((1,), (0,)) == (-1, (0, 1))
    assert wedge_sign((0,), (0,)) is None


def test_one_forms_anticommute(flat):
    a, b = flat.dz(0), flat.dzbar(0)
    assert same(a @ b, -(b @ a))
    assert (a @ a).is_zero()


def test_wick_associative_on_curved_fibre():
    fib = kaehler(FS, 1, 8, 8).fibre
    rng = random.Random(5)
    for _ in range(4):
        a, b, c = (random_wick(fib, rng, 3, 3, prec=6) for _ in range(3))
        assert same((a @ b) @ c, a @ (b @ c))


def test_deg_precision_of_product(flat):
    a = flat.zeta(0, prec=5)
    b = flat.zetabar(0, prec=7)
    assert (a @ b).prec == min(5 + 1, 7 + 1)


def test_decompose_and_projections(flat):
    w = flat.monomial(alpha=(1,)) + flat.monomial(beta=(2,)) + flat.monomial(r=1) + flat.monomial(0, (1,), (1,))
    parts = w.decompose("Deg")
    assert sorted(parts) == [1, 2]
    assert same(w.proj_prime(), flat.monomial(alpha=(1,)) + flat.monomial(r=1))
    assert same(w.proj_dprime(), flat.monomial(beta=(2,)) + flat.monomial(r=1))
    s = w.to_scalar()
    assert s[1].agrees_with(flat.ctx.one()) and s[0].is_zero()
    assert same(w.proj_pi(), flat.monomial(r=1))


def test_fock_action_represents_wick_product():
    fib = kaehler(FS, 1, 8, 8).fibre
    rng = random.Random(11)
    for _ in range(4):
        a = random_wick(fib, rng, 2, 3, prec=6)
        b = random_wick(fib, rng, 2, 3, prec=6)
        v = random_fock(fib, rng, 2, 2, prec=6)
        lhs = normal_op_apply(a @ b, v)
        rhs = normal_op_apply(a, normal_op_apply(b, v))
        assert same(lhs, rhs)


def test_fock_action_rejects_non_fock(flat):
    with pytest.raises(ValueError):
        normal_op_apply(flat.zeta(0), flat.zetabar(0))


def test_nu_shift_moves_deg(flat):
    w = flat.zeta(0, prec=5).nu_shift(1)
    assert w.prec == 7
    assert next(iter(w.terms))[1] == 1


def test_holes_truncate_partners():
    # a dropped zero jet known only to degree 2 limits what later sums know at that Deg
    fib = Fibre.constant(JetContext(1, 6), deg_cap=8)
    ctx = fib.ctx
    c = ctx.monomial((1, 0), 1) + ctx.monomial((3, 0), 1)
    w = FormWick(fib, {((), 0, (1,), (0,)): ctx.zero(2), ((), 0, (0,), (1,)): c}, EXACT)
    assert w.hole(1) == 2
    assert w.terms[((), 0, (0,), (1,))].prec == 2
    assert w.jet_floor() == 2


def test_format_is_deterministic(flat):
    w = flat.monomial(alpha=(1,), coeff=mpq(1, 2)) + flat.dz(0)
    assert w.format(big_o=False) == w.format(big_o=False)
    assert "zeta1" in w.format()
