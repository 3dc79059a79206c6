import pytest
from gmpy2 import mpq

from wickstar.jets import (
    GaussianRational,
    I,
    JetContext,
    JetShapeError,
    SingularConstantTerm,
    format_scalar,
    parse_scalar,
)

from conftest import jet


def test_gaussian_collapses_to_rational():
    x = GaussianRational(mpq(1, 2), 1) * GaussianRational(mpq(1, 2), -1)
    assert x == mpq(5, 4)
    assert not isinstance(I * I, GaussianRational)
    assert I * I == -1


def test_gaussian_division_and_conjugate():
    a = GaussianRational(1, 2)
    assert a / a == 1
    assert a.conjugate() * a == 5
    assert (1 / I) == GaussianRational(0, -1)


@pytest.mark.parametrize("text, value", [
    ("3/4", mpq(3, 4)),
    ("-2", mpq(-2)),
    ("i", GaussianRational(0, 1)),
    ("1/2-3*i", GaussianRational(mpq(1, 2), -3)),
    ("-i", GaussianRational(0, -1)),
])
def test_parse_scalar(text, value):
    assert parse_scalar(text) == value


def test_format_scalar_roundtrip():
    for v in (mpq(-7, 3), GaussianRational(2, mpq(-1, 5))):
        assert parse_scalar(format_scalar(v)) == v


def test_monomial_and_format(ctx1):
    f = ctx1.monomial((1, 1), 3) + ctx1.constant(1)
    assert f.format(big_o=False) == "1 + 3*z1*zbar1"
    assert f.format() == "1 + 3*z1*zbar1 + O(7)"


def test_product_precision_uses_valuations(ctx1):
    a = ctx1.local(0).truncate(3)          # valuation 1, prec 3
    b = ctx1.local(1) * ctx1.local(1)      # valuation 2, prec 6
    assert (a * b).prec == min(3 + 2, 6 + 1)


def test_derivative_drops_precision(ctx1):
    f = jet("z1^3*zbar1", ctx1)
    d = f.d(0)
    assert d.prec == ctx1.order - 1
    assert d.agrees_with(ctx1.monomial((2, 1), 3))
    assert f.dbar(0).dbar(0).is_zero()


def test_inverse_of_series(ctx1):
    # 1 - 2zz̄ + 3z²z̄² inverts to 1 + 2zz̄ + z²z̄² at jet order 4
    ctx = JetContext(1, 4)
    f = jet("1 - 2*z1*zbar1 + 3*z1^2*zbar1^2", ctx)
    assert f.invert() == jet("1 + 2*z1*zbar1 + z1^2*zbar1^2", ctx)


def test_singular_inverse(ctx1):
    with pytest.raises(SingularConstantTerm):
        ctx1.local(0).invert()


def test_mismatched_contexts():
    with pytest.raises(JetShapeError):
        JetContext(1, 4).one() + JetContext(2, 4).one()


def test_base_point_shift():
    ctx = JetContext(1, 4, base=(1, 1))
    f = jet("z1*zbar1", ctx)
    # in local coordinates z = 1 + x, zbar = 1 + y
    assert f.constant_term() == 1
    assert f.coefficient((1, 0)) == 1
    assert f.coefficient((1, 1)) == 1


def test_agrees_with_ignores_unknown_degrees(ctx1):
    f = jet("1 + z1", ctx1)
    g = (f + ctx1.monomial((3, 0))).truncate(2)
    assert g.agrees_with(f)
    assert not g.agrees_with(f + ctx1.monomial((1, 1)))


def test_monomial_enumeration(ctx2):
    ms = ctx2.monomials(2)
    assert len(ms) == 15
    assert ms[0] == (0, 0, 0, 0)
    assert all(sum(m) <= 2 for m in ms)
