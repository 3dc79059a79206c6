"""Algebraic identities on random exact data, driven by hypothesis."""

from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from wickstar.geometry import delta_apply, delta_inv_apply, nabla_apply
from wickstar.jets import GaussianRational, JetContext
from wickstar.wick import Fibre, normal_op_apply

from conftest import FS, kaehler

CTX = JetContext(2, 5)
FIB_FLAT = Fibre.constant(CTX, g=[[2, 1], [1, 1]], deg_cap=6)
K_FS = kaehler(FS, 1, 8, 6)

rationals = st.builds(mpq, st.integers(-4, 4), st.integers(1, 4))
scalars = st.one_of(rationals, st.builds(GaussianRational.make, rationals, rationals))


@st.composite
def exps(draw, nvars, total):
    e = [0] * nvars
    for _ in range(draw(st.integers(0, max(total, 0)))):
        e[draw(st.integers(0, nvars - 1))] += 1
    return tuple(e)


@st.composite
def jets(draw, ctx=CTX, degree=3):
    data = draw(st.dictionaries(exps(2 * ctx.n, degree), scalars, max_size=4))
    return ctx.from_dict(data)


@st.composite
def wick_elements(draw, fib, form_size=None, max_deg=3, jet_degree=2, prec=5):
    n = fib.n
    out = fib.zero(prec)
    for _ in range(draw(st.integers(1, 3))):
        r = draw(st.integers(0, 1))
        alpha = draw(exps(n, max_deg - 2 * r))
        beta = draw(exps(n, max_deg - 2 * r - sum(alpha)))
        size = draw(st.integers(0, 2)) if form_size is None else form_size
        form = tuple(sorted(draw(st.sets(st.integers(0, 2 * n - 1), min_size=size, max_size=size))))
        c = draw(jets(fib.ctx, jet_degree))
        out = out + fib.monomial(r, alpha, beta, form, c, prec)
    return out


def fock(fib, prec=5):
    return wick_elements(fib, form_size=0, prec=prec).map(lambda w: w.proj_prime())


def same(a, b):
    return (a - b).is_zero()


@settings(max_examples=40, deadline=None)
@given(jets(), jets(), jets())
def test_jet_ring_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert (a - a).is_zero()


@settings(max_examples=40, deadline=None)
@given(jets(), jets())
def test_leibniz(a, b):
    for i in range(4):
        assert (a * b).partial(i).agrees_with(a.partial(i) * b + a * b.partial(i))


@settings(max_examples=30, deadline=None)
@given(wick_elements(FIB_FLAT), wick_elements(FIB_FLAT), wick_elements(FIB_FLAT))
def test_wick_associative(a, b, c):
    assert same((a @ b) @ c, a @ (b @ c))


@settings(max_examples=20, deadline=None)
@given(wick_elements(K_FS.fibre), wick_elements(K_FS.fibre), wick_elements(K_FS.fibre))
def test_wick_associative_curved(a, b, c):
    assert same((a @ b) @ c, a @ (b @ c))


@settings(max_examples=30, deadline=None)
@given(wick_elements(FIB_FLAT), wick_elements(FIB_FLAT), wick_elements(FIB_FLAT))
def test_graded_jacobi(a, b, c):
    # homogeneous form degrees keep the graded signs simple
    a, b, c = (x.filter(lambda k: len(k[0]) == 0) for x in (a, b, c))
    lhs = a.commutator(b.commutator(c))
    rhs = a.commutator(b).commutator(c) + b.commutator(a.commutator(c))
    assert same(lhs, rhs)


@settings(max_examples=40, deadline=None)
@given(wick_elements(FIB_FLAT))
def test_delta_squares(w):
    assert delta_apply(delta_apply(w)).is_zero()
    assert delta_inv_apply(delta_inv_apply(w)).is_zero()


@settings(max_examples=40, deadline=None)
@given(wick_elements(FIB_FLAT))
def test_homotopy(w):
    w = w - w.filter(lambda k: not k[0] and not any(k[2]) and not any(k[3]))
    assert same(delta_apply(delta_inv_apply(w)) + delta_inv_apply(delta_apply(w)), w)


@settings(max_examples=20, deadline=None)
@given(wick_elements(K_FS.fibre), wick_elements(K_FS.fibre))
def test_nabla_is_graded_derivation(a, b):
    a = a.filter(lambda k: len(k[0]) == 0)
    lhs = nabla_apply(a @ b, K_FS)
    rhs = nabla_apply(a, K_FS) @ b + a @ nabla_apply(b, K_FS)
    assert same(lhs, rhs)


@settings(max_examples=30, deadline=None)
@given(wick_elements(FIB_FLAT, 0), wick_elements(FIB_FLAT, 0), fock(FIB_FLAT))
def test_fock_representation(a, b, v):
    assert same(normal_op_apply(a @ b, v), normal_op_apply(a, normal_op_apply(b, v)))
