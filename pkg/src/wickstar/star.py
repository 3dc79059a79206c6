"""Star-product output and extraction of bidifferential coefficients.

Any star product ``f * g = sum_r nu^r C_r(f, g)`` with

    C_r(f, g) = sum_{A,B} c^r_{A,B}(x) d^A f d^B g

is recovered on test monomials ``x^A / A!`` by a triangular solve:
``C_r(x^A/A!, x^B/B!) = sum_{A'<=A, B'<=B} c_{A',B'} x^{A-A'}/(A-A')! x^{B-B'}/(B-B')!``.
"""

from __future__ import annotations

from math import factorial

from gmpy2 import mpq

from .jets import Jet, JetContext
from .wick import FormalScalar

__all__ = ["StarSeries", "bidifferential_table", "multi_indices", "is_separated_slot"]


class StarSeries(FormalScalar):
    """Result of ``f * g``; ``engine`` can tabulate the ``C_r`` that produced it."""

    __slots__ = ("engine",)

    def __init__(self, ctx, coeffs, order, engine=None):
        super().__init__(ctx, coeffs, order)
        self.engine = engine

    @classmethod
    def wrap(cls, s: FormalScalar, engine) -> "StarSeries":
        return cls(s.ctx, s.coeffs, s.order, engine)

    def C(self, r: int) -> Jet:
        """The ``nu^r`` coefficient of this product."""
        return self[r]

    def bidifferential(self, r: int, max_order: int) -> dict:
        if self.engine is None:
            raise ValueError("no engine attached")
        return bidifferential_table(self.engine, r, max_order)


def multi_indices(nvars: int, max_order: int):
    out = []

    def rec(prefix, left):
        if len(prefix) == nvars:
            out.append(tuple(prefix))
            return
        for e in range(left + 1):
            rec(prefix + [e], left - e)

    rec([], max_order)
    return sorted(out, key=lambda a: (sum(a), a))


def _fact(a) -> int:
    out = 1
    for e in a:
        out *= factorial(e)
    return out


def _test_monomial(ctx: JetContext, a) -> Jet:
    return ctx.monomial(a, mpq(1, _fact(a)))


def bidifferential_table(engine, r: int, max_order: int) -> dict:
    """``{(A, B): c^r_{A,B}}`` for all multi-indices with ``|A|, |B| <= max_order``.

    ``engine.pairwise(fs, gs, r)`` must return ``{(i, j): C_r(fs[i], gs[j])}``.
    Multi-indices run over all ``2n`` local coordinates ``(z.., zbar..)``.
    """
    ctx = engine.ctx
    idx = multi_indices(2 * ctx.n, max_order)
    tests = [_test_monomial(ctx, a) for a in idx]
    products = engine.pairwise(tests, tests, r)
    pos = {a: i for i, a in enumerate(idx)}
    table = {}
    for a in idx:
        for b in idx:
            acc = products[(pos[a], pos[b])]
            for (a2, b2), c in table.items():
                if a2 == a and b2 == b:
                    continue
                if all(x <= y for x, y in zip(a2, a)) and all(x <= y for x, y in zip(b2, b)):
                    da = tuple(y - x for x, y in zip(a2, a))
                    db = tuple(y - x for x, y in zip(b2, b))
                    acc = acc - c * _test_monomial(ctx, da) * _test_monomial(ctx, db)
            table[(a, b)] = acc
    return table


def is_separated_slot(a, b, n: int) -> bool:
    """True when ``A`` only differentiates along ``zbar`` and ``B`` only along ``z``."""
    return not any(a[:n]) and not any(b[n:])
