"""Flat space: the Fedosov construction collapses to the Wick product.

On C^n with a constant metric the curvature vanishes, r = 0, and the flat
lift of a function is its Taylor series in the fibre variables.  The star
product is then the explicit Wick formula

    f * g = sum_r nu^r / r! g^{l1 k1} ... g^{lr kr} dbar_{l1..lr} f  d_{k1..kr} g.
"""

import random

from wickstar import FedosovStar, JetContext, build_kaehler, jet_from_text
from wickstar.fedosov import flat_lift
from wickstar.verify import random_jet, wick_formula_star

ctx = JetContext(1, 10)
K = build_kaehler(jet_from_text("z1*zbar1", ctx), deg_cap=8)
E = FedosovStar(K, T=8)

# r vanishes identically
print("r components:", {q: c.is_zero() for q, c in E.r.components.items()})

# the flat lift of z is z + zeta
w = flat_lift(ctx.local(0), E.r, 4).w
print("lift of z:", w.format(big_o=False))

# zbar * z picks up exactly one contraction
s = E.star(ctx.local(1), ctx.local(0), 3)
print("zbar * z =")
print(s.format())

# the full formula on random data, including Gaussian coefficients
rng = random.Random(0)
for _ in range(5):
    f, g = random_jet(ctx, rng, 3, complex_ok=True), random_jet(ctx, rng, 3, complex_ok=True)
    a = E.star(f, g, 4)
    b = wick_formula_star(f, g, [[1]], 4)
    print(f"{f.format(big_o=False):>32}  *  {g.format(big_o=False):<32} agrees: {(a - b).is_zero()}")
