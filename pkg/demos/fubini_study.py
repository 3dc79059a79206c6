"""The Fubini-Study chart on CP^1 with potential log(1 + z zbar).

We solve the Fedosov equation for r, look at its first components, and
compare the resulting star product with the independent construction by
separation of variables.
"""

from wickstar import FedosovStar, FormalPotential, JetContext, OracleStar, build_kaehler, jet_from_text
from wickstar.star import bidifferential_table

ctx = JetContext(1, 10)
K = build_kaehler(jet_from_text("log(1 + z1*zbar1)", ctx), deg_cap=8)
print("metric g =", K.g[0][0].format())

E = FedosovStar(K, T=8)
E.r.check()  # residual, delta^-1 r = 0, Pi' r = Pi'' r = 0

# the symmetric-space structure shows up as vanishing even components
for q in range(3, 9):
    c = E.r.component(q)
    print(f"r({q}): {'0' if c.is_zero() else f'{len(c.terms)} terms'}")
print("r(3) =")
print(E.r.component(3).format())

zb, z = ctx.local(1), ctx.local(0)
s = E.star(zb, z, 2)
print("zbar * z =")
print(s.format())

# the nu^1 coefficient is the inverse metric, as separation of variables predicts
print("C_1(zbar, z) = g^{11}:", s[1].agrees_with(K.ginv[0][0]))

table = bidifferential_table(E, 2, 2)
print("nonzero C_2 slots:")
for (a, b), c in table.items():
    if not c.is_zero():
        print(f"  d^{a} f  d^{b} g : {c.format()}")

O = OracleStar(FormalPotential.trivial(K.potential))
f = jet_from_text("z1^2*zbar1 + 1/3*zbar1^2", ctx)
g = jet_from_text("z1 - 2*z1*zbar1", ctx)
diff = E.star(f, g, 3) - O.star(f, g, 3)
print("fedosov and oracle agree through nu^3:", diff.is_zero())
