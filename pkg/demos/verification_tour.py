"""Run every check on the Poincare disc and on a potential without symmetry."""

import time

from wickstar import CheckParams, JetContext, build_kaehler, jet_from_text, run_suite
from wickstar.verify import render_table

charts = {
    "hyperbolic": "-log(1 - z1*zbar1)",
    "generic": "z1*zbar1 + 1/4*z1^2*zbar1^2 + 1/3*z1^2*zbar1 + 1/2*z1*zbar1^3",
}

for name, pot in charts.items():
    K = build_kaehler(jet_from_text(pot, JetContext(1, 10)), deg_cap=8)
    t0 = time.perf_counter()
    reports = run_suite(K, CheckParams(N=3, T=8, samples=3))
    print(f"== {name} ({time.perf_counter() - t0:.1f}s)")
    print(render_table(reports))
    print()
