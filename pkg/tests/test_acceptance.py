"""Acceptance criteria 1 to 9.

Each test prints one ``criterion k: PASS|FAIL`` line; the lines are also
repeated in the pytest terminal summary.  Run ``python tests/test_acceptance.py``
to get only those lines.
"""

import random
import time

import pytest

from wickstar.expr import jet_from_text
from wickstar.fedosov import FedosovStar, solve_r
from wickstar.geometry import build_kaehler, delta_inv_apply
from wickstar.jets import JetContext
from wickstar.sov_oracle import FormalPotential, OracleStar
from wickstar.star import bidifferential_table, is_separated_slot
from wickstar.verify import CheckParams, basis_jets, random_jet, run_check, wick_formula_star
from wickstar.wick import EXACT, FormalScalar

FS = "log(1 + z1*zbar1)"
HYP = "-log(1 - z1*zbar1)"
CURVED = {"fubini-study": FS, "hyperbolic": HYP}

LINES = []


def report(k: int, ok: bool, detail: str):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    return ok


def chart(potential: str, n: int, J: int, T: int):
    return build_kaehler(jet_from_text(potential, JetContext(n, J)), deg_cap=T)


class Compare:
    """Coefficientwise exact comparison of formal scalars through ``nu^N``."""

    def __init__(self, N: int):
        self.N = N
        self.count = 0
        self.floor = None
        self.failures = []

    def __call__(self, a, b, label=""):
        self.count += 1
        for r in range(min(a.min_power(), b.min_power()), self.N + 1):
            x, y = a[r], b[r]
            p = min(x.prec, y.prec)
            self.floor = p if self.floor is None else min(self.floor, p)
            if p < 0 or not x.agrees_with(y):
                self.failures.append(f"{label} nu^{r}")
                return False
        return True

    @property
    def ok(self):
        return self.count > 0 and not self.failures

    def summary(self):
        msg = f"{self.count} comparisons, jet floor {self.floor}"
        if self.failures:
            msg += f", first failure {self.failures[0]}"
        return msg


def test_criterion_1_flat_reduction():
    t0 = time.perf_counter()
    N, T, J = 4, 10, 12
    cmp = Compare(N)
    cases = [
        ("C1", "z1*zbar1", 1),
        ("C2", "z1*zbar1 + z2*zbar2", 2),
        ("C2 skew", "2*z1*zbar1 + z1*zbar2 + z2*zbar1 + z2*zbar2", 2),
    ]
    for name, pot, n in cases:
        K = chart(pot, n, J, T)
        E = FedosovStar(K, T=T)
        ginv = [[x.constant_term() for x in row] for row in K.ginv]
        rng = random.Random(f"criterion1:{name}")
        for i in range(20):
            f, g = random_jet(K.ctx, rng, 3, 5, True), random_jet(K.ctx, rng, 3, 5, True)
            cmp(E.star(f, g, N), wick_formula_star(f, g, ginv, N), f"{name} pair {i}")
    dt = time.perf_counter() - t0
    ok = report(1, cmp.ok and dt < 10, f"flat C1/C2 vs Wick formula mod nu^5; {cmp.summary()}; {dt:.1f}s")
    assert ok, cmp.failures


def test_criterion_2_theorem():
    t0 = time.perf_counter()
    N, T, J = 3, 8, 10
    cmp = Compare(N)
    for name, pot in CURVED.items():
        K = chart(pot, 1, J, T)
        E = FedosovStar(K, T=T)
        P = K.potential
        dbar_phi = FormalScalar(K.ctx, {-1: P.dbar(0)}, EXACT)
        d_phi = FormalScalar(K.ctx, {-1: P.d(0)}, EXACT)
        for i, f in enumerate(basis_jets(K.ctx, 10)):
            want = FormalScalar(K.ctx, {-1: P.dbar(0) * f, 0: f.dbar(0)}, N)
            cmp(E.star(f, dbar_phi, N), want, f"{name} f*dPhi/dzbar basis {i}")
            want = FormalScalar(K.ctx, {-1: P.d(0) * f, 0: f.d(0)}, N)
            cmp(E.star(d_phi, f, N), want, f"{name} dPhi/dz*f basis {i}")
    dt = time.perf_counter() - t0
    ok = report(2, cmp.ok and dt < 60, f"f*dPhi/dzbar and mirror on FS/hyperbolic mod nu^4; {cmp.summary()}; {dt:.1f}s")
    assert ok, cmp.failures


def test_criterion_3_oracle_equivalence():
    t0 = time.perf_counter()
    N, T, J = 3, 8, 10
    cmp = Compare(N)
    for name, pot in CURVED.items():
        K = chart(pot, 1, J, T)
        E = FedosovStar(K, T=T)
        O = OracleStar(FormalPotential.trivial(K.potential))
        rng = random.Random(f"criterion3:{name}")
        for i in range(10):
            f, g = random_jet(K.ctx, rng, 3, 5, True), random_jet(K.ctx, rng, 3, 5, True)
            cmp(E.star(f, g, N), O.star(f, g, N), f"{name} pair {i}")
    dt = time.perf_counter() - t0
    ok = report(3, cmp.ok and dt < 120, f"fedosov = oracle mod nu^4; {cmp.summary()}; {dt:.1f}s")
    assert ok, cmp.failures


def test_criterion_4_r_certificates():
    problems = []
    comps = 0
    for name, pot in CURVED.items():
        r = solve_r(chart(pot, 1, 12, 8), 8, check=False)
        res = r.residual()
        if not res.is_zero() or res.prec < 7:
            problems.append(f"{name} residual")
        for q, c in sorted(r.components.items()):
            comps += 1
            for label, x in (("Pi'", c.proj_prime()), ("Pi''", c.proj_dprime()), ("delta^-1", delta_inv_apply(c))):
                if not x.is_zero():
                    problems.append(f"{name} {label} r({q})")
        if r.deg != 8:
            problems.append(f"{name} stopped at Deg {r.deg}")
    ok = report(4, not problems, f"residual zero through Deg 8, {comps} components killed by Pi', Pi'', delta^-1"
                + (f"; problems {problems}" if problems else ""))
    assert ok, problems


def _suite(k: int, names, params):
    reports = []
    for name, pot in CURVED.items():
        K = chart(pot, 1, params["J"], params["T"])
        p = CheckParams(N=3, T=params["T"], samples=10)
        for check in names:
            reports.append((name, run_check(check, K, p)))
    bad = [f"{n}/{r.name}: {r.status} {r.witness}" for n, r in reports if not r.passed]
    floors = min(r.floor for _, r in reports if r.floor is not None)
    detail = ", ".join(sorted({r.name for _, r in reports})) + f" on FS/hyperbolic; min jet floor {floors}"
    ok = report(k, not bad, detail + (f"; {bad}" if bad else ""))
    assert ok, bad


def test_criterion_5_curvature_identities():
    _suite(5, ["lemma2", "prop2", "lemma6"], {"J": 12, "T": 8})


def test_criterion_6_associativity():
    t0 = time.perf_counter()
    N, T, J = 3, 8, 10
    cmp = Compare(N)
    K = chart(FS, 1, J, T)
    E = FedosovStar(K, T=T)
    rng = random.Random("criterion6")
    for i in range(10):
        f, g, h = (random_jet(K.ctx, rng, 3, 4, True) for _ in range(3))
        cmp(E.star(E.star(f, g, N), h, N), E.star(f, E.star(g, h, N), N), f"triple {i}")
    dt = time.perf_counter() - t0
    ok = report(6, cmp.ok, f"(f*g)*h = f*(g*h) on FS mod nu^4; {cmp.summary()}; {dt:.1f}s")
    assert ok, cmp.failures


def test_criterion_7_separation_of_variables():
    N, T, J = 3, 8, 10
    cmp = Compare(N)
    mixed = 0
    bad_slots = []
    for name, pot in CURVED.items():
        K = chart(pot, 1, J, T)
        E = FedosovStar(K, T=T)
        ctx = K.ctx
        for r in range(N + 1):
            for (a, b), c in bidifferential_table(E, r, 2).items():
                if not is_separated_slot(a, b, 1):
                    mixed += 1
                    if not c.is_zero():
                        bad_slots.append(f"{name} C_{r} {a},{b}")
        rng = random.Random(f"criterion7:{name}")
        z, zb = ctx.coordinate(0), ctx.coordinate(1)
        for i in range(10):
            f = random_jet(ctx, rng, 3, 4, True)
            for a in (z, z * z):
                cmp(E.star(a, f, N), FormalScalar(ctx, {0: a * f}, N), f"{name} a*f {i}")
            for b in (zb, zb * zb):
                cmp(E.star(f, b, N), FormalScalar(ctx, {0: f * b}, N), f"{name} f*b {i}")
    ok = report(7, cmp.ok and not bad_slots,
                f"{mixed} mixed C_r slots vanish; a*f = af, f*b = fb; {cmp.summary()}"
                + (f"; bad slots {bad_slots[:3]}" if bad_slots else ""))
    assert ok, (bad_slots, cmp.failures)


def test_criterion_8_fock_layer():
    _suite(8, ["prop3", "lemma7", "lemma8", "prop5"], {"J": 12, "T": 8})


def _same_on_common(a, b):
    p = min(a.prec, b.prec)
    return p, dict(a.truncate(p).items()) == dict(b.truncate(p).items())


def test_criterion_9_refinement_stability():
    N = 3
    changed = []
    count = 0
    floor = None
    for name, pot in CURVED.items():
        coarse = FedosovStar(chart(pot, 1, 10, 8), T=8)
        fine = FedosovStar(chart(pot, 1, 12, 10), T=10)
        rng = random.Random(f"criterion9:{name}")
        for i in range(10):
            data = [random_jet(coarse.ctx, rng, 3, 4, True) for _ in range(2)]
            texts = [d.format(big_o=False) for d in data]
            f2, g2 = (jet_from_text(t, fine.ctx) for t in texts)
            a = coarse.star(data[0], data[1], N)
            b = fine.star(f2, g2, N)
            for r in range(N + 1):
                count += 1
                p, same = _same_on_common(a[r], b[r])
                floor = p if floor is None else min(floor, p)
                if not same or p < 0:
                    changed.append(f"{name} pair {i} nu^{r}")
    ok = report(9, not changed, f"(N=3,T=8,J=10) vs (T=10,J=12): {count} coefficients unchanged, jet floor {floor}"
                + (f"; changed {changed[:3]}" if changed else ""))
    assert ok, changed


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
