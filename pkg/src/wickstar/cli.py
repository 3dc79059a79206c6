"""Command-line front end.

Exit codes:

====  ==========================================================
0     success
1     at least one selected check failed
2     usage or spec-file error
3     bad expression or potential (syntax, log base, division,
      degenerate metric)
4     truncation budget too tight
5     coefficients changed under refinement
6     internal consistency failure (a convention bug)
====  ==========================================================
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass

from .expr import DivisionBySingular, ExprSyntaxError, LogBaseNotOne, jet_from_text
from .fedosov import FedosovStar, LiftInconsistent, ResidualNonzero
from .geometry import DegenerateMetric, build_kaehler
from .jets import JetContext, parse_scalar
from .sov_oracle import SystemSingular
from .star import bidifferential_table, multi_indices
from .verify import CHECKS, ALIASES, BudgetTooTight, CheckParams, run_suite, render_lines, render_table

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_EXPRESSION = 3
EXIT_BUDGET = 4
EXIT_UNSTABLE = 5
EXIT_INTERNAL = 6


class SpecError(ValueError):
    pass


class BudgetWarning(UserWarning):
    pass


@dataclass
class ManifoldSpec:
    dimension: int
    potential: str
    basepoint: tuple
    nu_order: int = 3
    jet_order: int | None = None
    deg_bound: int | None = None

    def __post_init__(self):
        if self.jet_order is None:
            self.jet_order = 2 * self.nu_order + 4
        if self.deg_bound is None:
            self.deg_bound = 2 * self.nu_order + 2

    def check_budget(self) -> None:
        N = self.nu_order
        if self.jet_order < 2 * N + 4:
            warnings.warn(f"jet order {self.jet_order} is below 2N+4 = {2 * N + 4}", BudgetWarning, stacklevel=2)
        if self.deg_bound < 2 * N + 2:
            warnings.warn(f"Deg bound {self.deg_bound} is below 2N+2 = {2 * N + 2}", BudgetWarning, stacklevel=2)


_KEYS = ("dimension", "potential", "basepoint", "nu_order", "jet_order", "deg_bound")


def parse_spec_text(text: str) -> ManifoldSpec:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    data = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise SpecError(f"line {lineno}: unknown key {key!r}")
        if key in data:
            raise SpecError(f"line {lineno}: duplicate key {key!r}")
        data[key] = value
    for key in ("dimension", "potential"):
        if key not in data:
            raise SpecError(f"missing key {key!r}")
    try:
        n = int(data["dimension"])
        ints = {k: int(data[k]) for k in ("nu_order", "jet_order", "deg_bound") if k in data}
    except ValueError as exc:
        raise SpecError(f"non-integer value: {exc}") from None
    if n < 1:
        raise SpecError("dimension must be positive")
    base = _parse_basepoint(data.get("basepoint"), n)
    return ManifoldSpec(n, data["potential"], base, **ints)


def _parse_basepoint(text, n: int) -> tuple:
    if text is None:
        return (0,) * (2 * n)
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        vals = [parse_scalar(p) for p in parts]
    except ValueError as exc:
        raise SpecError(f"bad base point coordinate: {exc}") from None
    if len(vals) == n:
        # zbar coordinates default to the complex conjugates
        vals = vals + [v.conjugate() if hasattr(v, "conjugate") and not isinstance(v, int) else v for v in vals]
    if len(vals) != 2 * n:
        raise SpecError(f"base point needs {n} or {2 * n} coordinates, got {len(vals)}")
    return tuple(vals)


def load_spec(path: str) -> ManifoldSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_spec_text(fh.read())
    except OSError as exc:
        raise SpecError(f"cannot read spec file: {exc}") from None


def _apply_overrides(spec: ManifoldSpec, args) -> ManifoldSpec:
    if getattr(args, "order", None) is not None:
        spec.nu_order = args.order
    if getattr(args, "jet", None) is not None:
        spec.jet_order = args.jet
    if getattr(args, "deg", None) is not None:
        spec.deg_bound = args.deg
    spec.check_budget()
    return spec


def _kaehler(spec: ManifoldSpec, J: int, T: int):
    ctx = JetContext(spec.dimension, J, spec.basepoint)
    return build_kaehler(jet_from_text(spec.potential, ctx), deg_cap=T)


def _star_at(spec, f_text, g_text, J, T):
    K = _kaehler(spec, J, T)
    E = FedosovStar(K, T=T)
    f = jet_from_text(f_text, K.ctx)
    g = jet_from_text(g_text, K.ctx)
    return E.star(f, g, spec.nu_order)


def _render_series(s, decimal=None, big_o=False) -> str:
    lines = []
    for r in range(min(s.coeffs, default=0), s.order + 1):
        v = s.coeffs.get(r)
        if v is None or v.is_zero():
            continue
        lines.append(f"nu^{r}: {v.format(decimal, big_o)}")
    return "\n".join(lines) if lines else "0"


def cmd_star(args) -> int:
    spec = _apply_overrides(load_spec(args.spec), args)
    J, T = spec.jet_order, spec.deg_bound
    s = _star_at(spec, args.f, args.g, J, T)
    if not args.no_refine:
        s2 = _star_at(spec, args.f, args.g, J + 2, T + 2)
        for r in range(s.order + 1):
            if not _same_jets(s[r], s2[r]):
                print(f"coefficient of nu^{r} changed under refinement to (Deg {T + 2}, J {J + 2})", file=sys.stderr)
                return EXIT_UNSTABLE
    print(_render_series(s, args.decimal, args.big_o))
    if args.decimal is not None:
        print(f"# decimal values are approximations to {args.decimal} places")
    return EXIT_OK


def _same_jets(a, b) -> bool:
    # contexts differ in jet order, so compare exponent vectors on common degrees
    p = min(a.prec, b.prec)
    return dict(a.truncate(p).items()) == dict(b.truncate(p).items())


def cmd_verify(args) -> int:
    spec = _apply_overrides(load_spec(args.spec), args)
    K = _kaehler(spec, spec.jet_order, spec.deg_bound)
    params = CheckParams(N=spec.nu_order, T=spec.deg_bound, seed=args.seed, samples=args.samples)
    if args.suite == "all":
        names = list(CHECKS)
    else:
        names = [s.strip() for s in args.suite.split(",") if s.strip()]
        for name in names:
            if name not in CHECKS and name not in ALIASES:
                raise SpecError(f"unknown check {name!r}; known: all, {', '.join(CHECKS)}")
    reports = run_suite(K, params, names)
    print(render_lines(reports) if args.format == "lines" else render_table(reports))
    for rep in reports:
        for note in rep.notes:
            print(f"{rep.name}: {note}")
    if any(rep.status == "budget" for rep in reports) and all(rep.status != "fail" for rep in reports):
        return EXIT_BUDGET
    return EXIT_OK if all(rep.passed for rep in reports) else EXIT_CHECK_FAILED


def cmd_rterm(args) -> int:
    spec = _apply_overrides(load_spec(args.spec), args)
    if args.q < 3:
        raise SpecError("r components start at Deg 3")
    T = max(spec.deg_bound, args.q)
    K = _kaehler(spec, spec.jet_order, T)
    E = FedosovStar(K, T=args.q)
    E.r.check()
    print(E.r.component(args.q).format(args.decimal))
    return EXIT_OK


def cmd_crtable(args) -> int:
    spec = _apply_overrides(load_spec(args.spec), args)
    if args.r < 0:
        raise SpecError("r must be non-negative")
    K = _kaehler(spec, spec.jet_order, spec.deg_bound)
    if 2 * args.r > spec.deg_bound:
        raise BudgetTooTight(f"C_{args.r} needs Deg bound >= {2 * args.r}")
    E = FedosovStar(K, T=spec.deg_bound)
    table = bidifferential_table(E, args.r, args.max_order)
    n = K.n
    idx = multi_indices(2 * n, args.max_order)
    names = K.ctx.names
    for a in idx:
        for b in idx:
            c = table[(a, b)]
            if c.is_zero():
                continue
            print(f"{_slot(a, names)} | {_slot(b, names)}: {c.format(args.decimal)}")
    return EXIT_OK


def _slot(a, names) -> str:
    parts = [f"d{nm}" + (f"^{e}" if e > 1 else "") for nm, e in zip(names, a) if e]
    return "*".join(parts) if parts else "1"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wickstar", description="Exact Wick-type Fedosov star products on Kähler charts.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--spec", required=True, metavar="PATH", help="manifold spec file")
        sp.add_argument("--order", type=int, metavar="N", help="nu order")
        sp.add_argument("--jet", type=int, metavar="J", help="jet order")
        sp.add_argument("--deg", type=int, metavar="T", help="Deg bound")
        sp.add_argument("--decimal", type=int, metavar="K", help="render approximate decimals with K places")

    s = sub.add_parser("star", help="compute f * g")
    common(s)
    s.add_argument("--f", required=True, metavar="EXPR")
    s.add_argument("--g", required=True, metavar="EXPR")
    s.add_argument("--no-refine", action="store_true", help="skip the refinement stability re-run")
    s.add_argument("--big-o", action="store_true", help="show the jet truncation of each coefficient")
    s.set_defaults(func=cmd_star)

    v = sub.add_parser("verify", help="run verification checks")
    common(v)
    v.add_argument("--suite", default="all", metavar="NAME", help="'all', a check id, or a comma list")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int, default=10)
    v.add_argument("--format", choices=("table", "lines"), default="table")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("r-term", help="print the Deg-q component of r")
    common(r)
    r.add_argument("q", type=int)
    r.set_defaults(func=cmd_rterm)

    c = sub.add_parser("cr-table", help="print the bidifferential coefficients of C_r")
    common(c)
    c.add_argument("r", type=int)
    c.add_argument("--max-order", type=int, default=2)
    c.set_defaults(func=cmd_crtable)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    with warnings.catch_warnings():
        warnings.simplefilter("always", BudgetWarning)
        warnings.showwarning = _show_warning
        try:
            return args.func(args)
        except SpecError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except (ExprSyntaxError, LogBaseNotOne, DivisionBySingular, DegenerateMetric) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_EXPRESSION
        except BudgetTooTight as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        except (ResidualNonzero, LiftInconsistent, SystemSingular) as exc:
            print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_INTERNAL


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
