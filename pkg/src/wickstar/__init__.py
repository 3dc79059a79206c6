"""Exact Wick-type Fedosov star products on Kähler charts.

The main entry points are :class:`FedosovStar` (the Fedosov construction),
:class:`OracleStar` (the separation-of-variables construction, kept
independent as a cross-check) and :func:`run_suite` (the verification
checks).
"""

from .expr import jet_from_text, parse_expr
from .fedosov import FedosovStar, flat_lift, solve_r, star_product
from .geometry import build_kaehler
from .jets import GaussianRational, Jet, JetContext
from .sov_oracle import FormalPotential, OracleStar, build_left_mult, oracle_star
from .star import StarSeries
from .verify import CheckParams, run_check, run_suite
from .wick import FormalScalar, FormWick

__version__ = "0.1.0"

__all__ = [
    "CheckParams",
    "FedosovStar",
    "FormWick",
    "FormalPotential",
    "FormalScalar",
    "GaussianRational",
    "Jet",
    "JetContext",
    "OracleStar",
    "StarSeries",
    "build_kaehler",
    "build_left_mult",
    "flat_lift",
    "jet_from_text",
    "oracle_star",
    "parse_expr",
    "run_check",
    "run_suite",
    "solve_r",
    "star_product",
]
