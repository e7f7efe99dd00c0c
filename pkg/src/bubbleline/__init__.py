"""Double bubbles on the real line with a symmetric log-convex density.

The library decides, for a pair of prescribed volumes, whether the
perimeter-minimizing arrangement is a double interval or a triple
interval, locates the tie curve between the two, and classifies the
density's blowup regime from its asymptotic slope and doubling defect.
"""

from .bubbles import (
    BlowupResult,
    BubbleAnalysis,
    Regime,
    TieCurve,
    TieSample,
    Verdict,
    blowup_time,
    classify,
    mu,
    mu_limit,
    perimeter_double,
    perimeter_triple,
    tie_curve,
    tie_volume,
)
from .config import Config, DEFAULT_CONFIG
from .density import Coordinate, DensityModel, ValidationReport
from .equilibrium import invert_slope, solve_equilibrium, solve_v_star
from .errors import BubblelineError
from .extended import ExtendedReal
from .limits import (
    AsymptoticProfile,
    LimitEstimate,
    LimitVerdict,
    asymptotic_profile,
    estimate_L,
    estimate_M,
)
from .oracle import OracleResult, brute_force_minimize, reference_minimum

__version__ = "0.1.0"

__all__ = [
    "AsymptoticProfile",
    "BlowupResult",
    "BubbleAnalysis",
    "BubblelineError",
    "Config",
    "Coordinate",
    "DEFAULT_CONFIG",
    "DensityModel",
    "ExtendedReal",
    "LimitEstimate",
    "LimitVerdict",
    "OracleResult",
    "Regime",
    "TieCurve",
    "TieSample",
    "ValidationReport",
    "Verdict",
    "asymptotic_profile",
    "blowup_time",
    "brute_force_minimize",
    "classify",
    "estimate_L",
    "estimate_M",
    "invert_slope",
    "mu",
    "mu_limit",
    "perimeter_double",
    "perimeter_triple",
    "reference_minimum",
    "solve_equilibrium",
    "solve_v_star",
    "tie_curve",
    "tie_volume",
    "__version__",
]
