"""Double versus triple interval: perimeters, the gap mu, and the tie curve.

For prescribed region volumes 0 < V1 <= V2 the two candidate minimizers
are the double interval (two adjacent intervals placed at equilibrium)
and the centered triple interval (region 2 split symmetrically around
region 1).  Writing f for the volume-coordinate density and t for the
equilibrium endpoint from solve_equilibrium,

    P2 = f(t) + f(t + V1) + f(t + V1 + V2)
    P3 = 2 f(V1/2) + 2 f((V1 + V2)/2)
    mu = P3 - P2.

mu > 0 means the double interval wins, mu < 0 the triple; ties within a
band proportional to 1e-9 (1 + P2) are reported as such rather than
forced to a side.

As V2 grows, mu approaches the limiting gap

    mu_l(V1) = 2 f(V1/2) - f(V*) - f(V* + V1) - V* L - M,

finite exactly when the doubling defect M is finite (it is -inf when
M = inf).  mu_l is nondecreasing in V1 and its sign change defines the
blowup volume V0: below V0 a tie volume lambda(V1) exists (the unique V2
with mu = 0) and above it the triple interval wins for every V2.  The
three regimes are V0 = 0 (double always loses ties at infinity, s0 >= 0
at the origin), 0 < V0 < inf, and V0 = inf (M = inf, no blowup).

All sign changes are found by plain bisection with doubling expansions,
per the package-wide solver policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .density import DensityModel
from .equilibrium import (
    EquilibriumSolution,
    bisect_root,
    invert_slope,
    solve_equilibrium,
    solve_v_star,
)
from .errors import (
    DiagnosticsError,
    InconclusiveLimitsError,
    NoTieError,
    UndefinedQuantityError,
    UsageError,
)
from .extended import ExtendedReal, NEG_INF, POS_INF
from .limits import AsymptoticProfile


class Verdict(Enum):
    DOUBLE = "Double"
    TRIPLE = "Triple"
    TIE = "Tie"


class Regime(Enum):
    ALWAYS_DOUBLE = "AlwaysDouble"
    FINITE_BLOWUP = "FiniteBlowup"
    NO_BLOWUP = "NoBlowup"


@dataclass(frozen=True)
class BubbleAnalysis:
    v1: float
    v2: float
    v_tilde: float
    p2: float
    p3: float
    mu: float
    tie_band: float
    verdict: Verdict


@dataclass(frozen=True)
class BlowupResult:
    regime: Regime
    v0: ExtendedReal
    bracket: Optional[tuple[float, float]]
    gap_at_zero: Optional[float]  # limit of mu_l toward V1 = 0, when defined


@dataclass(frozen=True)
class TieSample:
    v1: float
    tie_v2: float
    mu_at_tie: float


@dataclass(frozen=True)
class TieCurve:
    samples: tuple[TieSample, ...]
    regime: Regime
    v0: ExtendedReal


def perimeter_triple(model: DensityModel, v1: float, v2: float) -> float:
    _check_volumes(v1, v2)
    model.require_valid()
    f = model.density_in_volume
    return 2.0 * f(v1 / 2.0) + 2.0 * f((v1 + v2) / 2.0)


def perimeter_double(model: DensityModel, v1: float, v2: float) -> float:
    return _double_perimeter(model, v1, v2, solve_equilibrium(model, v1, v2))


def _double_perimeter(
    model: DensityModel, v1: float, v2: float, eq: EquilibriumSolution
) -> float:
    f = model.density_in_volume
    t = eq.v_tilde
    return f(t) + f(t + v1) + f(t + v1 + v2)


def mu(model: DensityModel, v1: float, v2: float) -> float:
    return classify(model, v1, v2).mu


def classify(model: DensityModel, v1: float, v2: float) -> BubbleAnalysis:
    """Full comparison at one volume pair, with the tie-band verdict."""
    _check_volumes(v1, v2)
    model.require_valid()
    eq = solve_equilibrium(model, v1, v2)
    p2 = _double_perimeter(model, v1, v2, eq)
    p3 = perimeter_triple(model, v1, v2)
    gap = p3 - p2
    band = model.config.tie_band_scale * (1.0 + p2)
    if gap > band:
        verdict = Verdict.DOUBLE
    elif gap < -band:
        verdict = Verdict.TRIPLE
    else:
        verdict = Verdict.TIE
    return BubbleAnalysis(v1, v2, eq.v_tilde, p2, p3, gap, band, verdict)


def _check_volumes(v1: float, v2: float) -> None:
    if not (math.isfinite(v1) and math.isfinite(v2)):
        raise UsageError("region volumes must be finite")
    if not 0 < v1 <= v2:
        raise UsageError(
            f"region volumes must satisfy 0 < v1 <= v2, got v1={v1!r} v2={v2!r}"
        )


def _require_settled(profile: AsymptoticProfile) -> None:
    for name, estimate in (("L", profile.L), ("M", profile.M)):
        if not estimate.settled:
            raise InconclusiveLimitsError(
                f"asymptotic {name} is inconclusive: {estimate.note}"
            )


def mu_limit(
    model: DensityModel, profile: AsymptoticProfile, v1: float
) -> ExtendedReal:
    """Limit of mu(v1, V2) as V2 grows."""
    if not (math.isfinite(v1) and v1 > 0):
        raise UsageError(f"region volume must be positive and finite, got {v1!r}")
    _require_settled(profile)
    if profile.L.value.is_pos_inf:
        raise UndefinedQuantityError(
            "the limiting gap needs a finite asymptotic slope"
        )
    if profile.M.value.is_pos_inf:
        return NEG_INF
    big_l = profile.L.finite_value()
    big_m = profile.M.finite_value()
    star = solve_v_star(model, big_l, v1)
    f = model.density_in_volume
    return ExtendedReal(
        2.0 * f(v1 / 2.0)
        - f(star.v_star)
        - f(star.v_star + v1)
        - star.v_star * big_l
        - big_m
    )


def _gap_at_zero(model: DensityModel, big_l: float, big_m: float) -> float:
    """Limit of mu_l as V1 drops to zero: 2f(0) - 2f(Vh) + Vh L - M at the
    half-slope point f'(Vh) = L/2."""
    half = invert_slope(model, big_l / 2.0)
    f = model.density_in_volume
    return 2.0 * f(0.0) - 2.0 * f(half) + half * big_l - big_m


def blowup_time(model: DensityModel, profile: AsymptoticProfile) -> BlowupResult:
    """Regime and blowup volume V0 from the asymptotic profile."""
    model.require_valid()
    _require_settled(profile)
    if profile.M.value.is_pos_inf:
        return BlowupResult(Regime.NO_BLOWUP, POS_INF, None, None)
    big_l = profile.L.finite_value()
    big_m = profile.M.finite_value()
    gap0 = _gap_at_zero(model, big_l, big_m)
    if gap0 >= 0:
        return BlowupResult(Regime.ALWAYS_DOUBLE, ExtendedReal(0.0), None, gap0)

    def negative(v1: float) -> bool:
        return float(mu_limit(model, profile, v1)) < 0

    # March a doubling bracket around the sign change of mu_l.
    lo = hi = 1.0
    if negative(1.0):
        for _ in range(80):
            hi *= 2.0
            if not negative(hi):
                break
            lo = hi
        else:
            raise DiagnosticsError(
                "mu_l stayed negative out to 2^80; the limiting gap should"
                " eventually turn nonnegative when M is finite"
            )
    else:
        for _ in range(80):
            lo /= 2.0
            if negative(lo):
                break
            hi = lo
        else:
            raise DiagnosticsError(
                "mu_l stayed nonnegative down to 2^-80 despite a negative"
                " limit at zero"
            )

    width = model.config.v0_bracket_width
    for _ in range(300):
        if hi - lo <= width:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if negative(mid):
            lo = mid
        else:
            hi = mid
    return BlowupResult(
        Regime.FINITE_BLOWUP, ExtendedReal(0.5 * (lo + hi)), (lo, hi), gap0
    )


def _tie_refusal(blowup: BlowupResult, v1: float) -> Optional[str]:
    if blowup.regime is Regime.ALWAYS_DOUBLE:
        return "no tie curve: V0=0"
    if blowup.regime is Regime.FINITE_BLOWUP:
        certified = blowup.bracket[0]
        if v1 >= certified:
            return (
                f"no tie volume: region volume {v1:g} is not certified below"
                f" the blowup volume (bracket starts at {certified:.17g})"
            )
    return None


def tie_volume(
    model: DensityModel,
    profile: AsymptoticProfile,
    blowup: BlowupResult,
    v1: float,
) -> TieSample:
    """The unique V2 > V1 where the double and triple interval tie."""
    if not (math.isfinite(v1) and v1 > 0):
        raise UsageError(f"region volume must be positive and finite, got {v1!r}")
    model.require_valid()
    refusal = _tie_refusal(blowup, v1)
    if refusal is not None:
        raise NoTieError(refusal)

    cap = model.config.tie_doubling_cap
    lo = v1
    hi = 2.0 * v1
    while mu(model, v1, hi) > 0:
        lo = hi
        hi *= 2.0
        if hi > cap:
            raise DiagnosticsError(
                f"tie bracket for v1={v1:g} exceeded the doubling cap {cap:g}"
            )

    # mu decreases in V2, so bisect on its negation.
    root, _, _, residual = bisect_root(
        lambda v2: -mu(model, v1, v2),
        lo,
        hi,
        model.config.tie_mu_atol,
    )
    return TieSample(v1, root, -residual)


def tie_curve(
    model: DensityModel,
    profile: AsymptoticProfile,
    blowup: BlowupResult,
    v1_lo: float,
    v1_hi: float,
    samples: int,
) -> TieCurve:
    """Sample lambda over [v1_lo, v1_hi].

    With a finite blowup volume the sample spacing is geometric in the
    distance to V0, which resolves the divergence of lambda; otherwise
    the spacing is uniform.
    """
    if samples < 2:
        raise UsageError(f"need at least 2 samples, got {samples}")
    if not (0 < v1_lo < v1_hi) or not math.isfinite(v1_hi):
        raise UsageError(
            f"need 0 < v1_lo < v1_hi (finite), got {v1_lo!r}, {v1_hi!r}"
        )
    refusal = _tie_refusal(blowup, v1_hi)
    if refusal is not None:
        raise NoTieError(refusal)

    points: list[float]
    if blowup.regime is Regime.FINITE_BLOWUP:
        v0 = float(blowup.v0)
        ratio = (v0 - v1_hi) / (v0 - v1_lo)
        points = [
            v0 - (v0 - v1_lo) * ratio ** (i / (samples - 1))
            for i in range(samples)
        ]
    else:
        step = (v1_hi - v1_lo) / (samples - 1)
        points = [v1_lo + i * step for i in range(samples)]
    points[0], points[-1] = v1_lo, v1_hi

    rows = tuple(tie_volume(model, profile, blowup, v1) for v1 in points)
    return TieCurve(rows, blowup.regime, blowup.v0)
