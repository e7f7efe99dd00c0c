"""Asymptotic invariants of a density: slope limit L and doubling defect M.

L is the limit of f'(V) as V grows (equivalently the limit of (log f)'(x)
for a positional formula), and M is the limit of f(2V) - 2f(V).  Both
sequences are strictly increasing for admissible densities, so a geometric
sample ladder V = 2^k either settles, crosses the divergence threshold, or
runs out of rungs and is reported as inconclusive rather than guessed.

Ladder samples are evaluated in high precision: near the limit the
doubling defect subtracts numbers that agree to many digits, and a double
precision ladder would drown the convergence test in cancellation noise
long before the stated tolerance.  Positional formulas sample L in the
position coordinate (the two limits agree), since a slope bounded like
sqrt(log V) in volume coordinate would crawl far too slowly for any
honest threshold crossing; the trace then records the position sample in
its coordinate column.

A density file may declare L or M analytically; the estimate then reports
the declared value and notes the override.  One structural fact is
enforced rather than measured: an unbounded slope forces an unbounded
doubling defect, so profiles never pair L = inf with finite M.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, TextIO, Union

import mpmath

from .density import Coordinate, DensityModel
from .errors import QuadratureError, UnboundedInverseError
from .extended import ExtendedReal, POS_INF


class LimitVerdict(Enum):
    CONVERGED = "Converged"
    DECLARED_INFINITE = "DeclaredInfinite"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class TraceSample:
    k: int
    coordinate: float
    value: float


@dataclass(frozen=True)
class LimitEstimate:
    value: Optional[ExtendedReal]
    verdict: LimitVerdict
    trace: tuple[TraceSample, ...] = field(default_factory=tuple)
    note: str = ""

    @property
    def settled(self) -> bool:
        return self.verdict is not LimitVerdict.INCONCLUSIVE

    def finite_value(self) -> float:
        if self.value is None:
            raise ValueError("estimate has no value")
        return self.value.finite_value()


@dataclass(frozen=True)
class AsymptoticProfile:
    L: LimitEstimate
    M: LimitEstimate


def _from_override(value: ExtendedReal, which: str) -> LimitEstimate:
    verdict = (
        LimitVerdict.DECLARED_INFINITE
        if value.is_pos_inf
        else LimitVerdict.CONVERGED
    )
    return LimitEstimate(
        value, verdict, (), f"analytic override for {which} from the density file"
    )


def _run_ladder(
    sample_at: Callable[[int], tuple[float, Union[float, mpmath.mpf]]],
    k_max: int,
    rtol: float,
    window: int,
    threshold: float,
) -> LimitEstimate:
    trace: list[TraceSample] = []
    prev = None
    streak = 0
    for k in range(0, k_max + 1):
        try:
            coordinate, value = sample_at(k)
        except (UnboundedInverseError, QuadratureError, OverflowError) as exc:
            return LimitEstimate(
                None,
                LimitVerdict.INCONCLUSIVE,
                tuple(trace),
                f"sample at k={k} not representable ({exc}); ladder truncated",
            )
        as_float = float(value)
        trace.append(
            TraceSample(
                k, coordinate, as_float if not math.isnan(as_float) else math.inf
            )
        )
        if value > threshold:
            return LimitEstimate(
                POS_INF,
                LimitVerdict.DECLARED_INFINITE,
                tuple(trace),
                f"crossed the divergence threshold at k={k}",
            )
        if prev is not None:
            diff = value - prev
            if abs(diff) < rtol * (1 + abs(value)):
                streak += 1
                if streak >= window:
                    return LimitEstimate(
                        ExtendedReal(as_float),
                        LimitVerdict.CONVERGED,
                        tuple(trace),
                        f"settled at k={k}",
                    )
            elif diff < 0:
                return LimitEstimate(
                    None,
                    LimitVerdict.INCONCLUSIVE,
                    tuple(trace),
                    f"sample decreased at k={k}, beyond numerical tolerance;"
                    " not a valid ladder",
                )
            else:
                streak = 0
        prev = value
    return LimitEstimate(
        None,
        LimitVerdict.INCONCLUSIVE,
        tuple(trace),
        "ladder exhausted without settling; consider an analytic override"
        " in the density file",
    )


def estimate_L(model: DensityModel) -> LimitEstimate:
    """Asymptotic slope of the volume-coordinate density."""
    if model.analytic_L is not None:
        return _from_override(model.analytic_L, "L")
    model.require_valid()
    config = model.config

    with mpmath.workdps(config.mp_dps):
        if model.coordinate is Coordinate.VOLUME:

            def sample(k: int) -> tuple[float, mpmath.mpf]:
                volume = mpmath.mpf(2) ** k
                return float(volume), model.slope_in_volume_mp(volume)

        else:

            def sample(k: int) -> tuple[float, mpmath.mpf]:
                x = mpmath.mpf(2) ** k
                return float(x), model.log_slope_at_position_mp(x)

        return _run_ladder(
            sample,
            config.ladder_k_max,
            config.limit_rtol,
            config.limit_window,
            config.divergence_threshold,
        )


def estimate_M(model: DensityModel) -> LimitEstimate:
    """Asymptotic doubling defect f(2V) - 2f(V) of the volume density."""
    if model.analytic_M is not None:
        return _from_override(model.analytic_M, "M")
    model.require_valid()
    config = model.config

    if model.coordinate is Coordinate.VOLUME:
        with mpmath.workdps(config.mp_dps):

            def sample(k: int) -> tuple[float, mpmath.mpf]:
                volume = mpmath.mpf(2) ** k
                doubled = model.value_in_own_coordinate_mp(2 * volume)
                single = model.value_in_own_coordinate_mp(volume)
                return float(volume), doubled - 2 * single

            return _run_ladder(
                sample,
                config.ladder_k_max,
                config.limit_rtol,
                config.limit_window,
                config.divergence_threshold,
            )

    # Positional formula: the defect is evaluated through the transform in
    # double precision, so cancellation eventually limits how small a
    # defect can be certified; a noisy ladder stops as inconclusive.
    def sample(k: int) -> tuple[float, float]:
        volume = 2.0**k
        return volume, (
            model.density_in_volume(2 * volume)
            - 2 * model.density_in_volume(volume)
        )

    return _run_ladder(
        sample,
        config.ladder_k_max,
        config.limit_rtol,
        config.limit_window,
        config.divergence_threshold,
    )


def asymptotic_profile(model: DensityModel) -> AsymptoticProfile:
    """Estimate L, then M, short-circuiting the forced case L = inf."""
    slope_limit = estimate_L(model)
    if slope_limit.value is not None and slope_limit.value.is_pos_inf:
        defect = LimitEstimate(
            POS_INF,
            LimitVerdict.DECLARED_INFINITE,
            (),
            "forced: an unbounded slope makes the doubling defect diverge",
        )
    else:
        defect = estimate_M(model)
    return AsymptoticProfile(slope_limit, defect)


def write_trace_csv(estimate: LimitEstimate, sink: Union[str, TextIO]) -> None:
    """Trace as CSV `k,V,value`.

    The middle column is the ladder's sample coordinate: the volume 2^k,
    except for positional slope ladders where it is the position 2^k.
    """

    def write(handle: TextIO) -> None:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["k", "V", "value"])
        for row in estimate.trace:
            writer.writerow([row.k, repr(row.coordinate), repr(row.value)])

    if isinstance(sink, str):
        with open(sink, "w", encoding="utf-8", newline="") as handle:
            write(handle)
    else:
        write(sink)
