"""Equilibrium position of the double interval and its large-V2 limit.

The double interval with region volumes V1 <= V2 starts at the volume
coordinate t solving

    f'(t) + f'(t + V1) + f'(t + V1 + V2) = 0,

whose left side is strictly increasing, negative at t = -(V1+V2)/2 (it
equals f'((V1-V2)/2) there) and positive at t = 0.  As V2 grows the
solution falls to the limit V* defined by

    f'(V*) + f'(V* + V1) = -L,

which exists exactly when the asymptotic slope L is finite.  Both
equations are solved by plain bisection: the integrands may be merely C0
in places (kink densities), so derivative-based iterations have no edge
worth their fragility here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

from .density import DensityModel
from .errors import BracketError, UndefinedQuantityError, UsageError
from .extended import ExtendedReal


@dataclass(frozen=True)
class EquilibriumSolution:
    v_tilde: float
    residual: float
    bracket: tuple[float, float]


@dataclass(frozen=True)
class VStarSolution:
    v_star: float
    residual: float
    bracket: tuple[float, float]


def bisect_root(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    residual_tol: float,
    max_iter: int = 300,
) -> tuple[float, float, float, float]:
    """Bisection on an increasing function with a certified sign change.

    Stops when |fn| meets residual_tol or the bracket cannot be split
    further in double precision.  Returns (root, lo, hi, residual).
    """
    f_lo = fn(lo)
    f_hi = fn(hi)
    if f_lo > 0 or f_hi < 0:
        raise BracketError(
            f"no sign change on [{lo:g}, {hi:g}]:"
            f" fn({lo:g}) = {f_lo:g}, fn({hi:g}) = {f_hi:g}"
        )
    if abs(f_lo) <= residual_tol:
        return lo, lo, hi, f_lo
    if abs(f_hi) <= residual_tol:
        return hi, lo, hi, f_hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = fn(mid)
        if abs(f_mid) <= residual_tol:
            return mid, lo, hi, f_mid
        if f_mid < 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    if abs(f_lo) <= abs(f_hi):
        return lo, lo, hi, f_lo
    return hi, lo, hi, f_hi


def _require_ordered_volumes(v1: float, v2: float) -> None:
    if not (math.isfinite(v1) and math.isfinite(v2)):
        raise UsageError("region volumes must be finite")
    if not 0 < v1 <= v2:
        raise UsageError(
            f"region volumes must satisfy 0 < v1 <= v2, got v1={v1!r} v2={v2!r}"
        )


def solve_equilibrium(
    model: DensityModel, v1: float, v2: float
) -> EquilibriumSolution:
    """Leftmost endpoint of the equilibrium double interval."""
    _require_ordered_volumes(v1, v2)
    model.require_valid()
    slope = model.density_slope_in_volume

    def balance(t: float) -> float:
        return slope(t) + slope(t + v1) + slope(t + v1 + v2)

    anchor = -(v1 + v2) / 2
    # At the exact anchor the balance equals f'((v1-v2)/2) <= 0, with
    # equality when v1 = v2; pad by a few ulps so rounding cannot flip it.
    pad = 4e-16 * (1.0 + abs(anchor))
    lo = anchor - pad
    hi = 0.0
    scale = max(1.0, abs(slope(v1 + v2)))
    root, b_lo, b_hi, residual = bisect_root(
        balance, lo, hi, model.config.residual_rtol * scale
    )
    return EquilibriumSolution(root, residual, (b_lo, b_hi))


def solve_v_star(
    model: DensityModel, asymptotic_slope: Union[float, ExtendedReal], v1: float
) -> VStarSolution:
    """Limit of the equilibrium endpoint as the second volume grows."""
    limit = (
        asymptotic_slope
        if isinstance(asymptotic_slope, ExtendedReal)
        else ExtendedReal(asymptotic_slope)
    )
    if not limit.is_finite:
        raise UndefinedQuantityError(
            "the equilibrium limit V* needs a finite asymptotic slope"
        )
    if not (math.isfinite(v1) and v1 > 0):
        raise UsageError(f"region volume must be positive and finite, got {v1!r}")
    model.require_valid()
    big_l = limit.finite_value()
    if big_l <= 0:
        raise UsageError(f"asymptotic slope must be positive, got {big_l!r}")
    slope = model.density_slope_in_volume

    def balance(t: float) -> float:
        return slope(t) + slope(t + v1) + big_l

    hi = -v1
    for _ in range(80):
        if balance(hi) >= 0:
            break
        hi += max(1.0, v1)
    else:
        raise BracketError("no upper bracket for V*: slope data inconsistent")

    stride = max(1.0, v1)
    lo = hi - stride
    for _ in range(200):
        if balance(lo) <= 0:
            break
        stride *= 2.0
        lo = hi - stride
    else:
        raise BracketError(
            "no lower bracket for V*: the balance never drops below -L,"
            " so the declared asymptotic slope looks too small"
        )

    root, b_lo, b_hi, residual = bisect_root(
        balance, lo, hi, model.config.residual_rtol * (1.0 + big_l)
    )
    return VStarSolution(root, residual, (b_lo, b_hi))


def invert_slope(model: DensityModel, target: float) -> float:
    """Unique V >= 0 with f'(V) = target, for 0 <= target < L."""
    if not (math.isfinite(target) and target >= 0):
        raise UsageError(f"slope target must be finite and >= 0, got {target!r}")
    model.require_valid()
    if target == 0:
        return 0.0
    slope = model.density_slope_in_volume

    hi = 1.0
    for _ in range(1100):
        try:
            reached = slope(hi) >= target
        except OverflowError:
            # Intermediate terms blew up while the slope was still short of
            # the target, so the target sits at or above the ceiling.
            raise BracketError(
                f"slope never reaches {target:g} before evaluation overflows"
                f" near V = {hi:g}; the target must stay below the"
                " asymptotic slope"
            ) from None
        if reached:
            break
        hi *= 2.0
        if hi > 1e300:
            raise BracketError(
                f"slope never reaches {target:g}; the target must stay below"
                " the asymptotic slope"
            )
    else:
        raise BracketError(f"slope never reaches {target:g}")

    root, _, _, _ = bisect_root(
        lambda v: slope(v) - target,
        0.0,
        hi,
        model.config.residual_rtol * max(1.0, target),
    )
    return root
