"""Density models: validation and the position/volume coordinate pair.

A density f on the line is admissible when it is positive, even, C1, and
strictly convex once rewritten in the volume coordinate V(x) = integral of
f from 0 to x (for positive densities that is the same as strict
log-convexity in x).  A model may be defined by a formula in either
coordinate; every downstream quantity works in volume coordinate, so
positional models carry a lazily built transform between x and V.

The transform keeps a table of (x, V) anchors extended on demand by
adaptive quadrature and bridged by monotone cubic interpolation, with the
interpolant refined until it reproduces the quadrature to a configured
tolerance.  Exact queries (volume_of_position, position_of_volume) always
go through quadrature anchored at the nearest table entry; the interpolant
serves as a root-finding guess and as the fast approximate path for
vectorised scans.

Validation samples a geometric grid of coordinate values 2^k for
k = -10..10, both signs and zero, and checks positivity, even symmetry,
a vanishing slope at the origin, and strictly increasing volume-coordinate
slope.  Sampling runs at high precision so that the strictness check is
meaningful out at the far grid points.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from . import expr as exprmod
from .config import DEFAULT_CONFIG, Config
from .errors import (
    BubblelineError,
    CoordinateError,
    DensityFileError,
    ModelInvalidError,
    NonSmoothPointError,
    QuadratureError,
    UnboundedInverseError,
    UsageError,
)
from .extended import ExtendedReal


class Coordinate(Enum):
    POSITION = "position"
    VOLUME = "volume"


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    witness: Optional[float]
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ValidationCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> tuple[ValidationCheck, ...]:
        return tuple(check for check in self.checks if not check.passed)


def _validation_grid(config: Config) -> list[float]:
    points = [0.0]
    for k in range(config.grid_k_min, config.grid_k_max + 1):
        magnitude = config.grid_unit * 2.0**k
        points.append(magnitude)
        points.append(-magnitude)
    return sorted(points)


class _Transform:
    """Anchor table between position x >= 0 and volume V >= 0.

    Negative arguments are handled by oddness of V(x), so only the right
    half line is tabulated.
    """

    _MAX_ANCHORS = 200_000

    def __init__(self, expr: exprmod.DensityExpr, config: Config) -> None:
        self._expr = expr
        self._config = config
        self._scalar = exprmod.compile_scalar(expr)
        self.xs: list[float] = [0.0]
        self.vs: list[float] = [0.0]
        self._pending: list[tuple[float, float, float, float]] = []
        self._forward: Optional[PchipInterpolator] = None
        self._inverse: Optional[PchipInterpolator] = None
        self._extend_position(config.grid_unit)

    def _f(self, x: float) -> float:
        try:
            value = self._scalar(x)
        except OverflowError:
            return math.inf
        return value

    def _quad(self, a: float, b: float) -> float:
        if a == b:
            return 0.0
        value, estimate = quad(
            self._scalar,
            a,
            b,
            epsabs=self._config.quad_atol,
            epsrel=self._config.quad_rtol,
            limit=200,
        )
        allowance = max(
            self._config.quad_atol, 100.0 * self._config.quad_rtol * abs(value)
        )
        if not math.isfinite(value):
            raise QuadratureError(
                f"volume integral over [{a:g}, {b:g}] overflows", math.inf
            )
        if estimate > allowance:
            raise QuadratureError(
                f"volume integral over [{a:g}, {b:g}] did not converge", estimate
            )
        return value

    def _append_anchor(self, x: float) -> None:
        dv = self._quad(self.xs[-1], x)
        total = self.vs[-1] + dv
        if not math.isfinite(total):
            raise UnboundedInverseError(
                f"volume at position {x:g} exceeds double precision"
            )
        self._pending.append((self.xs[-1], self.vs[-1], x, total))
        self.xs.append(x)
        self.vs.append(total)
        self._forward = None
        self._inverse = None

    def _next_anchor(self) -> float:
        # Doubling stride, halved while the density overflows there, so a
        # fast-growing profile still advances as far as doubles allow.
        last = self.xs[-1]
        step = last if last > 0 else max(self._config.grid_unit, 1.0)
        while True:
            candidate = last + step
            if math.isfinite(self._f(candidate)):
                return candidate
            step /= 2
            if step <= 1e-12 * max(last, 1.0):
                raise UnboundedInverseError(
                    f"density overflows double precision just past x = {last:g}"
                )

    def _extend_position(self, target: float) -> None:
        changed = False
        while self.xs[-1] < target:
            self._append_anchor(self._next_anchor())
            changed = True
        if changed:
            self._refine()

    def _extend_volume(self, target: float) -> None:
        changed = False
        while self.vs[-1] < target:
            if self.xs[-1] >= self._config.position_cap:
                raise UnboundedInverseError(
                    f"volume {target:g} needs positions beyond the cap"
                    f" {self._config.position_cap:g}"
                )
            candidate = min(self._next_anchor(), self._config.position_cap)
            if candidate <= self.xs[-1]:
                raise UnboundedInverseError(
                    f"volume {target:g} needs positions beyond the cap"
                    f" {self._config.position_cap:g}"
                )
            self._append_anchor(candidate)
            changed = True
        if changed:
            self._refine()

    def _refine(self) -> None:
        # Split freshly added gaps until a cubic Hermite built from the
        # exact endpoint data (V and V' = f) reproduces the quadrature
        # midpoint.  Each midpoint is quadratured exactly once; accepted
        # gaps are final, so extension cost stays linear in anchor count.
        tol = self._config.interp_tol
        while self._pending:
            a, va, b, vb = self._pending.pop()
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                continue
            vmid = va + self._quad(a, mid)
            fa, fb = self._f(a), self._f(b)
            hermite = 0.5 * (va + vb) + (b - a) * (fa - fb) / 8.0
            if abs(hermite - vmid) <= tol * (1.0 + abs(vmid)):
                continue
            if len(self.xs) >= self._MAX_ANCHORS:
                raise QuadratureError(
                    "transform table exceeded its size cap before reaching"
                    " the interpolation tolerance",
                    abs(hermite - vmid),
                )
            index = bisect.bisect_left(self.xs, mid)
            self.xs.insert(index, mid)
            self.vs.insert(index, vmid)
            self._pending.append((a, va, mid, vmid))
            self._pending.append((mid, vmid, b, vb))
        self._forward = None
        self._inverse = None

    def _interpolants(self) -> tuple[PchipInterpolator, PchipInterpolator]:
        if self._pending:
            self._refine()
        if self._forward is None or self._inverse is None:
            self._forward = PchipInterpolator(self.xs, self.vs)
            self._inverse = PchipInterpolator(self.vs, self.xs)
        return self._forward, self._inverse

    def volume(self, x: float) -> float:
        if x == 0:
            return 0.0
        ax = abs(x)
        self._extend_position(ax)
        i = bisect.bisect_right(self.xs, ax) - 1
        value = self.vs[i] + self._quad(self.xs[i], ax)
        return math.copysign(value, x)

    def position(self, volume: float) -> float:
        if volume == 0:
            return 0.0
        av = abs(volume)
        self._extend_volume(av)
        _, inverse = self._interpolants()
        guess = float(inverse(av))
        guess = min(max(guess, 0.0), self.xs[-1])
        residual = self.volume(guess) - av
        slope = max(self._f(guess), 1e-300)
        spread = max(2.0 * abs(residual) / slope, 1e-9 * (1.0 + guess))
        lo, hi = guess - spread, guess + spread
        for _ in range(64):
            if self.volume(lo) <= av <= self.volume(hi):
                break
            lo -= spread
            hi += spread
            spread *= 2.0
        root = brentq(
            lambda x: self.volume(x) - av,
            lo,
            hi,
            xtol=1e-13 * (1.0 + abs(guess)),
            rtol=8.9e-16,
        )
        return math.copysign(root, volume)

    def positions_approx(self, volumes: np.ndarray) -> np.ndarray:
        """Interpolated inverse, accurate to the cache tolerance; scan path."""
        flat = np.asarray(volumes, dtype=float)
        peak = float(np.max(np.abs(flat))) if flat.size else 0.0
        if peak > 0:
            self._extend_volume(peak)
        _, inverse = self._interpolants()
        return np.sign(flat) * inverse(np.abs(flat))


def _position_cast(value: float) -> float:
    if not math.isfinite(value):
        raise UsageError("position must be finite")
    return float(value)


class DensityModel:
    """A density formula with its coordinate convention and optional
    analytic asymptotic overrides, validated before numerical use."""

    def __init__(
        self,
        expr: exprmod.DensityExpr,
        coordinate: Coordinate | str,
        analytic_L: Optional[ExtendedReal] = None,
        analytic_M: Optional[ExtendedReal] = None,
        config: Config = DEFAULT_CONFIG,
        name: Optional[str] = None,
    ) -> None:
        self.expr = expr
        self.coordinate = Coordinate(coordinate)
        self.analytic_L = analytic_L
        self.analytic_M = analytic_M
        self.config = config
        self.name = name or expr.formula()
        self._report: Optional[ValidationReport] = None
        self._transform_cache: Optional[_Transform] = None
        self._scalar = exprmod.compile_scalar(expr)
        self._vector = exprmod.compile_numpy(expr)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_formula(
        cls,
        formula: str,
        coordinate: Coordinate | str = Coordinate.VOLUME,
        analytic_L: Optional[ExtendedReal] = None,
        analytic_M: Optional[ExtendedReal] = None,
        config: Config = DEFAULT_CONFIG,
        name: Optional[str] = None,
    ) -> "DensityModel":
        return cls(
            exprmod.parse(formula), coordinate, analytic_L, analytic_M, config, name
        )

    @classmethod
    def from_text(
        cls, text: str, config: Config = DEFAULT_CONFIG, name: Optional[str] = None
    ) -> "DensityModel":
        fields: dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DensityFileError(
                    f"line {lineno}: expected 'key = value', got {line!r}"
                )
            key, value = line.split("=", 1)
            key = key.strip().lower()
            value = value.strip()
            if key in fields:
                raise DensityFileError(f"line {lineno}: duplicate key {key!r}")
            if not value:
                raise DensityFileError(f"line {lineno}: empty value for {key!r}")
            fields[key] = value

        unknown = sorted(set(fields) - {"coordinate", "f", "l", "m"})
        if unknown:
            raise DensityFileError(f"unknown keys: {', '.join(unknown)}")
        if "f" not in fields:
            raise DensityFileError("missing required key 'f'")
        if "coordinate" not in fields:
            raise DensityFileError("missing required key 'coordinate'")
        try:
            coordinate = Coordinate(fields["coordinate"].lower())
        except ValueError:
            raise DensityFileError(
                f"coordinate must be 'position' or 'volume',"
                f" got {fields['coordinate']!r}"
            ) from None

        def read_limit(key: str, positive: bool) -> Optional[ExtendedReal]:
            if key not in fields:
                return None
            try:
                value = ExtendedReal.parse(fields[key])
            except (ValueError, BubblelineError):
                raise DensityFileError(
                    f"{key.upper()} must be a number or 'inf',"
                    f" got {fields[key]!r}"
                ) from None
            if value.is_neg_inf or (positive and not value > 0):
                raise DensityFileError(
                    f"{key.upper()} = {fields[key]} is out of range"
                )
            return value

        expr = exprmod.parse(fields["f"])
        return cls(
            expr,
            coordinate,
            analytic_L=read_limit("l", positive=True),
            analytic_M=read_limit("m", positive=False),
            config=config,
            name=name,
        )

    @classmethod
    def from_file(
        cls, path: str, config: Config = DEFAULT_CONFIG
    ) -> "DensityModel":
        try:
            with open(path, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise DensityFileError(f"cannot read density file {path!r}: {exc}")
        return cls.from_text(text, config=config, name=path)

    # -- validation --------------------------------------------------------

    def validate(self) -> ValidationReport:
        if self._report is None:
            self._report = self._run_validation()
        return self._report

    def require_valid(self) -> None:
        report = self.validate()
        if not report.passed:
            raise ModelInvalidError(report)

    def _run_validation(self) -> ValidationReport:
        grid = _validation_grid(self.config)
        values: dict[float, mpmath.mpf] = {}
        slopes: dict[float, mpmath.mpf] = {}
        eval_failures: list[tuple[float, str]] = []
        smooth_failure: Optional[tuple[float, str]] = None

        with mpmath.workdps(self.config.mp_dps):
            for point in grid:
                try:
                    result = exprmod.eval_dual(
                        self.expr,
                        mpmath.mpf(point),
                        kink_tol=self.config.kink_agreement_tol,
                    )
                except NonSmoothPointError as exc:
                    smooth_failure = (point, str(exc))
                    continue
                except BubblelineError as exc:
                    eval_failures.append((point, str(exc)))
                    continue
                values[point] = result.value
                slopes[point] = result.slope

            checks: list[ValidationCheck] = []

            if eval_failures:
                witness, detail = eval_failures[0]
                checks.append(
                    ValidationCheck(
                        "evaluable",
                        False,
                        witness,
                        f"{len(eval_failures)} grid point(s) failed: {detail}",
                    )
                )
            else:
                checks.append(ValidationCheck("evaluable", True, None, ""))

            bad = next(
                (p for p in grid if p in values and not values[p] > 0), None
            )
            checks.append(
                ValidationCheck(
                    "positive",
                    bad is None,
                    bad,
                    "" if bad is None else f"f({bad:g}) = {float(values[bad]):g}",
                )
            )

            asym = None
            for point in grid:
                if point <= 0 or point not in values or -point not in values:
                    continue
                gap = abs(values[point] - values[-point])
                if gap > self.config.symmetry_rtol * max(abs(values[point]), 1):
                    asym = point
                    break
            checks.append(
                ValidationCheck(
                    "even_symmetry",
                    asym is None,
                    asym,
                    ""
                    if asym is None
                    else f"f({asym:g}) != f({-asym:g})",
                )
            )

            if smooth_failure is not None:
                checks.append(
                    ValidationCheck(
                        "centered_slope", False, smooth_failure[0], smooth_failure[1]
                    )
                )
            elif 0.0 in slopes:
                s0 = float(slopes[0.0])
                ok = abs(s0) <= self.config.slope_zero_atol
                checks.append(
                    ValidationCheck(
                        "centered_slope",
                        ok,
                        None if ok else 0.0,
                        "" if ok else f"slope at 0 is {s0:g}",
                    )
                )
            else:
                checks.append(
                    ValidationCheck(
                        "centered_slope", False, 0.0, "slope at 0 unavailable"
                    )
                )

            # Convexity in volume coordinate: for a volume formula that is
            # f' increasing; for a positional formula, (log f)' increasing
            # in x is the same statement pulled back through x(V).
            ordered = [p for p in grid if p in slopes]
            convex_witness = None
            detail = ""
            for a, b in zip(ordered, ordered[1:]):
                sa, sb = slopes[a], slopes[b]
                if self.coordinate is Coordinate.POSITION:
                    if not (values[a] > 0 and values[b] > 0):
                        continue
                    sa = sa / values[a]
                    sb = sb / values[b]
                if sb > sa:
                    continue
                if sb == sa and self._slope_gap_resolves(a, b):
                    # Tie was pure precision exhaustion; the gap reappears
                    # at higher working precision.
                    continue
                convex_witness = a
                detail = (
                    f"slope does not increase from {a:g} to {b:g}"
                    f" ({float(sa):g} vs {float(sb):g})"
                )
                break
            checks.append(
                ValidationCheck(
                    "strict_convexity", convex_witness is None, convex_witness, detail
                )
            )

        return ValidationReport(tuple(checks))

    def _convexity_slope_mp(self, point: float) -> mpmath.mpf:
        result = exprmod.eval_dual(
            self.expr, mpmath.mpf(point), kink_tol=self.config.kink_agreement_tol
        )
        if self.coordinate is Coordinate.POSITION:
            return result.slope / result.value
        return result.slope

    def _slope_gap_resolves(self, a: float, b: float) -> bool:
        for dps in (4 * self.config.mp_dps, 16 * self.config.mp_dps):
            with mpmath.workdps(dps):
                try:
                    sa = self._convexity_slope_mp(a)
                    sb = self._convexity_slope_mp(b)
                except BubblelineError:
                    return False
                if sb > sa:
                    return True
                if sb < sa:
                    return False
        return False

    # -- transform ---------------------------------------------------------

    def _transform(self) -> _Transform:
        if self.coordinate is not Coordinate.POSITION:
            raise CoordinateError(
                "model is defined directly in volume coordinate"
            )
        if self._transform_cache is None:
            self.require_valid()
            self._transform_cache = _Transform(self.expr, self.config)
        return self._transform_cache

    def volume_of_position(self, x: float) -> float:
        return self._transform().volume(_position_cast(x))

    def position_of_volume(self, volume: float) -> float:
        if not math.isfinite(volume):
            raise UsageError("volume must be finite")
        return self._transform().position(float(volume))

    # -- evaluation in volume coordinate ------------------------------------

    def density_in_volume(self, volume: float) -> float:
        self.require_valid()
        if self.coordinate is Coordinate.VOLUME:
            return exprmod.evaluate(self.expr, float(volume))
        x = self.position_of_volume(volume)
        return exprmod.evaluate(self.expr, x)

    def density_slope_in_volume(self, volume: float) -> float:
        self.require_valid()
        if self.coordinate is Coordinate.VOLUME:
            result = exprmod.eval_dual(
                self.expr, float(volume), kink_tol=self.config.kink_agreement_tol
            )
            return result.slope
        x = self.position_of_volume(volume)
        result = exprmod.eval_dual(
            self.expr, x, kink_tol=self.config.kink_agreement_tol
        )
        return result.slope / result.value

    def density_in_volume_many(self, volumes: Sequence[float]) -> np.ndarray:
        """Vectorised f(V) for scans; positional models use the cached
        interpolated inverse rather than per-point root refinement."""
        return self.density_in_volume_fn()(np.asarray(volumes, dtype=float))

    def density_in_volume_fn(self) -> Callable[[np.ndarray], np.ndarray]:
        """Bind the vectorised f(V) path once for hot loops, skipping the
        per-call validation and coordinate dispatch."""
        self.require_valid()
        vector = self._vector
        if self.coordinate is Coordinate.VOLUME:
            return vector
        positions_approx = self._transform().positions_approx

        def in_volume(volumes: np.ndarray) -> np.ndarray:
            return vector(positions_approx(volumes))

        return in_volume

    # -- high-precision hooks for the limit ladders --------------------------

    def value_in_own_coordinate_mp(self, point: mpmath.mpf) -> mpmath.mpf:
        return exprmod.evaluate(self.expr, point)

    def slope_in_volume_mp(self, volume: mpmath.mpf) -> mpmath.mpf:
        if self.coordinate is not Coordinate.VOLUME:
            raise CoordinateError("high-precision slope needs a volume formula")
        result = exprmod.eval_dual(
            self.expr, volume, kink_tol=self.config.kink_agreement_tol
        )
        return result.slope

    def log_slope_at_position_mp(self, x: mpmath.mpf) -> mpmath.mpf:
        if self.coordinate is not Coordinate.POSITION:
            raise CoordinateError("log-slope ladder needs a positional formula")
        result = exprmod.eval_dual(
            self.expr, x, kink_tol=self.config.kink_agreement_tol
        )
        return result.slope / result.value

    def __repr__(self) -> str:
        return (
            f"DensityModel({self.expr.formula()!r},"
            f" coordinate={self.coordinate.value!r})"
        )
