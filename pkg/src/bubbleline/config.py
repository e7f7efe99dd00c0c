"""Tunable tolerances and caps, collected in one frozen dataclass.

The defaults are the contract values used throughout the package and its
tests.  A JSON file (or the BUBBLELINE_CONFIG environment variable naming
one) may override any subset of fields; unknown keys are rejected so typos
surface instead of silently keeping a default.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from .errors import UsageError


@dataclass(frozen=True)
class Config:
    # Density validation.
    symmetry_rtol: float = 1e-10        # |f(-v) - f(v)| allowance, relative
    slope_zero_atol: float = 1e-8       # |f'(0)| allowance forced by symmetry
    kink_agreement_tol: float = 1e-8    # one-sided slope agreement at a kink
    grid_unit: float = 1.0              # validation grid is +/- unit * 2^k
    grid_k_min: int = -10
    grid_k_max: int = 10

    # Position <-> volume transform.
    quad_rtol: float = 1e-12
    quad_atol: float = 1e-14
    interp_tol: float = 1e-10           # interpolation error target for the cache
    position_cap: float = 1e8           # inversion beyond this position is refused
    inverse_rtol: float = 1e-12

    # Asymptotic limit ladders.
    ladder_k_max: int = 50
    limit_rtol: float = 1e-9            # successive-difference convergence gate
    limit_window: int = 3               # consecutive small diffs required
    divergence_threshold: float = 1e9   # sample beyond this declares +inf
    mp_dps: int = 60                    # working precision for ladder samples

    # Root solving (bisection only; slopes may be merely C0).
    bracket_rtol: float = 1e-13         # bracket width target, relative
    residual_rtol: float = 1e-10        # residual acceptance, relative to scale
    solver_max_iter: int = 200

    # Blowup time and tie volumes.
    v0_bracket_width: float = 1e-10
    tie_mu_atol: float = 1e-9
    tie_band_scale: float = 1e-9        # tie verdict band: scale * (1 + P2)
    tie_doubling_cap: float = 2.0**60

    # Brute-force oracle.
    oracle_levels: int = 8
    oracle_refine: float = 4.0
    oracle_agreement_rtol: float = 1e-6
    oracle_time_budget: float = 120.0

    def replace(self, **changes: object) -> "Config":
        return dataclasses.replace(self, **changes)  # type: ignore[arg-type]

    @classmethod
    def from_mapping(cls, data: dict) -> "Config":
        known = {field.name for field in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str) -> "Config":
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        if not isinstance(data, dict):
            raise UsageError(f"config file {path!r} must hold a JSON object")
        return cls.from_mapping(data)


DEFAULT_CONFIG = Config()
