"""Brute-force perimeter minimization over small interval topologies.

The candidate configurations are finite unions of intervals: a pattern is
a left-to-right sequence of blocks labeled 1, 2 (region pieces) or E
(empty gaps), with no two adjacent blocks sharing a label, ends non-empty,
and at most max_intervals_per_region pieces per region.  Patterns are
enumerated up to reflection, since an even density makes mirror images
cost the same.

Each pattern is optimized in volume coordinate, where the region volume
constraints are linear: one block per region has its width eliminated by
substitution and everything else (the remaining widths plus the global
offset) is free.  The search is a derivative-free compass descent: probe
every free coordinate at +-1 and +-2 steps in one vectorised batch, take
the best move, march further while the extreme probe keeps winning, and
shrink the step by a fixed factor per level.

During the search the objective is the raw boundary sum over all block
edges, with no merging of coincident edges.  That over-counts collapsed
edges, but any configuration with merged edges is exactly represented by
a shorter pattern that is also enumerated, so the global minimum is not
affected; the winning pattern's configuration is collapsed afterwards
and re-evaluated through the exact density path for reporting.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .bubbles import classify
from .density import DensityModel
from .errors import UsageError

_LABELS = ("1", "2", "E")


@dataclass(frozen=True)
class IntervalConfiguration:
    """Disjoint labeled gaps: boundaries are strictly increasing and each
    gap between consecutive boundaries carries a region label or E."""

    boundaries: tuple[float, ...]
    labels: tuple[str, ...]

    def volumes(self) -> dict[str, float]:
        totals = {"1": 0.0, "2": 0.0, "E": 0.0}
        for index, label in enumerate(self.labels):
            totals[label] += self.boundaries[index + 1] - self.boundaries[index]
        return totals

    def perimeter(self, model: DensityModel) -> float:
        return sum(model.density_in_volume(b) for b in self.boundaries)

    def reflected(self) -> "IntervalConfiguration":
        return IntervalConfiguration(
            tuple(-b for b in reversed(self.boundaries)),
            tuple(reversed(self.labels)),
        )


@dataclass(frozen=True)
class OracleResult:
    best: IntervalConfiguration
    perimeter: float
    pattern: str
    patterns_searched: int
    level_history: tuple[float, ...]
    stagnation: bool
    budget_exhausted: bool
    elapsed: float


def enumerate_patterns(max_intervals_per_region: int) -> list[str]:
    """All block label sequences up to reflection: adjacent labels differ,
    ends are non-empty, both regions appear, at most the given number of
    blocks per region."""
    if max_intervals_per_region not in (1, 2, 3):
        raise UsageError(
            "max_intervals_per_region must be 1, 2 or 3,"
            f" got {max_intervals_per_region!r}"
        )
    cap = max_intervals_per_region
    found: list[str] = []
    seen: set[str] = set()

    def extend(seq: list[str], ones: int, twos: int) -> None:
        if seq and seq[-1] != "E" and ones and twos:
            word = "".join(seq)
            mirror = word[::-1]
            canon = min(word, mirror)
            if canon not in seen:
                seen.add(canon)
                found.append(canon)
        if len(seq) >= 4 * cap - 1:
            return
        for label in _LABELS:
            if seq and seq[-1] == label:
                continue
            if label == "E" and not seq:
                continue
            next_ones = ones + (label == "1")
            next_twos = twos + (label == "2")
            if next_ones > cap or next_twos > cap:
                continue
            seq.append(label)
            extend(seq, next_ones, next_twos)
            seq.pop()

    extend([], 0, 0)
    found.sort(key=lambda word: (len(word), word))
    return found


class _PatternSearch:
    """Compass descent over one pattern's free coordinates."""

    def __init__(
        self,
        pattern: str,
        v1: float,
        v2: float,
        evaluate_many,
    ) -> None:
        self.pattern = pattern
        self.v1 = v1
        self.v2 = v2
        self._f_many = evaluate_many
        blocks = list(pattern)
        self.block_count = len(blocks)
        self.dependent = {
            "1": max(i for i, lab in enumerate(blocks) if lab == "1"),
            "2": max(i for i, lab in enumerate(blocks) if lab == "2"),
        }
        self.targets = {"1": v1, "2": v2}
        # Free coordinates: global offset first, then every width except
        # the two dependent ones.
        self.free_widths = np.array(
            [i for i in range(self.block_count) if i not in self.dependent.values()],
            dtype=int,
        )
        self.same_label = {
            "1": [i for i, lab in enumerate(blocks) if lab == "1"],
            "2": [i for i, lab in enumerate(blocks) if lab == "2"],
        }
        self.block_labels = blocks
        self._dep_cols = np.array(sorted(set(self.dependent.values())), dtype=int)
        self._others = {
            label: np.array(
                [i for i in self.same_label[label] if i != self.dependent[label]],
                dtype=int,
            )
            for label in ("1", "2")
        }

        widths = np.zeros(self.block_count)
        gap_scale = (v1 + v2) / 8.0
        for index, label in enumerate(blocks):
            if label == "E":
                widths[index] = gap_scale
            else:
                count = len(self.same_label[label])
                widths[index] = self.targets[label] / count
        offset = -0.5 * float(np.sum(widths))
        self.theta = np.concatenate([[offset], widths[self.free_widths]])
        self._build_linear_maps()

    def _build_linear_maps(self) -> None:
        """Boundaries and dependent widths are affine in the free vector,
        so precompute the two maps and turn every batch into one matmul."""
        dim = 1 + self.free_widths.size
        width_map = np.zeros((self.block_count, dim))
        width_const = np.zeros(self.block_count)
        for slot, col in enumerate(self.free_widths, start=1):
            width_map[col, slot] = 1.0
        for label in ("1", "2"):
            dep = self.dependent[label]
            width_const[dep] = self.targets[label]
            for col in self._others[label]:
                slot = 1 + int(np.searchsorted(self.free_widths, col))
                width_map[dep, slot] -= 1.0
        bound_map = np.zeros((self.block_count + 1, dim))
        bound_map[:, 0] = 1.0
        bound_map[1:, :] += np.cumsum(width_map, axis=0)
        bound_const = np.concatenate([[0.0], np.cumsum(width_const)])
        self._bound_map_t = bound_map.T.copy()
        self._bound_const = bound_const
        self._dep_map_t = width_map[self._dep_cols, :].T.copy()
        self._dep_const = width_const[self._dep_cols]

    def objective_batch(self, thetas: np.ndarray) -> np.ndarray:
        """Raw boundary sums; free widths are assumed non-negative, so only
        the substituted dependent widths can push a row out of bounds."""
        bounds = thetas @ self._bound_map_t
        bounds += self._bound_const
        dep = thetas @ self._dep_map_t
        bad = (dep < -self._dep_const).any(axis=1)
        values = self._f_many(bounds.ravel()).reshape(bounds.shape)
        totals = values.sum(axis=1)
        totals[bad | ~np.isfinite(totals)] = np.inf
        return totals

    def boundaries(self) -> np.ndarray:
        return self.theta @ self._bound_map_t + self._bound_const

    def optimize(
        self, levels: int, refine: float, max_moves: int = 120
    ) -> tuple[float, list[float], bool]:
        dim = self.theta.size
        best = float(self.objective_batch(self.theta[None, :])[0])
        history: list[float] = []
        offsets_unit = np.array([-2.0, -1.0, 1.0, 2.0])
        rows = np.arange(4 * dim)
        cols = np.repeat(np.arange(dim), 4)
        deltas = np.tile(offsets_unit, dim)
        width_rows = rows[cols > 0]
        width_cols = cols[cols > 0]
        march_reach = np.array([4.0, 8.0, 16.0, 32.0, 64.0])
        probes = np.empty((4 * dim, dim))
        step = max(self.v1 + self.v2, 1e-6) / 2.0
        settled = False
        for _level in range(levels):
            settled = False
            for _ in range(max_moves):
                # One batch: all coordinates, all four probe offsets.
                probes[:] = self.theta
                probes[rows, cols] += deltas * step
                probes[width_rows, width_cols] = np.maximum(
                    probes[width_rows, width_cols], 0.0
                )
                values = self.objective_batch(probes)
                by_coord = values.reshape(dim, 4)
                coord_best = by_coord.min(axis=1)
                improving = coord_best < best
                if not improving.any():
                    settled = True
                    break
                winner = int(np.argmin(values))
                moved_far = False
                if int(improving.sum()) > 1:
                    # Try every coordinate's best probe at once; keep the
                    # single best move if the combined step overshoots.
                    compound = self.theta.copy()
                    picks = by_coord.argmin(axis=1)
                    where = np.flatnonzero(improving)
                    compound[where] = probes[4 * where + picks[where], where]
                    compound_value = float(
                        self.objective_batch(compound[None, :])[0]
                    )
                    if compound_value < values[winner]:
                        best = compound_value
                        self.theta = compound
                        continue
                best = float(values[winner])
                j = int(winner // 4)
                self.theta = probes[winner].copy()
                if abs(offsets_unit[winner % 4]) == 2.0:
                    # The extreme probe won: extend geometrically in one
                    # batch so long travel does not cost a sweep per step.
                    direction = math.copysign(1.0, offsets_unit[winner % 4])
                    trail = np.repeat(
                        self.theta[None, :], march_reach.size, axis=0
                    )
                    trail[:, j] += direction * march_reach * step
                    if j > 0:
                        np.clip(trail[:, j], 0.0, None, out=trail[:, j])
                    trail_values = self.objective_batch(trail)
                    t_winner = int(np.argmin(trail_values))
                    if trail_values[t_winner] < best:
                        best = float(trail_values[t_winner])
                        self.theta = trail[t_winner]
            history.append(best)
            step /= refine
        # Settled means the finest level ran out of improving probes before
        # hitting the move cap; anything else is reported as a stall.
        return best, history, not settled


def collapse_configuration(
    boundaries: np.ndarray, labels: list[str], tol: float
) -> IntervalConfiguration:
    """Drop zero-width gaps, merge same-label neighbours, strip outer
    empty gaps; the result has strictly increasing boundaries."""
    gaps = [
        (boundaries[i], boundaries[i + 1], labels[i])
        for i in range(len(labels))
        if boundaries[i + 1] - boundaries[i] > tol
    ]
    merged: list[list[float] | tuple[float, float, str]] = []
    for lo, hi, label in gaps:
        if merged and merged[-1][2] == label and math.isclose(
            merged[-1][1], lo, rel_tol=0.0, abs_tol=tol
        ):
            merged[-1] = (merged[-1][0], hi, label)
        else:
            merged.append((lo, hi, label))
    while merged and merged[0][2] == "E":
        merged.pop(0)
    while merged and merged[-1][2] == "E":
        merged.pop()
    if not merged:
        raise UsageError("configuration collapsed to nothing")
    out_bounds = [merged[0][0]]
    out_labels = []
    for lo, hi, label in merged:
        out_bounds.append(hi)
        out_labels.append(label)
    return IntervalConfiguration(tuple(out_bounds), tuple(out_labels))


def brute_force_minimize(
    model: DensityModel,
    v1: float,
    v2: float,
    max_intervals_per_region: int,
) -> OracleResult:
    """Search every pattern and return the best configuration found."""
    if max_intervals_per_region not in (1, 2, 3):
        raise UsageError(
            "max_intervals_per_region must be 1, 2 or 3,"
            f" got {max_intervals_per_region!r}"
        )
    if not (math.isfinite(v1) and math.isfinite(v2)):
        raise UsageError("region volumes must be finite")
    if not 0 < v1 <= v2:
        raise UsageError(
            f"region volumes must satisfy 0 < v1 <= v2, got v1={v1!r} v2={v2!r}"
        )
    model.require_valid()
    config = model.config
    started = time.monotonic()
    f_many = model.density_in_volume_fn()

    span = v1 + v2
    collapse_tol = 1e-9 * (1.0 + span)

    best_exact: Optional[float] = None
    best_config: Optional[IntervalConfiguration] = None
    best_pattern = ""
    best_history: tuple[float, ...] = ()
    best_stagnating = False
    searched = 0
    budget_exhausted = False

    for pattern in enumerate_patterns(max_intervals_per_region):
        if (
            searched > 0
            and time.monotonic() - started > config.oracle_time_budget
        ):
            budget_exhausted = True
            break
        search = _PatternSearch(pattern, v1, v2, f_many)
        _, history, stagnating = search.optimize(
            config.oracle_levels, config.oracle_refine
        )
        searched += 1
        bounds = search.boundaries()
        configuration = collapse_configuration(
            bounds, search.block_labels, collapse_tol
        )
        exact = configuration.perimeter(model)
        if best_exact is None or exact < best_exact:
            best_exact = exact
            best_config = configuration
            best_pattern = pattern
            best_history = tuple(history)
            best_stagnating = stagnating

    assert best_config is not None and best_exact is not None
    return OracleResult(
        best=best_config,
        perimeter=best_exact,
        pattern=best_pattern,
        patterns_searched=searched,
        level_history=best_history,
        stagnation=best_stagnating,
        budget_exhausted=budget_exhausted,
        elapsed=time.monotonic() - started,
    )


def reference_minimum(model: DensityModel, v1: float, v2: float) -> float:
    """The formula side of the oracle comparison: min(P2, P3)."""
    analysis = classify(model, v1, v2)
    return min(analysis.p2, analysis.p3)
