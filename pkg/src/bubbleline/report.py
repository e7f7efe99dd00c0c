"""Rendering of analysis results as diff-able JSON and CSV artifacts.

JSON is pretty-printed with two-space indent, keys in the order the
payload builders put them, and every float at 17 significant digits so
reports round-trip bit-exactly and diff cleanly across runs.  Infinite
quantities appear as the strings "inf" / "-inf" since JSON has no float
infinities.  CSV uses a `.` decimal separator, `\n` line endings and
always carries a header row.
"""

from __future__ import annotations

import csv
import json
import math
from enum import Enum
from typing import Iterable, Optional, Sequence, TextIO, Union

from .bubbles import BlowupResult, BubbleAnalysis, TieCurve
from .density import DensityModel, ValidationReport
from .extended import ExtendedReal
from .limits import AsymptoticProfile, LimitEstimate
from .oracle import OracleResult

Payload = Union[None, bool, int, float, str, ExtendedReal, Enum, list, tuple, dict]


def format_float(value: float) -> str:
    if math.isinf(value):
        return '"inf"' if value > 0 else '"-inf"'
    if math.isnan(value):
        raise ValueError("reports must not contain NaN")
    return format(value, ".17g")


def render_json(payload: Payload, indent: int = 0) -> str:
    pad = "  " * indent
    if payload is None:
        return "null"
    if isinstance(payload, bool):
        return "true" if payload else "false"
    if isinstance(payload, int):
        return str(payload)
    if isinstance(payload, float):
        return format_float(payload)
    if isinstance(payload, str):
        return json.dumps(payload)
    if isinstance(payload, ExtendedReal):
        return render_json(payload.to_json(), indent)
    if isinstance(payload, Enum):
        return json.dumps(payload.value)
    if isinstance(payload, (list, tuple)):
        if not payload:
            return "[]"
        items = ",\n".join(
            pad + "  " + render_json(item, indent + 1) for item in payload
        )
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(payload, dict):
        if not payload:
            return "{}"
        items = ",\n".join(
            pad + "  " + json.dumps(str(key)) + ": " + render_json(value, indent + 1)
            for key, value in payload.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    raise TypeError(f"cannot render {type(payload).__name__} in a report")


def csv_cell(value: object) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def write_csv(
    sink: Union[str, TextIO],
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
) -> None:
    def write(handle: TextIO) -> None:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([csv_cell(cell) for cell in row])

    if isinstance(sink, str):
        with open(sink, "w", encoding="utf-8", newline="") as handle:
            write(handle)
    else:
        write(sink)


# -- payload builders --------------------------------------------------------


def validation_payload(report: ValidationReport) -> dict:
    return {
        "passed": report.passed,
        "checks": [
            {
                "name": check.name,
                "passed": check.passed,
                "witness": check.witness,
                "detail": check.detail,
            }
            for check in report.checks
        ],
    }


def limit_payload(estimate: LimitEstimate) -> dict:
    return {
        "value": estimate.value,
        "verdict": estimate.verdict,
        "samples": len(estimate.trace),
        "note": estimate.note,
    }


def analyze_payload(
    model: DensityModel,
    report: ValidationReport,
    profile: Optional[AsymptoticProfile],
    blowup: Optional[BlowupResult],
) -> dict:
    return {
        "density": model.name,
        "formula": model.expr.formula(),
        "coordinate": model.coordinate,
        "validation": validation_payload(report),
        "L": limit_payload(profile.L) if profile else None,
        "M": limit_payload(profile.M) if profile else None,
        "regime": blowup.regime if blowup else None,
        "v0": blowup.v0 if blowup else None,
        "v0_bracket": list(blowup.bracket) if blowup and blowup.bracket else None,
        "gap_at_zero": blowup.gap_at_zero if blowup else None,
    }


def classify_payload(model: DensityModel, analysis: BubbleAnalysis) -> dict:
    return {
        "density": model.name,
        "v1": analysis.v1,
        "v2": analysis.v2,
        "v_tilde": analysis.v_tilde,
        "p2": analysis.p2,
        "p3": analysis.p3,
        "mu": analysis.mu,
        "tie_band": analysis.tie_band,
        "verdict": analysis.verdict,
    }


def oracle_payload(
    model: DensityModel,
    v1: float,
    v2: float,
    max_intervals: int,
    result: OracleResult,
    reference: float,
    agreement_tol: float,
) -> dict:
    gap = abs(result.perimeter - reference)
    volumes = result.best.volumes()
    return {
        "density": model.name,
        "v1": v1,
        "v2": v2,
        "max_intervals": max_intervals,
        "pattern": result.pattern,
        "labels": list(result.best.labels),
        "boundaries": list(result.best.boundaries),
        "volumes": {"1": volumes["1"], "2": volumes["2"], "E": volumes["E"]},
        "perimeter": result.perimeter,
        "reference": reference,
        "gap": gap,
        "agreement": gap <= agreement_tol,
        "agreement_tol": agreement_tol,
        "patterns_searched": result.patterns_searched,
        "level_history": list(result.level_history),
        "stagnation": result.stagnation,
        "budget_exhausted": result.budget_exhausted,
        "elapsed_seconds": result.elapsed,
    }


def tie_curve_rows(curve: TieCurve) -> list[tuple[float, float, float]]:
    return [(s.v1, s.tie_v2, s.mu_at_tie) for s in curve.samples]


def phase_rows(
    analyses: Iterable[BubbleAnalysis],
) -> list[tuple[float, float, float, float, float, str]]:
    rows = [
        (a.v1, a.v2, a.mu, a.p2, a.p3, a.verdict.value) for a in analyses
    ]
    rows.sort(key=lambda row: (row[0], row[1]))
    return rows
