"""Matplotlib renderings of phase sweeps and tie curves.

Figures are written straight to files (Agg backend, no display).  The
output format follows the file extension; both .png and .svg work.
"""

from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .bubbles import TieCurve  # noqa: E402
from .extended import ExtendedReal  # noqa: E402

_VERDICT_COLORS = {"Double": "#3b6fb6", "Triple": "#d95f02", "Tie": "#444444"}


def save_phase_figure(
    path: str,
    rows: Sequence[tuple[float, float, float, float, float, str]],
    tie_rows: Optional[Sequence[tuple[float, float, float]]] = None,
    v0: Optional[ExtendedReal] = None,
    title: str = "",
) -> None:
    """Scatter of verdicts over the V1 <= V2 triangle, with the tie curve
    and the blowup volume overlaid when available."""
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    for verdict, color in _VERDICT_COLORS.items():
        xs = [row[0] for row in rows if row[5] == verdict]
        ys = [row[1] for row in rows if row[5] == verdict]
        if xs:
            ax.scatter(xs, ys, s=18, color=color, label=verdict, zorder=2)
    if tie_rows:
        ax.plot(
            [row[0] for row in tie_rows],
            [row[1] for row in tie_rows],
            color="black",
            linewidth=1.2,
            label="tie curve",
            zorder=3,
        )
    if v0 is not None and v0.is_finite and v0.finite_value() > 0:
        ax.axvline(
            v0.finite_value(),
            color="#888888",
            linestyle="--",
            linewidth=1.0,
            label="blowup volume",
        )
    ax.set_xlabel("V1")
    ax.set_ylabel("V2")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_tie_figure(path: str, curve: TieCurve, title: str = "") -> None:
    """Tie volume against region volume, log scale when it spans decades."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs = [sample.v1 for sample in curve.samples]
    ys = [sample.tie_v2 for sample in curve.samples]
    ax.plot(xs, ys, color="#3b6fb6", linewidth=1.4)
    if ys and min(ys) > 0 and max(ys) / min(ys) > 50:
        ax.set_yscale("log")
    if curve.v0.is_finite:
        ax.axvline(
            curve.v0.finite_value(),
            color="#888888",
            linestyle="--",
            linewidth=1.0,
            label="blowup volume",
        )
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("V1")
    ax.set_ylabel("tie V2")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def figure_path_for(csv_path: str) -> str:
    """Default figure file next to a CSV: same stem, .png extension."""
    stem, dot, ext = csv_path.rpartition(".")
    if dot and "/" not in ext:
        return stem + ".png"
    return csv_path + ".png"


__all__ = ["save_phase_figure", "save_tie_figure", "figure_path_for"]
