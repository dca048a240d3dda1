"""Exponential fits over the (width, depth) grid and CSV export."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .estimators import PolarizationEstimate

CSV_COLUMNS = ("shape_n", "shape_d", "metric", "value", "ci_low", "ci_high", "measured_flag")
LOG_FLOOR = 1e-4


@dataclass(frozen=True)
class ExpFit:
    A: float
    p: float
    points: int

    def __call__(self, x: float) -> float:
        return self.A * self.p**x


def fit_exponential(xs: Iterable[float], ys: Iterable[float], floor: float = LOG_FLOOR) -> ExpFit | None:
    """Least squares of ``log y = log A + x log p``; ``None`` below two points."""
    x = np.asarray(list(xs), dtype=float)
    y = np.asarray(list(ys), dtype=float)
    if x.size < 2 or np.unique(x).size < 2:
        return None
    logy = np.log(np.clip(y, floor, None))
    slope, icpt = np.polyfit(x, logy, 1)
    return ExpFit(float(np.exp(icpt)), float(np.exp(slope)), int(x.size))


@dataclass(frozen=True)
class GridCell:
    value: float
    ci_low: float | None
    ci_high: float | None
    measured: bool


@dataclass
class VolumetricGrid:
    cells: dict[tuple[int, int], GridCell]
    row_fits: dict[int, ExpFit] = field(default_factory=dict)
    col_fits: dict[int, ExpFit] = field(default_factory=dict)
    metric: str = "mcfe_pol"

    def rows(self) -> list[dict]:
        out = []
        for (n, d), cell in sorted(self.cells.items()):
            out.append(
                {
                    "shape_n": n,
                    "shape_d": d,
                    "metric": self.metric,
                    "value": cell.value,
                    "ci_low": cell.ci_low,
                    "ci_high": cell.ci_high,
                    "measured_flag": int(cell.measured),
                }
            )
        return out


def _value(est: PolarizationEstimate | float) -> tuple[float, float | None, float | None] | None:
    if isinstance(est, PolarizationEstimate):
        if not est.available:
            return None
        return est.point, est.ci_low, est.ci_high
    return float(est), None, None


def volumetric_fit(
    estimates: Mapping[tuple[int, int], PolarizationEstimate | float],
    fill: Iterable[tuple[int, int]] = (),
    width_fallback_above: int = 6,
    fallback_depths: tuple[int, ...] = (1,),
    metric: str = "mcfe_pol",
) -> VolumetricGrid:
    """Fit ``A p^d`` per width and ``A p^n`` per depth; fill requested cells.

    Cells with ``n > width_fallback_above`` or ``d`` in ``fallback_depths``
    are filled from the per-depth fit in ``n``; the rest from the per-width
    fit in ``d``.  A cell with no usable fit stays empty.
    """
    measured: dict[tuple[int, int], tuple] = {}
    for shape, est in estimates.items():
        v = _value(est)
        if v is not None:
            measured[(int(shape[0]), int(shape[1]))] = v
    by_n: dict[int, list[tuple[int, float]]] = {}
    by_d: dict[int, list[tuple[int, float]]] = {}
    for (n, d), (val, _, _) in measured.items():
        by_n.setdefault(n, []).append((d, val))
        by_d.setdefault(d, []).append((n, val))
    row_fits = {n: f for n, pts in by_n.items() if (f := fit_exponential(*zip(*pts))) is not None}
    col_fits = {d: f for d, pts in by_d.items() if (f := fit_exponential(*zip(*pts))) is not None}
    cells = {s: GridCell(v[0], v[1], v[2], True) for s, v in measured.items()}
    for n, d in fill:
        if (n, d) in cells:
            continue
        if n > width_fallback_above or d in fallback_depths:
            fit, x = col_fits.get(d), n
        else:
            fit, x = row_fits.get(n), d
        if fit is not None:
            cells[(n, d)] = GridCell(fit(x), None, None, False)
    return VolumetricGrid(cells, row_fits, col_fits, metric)


def write_volumetric_csv(path: str | Path, grids: Iterable[VolumetricGrid]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for g in grids:
            for row in g.rows():
                w.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return path
