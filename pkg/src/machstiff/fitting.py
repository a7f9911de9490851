"""Charge/discharge midline fitting.

At each load level the charge value A and the discharge value B differ by
friction and seating effects. The midpoint C = (A + B) / 2 is kept, and a
least-squares line through the C points gives the compliance (slope). The
spread AB is reported as a hysteresis half-width per level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from machstiff.errors import DegenerateAbscissa, LevelMismatch, ValidationError, ZeroScale
from machstiff.svg import Plot

LEVEL_TOL = 1e-6  # N


@dataclass(frozen=True)
class ChargePath:
    points: tuple[tuple[float, float], ...]  # (force N, value)
    phase: str = "charge"

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValidationError(f"{self.phase} path needs at least 2 points")
        f = np.array([p[0] for p in self.points])
        d = np.diff(f)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValidationError(f"{self.phase} path forces are not strictly monotone: {f.tolist()}")

    @property
    def forces(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


@dataclass(frozen=True)
class MidlineFit:
    slope: float
    intercept: float
    levels: tuple[float, ...]
    midpoints: tuple[float, ...]
    residuals: tuple[float, ...]
    half_widths: tuple[float, ...]
    error_percent: float

    @property
    def rms_residual(self) -> float:
        r = np.asarray(self.residuals)
        return float(np.sqrt(np.mean(r * r)))

    @property
    def full_scale(self) -> float:
        return float(np.max(np.abs(self.midpoints)))

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "rms_residual": self.rms_residual,
            "error_percent": self.error_percent,
            "levels_N": list(self.levels),
            "midpoints": list(self.midpoints),
            "residuals": list(self.residuals),
            "half_widths": list(self.half_widths),
        }


def fit_line(points: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Ordinary least-squares line ``value = slope * force + intercept``.

    Returns ``(slope, intercept, rms_residual)`` with
    ``rms_residual = sqrt(sum(r**2) / n)``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise DegenerateAbscissa("at least two points are needed for a line fit")
    x, y = pts[:, 0], pts[:, 1]
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0.0:
        raise DegenerateAbscissa(f"all forces are equal ({x[0]!r}); slope undefined")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    r = y - (slope * x + intercept)
    return slope, intercept, float(np.sqrt(np.mean(r * r)))


def error_percent(fit: MidlineFit | float, full_scale: float) -> float:
    """Fit quality as ``100 * rms_residual / full_scale``."""
    rms = fit.rms_residual if isinstance(fit, MidlineFit) else float(fit)
    if full_scale < 0.0:
        raise ValidationError("full scale must be non-negative")
    if full_scale == 0.0:
        if rms == 0.0:
            return 0.0
        raise ZeroScale("full-scale value is zero but residuals are not")
    return 100.0 * rms / full_scale


def _match_levels(charge: ChargePath, discharge: ChargePath):
    cf, df = charge.forces, discharge.forces
    pairs, unmatched = [], []
    used = set()
    for i, f in enumerate(cf):
        j = int(np.argmin(np.abs(df - f)))
        if abs(df[j] - f) <= LEVEL_TOL and j not in used:
            pairs.append((i, j))
            used.add(j)
        else:
            unmatched.append(float(f))
    unmatched += [float(df[j]) for j in range(len(df)) if j not in used]
    if unmatched:
        raise LevelMismatch(
            f"charge and discharge force levels differ at {sorted(unmatched)} N",
            levels=sorted(unmatched),
        )
    return pairs


def midline(charge: ChargePath, discharge: ChargePath | None = None) -> MidlineFit:
    """Fit the line through the charge/discharge midpoints.

    With no discharge path the charge path is fitted directly and the
    half-widths are zero.
    """
    if discharge is None:
        order = np.argsort(charge.forces)
        levels = charge.forces[order]
        mids = charge.values[order]
        half = np.zeros_like(mids)
    else:
        pairs = sorted(_match_levels(charge, discharge), key=lambda p: charge.forces[p[0]])
        a = np.array([charge.values[i] for i, _ in pairs])
        b = np.array([discharge.values[j] for _, j in pairs])
        levels = np.array([charge.forces[i] for i, _ in pairs])
        mids = (a + b) / 2.0
        half = np.abs(a - b) / 2.0
    slope, intercept, rms = fit_line(np.column_stack([levels, mids]))
    residuals = mids - (slope * levels + intercept)
    full = float(np.max(np.abs(mids)))
    return MidlineFit(
        slope=slope,
        intercept=intercept,
        levels=tuple(float(v) for v in levels),
        midpoints=tuple(float(v) for v in mids),
        residuals=tuple(float(v) for v in residuals),
        half_widths=tuple(float(v) for v in half),
        error_percent=error_percent(rms, full),
    )


def paths_from_series(forces, values, phases) -> tuple[ChargePath, ChargePath | None]:
    charge = [(float(f), float(v)) for f, v, p in zip(forces, values, phases) if p == "charge"]
    discharge = [(float(f), float(v)) for f, v, p in zip(forces, values, phases) if p == "discharge"]
    return ChargePath(tuple(charge), "charge"), (
        ChargePath(tuple(discharge), "discharge") if discharge else None
    )


def midline_plot(charge: ChargePath, discharge: ChargePath | None, fit: MidlineFit,
                 title: str = "", ylabel: str = "displacement") -> str:
    """SVG of charge path, discharge path, midpoints and fitted midline."""
    p = Plot(title=title, xlabel="force (N)", ylabel=ylabel)
    p.line(charge.forces, charge.values, "charge", color="#1f77b4")
    if discharge is not None:
        p.line(discharge.forces, discharge.values, "discharge", color="#d62728")
    p.points(fit.levels, fit.midpoints, "midpoints", color="#2ca02c")
    xs = np.array([0.0, max(fit.levels)])
    p.line(xs, fit.slope * xs + fit.intercept, "midline", color="black", dashed=True)
    return p.render()

