"""Cantilever sizing for a round holding fixture under a tip load."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace

import numpy as np

from machstiff.errors import ValidationError
from machstiff.svg import Plot


@dataclass(frozen=True)
class BeamSpec:
    P: float  # N
    L: float  # mm
    E: float  # N/mm^2
    D: float  # mm

    def __post_init__(self):
        for name in ("P", "L", "E", "D"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be a positive finite number, got {v!r}")

    @property
    def inertia(self) -> float:
        """Second moment of area of the round section (mm^4)."""
        return math.pi * self.D**4 / 64.0


def deflection(spec: BeamSpec) -> tuple[float, float]:
    """Tip deflection (mm) and flexural stiffness (N/m)."""
    delta = spec.P * spec.L**3 / (3.0 * spec.E * spec.inertia)
    return delta, spec.P / delta * 1000.0


@dataclass(frozen=True)
class SweepRow:
    L: float  # mm
    delta: float  # mm
    k: float  # N/m


def sweep_lengths(template: BeamSpec, lo: float, hi: float, step: float) -> list[SweepRow]:
    if step <= 0:
        raise ValidationError("step must be positive")
    if hi < lo:
        raise ValidationError(f"empty length range [{lo}, {hi}]")
    n = int(math.floor((hi - lo) / step + 1e-9))
    rows = []
    for i in range(n + 1):
        L = lo + i * step
        d, k = deflection(replace(template, L=L))
        rows.append(SweepRow(L, d, k))
    return rows


def sweep_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["L_mm", "delta_mm", "k_N_per_m"])
    for r in rows:
        w.writerow([repr(r.L), repr(r.delta), repr(r.k)])
    return buf.getvalue()


def sweep_plot(rows: list[SweepRow], spec: BeamSpec) -> str:
    p = Plot(title=f"fixture deflection, P={spec.P:g} N, D={spec.D:g} mm",
             xlabel="length (mm)", ylabel="deflection (mm)")
    p.line(np.array([r.L for r in rows]), np.array([r.delta for r in rows]), "delta")
    return p.render()
