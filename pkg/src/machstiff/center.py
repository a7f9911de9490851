"""Stiffness (rotation) center from measured displacement lines.

For each load axis two points P_j are loaded and their displacement
vectors d_j measured. The lines (P_j, d_j) nearly intersect at M; the
plane they span has normal n. The center is the point closest, in the
least-squares sense, to the three lines (M_i, n_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path

import numpy as np

from machstiff.errors import (
    DegenerateDirections,
    MachStiffError,
    ParallelLines,
    SchemaError,
    ZeroDisplacement,
    ZeroVector,
)
from machstiff.ingest import load_json_exact
from machstiff.svg import Plot
from machstiff.torsor import vec3

AXIS_NAMES = ("x", "y", "z")
PARALLEL_TOL = 1e-8
DEGENERATE_COND = 1e8


@dataclass(frozen=True, eq=False)
class Line3:
    point: np.ndarray  # m
    direction: np.ndarray  # unit
    label: tuple[str, int] = ("", 0)

    def __post_init__(self):
        p = vec3(self.point, "point")
        d = vec3(self.direction, "direction")
        n = np.linalg.norm(d)
        if n == 0.0:
            raise ZeroDisplacement("line direction is zero")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "direction", d / n)

    def distance_sq(self, q) -> float:
        v = np.asarray(q, dtype=float) - self.point
        w = v - (v @ self.direction) * self.direction
        return float(w @ w)

    def transformed(self, R, t) -> Line3:
        return Line3(R @ self.point + t, R @ self.direction, self.label)


@dataclass(frozen=True, eq=False)
class AxisIntersection:
    M: np.ndarray
    mu: float  # m
    theta: float  # deg
    feet: tuple[np.ndarray, np.ndarray]  # closest points on each line


@dataclass(frozen=True, eq=False)
class MeanPlane:
    point: np.ndarray
    normal: np.ndarray


@dataclass(frozen=True, eq=False)
class CenterSolution:
    CR: np.ndarray
    residual: float
    intersections: tuple[AxisIntersection, ...]
    planes: tuple[MeanPlane, ...]
    lines: tuple[Line3, ...] = ()

    def as_dict(self) -> dict:
        return {
            "CR_m": self.CR.tolist(),
            "residual_m": self.residual,
            "axes": [
                {
                    "axis": AXIS_NAMES[k],
                    "M_m": ix.M.tolist(),
                    "mu_m": ix.mu,
                    "theta_deg": ix.theta,
                    "normal": pl.normal.tolist(),
                }
                for k, (ix, pl) in enumerate(zip(self.intersections, self.planes))
            ],
        }


def line_from_measurement(P_mm, d_m, label: tuple[str, int] = ("", 0)) -> Line3:
    d = vec3(d_m, "d")
    if not np.any(d):
        raise ZeroDisplacement(f"displacement at {label} is zero")
    return Line3(vec3(P_mm, "P") / 1000.0, d, label)


def closest_point_pair(L1: Line3, L2: Line3) -> AxisIntersection:
    """Midpoint and length of the common perpendicular, plus coplanarity angle.

    theta is the mean, over both lines, of the angle at P_j between line j
    and the foot point on the other line; it is zero for coplanar lines.
    """
    u, v = L1.direction, L2.direction
    c = np.cross(u, v)
    cn = float(np.linalg.norm(c))
    w0 = L1.point - L2.point
    if cn < PARALLEL_TOL:
        mu = float(np.linalg.norm(w0 - (w0 @ u) * u))
        raise ParallelLines(f"lines {L1.label} and {L2.label} are parallel (distance {mu:.3g} m)", mu=mu)
    b = float(u @ v)
    d, e = float(u @ w0), float(v @ w0)
    den = 1.0 - b * b
    s = (b * e - d) / den
    t = (e - b * d) / den
    Q1 = L1.point + s * u
    Q2 = L2.point + t * v
    M = (Q1 + Q2) / 2.0
    # point-to-line distance of the foot on line 1 from line 2
    mu = math.sqrt(L2.distance_sq(Q1))
    angles = []
    for P, Q_other in ((L1.point, Q2), (L2.point, Q1)):
        r = float(np.linalg.norm(Q_other - P))
        angles.append(0.0 if r == 0.0 else math.degrees(math.asin(min(1.0, mu / r))))
    return AxisIntersection(M, mu, float(np.mean(angles)), (Q1, Q2))


def _fix_sign(n: np.ndarray) -> np.ndarray:
    k = 2 if abs(n[2]) > 1e-12 else int(np.argmax(np.abs(n)))
    return -n if n[k] < 0 else n


def fit_mean_plane(lines, M) -> MeanPlane:
    """Plane through M whose normal is the smallest eigenvector of the direction scatter."""
    dirs = np.array([ln.direction for ln in lines])
    if np.linalg.norm(np.cross(dirs[0], dirs[1])) < PARALLEL_TOL:
        raise ParallelLines("cannot define a plane from parallel lines", mu=float("nan"))
    S = dirs.T @ dirs
    _, vecs = np.linalg.eigh(S)
    return MeanPlane(vec3(M, "M"), _fix_sign(vecs[:, 0]))


def solve_center(normal_lines) -> tuple[np.ndarray, float]:
    """Least-squares point of the lines; returns (CR, rms distance)."""
    A = np.zeros((3, 3))
    b = np.zeros(3)
    for ln in normal_lines:
        P = np.eye(3) - np.outer(ln.direction, ln.direction)
        A += P
        b += P @ ln.point
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > DEGENERATE_COND:
        raise DegenerateDirections(f"normal directions do not span 2 dimensions (condition {cond:.3g})")
    CR = np.linalg.solve(A, b)
    r = math.sqrt(sum(ln.distance_sq(CR) for ln in normal_lines) / len(normal_lines))
    return CR, r


def center_from_lines(lines) -> CenterSolution:
    """Full pipeline from six measurement lines (two per axis, x, y, z order)."""
    by_axis = {a: [ln for ln in lines if ln.label[0] == a] for a in AXIS_NAMES}
    for a, pair in by_axis.items():
        if len(pair) != 2:
            raise SchemaError(f"axis {a} needs exactly two lines, got {len(pair)}")
    inters, planes, normals = [], [], []
    for a in AXIS_NAMES:
        pair = sorted(by_axis[a], key=lambda ln: ln.label[1])
        ix = closest_point_pair(*pair)
        pl = fit_mean_plane(pair, ix.M)
        inters.append(ix)
        planes.append(pl)
        normals.append(Line3(ix.M, pl.normal, (a, 0)))
    CR, r = solve_center(normals)
    ordered = tuple(ln for a in AXIS_NAMES for ln in sorted(by_axis[a], key=lambda ln: ln.label[1]))
    return CenterSolution(CR, r, tuple(inters), tuple(planes), ordered)


def center_direction_angle(CR, v3, origin=(0.0, 0.0, 0.0)) -> float:
    """Sign-insensitive angle (deg, in [0, 90]) between v3 and CR - origin."""
    r = vec3(CR, "CR") - vec3(origin, "origin")
    nr = np.linalg.norm(r)
    if nr == 0.0:
        raise ZeroVector("CR coincides with the origin")
    v = vec3(v3, "v3")
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ZeroVector("v3 is zero")
    return math.degrees(math.atan2(float(np.linalg.norm(np.cross(r, v))), abs(float(r @ v))))


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def lines_from_dict(data: dict) -> list[Line3]:
    """Records: ``{"axis": "x", "index": 1, "P_mm": [...], "d_m": [...]}``."""
    try:
        recs = data["records"]
        lines = []
        for rec in recs:
            axis = rec["axis"]
            if axis not in AXIS_NAMES:
                raise SchemaError(f"unknown axis {axis!r}")
            P = [float(Decimal(v)) for v in rec["P_mm"]]
            d = [float(Decimal(v)) for v in rec["d_m"]]
            lines.append(line_from_measurement(P, d, (axis, int(rec["index"]))))
    except MachStiffError:
        raise
    except (KeyError, TypeError, ValueError, ArithmeticError) as exc:
        raise SchemaError(f"invalid center file: {exc!r}") from exc
    if len(lines) != 6:
        raise SchemaError(f"expected six records, got {len(lines)}")
    return lines


def load_center_file(path) -> tuple[list[Line3], dict]:
    data = load_json_exact(Path(path).read_text(encoding="utf-8"))
    return lines_from_dict(data), data


def projection_plots(sol: CenterSolution, half_length: float = 0.3) -> dict[str, str]:
    """SVG projections (xy, yz, xz) of the lines, the M points, the normals and CR."""
    planes = {"xy": (0, 1), "yz": (1, 2), "xz": (0, 2)}
    out = {}
    for name, (i, j) in planes.items():
        p = Plot(title=f"stiffness center ({name})", xlabel=f"{name[0]} (m)", ylabel=f"{name[1]} (m)",
                 equal_axes=True)
        for ln in sol.lines:
            seg = np.array([ln.point - half_length * ln.direction, ln.point + half_length * ln.direction])
            p.line(seg[:, i], seg[:, j], f"D {ln.label[0]}{ln.label[1]}")
        for k, (ix, pl) in enumerate(zip(sol.intersections, sol.planes)):
            seg = np.array([ix.M, ix.M + (pl.normal @ (sol.CR - ix.M)) * pl.normal])
            p.line(seg[:, i], seg[:, j], f"n {AXIS_NAMES[k]}", color="#555555", dashed=True)
        Ms = np.array([ix.M for ix in sol.intersections])
        p.points(Ms[:, i], Ms[:, j], "M", color="#2ca02c")
        p.points([sol.CR[i]], [sol.CR[j]], "CR", color="black")
        out[name] = p.render()
    return out
