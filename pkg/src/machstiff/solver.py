"""Compliance/stiffness identification and principal directions.

Block layout of a 6x6 stiffness matrix (wrench = K @ twist, twist stacked
rotations first)::

    K = [[K_FC, K_F ],      K_F  : translation -> force   (N/m)
         [K_C , K_CF]]      K_C  : rotation -> moment     (N.m/rad)
                            K_FC : rotation -> force      (N/rad)
                            K_CF : translation -> moment  (N.m/m)

Identified matrices are never symmetrized; ``symmetry_deviation`` reports
how far they are from symmetric instead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from machstiff.errors import (
    DegenerateProjection,
    FrameMismatch,
    IllConditioned,
    SingularLoadSet,
    SingularMatrix,
    ValidationError,
)
from machstiff.fitting import MidlineFit, midline, paths_from_series
from machstiff.ingest import Campaign, LoadCase, reading_matrix, unit_wrench
from machstiff.torsor import AXES, Twist, Wrench, eig3_real, vec3

SINGULAR_COND = 1e8
WARN_COND = 1e6

BLOCKS = {
    "FC": (slice(0, 3), slice(0, 3)),
    "F": (slice(0, 3), slice(3, 6)),
    "C": (slice(3, 6), slice(0, 3)),
    "CF": (slice(3, 6), slice(3, 6)),
}

PLANES = {
    "xy": (AXES["x"], AXES["y"]),
    "yz": (AXES["y"], AXES["z"]),
    "xz": (AXES["x"], AXES["z"]),
}

TWIST_LABELS = ("rho_x", "rho_y", "rho_z", "eps_x", "eps_y", "eps_z")


def symmetry_deviation(M) -> float:
    M = np.asarray(M, dtype=float)
    n = np.linalg.norm(M)
    return float(np.linalg.norm(M - M.T) / n) if n else 0.0


@dataclass(frozen=True, eq=False)
class Compliance6:
    matrix: np.ndarray
    at: np.ndarray = field(default_factory=lambda: np.zeros(3))
    axes: str = "xyz"
    load_condition: float = float("nan")

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.matrix))


@dataclass(frozen=True, eq=False)
class Stiffness6:
    matrix: np.ndarray
    at: np.ndarray = field(default_factory=lambda: np.zeros(3))
    axes: str = "xyz"

    @property
    def K_F(self) -> np.ndarray:
        return extract_block(self, "F")

    @property
    def K_C(self) -> np.ndarray:
        return extract_block(self, "C")

    @property
    def K_FC(self) -> np.ndarray:
        return extract_block(self, "FC")

    @property
    def K_CF(self) -> np.ndarray:
        return extract_block(self, "CF")

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.matrix))

    @property
    def symmetry_deviation(self) -> float:
        return symmetry_deviation(self.matrix)


@dataclass(frozen=True, eq=False)
class PrincipalDecomposition:
    """Eigenvalues ascending by magnitude; eigenvectors are the columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source: str = ""

    @property
    def max_deformation_direction(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    def as_dict(self) -> dict:
        return {
            "source": self.source,
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenvectors": self.eigenvectors.tolist(),
        }


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------

def _same_frame(items) -> tuple[np.ndarray, str]:
    at, axes = items[0].at, items[0].axes
    for it in items[1:]:
        if not np.array_equal(it.at, at) or it.axes != axes:
            raise FrameMismatch("all torsors must be expressed at the same point and axes")
    return at, axes


def assemble_compliance(cases: Sequence[tuple[Wrench, Twist]]) -> Compliance6:
    """Compliance C0 solving ``D = C0 @ T`` for wrench columns T and twist columns D.

    More than six cases give the least-squares solution.
    """
    if len(cases) < 6:
        raise SingularLoadSet(f"6 independent load cases are required, got {len(cases)}")
    wrenches = [w for w, _ in cases]
    twists = [t for _, t in cases]
    at, axes = _same_frame(wrenches + twists)
    T = np.column_stack([w.vector for w in wrenches])
    D = np.column_stack([t.vector for t in twists])
    cond = float(np.linalg.cond(T))
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise SingularLoadSet(f"load wrenches are not independent (condition {cond:.3g})")
    if cond > WARN_COND:
        warnings.warn(f"load set is ill-conditioned (condition {cond:.3g})", IllConditioned, stacklevel=2)
    if T.shape[1] == 6:
        C0 = np.linalg.solve(T.T, D.T).T
    else:
        C0 = np.linalg.lstsq(T.T, D.T, rcond=None)[0].T
    return Compliance6(C0, at.copy(), axes, cond)


def invert_to_stiffness(C0: Compliance6) -> Stiffness6:
    M = C0.matrix
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularMatrix(f"compliance matrix is singular (condition {cond:.3g})")
    return Stiffness6(np.linalg.inv(M), C0.at.copy(), C0.axes)


def extract_block(K, which: str) -> np.ndarray:
    """One of the four 3x3 blocks ``F``, ``C``, ``FC``, ``CF``."""
    M = K.matrix if isinstance(K, Stiffness6) else np.asarray(K, dtype=float)
    if M.shape != (6, 6):
        raise ValidationError(f"expected a 6x6 matrix, got {M.shape}")
    try:
        rows, cols = BLOCKS[which]
    except KeyError:
        raise ValidationError(f"unknown block {which!r}; choose from {sorted(BLOCKS)}") from None
    return M[rows, cols].copy()


def assemble_blocks(K_FC, K_F, K_C, K_CF) -> np.ndarray:
    return np.block([[np.asarray(K_FC), np.asarray(K_F)], [np.asarray(K_C), np.asarray(K_CF)]]).astype(float)


def assemble_parallel(kf_bt, kf_bw) -> np.ndarray:
    """Parallel springs sharing one deflection point: stiffnesses add."""
    a, b = np.asarray(kf_bt, dtype=float), np.asarray(kf_bw, dtype=float)
    if a.shape != (3, 3) or b.shape != (3, 3):
        raise ValidationError(f"expected two 3x3 matrices, got {a.shape} and {b.shape}")
    return a + b


def principal_decomposition(kf, source: str = "") -> PrincipalDecomposition:
    vals, vecs = eig3_real(kf)
    return PrincipalDecomposition(vals, vecs, source)


def principal_angle_in_plane(pd: PrincipalDecomposition, plane="xy") -> float:
    """Angle (deg, in [0, 180)) of the maximum-deformation direction in a plane.

    ``plane`` is a name from ``PLANES`` or a pair of orthonormal axes. The
    minimum-stiffness eigenvector is projected on the plane and measured
    from the first axis towards the second.
    """
    a1, a2 = PLANES[plane] if isinstance(plane, str) else (vec3(plane[0]), vec3(plane[1]))
    if abs(a1 @ a2) > 1e-9 or abs(np.linalg.norm(a1) - 1) > 1e-9 or abs(np.linalg.norm(a2) - 1) > 1e-9:
        raise ValidationError("plane axes must be orthonormal")
    v = pd.max_deformation_direction
    c1, c2 = float(v @ a1), float(v @ a2)
    if math.hypot(c1, c2) < 1e-6:
        raise DegenerateProjection("eigenvector is perpendicular to the plane")
    ang = math.degrees(math.atan2(c2, c1)) % 180.0
    return 0.0 if ang >= 180.0 else ang


# ---------------------------------------------------------------------------
# Campaign identification
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CaseFit:
    label: str
    wrench: Wrench  # per newton of load
    twist: Twist  # per newton of load (midline slopes)
    fits: tuple[MidlineFit, ...]  # one per twist component

    @property
    def error_percent(self) -> np.ndarray:
        return np.array([f.error_percent for f in self.fits])


@dataclass(frozen=True, eq=False)
class Identification:
    block_id: str
    case_fits: tuple[CaseFit, ...]
    compliance: np.ndarray  # 6x6 for BT, 3x3 translational for BW
    stiffness: np.ndarray
    at: np.ndarray
    load_condition: float

    @property
    def K_F(self) -> np.ndarray:
        return extract_block(self.stiffness, "F") if self.block_id == "BT" else self.stiffness.copy()

    @property
    def error_matrix(self) -> np.ndarray:
        """error_percent per (twist component, load case)."""
        E = np.column_stack([c.error_percent for c in self.case_fits])
        return E if self.block_id == "BT" else E[3:]

    def relation_residual(self) -> float:
        """max relative misfit of ``T = K D`` over the input cases."""
        if self.block_id == "BT":
            T = np.column_stack([c.wrench.vector for c in self.case_fits])
            D = np.column_stack([c.twist.vector for c in self.case_fits])
        else:
            T = np.column_stack([c.wrench.force for c in self.case_fits])
            D = np.column_stack([c.twist.translation for c in self.case_fits])
        return float(np.linalg.norm(self.stiffness @ D - T) / np.linalg.norm(T))


def fit_case(case: LoadCase, campaign: Campaign, at=None) -> CaseFit:
    """Midline fit of each twist component of one load case, per newton."""
    cfg = campaign.sensor_config
    R = reading_matrix(cfg)
    forces = [s.force for s in case.steps]
    phases = [s.phase for s in case.steps]
    twists = np.array([R @ np.asarray(s.readings) for s in case.steps])
    fits = []
    for k in range(6):
        charge, discharge = paths_from_series(forces, twists[:, k], phases)
        fits.append(midline(charge, discharge))
    slope = Twist.from_vector([f.slope for f in fits], at=cfg.expressed_at)
    wrench = unit_wrench(case, cfg.expressed_at)
    if at is not None:
        slope, wrench = slope.transport(at), wrench.transport(at)
    return CaseFit(case.label, wrench, slope, tuple(fits))


def identify(campaign: Campaign, at=None) -> Identification:
    """Full chain: midline fits -> compliance -> stiffness.

    BT campaigns give a 6x6 matrix. BW campaigns give the 3x3 translational
    stiffness from forces and translations only.
    """
    fits = tuple(fit_case(c, campaign, at) for c in campaign.cases)
    point = fits[0].wrench.at
    if campaign.block_id == "BT":
        C0 = assemble_compliance([(f.wrench, f.twist) for f in fits])
        K = invert_to_stiffness(C0)
        return Identification("BT", fits, C0.matrix, K.matrix, point, C0.load_condition)
    F = np.column_stack([f.wrench.force for f in fits])
    D = np.column_stack([f.twist.translation for f in fits])
    cond = float(np.linalg.cond(F))
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise SingularLoadSet(f"load forces are not independent (condition {cond:.3g})")
    if F.shape[1] == 3:
        C = np.linalg.solve(F.T, D.T).T
    else:
        C = np.linalg.lstsq(F.T, D.T, rcond=None)[0].T
    if np.linalg.cond(C) > 1e14:
        raise SingularMatrix("translational compliance is singular")
    return Identification("BW", fits, C, np.linalg.inv(C), point, cond)
