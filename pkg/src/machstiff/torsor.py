"""Torsor algebra and fixed-size linear algebra primitives.

Conventions used throughout the package:

* SI units internally (N, N.m, m, rad).
* A wrench is stacked as ``[Fx, Fy, Fz, Mx, My, Mz]``.
* A twist is stacked as ``[rho_x, rho_y, rho_z, eps_x, eps_y, eps_z]``
  (rotations first, translations second).

With those orderings ``wrench = K @ twist`` puts the translational stiffness
``K_F`` in the upper-right 3x3 block of ``K``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from machstiff.errors import ComplexSpectrum, LargeRotation, ValidationError

SMALL_ROTATION_LIMIT = 1e-2  # rad

AXES = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}


def vec3(v, name: str = "vector") -> np.ndarray:
    """Return ``v`` as a finite float array of shape (3,)."""
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValidationError(f"{name} must have 3 components, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite components: {a}")
    return a


def unit(v, name: str = "direction") -> np.ndarray:
    a = vec3(v, name)
    n = np.linalg.norm(a)
    if n == 0.0:
        raise ValidationError(f"{name} has zero norm")
    return a / n


def skew(v) -> np.ndarray:
    """Matrix form of ``v x .``."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


@dataclass(frozen=True, eq=False)
class Wrench:
    """Mechanical-action torsor: resultant force and moment at a point."""

    force: np.ndarray
    moment: np.ndarray
    at: np.ndarray = field(default_factory=lambda: np.zeros(3))
    axes: str = "xyz"

    def __post_init__(self):
        object.__setattr__(self, "force", vec3(self.force, "force"))
        object.__setattr__(self, "moment", vec3(self.moment, "moment"))
        object.__setattr__(self, "at", vec3(self.at, "reference point"))

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.moment])

    @classmethod
    def from_vector(cls, v, at=(0.0, 0.0, 0.0), axes: str = "xyz") -> "Wrench":
        v = np.asarray(v, dtype=float)
        return cls(v[:3], v[3:], at, axes)

    def transport(self, to) -> "Wrench":
        return transport_wrench(self, to)

    def __repr__(self):
        return f"Wrench(force={self.force}, moment={self.moment}, at={self.at})"


@dataclass(frozen=True, eq=False)
class Twist:
    """Small-displacement torsor: rotation and translation of a point."""

    rotation: np.ndarray
    translation: np.ndarray
    at: np.ndarray = field(default_factory=lambda: np.zeros(3))
    axes: str = "xyz"

    def __post_init__(self):
        object.__setattr__(self, "rotation", vec3(self.rotation, "rotation"))
        object.__setattr__(self, "translation", vec3(self.translation, "translation"))
        object.__setattr__(self, "at", vec3(self.at, "reference point"))
        if np.max(np.abs(self.rotation)) > SMALL_ROTATION_LIMIT:
            warnings.warn(
                f"rotation {self.rotation} rad exceeds the small-displacement range",
                LargeRotation,
                stacklevel=3,
            )

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.rotation, self.translation])

    @classmethod
    def from_vector(cls, v, at=(0.0, 0.0, 0.0), axes: str = "xyz") -> "Twist":
        v = np.asarray(v, dtype=float)
        return cls(v[:3], v[3:], at, axes)

    def transport(self, to) -> "Twist":
        return transport_twist(self, to)

    def __repr__(self):
        return f"Twist(rotation={self.rotation}, translation={self.translation}, at={self.at})"


def wrench_from_point_force(force, applied_at, expressed_at=(0.0, 0.0, 0.0), axes: str = "xyz") -> Wrench:
    """Wrench of a single force ``force`` acting at ``applied_at``, reduced at ``expressed_at``."""
    f = vec3(force, "force")
    lever = vec3(applied_at, "application point") - vec3(expressed_at, "reference point")
    return Wrench(f, np.cross(lever, f), expressed_at, axes)


def transport_wrench(w: Wrench, to) -> Wrench:
    # M_to = M_at + (at - to) x F
    to = vec3(to, "target point")
    return Wrench(w.force.copy(), w.moment + np.cross(w.at - to, w.force), to, w.axes)


def transport_twist(t: Twist, to) -> Twist:
    # eps_to = eps_at + rho x (to - at)
    to = vec3(to, "target point")
    return Twist(t.rotation.copy(), t.translation + np.cross(t.rotation, to - t.at), to, t.axes)


def wrench_transport_matrix(frm, to) -> np.ndarray:
    """6x6 map taking a wrench vector at ``frm`` to the same wrench at ``to``."""
    r = vec3(frm) - vec3(to)
    A = np.eye(6)
    A[3:, :3] = skew(r)
    return A


def twist_transport_matrix(frm, to) -> np.ndarray:
    """6x6 map taking a twist vector at ``frm`` to the same twist at ``to``."""
    r = vec3(to) - vec3(frm)
    B = np.eye(6)
    B[3:, :3] = -skew(r)
    return B


# ---------------------------------------------------------------------------
# 3x3 real eigenproblem
# ---------------------------------------------------------------------------

def _cubic_roots(a2: float, a1: float, a0: float, imag_tol: float) -> list[float]:
    """Real roots of ``x^3 + a2 x^2 + a1 x + a0`` (multiplicities kept).

    Raises ComplexSpectrum when a conjugate pair has an imaginary part above
    ``imag_tol``; smaller imaginary parts are treated as a double root.
    """
    shift = a2 / 3.0
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    if abs(p) < 1e-10 and abs(q) < 1e-14:
        # triple root; roundoff would otherwise split it by ~eps**(1/3)
        roots = [0.0, 0.0, 0.0]
    elif disc > 0.0:
        sq = math.sqrt(disc)
        u = np.cbrt(-q / 2.0 - math.copysign(sq, q))
        v = -p / (3.0 * u) if u != 0.0 else 0.0
        real = u + v
        pair_re = -(u + v) / 2.0
        pair_im = math.sqrt(3.0) / 2.0 * abs(u - v)
        if pair_im > imag_tol:
            raise ComplexSpectrum(
                f"complex eigenvalue pair (imaginary part {pair_im:.3g} relative)",
                eigenvalues=(real - shift, complex(pair_re - shift, pair_im), complex(pair_re - shift, -pair_im)),
            )
        roots = [real, pair_re, pair_re]
    else:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = [m * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]

    out = []
    for t in roots:
        x = t - shift
        # Newton polish on the undepressed cubic; skipped near multiple roots
        for _ in range(3):
            f = ((x + a2) * x + a1) * x + a0
            df = (3.0 * x + 2.0 * a2) * x + a1
            if abs(df) < 1e-8:
                break
            step = f / df
            x -= step
            if abs(step) < 1e-17:
                break
        out.append(x)
    return out


def _complement_basis(r: np.ndarray) -> np.ndarray:
    """3x2 orthonormal basis of the plane orthogonal to ``r``."""
    r = r / np.linalg.norm(r)
    trial = AXES["x"] if abs(r[0]) < 0.9 else AXES["y"]
    a = np.cross(r, trial)
    a /= np.linalg.norm(a)
    return np.column_stack([a, np.cross(r, a)])


def _simple_vector(A: np.ndarray, lam: float) -> np.ndarray:
    """Unit null vector of ``A - lam I`` for a simple eigenvalue ``lam``."""
    B = A - lam * np.eye(3)
    crosses = [np.cross(B[i], B[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
    v = max(crosses, key=np.linalg.norm)
    n = np.linalg.norm(v)
    if n == 0.0:
        v = _complement_basis(B[int(np.argmax(np.linalg.norm(B, axis=1)))])[:, 0]
    else:
        v = v / n
    # shifted inverse iteration
    M = B - 1e-10 * max(1.0, abs(lam)) * np.eye(3)
    for _ in range(2):
        try:
            w = np.linalg.solve(M, v)
        except np.linalg.LinAlgError:
            break
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0.0:
            break
        v = w / nw
    return v


def _eig2(R: np.ndarray, imag_tol: float) -> tuple[list[float], list[np.ndarray]]:
    half_tr = 0.5 * (R[0, 0] + R[1, 1])
    disc = (0.5 * (R[0, 0] - R[1, 1])) ** 2 + R[0, 1] * R[1, 0]
    if disc < 0.0:
        im = math.sqrt(-disc)
        if im > imag_tol:
            raise ComplexSpectrum(
                f"complex eigenvalue pair (imaginary part {im:.3g})",
                eigenvalues=(complex(half_tr, im), complex(half_tr, -im)),
            )
        disc = 0.0
    sq = math.sqrt(disc)
    vals = [half_tr - sq, half_tr + sq]
    vecs = []
    for lam in vals:
        B = R - lam * np.eye(2)
        row = B[int(np.argmax(np.linalg.norm(B, axis=1)))]
        if np.linalg.norm(row) <= 1e-14 * max(1.0, np.linalg.norm(R)):
            vecs.append(np.array([1.0, 0.0]) if not vecs else np.array([0.0, 1.0]))
        else:
            y = np.array([-row[1], row[0]])
            vecs.append(y / np.linalg.norm(y))
    return vals, vecs


def _fix_sign(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    return v if v[int(np.argmax(np.abs(v)))] > 0 else -v


def _eig3(A: np.ndarray, imag_tol: float, depth: int = 0) -> tuple[list[float], list[np.ndarray]]:
    """Eigenpairs of ``A`` (unsorted); ``imag_tol`` is absolute."""
    scale = np.linalg.norm(A)
    if scale <= imag_tol * 1e-6 or depth > 4:
        return [float(np.trace(A)) / 3.0] * 3, [AXES[k].copy() for k in "xyz"]
    An = A / scale
    c1 = (An[0, 0] * An[1, 1] - An[0, 1] * An[1, 0]
          + An[0, 0] * An[2, 2] - An[0, 2] * An[2, 0]
          + An[1, 1] * An[2, 2] - An[1, 2] * An[2, 1])
    # a symmetric matrix has a real spectrum whatever roundoff suggests
    symmetric = np.allclose(An, An.T, rtol=0.0, atol=1e-13)
    roots = _cubic_roots(-np.trace(An), c1, -np.linalg.det(An),
                         imag_tol=math.inf if symmetric else imag_tol / scale)
    roots.sort()

    close01 = abs(roots[1] - roots[0]) < _CLUSTER_TOL
    close12 = abs(roots[2] - roots[1]) < _CLUSTER_TOL
    if close01 and close12:
        c = float(np.trace(A)) / 3.0
        if abs(c) > 1e-12 * scale:
            vals, vecs = _eig3(A - c * np.eye(3), imag_tol, depth + 1)
            return [v + c for v in vals], vecs
        # nilpotent part only: defective, return the null space it has
        crosses = [np.cross(An[i], An[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
        v = max(crosses, key=np.linalg.norm)
        if np.linalg.norm(v) > 1e-6:
            vecs = [v / np.linalg.norm(v)] * 3
        else:
            Q = _complement_basis(An[int(np.argmax(np.linalg.norm(An, axis=1)))])
            vecs = [Q[:, 0], Q[:, 1], Q[:, 1]]
        return [c] * 3, vecs
    if close01 or close12:
        single = roots[2] if close01 else roots[0]
        right = _simple_vector(An, single)
        left = _simple_vector(An.T, single)
        # the cluster's invariant subspace is orthogonal to the isolated left vector
        Q = _complement_basis(left)
        vals2, ys = _eig2(Q.T @ An @ Q, imag_tol / scale)
        vals = [single * scale] + [v * scale for v in vals2]
        return vals, [right] + [Q @ y for y in ys]
    return [r * scale for r in roots], [_simple_vector(An, r) for r in roots]


_CLUSTER_TOL = 1e-5


def eig3_real(M) -> tuple[np.ndarray, np.ndarray]:
    """Real eigen-decomposition of a general (possibly non-symmetric) 3x3 matrix.

    Eigenvalues come from the characteristic polynomial (Cardano /
    trigonometric roots, Newton-polished); eigenvectors from cross products of
    the rows of ``M - lam I`` refined by inverse iteration. Clustered
    eigenvalues are resolved inside their invariant subspace.

    Returns
    -------
    eigenvalues : (3,) array
        Sorted ascending by magnitude.
    eigenvectors : (3, 3) array
        Unit eigenvectors as columns, each with its largest-magnitude
        component positive.

    Raises
    ------
    ComplexSpectrum
        If an eigenvalue has an imaginary part larger than ``1e-6 * ||M||``.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise ValidationError(f"expected a 3x3 matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError("matrix has non-finite entries")
    norm = np.linalg.norm(M)
    if norm == 0.0:
        return np.zeros(3), np.eye(3)
    vals, vecs = _eig3(M, 1e-6 * norm)
    order = sorted(range(3), key=lambda i: (abs(vals[i]), vals[i]))
    return (np.array([vals[i] for i in order]),
            np.column_stack([_fix_sign(vecs[i]) for i in order]))
