"""so(3)/SO(3) and se(3)/SE(3) kernel.

Vectors are plain ``numpy`` arrays of shape (3,). The Lie algebra so(3) is
identified with (R^3, x) through :func:`hat`, and so(3)* with R^3 through the
Euclidean pairing.

Sign convention: ``coad_so3(xi, nu) = nu x xi`` so that
``<coad_so3(xi, nu), eta> = <nu, [xi, eta]>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Degenerate, NotARotation, NotSkew

ORTH_TOL = 1e-10
SKEW_TOL = 1e-10
SMALL_ANGLE = 1e-6

__all__ = [
    "Rotation3",
    "SE3Element",
    "SE3AlgebraElement",
    "SE3CoalgebraPoint",
    "cross",
    "hat",
    "vee",
    "exp_so3",
    "bracket_so3",
    "coad_so3",
    "bracket_se3",
    "compose_se3",
    "reorthonormalize",
    "orthogonality_defect",
]


def vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector components must be finite")
    return a


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product of two 3-vectors.

    Written out by components; ``np.cross`` dominates the cost of a
    vector-field evaluation on length-3 inputs.
    """
    a0, a1, a2 = a[0], a[1], a[2]
    b0, b1, b2 = b[0], b[1], b[2]
    return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def hat(v) -> np.ndarray:
    x, y, z = v[0], v[1], v[2]
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise NotSkew(f"expected a 3x3 matrix, got shape {m.shape}")
    defect = np.max(np.abs(m + m.T))
    if defect > SKEW_TOL:
        raise NotSkew(f"matrix is not skew-symmetric (|m + m^T|_max = {defect:.3e})")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def _rodrigues_coefficients(theta: float) -> tuple[float, float]:
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        return 1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0
    return math.sin(theta) / theta, (1.0 - math.cos(theta)) / (theta * theta)


def exp_matrix_so3(v) -> np.ndarray:
    """Rodrigues formula returning the bare 3x3 matrix (no validation)."""
    theta = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    a, b = _rodrigues_coefficients(theta)
    k = hat(v)
    return np.eye(3) + a * k + b * (k @ k)


def exp_so3(v) -> "Rotation3":
    return Rotation3(exp_matrix_so3(vec3(v)), check=False)


def bracket_so3(a, b) -> np.ndarray:
    return cross(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def coad_so3(xi, nu) -> np.ndarray:
    """Infinitesimal coadjoint action ad*_xi nu = nu x xi."""
    return cross(np.asarray(nu, dtype=float), np.asarray(xi, dtype=float))


def orthogonality_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m.T @ m - np.eye(3))))


@dataclass(frozen=True, eq=False)
class Rotation3:
    """Element of SO(3), validated on construction."""

    m: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.shape != (3, 3):
            raise NotARotation(f"expected a 3x3 matrix, got shape {m.shape}")
        if self.check:
            if not np.all(np.isfinite(m)):
                raise NotARotation("rotation entries must be finite")
            defect = orthogonality_defect(m)
            if defect > ORTH_TOL:
                raise NotARotation(f"matrix is not orthogonal (defect {defect:.3e})")
            det = np.linalg.det(m)
            if abs(det - 1.0) > ORTH_TOL:
                raise NotARotation(f"determinant {det!r} is not 1")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls) -> "Rotation3":
        return cls(np.eye(3), check=False)

    def __matmul__(self, other):
        if isinstance(other, Rotation3):
            return Rotation3(self.m @ other.m, check=False)
        return self.m @ np.asarray(other, dtype=float)

    def transpose(self) -> "Rotation3":
        return Rotation3(self.m.T, check=False)

    def __eq__(self, other):
        return isinstance(other, Rotation3) and np.array_equal(self.m, other.m)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SE3Element:
    rot: Rotation3
    trans: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "trans", vec3(self.trans))

    @classmethod
    def identity(cls) -> "SE3Element":
        return cls(Rotation3.identity(), np.zeros(3))


@dataclass(frozen=True, eq=False)
class SE3AlgebraElement:
    omega: np.ndarray
    vel: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", vec3(self.omega))
        object.__setattr__(self, "vel", vec3(self.vel))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.omega, self.vel])


@dataclass(frozen=True, eq=False)
class SE3CoalgebraPoint:
    """Point (Pi, Gamma) of se(3)*."""

    pi: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pi", vec3(self.pi))
        object.__setattr__(self, "gamma", vec3(self.gamma))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.pi, self.gamma])

    @classmethod
    def from_array(cls, x) -> "SE3CoalgebraPoint":
        x = np.asarray(x, dtype=float)
        return cls(x[:3], x[3:6])


def bracket_se3(a: SE3AlgebraElement, b: SE3AlgebraElement) -> SE3AlgebraElement:
    """Semidirect bracket with SO(3) acting on R^3 by rotation."""
    return SE3AlgebraElement(
        cross(a.omega, b.omega),
        cross(a.omega, b.vel) - cross(b.omega, a.vel),
    )


def compose_se3(g1: SE3Element, g2: SE3Element) -> SE3Element:
    return SE3Element(g1.rot @ g2.rot, g1.trans + g1.rot.m @ g2.trans)


def reorthonormalize_matrix(m: np.ndarray) -> np.ndarray:
    """Nearest rotation in the Frobenius norm (polar factor)."""
    m = np.asarray(m, dtype=float)
    u, s, vt = np.linalg.svd(m)
    if not np.all(np.isfinite(s)) or s[-1] <= 1e-8 * max(s[0], 1e-300):
        raise Degenerate("matrix is rank deficient; no nearest rotation")
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        u = u.copy()
        u[:, -1] *= -1.0
        r = u @ vt
    return r


def reorthonormalize(r: Rotation3 | np.ndarray) -> Rotation3:
    m = r.m if isinstance(r, Rotation3) else r
    return Rotation3(reorthonormalize_matrix(m))
