"""Lie-Poisson brackets, orbit forms and Casimirs.

Functions on a phase space are :class:`SmoothFn` values carrying an
analytic gradient. Every space is handled in flat coordinates:

========== ===================================== =====
space      coordinates                           dim
========== ===================================== =====
SO3_DUAL   Pi                                    3
SE3_DUAL   Pi, Gamma                             6
SO3_ROTOR  Pi, alpha (3), l (3)                  9
SE3_ROTOR  Pi, Gamma, theta (2), l (2)           10
========== ===================================== =====

The minus bracket is the default everywhere (left reduction).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import SE3CoalgebraPoint, cross

MINUS = -1
PLUS = 1


class Space(enum.Enum):
    SO3_DUAL = ("so3*", 3, 0)
    SE3_DUAL = ("se3*", 6, 0)
    SO3_ROTOR = ("so3* x T*R3", 3, 3)
    SE3_ROTOR = ("se3* x T*R2", 6, 2)

    def __init__(self, label: str, lp_dim: int, rotors: int):
        self.label = label
        self.lp_dim = lp_dim
        self.rotors = rotors

    @property
    def dim(self) -> int:
        return self.lp_dim + 2 * self.rotors


@dataclass(frozen=True)
class SmoothFn:
    """Scalar function with analytic gradient, both on flat coordinates."""

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    def __call__(self, x) -> float:
        return self.value(np.asarray(x, dtype=float))

    def __mul__(self, other: "SmoothFn") -> "SmoothFn":
        f, g = self, other
        return SmoothFn(
            lambda x: f.value(x) * g.value(x),
            lambda x: f.value(x) * g.grad(x) + g.value(x) * f.grad(x),
            f"({f.name})*({g.name})",
        )

    def __add__(self, other: "SmoothFn") -> "SmoothFn":
        f, g = self, other
        return SmoothFn(
            lambda x: f.value(x) + g.value(x),
            lambda x: f.grad(x) + g.grad(x),
            f"({f.name})+({g.name})",
        )


def linear_fn(xi, name: str = "") -> SmoothFn:
    xi = np.array(xi, dtype=float)
    return SmoothFn(lambda x: float(np.dot(xi, x)), lambda x: xi.copy(), name or "linear")


def coordinate_fn(j: int, dim: int) -> SmoothFn:
    e = np.zeros(dim)
    e[j] = 1.0
    return SmoothFn(lambda x: float(x[j]), lambda x: e.copy(), f"x{j}")


def quadratic_fn(a, b, c: float = 0.0) -> SmoothFn:
    """F(x) = x.A.x/2 + b.x + c with A symmetrised."""
    a = np.asarray(a, dtype=float)
    a = 0.5 * (a + a.T)
    b = np.asarray(b, dtype=float)
    return SmoothFn(
        lambda x: float(0.5 * x @ a @ x + b @ x + c),
        lambda x: a @ x + b,
        "quadratic",
    )


def constant_fn(c: float, dim: int) -> SmoothFn:
    return SmoothFn(lambda x: float(c), lambda x: np.zeros(dim), "constant")


def _sign(sign) -> int:
    if sign in (-1, "-", "minus"):
        return MINUS
    if sign in (1, "+", "plus"):
        return PLUS
    raise ValueError(f"bracket sign must be +1 or -1, got {sign!r}")


# -- bracket kernels on gradients ---------------------------------------------


def _lp_so3(gf, gk, pi, s: int) -> float:
    c = cross(gf, gk)
    return s * float(pi[0] * c[0] + pi[1] * c[1] + pi[2] * c[2])


def _lp_se3(gf, gk, x, s: int) -> float:
    pi, gamma = x[:3], x[3:6]
    t1 = np.dot(pi, cross(gf[:3], gk[:3]))
    t2 = np.dot(gamma, cross(gf[:3], gk[3:6]) - cross(gk[:3], gf[3:6]))
    return s * float(t1 + t2)


def _rotor(gf_theta, gf_ell, gk_theta, gk_ell) -> float:
    return float(np.dot(gf_theta, gk_ell) - np.dot(gk_theta, gf_ell))


def bracket_from_gradients(gf, gk, x, space: Space, sign=MINUS) -> float:
    s = _sign(sign)
    n = space.lp_dim
    lp = _lp_so3 if n == 3 else _lp_se3
    value = lp(gf[:n], gk[:n], x, s)
    k = space.rotors
    if k:
        value += _rotor(gf[n : n + k], gf[n + k :], gk[n : n + k], gk[n + k :])
    return value


# -- public brackets ------------------------------------------------------------


def lp_bracket_so3(f: SmoothFn, k: SmoothFn, pi, sign=MINUS) -> float:
    """{F, K}(Pi) = +-Pi . (grad F x grad K)."""
    pi = np.asarray(pi, dtype=float)
    return _lp_so3(f.grad(pi), k.grad(pi), pi, _sign(sign))


def lp_bracket_se3(f: SmoothFn, k: SmoothFn, p, sign=MINUS) -> float:
    """Heavy-top (semidirect product) bracket on se(3)*."""
    x = p.as_array() if isinstance(p, SE3CoalgebraPoint) else np.asarray(p, dtype=float)
    return _lp_se3(f.grad(x), k.grad(x), x, _sign(sign))


def bracket_rotor(f: SmoothFn, k: SmoothFn, theta, ell) -> float:
    """Canonical bracket on T*V; F and K take the flat vector (theta, l)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    ell = np.atleast_1d(np.asarray(ell, dtype=float))
    n = theta.size
    z = np.concatenate([theta, ell])
    gf, gk = f.grad(z), k.grad(z)
    return _rotor(gf[:n], gf[n:], gk[:n], gk[n:])


@dataclass(frozen=True, eq=False)
class ProductPoint:
    """Point (mu, theta, l) of g* x V x V*."""

    mu: np.ndarray
    theta: np.ndarray
    ell: np.ndarray

    def __post_init__(self):
        mu = self.mu.as_array() if isinstance(self.mu, SE3CoalgebraPoint) else self.mu
        mu = np.asarray(mu, dtype=float)
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        ell = np.atleast_1d(np.asarray(self.ell, dtype=float))
        if mu.shape not in ((3,), (6,)):
            raise ValueError("mu must live in so(3)* (3) or se(3)* (6)")
        if theta.shape != ell.shape or theta.size not in (0, 2, 3):
            raise ValueError("rotor angles and momenta must have equal length 0, 2 or 3")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "ell", ell)

    @property
    def space(self) -> Space:
        if self.mu.size == 3:
            return Space.SO3_ROTOR if self.theta.size else Space.SO3_DUAL
        return Space.SE3_ROTOR if self.theta.size else Space.SE3_DUAL

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.mu, self.theta, self.ell])


def bracket_product(f: SmoothFn, k: SmoothFn, p: ProductPoint, sign=MINUS) -> float:
    """Lie-Poisson bracket of the first factor plus the rotor bracket."""
    x = p.as_array()
    space = p.space
    if space.rotors and space.rotors != p.theta.size:
        raise ValueError("rotor count does not match the Lie-Poisson factor")
    return bracket_from_gradients(f.grad(x), k.grad(x), x, space, sign)


def bracket(f: SmoothFn, k: SmoothFn, x, space: Space, sign=MINUS) -> float:
    x = np.asarray(x, dtype=float)
    return bracket_from_gradients(f.grad(x), k.grad(x), x, space, sign)


def bracket_vector_field(h: SmoothFn, x, space: Space, sign=MINUS) -> np.ndarray:
    """Components {x_j, h} for every coordinate function x_j."""
    x = np.asarray(x, dtype=float)
    return np.array([bracket(coordinate_fn(j, space.dim), h, x, space, sign) for j in range(space.dim)])


# -- Hamiltonian vector fields ------------------------------------------------------


def ham_vf_so3(grad_h, pi) -> np.ndarray:
    """X_h(Pi) = Pi x grad h (minus convention)."""
    return cross(np.asarray(pi, dtype=float), np.asarray(grad_h, dtype=float))


def ham_vf_se3(grad_pi, grad_gamma, p) -> SE3CoalgebraPoint:
    if not isinstance(p, SE3CoalgebraPoint):
        p = SE3CoalgebraPoint.from_array(p)
    grad_pi = np.asarray(grad_pi, dtype=float)
    grad_gamma = np.asarray(grad_gamma, dtype=float)
    return SE3CoalgebraPoint(
        cross(p.pi, grad_pi) + cross(p.gamma, grad_gamma),
        cross(p.gamma, grad_pi),
    )


def kks_form(nu, xi, eta) -> float:
    """Minus orbit form: omega(ad*_xi nu, ad*_eta nu) = -<nu, [xi, eta]>."""
    nu, xi, eta = (np.asarray(a, dtype=float) for a in (nu, xi, eta))
    return -float(np.dot(nu, cross(xi, eta)))


# -- Casimirs ------------------------------------------------------------------------


def casimirs(space: Space) -> list[SmoothFn]:
    """Hard-coded Casimirs of the Lie-Poisson factor, lifted to ``space``."""
    dim = space.dim
    if space.lp_dim == 3:

        def g_pi2(x):
            out = np.zeros(dim)
            out[:3] = 2.0 * x[:3]
            return out

        return [SmoothFn(lambda x: float(np.dot(x[:3], x[:3])), g_pi2, "|Pi|^2")]

    def g_gamma2(x):
        out = np.zeros(dim)
        out[3:6] = 2.0 * x[3:6]
        return out

    def g_pi_gamma(x):
        out = np.zeros(dim)
        out[:3] = x[3:6]
        out[3:6] = x[:3]
        return out

    return [
        SmoothFn(lambda x: float(np.dot(x[3:6], x[3:6])), g_gamma2, "|Gamma|^2"),
        SmoothFn(lambda x: float(np.dot(x[:3], x[3:6])), g_pi_gamma, "Pi.Gamma"),
    ]


def casimir_values(states: np.ndarray, space: Space) -> list[np.ndarray]:
    """Vectorised Casimir series over rows of ``states``."""
    s = np.atleast_2d(states)
    if space.lp_dim == 3:
        return [np.einsum("ij,ij->i", s[:, :3], s[:, :3])]
    return [
        np.einsum("ij,ij->i", s[:, 3:6], s[:, 3:6]),
        np.einsum("ij,ij->i", s[:, :3], s[:, 3:6]),
    ]
