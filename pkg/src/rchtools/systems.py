"""Concrete controlled Hamiltonian systems on SO(3) and SE(3).

Each system is a :class:`SystemDef` working on a flat state vector. Layouts:

* ``rigid_body``, ``rigid_body_torque``: ``Pi``
* ``rigid_body_rotors``: ``Pi, alpha(3), l(3)``
* ``heavy_top``: ``Pi, Gamma``
* ``heavy_top_rotors``: ``Pi, Gamma, theta(2), l(2)``
* ``rigid_body_full``: ``A`` (row-major 3x3), ``Pi``

Controls enter through ``channels``, a matrix whose orthonormal columns are
the admissible state-derivative directions (the reduced control subset).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .algebra import Rotation3, cross, hat, vec3
from .errors import ControlOutsideW, SingularInertia, VariantMismatch
from .poisson import SmoothFn, Space

CHANNEL_TOL = 1e-12


class Variant(str, enum.Enum):
    RIGID_BODY = "rigid_body"
    RIGID_BODY_TORQUE = "rigid_body_torque"
    RIGID_BODY_ROTORS = "rigid_body_rotors"
    HEAVY_TOP = "heavy_top"
    HEAVY_TOP_ROTORS = "heavy_top_rotors"
    RIGID_BODY_FULL = "rigid_body_full"


# -- parameters -------------------------------------------------------------------


def _positive(name: str, values, size: int) -> np.ndarray:
    a = np.asarray(values, dtype=float)
    if a.shape != (size,):
        raise ValueError(f"{name} must have {size} entries, got shape {a.shape}")
    if not np.all(np.isfinite(a)) or np.any(a <= 0.0):
        raise SingularInertia(f"{name} entries must be positive and finite, got {a.tolist()}")
    a.setflags(write=False)
    return a


def _unit_chi(chi) -> np.ndarray:
    c = vec3(chi)
    if abs(np.linalg.norm(c) - 1.0) > 1e-12:
        raise ValueError(f"chi must be unit length, |chi| = {np.linalg.norm(c)!r}")
    c.setflags(write=False)
    return c


@dataclass(frozen=True, eq=False)
class RigidBodyParams:
    inertia: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "inertia", _positive("inertia", self.inertia, 3))


@dataclass(frozen=True, eq=False)
class RotorParams:
    """Locked inertias ``ibar`` (3) and rotor axial inertias ``jrotor`` (3)."""

    ibar: np.ndarray
    jrotor: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ibar", _positive("ibar", self.ibar, 3))
        object.__setattr__(self, "jrotor", _positive("jrotor", self.jrotor, 3))


@dataclass(frozen=True, eq=False)
class HeavyTopParams:
    inertia: np.ndarray
    mgh: float
    chi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "inertia", _positive("inertia", self.inertia, 3))
        if not np.isfinite(self.mgh) or self.mgh < 0.0:
            raise ValueError(f"mgh must be >= 0, got {self.mgh!r}")
        object.__setattr__(self, "mgh", float(self.mgh))
        object.__setattr__(self, "chi", _unit_chi(self.chi))


@dataclass(frozen=True, eq=False)
class HeavyTopRotorParams:
    """Heavy top carrying two rotors on its first two principal axes.

    ``ibar`` holds the three locked inertias, ``jrotor`` the two rotor
    axial inertias.
    """

    ibar: np.ndarray
    jrotor: np.ndarray
    mgh: float
    chi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ibar", _positive("ibar", self.ibar, 3))
        object.__setattr__(self, "jrotor", _positive("jrotor", self.jrotor, 2))
        if not np.isfinite(self.mgh) or self.mgh < 0.0:
            raise ValueError(f"mgh must be >= 0, got {self.mgh!r}")
        object.__setattr__(self, "mgh", float(self.mgh))
        object.__setattr__(self, "chi", _unit_chi(self.chi))


# -- Hamiltonians (vectorised over leading axes) --------------------------------------


def rb_hamiltonian(params: RigidBodyParams, pi):
    """Kinetic energy and its gradient Omega = I^-1 Pi."""
    pi = np.asarray(pi, dtype=float)
    omega = pi / params.inertia
    return 0.5 * np.sum(pi * omega, axis=-1), omega


def rb_rotor_hamiltonian(params: RotorParams, pi, ell):
    """Returns (h, dh/dPi, dh/dl)."""
    pi = np.asarray(pi, dtype=float)
    ell = np.asarray(ell, dtype=float)
    omega = (pi - ell) / params.ibar
    spin = ell / params.jrotor
    value = 0.5 * (np.sum((pi - ell) * omega, axis=-1) + np.sum(ell * spin, axis=-1))
    return value, omega, spin - omega


def ht_hamiltonian(params: HeavyTopParams, p):
    """Returns (h, dh/dPi, dh/dGamma) for the stacked point (Pi, Gamma)."""
    x = p.as_array() if hasattr(p, "as_array") else np.asarray(p, dtype=float)
    pi, gamma = x[..., :3], x[..., 3:6]
    omega = pi / params.inertia
    value = 0.5 * np.sum(pi * omega, axis=-1) + params.mgh * (gamma @ params.chi)
    return value, omega, np.broadcast_to(params.mgh * params.chi, gamma.shape).copy()


def ht_rotor_hamiltonian(params: HeavyTopRotorParams, p, theta, ell):
    """Returns (h, dh/dPi, dh/dGamma, dh/dl); theta is cyclic."""
    x = p.as_array() if hasattr(p, "as_array") else np.asarray(p, dtype=float)
    pi, gamma = x[..., :3], x[..., 3:6]
    ell = np.asarray(ell, dtype=float)
    lbar = np.zeros(pi.shape)
    lbar[..., :2] = ell
    omega = (pi - lbar) / params.ibar
    spin = ell / params.jrotor
    value = (
        0.5 * (np.sum((pi - lbar) * omega, axis=-1) + np.sum(ell * spin, axis=-1))
        + params.mgh * (gamma @ params.chi)
    )
    grad_gamma = np.broadcast_to(params.mgh * params.chi, gamma.shape).copy()
    return value, omega, grad_gamma, spin - omega[..., :2]


# -- states -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReducedState:
    """Variant-tagged flat state."""

    variant: Variant
    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        expected = STATE_DIMS[Variant(self.variant)]
        if x.shape != (expected,):
            raise VariantMismatch(f"{self.variant.value} state needs {expected} components, got {x.shape}")
        x.setflags(write=False)
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "x", x)

    @property
    def pi(self) -> np.ndarray:
        return self.x[9:12] if self.variant is Variant.RIGID_BODY_FULL else self.x[:3]

    @property
    def gamma(self) -> np.ndarray:
        if self.variant not in (Variant.HEAVY_TOP, Variant.HEAVY_TOP_ROTORS):
            raise VariantMismatch(f"{self.variant.value} has no Gamma component")
        return self.x[3:6]

    @property
    def theta(self) -> np.ndarray:
        if self.variant is Variant.RIGID_BODY_ROTORS:
            return self.x[3:6]
        if self.variant is Variant.HEAVY_TOP_ROTORS:
            return self.x[6:8]
        raise VariantMismatch(f"{self.variant.value} has no rotor angles")

    @property
    def ell(self) -> np.ndarray:
        if self.variant is Variant.RIGID_BODY_ROTORS:
            return self.x[6:9]
        if self.variant is Variant.HEAVY_TOP_ROTORS:
            return self.x[8:10]
        raise VariantMismatch(f"{self.variant.value} has no rotor momenta")


@dataclass(frozen=True, eq=False)
class FullState:
    """Left-trivialised point (A, Pi) of T*SO(3)."""

    attitude: Rotation3
    pi: np.ndarray

    def __post_init__(self):
        if not isinstance(self.attitude, Rotation3):
            object.__setattr__(self, "attitude", Rotation3(self.attitude))
        object.__setattr__(self, "pi", vec3(self.pi))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.attitude.m.ravel(), self.pi])

    @classmethod
    def from_array(cls, x, check: bool = True) -> "FullState":
        x = np.asarray(x, dtype=float)
        return cls(Rotation3(x[:9].reshape(3, 3), check=check), x[9:12])


STATE_DIMS = {
    Variant.RIGID_BODY: 3,
    Variant.RIGID_BODY_TORQUE: 3,
    Variant.RIGID_BODY_ROTORS: 9,
    Variant.HEAVY_TOP: 6,
    Variant.HEAVY_TOP_ROTORS: 10,
    Variant.RIGID_BODY_FULL: 12,
}


# -- system definitions ---------------------------------------------------------------


class SystemDef:
    """A controlled Hamiltonian system in flat coordinates.

    Subclasses supply ``energy``, ``gradient``, ``omega`` and the
    uncontrolled vector field ``_free_vf``.
    """

    variant: Variant
    space: Space | None
    labels: tuple[str, ...]
    channel_index: tuple[int, ...] = ()

    def __init__(self, params):
        self.params = params
        self.dim = STATE_DIMS[self.variant]
        b = np.zeros((self.dim, len(self.channel_index)))
        for col, row in enumerate(self.channel_index):
            b[row, col] = 1.0
        b.setflags(write=False)
        self.channels = b

    def __repr__(self):
        return f"{type(self).__name__}({self.variant.value})"

    @property
    def n_controls(self) -> int:
        return len(self.channel_index)

    @property
    def channel_labels(self) -> tuple[str, ...]:
        return tuple(self.labels[i] for i in self.channel_index)

    @property
    def hamiltonian(self) -> SmoothFn:
        return SmoothFn(lambda x: float(self.energy(x)), self.gradient, f"h[{self.variant.value}]")

    # flat-array interface used by the integrators -------------------------------

    def energy(self, x):
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def omega(self, x) -> np.ndarray:
        raise NotImplementedError

    def _free_vf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def lift(self, u) -> np.ndarray | None:
        """Vertical lift of a control given in channel or state coordinates."""
        if u is None:
            return None
        u = np.asarray(u, dtype=float).ravel()
        if u.size == self.n_controls and self.n_controls:
            full = np.zeros(self.dim)
            full[list(self.channel_index)] = u
            return full
        if u.size == self.dim:
            outside = u.copy()
            outside[list(self.channel_index)] = 0.0
            if np.max(np.abs(outside), initial=0.0) > CHANNEL_TOL:
                raise ControlOutsideW(
                    f"control has components outside the channels {self.channel_labels} "
                    f"of {self.variant.value}"
                )
            return u
        if u.size == 0 or not np.any(u):
            return None
        raise ControlOutsideW(
            f"{self.variant.value} accepts {self.n_controls} channel inputs or a {self.dim}-vector, "
            f"got {u.size} components"
        )

    def vf(self, x: np.ndarray, u=None) -> np.ndarray:
        """State derivative with the control ``u`` given in channel coordinates."""
        dx = self._free_vf(x)
        if u is not None and self.n_controls:
            dx[list(self.channel_index)] += u
        return dx

    def pack(self, state) -> np.ndarray:
        if isinstance(state, ReducedState):
            if state.variant is not self.variant:
                raise VariantMismatch(f"state is {state.variant.value}, system is {self.variant.value}")
            return np.array(state.x)
        if isinstance(state, FullState):
            if self.variant is not Variant.RIGID_BODY_FULL:
                raise VariantMismatch(f"full T*SO(3) state given to {self.variant.value}")
            return state.as_array()
        x = np.array(state, dtype=float)
        if x.shape != (self.dim,):
            raise VariantMismatch(f"{self.variant.value} state needs {self.dim} components, got {x.shape}")
        return x

    def unpack(self, x):
        return ReducedState(self.variant, x)


class RigidBody(SystemDef):
    variant = Variant.RIGID_BODY
    space = Space.SO3_DUAL
    labels = ("Pi_1", "Pi_2", "Pi_3")

    def __init__(self, params: RigidBodyParams):
        super().__init__(params)
        self._inv = 1.0 / params.inertia

    def energy(self, x):
        return rb_hamiltonian(self.params, np.asarray(x)[..., :3])[0]

    def gradient(self, x):
        return np.asarray(x)[..., :3] * self._inv

    def omega(self, x):
        return x[..., :3] * self._inv

    def _free_vf(self, x):
        return cross(x, x * self._inv)


class RigidBodyTorque(RigidBody):
    variant = Variant.RIGID_BODY_TORQUE
    channel_index = (0, 1, 2)


class RigidBodyRotors(SystemDef):
    variant = Variant.RIGID_BODY_ROTORS
    space = Space.SO3_ROTOR
    labels = ("Pi_1", "Pi_2", "Pi_3", "alpha_1", "alpha_2", "alpha_3", "l_1", "l_2", "l_3")
    channel_index = (6, 7, 8)

    def energy(self, x):
        x = np.asarray(x)
        return rb_rotor_hamiltonian(self.params, x[..., :3], x[..., 6:9])[0]

    def gradient(self, x):
        x = np.asarray(x)
        _, g_pi, g_ell = rb_rotor_hamiltonian(self.params, x[..., :3], x[..., 6:9])
        return np.concatenate([g_pi, np.zeros_like(g_pi), g_ell], axis=-1)

    def omega(self, x):
        return (x[..., :3] - x[..., 6:9]) / self.params.ibar

    def rotor_rates(self, x):
        return x[..., 6:9] / self.params.jrotor - self.omega(x)

    def _free_vf(self, x):
        pi, ell = x[:3], x[6:9]
        om = (pi - ell) / self.params.ibar
        out = np.zeros(9)
        out[:3] = cross(pi, om)
        out[3:6] = ell / self.params.jrotor - om
        return out


class HeavyTop(SystemDef):
    variant = Variant.HEAVY_TOP
    space = Space.SE3_DUAL
    labels = ("Pi_1", "Pi_2", "Pi_3", "Gamma_1", "Gamma_2", "Gamma_3")

    def __init__(self, params: HeavyTopParams):
        super().__init__(params)
        self._inv = 1.0 / params.inertia
        self._lever = params.mgh * params.chi

    def energy(self, x):
        return ht_hamiltonian(self.params, np.asarray(x))[0]

    def gradient(self, x):
        _, g_pi, g_gamma = ht_hamiltonian(self.params, np.asarray(x))
        return np.concatenate([g_pi, g_gamma], axis=-1)

    def omega(self, x):
        return x[..., :3] * self._inv

    def _free_vf(self, x):
        pi, gamma = x[:3], x[3:6]
        om = pi * self._inv
        out = np.empty(6)
        out[:3] = cross(pi, om) + cross(gamma, self._lever)
        out[3:6] = cross(gamma, om)
        return out


class HeavyTopRotors(SystemDef):
    variant = Variant.HEAVY_TOP_ROTORS
    space = Space.SE3_ROTOR
    labels = ("Pi_1", "Pi_2", "Pi_3", "Gamma_1", "Gamma_2", "Gamma_3", "theta_1", "theta_2", "l_1", "l_2")
    channel_index = (8, 9)

    def __init__(self, params: HeavyTopRotorParams):
        super().__init__(params)
        self._lever = params.mgh * params.chi

    def _split(self, x):
        x = np.asarray(x)
        return x[..., :6], x[..., 6:8], x[..., 8:10]

    def energy(self, x):
        p, theta, ell = self._split(x)
        return ht_rotor_hamiltonian(self.params, p, theta, ell)[0]

    def gradient(self, x):
        p, theta, ell = self._split(x)
        _, g_pi, g_gamma, g_ell = ht_rotor_hamiltonian(self.params, p, theta, ell)
        return np.concatenate([g_pi, g_gamma, np.zeros_like(g_ell), g_ell], axis=-1)

    def omega(self, x):
        pi = np.array(x[..., :3], dtype=float)
        pi[..., :2] -= x[..., 8:10]
        return pi / self.params.ibar

    def rotor_rates(self, x):
        return x[..., 8:10] / self.params.jrotor - self.omega(x)[..., :2]

    def _free_vf(self, x):
        pi, gamma, ell = x[:3], x[3:6], x[8:10]
        om = np.array([pi[0] - ell[0], pi[1] - ell[1], pi[2]]) / self.params.ibar
        out = np.zeros(10)
        out[:3] = cross(pi, om) + cross(gamma, self._lever)
        out[3:6] = cross(gamma, om)
        out[6:8] = ell / self.params.jrotor - om[:2]
        return out


class RigidBodyFull(SystemDef):
    """Unreduced rigid body on T*SO(3) = SO(3) x so(3)* with body torque."""

    variant = Variant.RIGID_BODY_FULL
    space = None
    labels = tuple(f"A_{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)) + ("Pi_1", "Pi_2", "Pi_3")
    channel_index = (9, 10, 11)

    def __init__(self, params: RigidBodyParams):
        super().__init__(params)
        self._inv = 1.0 / params.inertia

    def energy(self, x):
        return rb_hamiltonian(self.params, np.asarray(x)[..., 9:12])[0]

    def gradient(self, x):
        x = np.asarray(x)
        g = np.zeros(x.shape)
        g[..., 9:12] = x[..., 9:12] * self._inv
        return g

    def omega(self, x):
        return x[..., 9:12] * self._inv

    def _free_vf(self, x):
        a = x[:9].reshape(3, 3)
        pi = x[9:12]
        om = pi * self._inv
        out = np.empty(12)
        out[:9] = (a @ hat(om)).ravel()
        out[9:12] = cross(pi, om)
        return out

    def momentum_map(self, x):
        """Spatial angular momentum A Pi for one state or a stack of states."""
        x = np.asarray(x)
        a = x[..., :9].reshape(x.shape[:-1] + (3, 3))
        return np.einsum("...ij,...j->...i", a, x[..., 9:12])


# -- constructors ---------------------------------------------------------------------


def rigid_body(inertia) -> RigidBody:
    return RigidBody(RigidBodyParams(inertia))


def rigid_body_torque(inertia) -> RigidBodyTorque:
    return RigidBodyTorque(RigidBodyParams(inertia))


def rigid_body_rotors(ibar, jrotor) -> RigidBodyRotors:
    return RigidBodyRotors(RotorParams(ibar, jrotor))


def heavy_top(inertia, mgh: float, chi) -> HeavyTop:
    return HeavyTop(HeavyTopParams(inertia, mgh, chi))


def heavy_top_rotors(ibar, jrotor, mgh: float, chi) -> HeavyTopRotors:
    return HeavyTopRotors(HeavyTopRotorParams(ibar, jrotor, mgh, chi))


def rigid_body_full(inertia) -> RigidBodyFull:
    return RigidBodyFull(RigidBodyParams(inertia))


# -- operations -----------------------------------------------------------------------


def reduced_vf(sys: SystemDef, s, u_vlift=None) -> np.ndarray:
    """Closed-form reduced equations of motion.

    ``u_vlift`` is either a vector of channel inputs or a full state-space
    vector that must lie in the span of ``sys.channels``.
    """
    x = sys.pack(s)
    lift = sys.lift(u_vlift)
    dx = sys._free_vf(x)
    if lift is not None:
        dx = dx + lift
    return dx


def full_rb_vf(params: RigidBodyParams, s: FullState, torque=None) -> tuple[np.ndarray, np.ndarray]:
    """(dA/dt, dPi/dt) with dA/dt = A hat(Omega), dPi/dt = Pi x Omega + torque."""
    omega = s.pi / params.inertia
    pidot = cross(s.pi, omega)
    if torque is not None:
        pidot = pidot + vec3(torque)
    return s.attitude.m @ hat(omega), pidot


def momentum_map_so3(s: FullState) -> np.ndarray:
    return s.attitude.m @ s.pi


def legendre(sys: SystemDef, omega, rotor_rates=None):
    """Velocities to momenta: returns Pi, or (Pi, l) for rotor systems."""
    omega = vec3(omega)
    p = sys.params
    if isinstance(sys, (RigidBody, HeavyTop, RigidBodyFull)):
        return p.inertia * omega
    if isinstance(sys, RigidBodyRotors):
        rates = np.zeros(3) if rotor_rates is None else np.asarray(rotor_rates, dtype=float)
        ell = p.jrotor * (omega + rates)
        return p.ibar * omega + ell, ell
    if isinstance(sys, HeavyTopRotors):
        rates = np.zeros(2) if rotor_rates is None else np.asarray(rotor_rates, dtype=float)
        ell = p.jrotor * (omega[:2] + rates)
        pi = p.ibar * omega
        pi[:2] += ell
        return pi, ell
    raise VariantMismatch(f"no Legendre map for {sys!r}")


def legendre_inverse(sys: SystemDef, pi, ell=None):
    """Momenta to velocities: returns Omega, or (Omega, rotor rates)."""
    pi = vec3(pi)
    p = sys.params
    if isinstance(sys, (RigidBody, HeavyTop, RigidBodyFull)):
        return pi / p.inertia
    if isinstance(sys, RigidBodyRotors):
        ell = np.asarray(ell, dtype=float)
        omega = (pi - ell) / p.ibar
        return omega, ell / p.jrotor - omega
    if isinstance(sys, HeavyTopRotors):
        ell = np.asarray(ell, dtype=float)
        lbar = np.array([ell[0], ell[1], 0.0])
        omega = (pi - lbar) / p.ibar
        return omega, ell / p.jrotor - omega[:2]
    raise VariantMismatch(f"no Legendre map for {sys!r}")
