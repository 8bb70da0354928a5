"""Feedback laws, equivalence maps and the control-matching residual."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import cross, vec3
from .errors import DegenerateGain, DimensionMismatch, VariantMismatch
from .systems import SystemDef, Variant


class LawKind(str, enum.Enum):
    TORQUE_P = "torque_p"
    ROTOR_GAIN = "rotor_gain"
    HT_ROTOR_GAIN = "ht_rotor_gain"
    BLOCH = "bloch"
    CONSTANT_TORQUE = "constant_torque"
    CUSTOM = "custom"


ADMISSIBLE = {
    LawKind.TORQUE_P: (Variant.RIGID_BODY_TORQUE, Variant.RIGID_BODY_FULL),
    LawKind.CONSTANT_TORQUE: (Variant.RIGID_BODY_TORQUE, Variant.RIGID_BODY_FULL),
    LawKind.ROTOR_GAIN: (Variant.RIGID_BODY_ROTORS,),
    LawKind.HT_ROTOR_GAIN: (Variant.HEAVY_TOP_ROTORS,),
    LawKind.BLOCH: (Variant.RIGID_BODY_ROTORS, Variant.RIGID_BODY_TORQUE),
    LawKind.CUSTOM: (
        Variant.RIGID_BODY_TORQUE,
        Variant.RIGID_BODY_ROTORS,
        Variant.HEAVY_TOP_ROTORS,
        Variant.RIGID_BODY_FULL,
    ),
}


# -- the laws as plain functions --------------------------------------------------------


def torque_law_p(p, omega) -> np.ndarray:
    """Torque p x Omega with p constant."""
    return cross(np.asarray(p, dtype=float), np.asarray(omega, dtype=float))


def rotor_gain_law(k: float, pi, omega) -> np.ndarray:
    """Rotor torque k (Pi x Omega); makes l - k Pi a first integral."""
    return k * cross(np.asarray(pi, dtype=float), np.asarray(omega, dtype=float))


def ht_rotor_gain_law(k: float, gamma, omega) -> np.ndarray:
    """First two components of k (Gamma x Omega), driving the two rotors."""
    return (k * cross(np.asarray(gamma, dtype=float), np.asarray(omega, dtype=float)))[:2]


def bloch_law(eps: float, inertia, pi) -> np.ndarray:
    i1, i2 = float(inertia[0]), float(inertia[1])
    return np.array([0.0, 0.0, -eps * (i1 - i2) / (i1 * i2) * pi[0] * pi[1]])


@dataclass(frozen=True, eq=False)
class ControlLaw:
    """A feedback law evaluated in the channel coordinates of a system."""

    kind: LawKind
    p: np.ndarray | None = None
    k: float | None = None
    eps: float | None = None
    fn: Callable[[SystemDef, np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        kind = LawKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in (LawKind.TORQUE_P, LawKind.CONSTANT_TORQUE):
            if self.p is None:
                raise ValueError(f"{kind.value} law needs a vector p")
            object.__setattr__(self, "p", vec3(self.p))
        elif kind in (LawKind.ROTOR_GAIN, LawKind.HT_ROTOR_GAIN):
            if self.k is None or not np.isfinite(self.k):
                raise ValueError(f"{kind.value} law needs a finite gain k")
        elif kind is LawKind.BLOCH:
            if self.eps is None or not np.isfinite(self.eps):
                raise ValueError("bloch law needs a finite eps")
        elif kind is LawKind.CUSTOM and self.fn is None:
            raise ValueError("custom law needs a callable fn(sys, x)")

    @classmethod
    def torque_p(cls, p) -> "ControlLaw":
        return cls(LawKind.TORQUE_P, p=p)

    @classmethod
    def constant_torque(cls, tau) -> "ControlLaw":
        return cls(LawKind.CONSTANT_TORQUE, p=tau)

    @classmethod
    def rotor_gain(cls, k: float) -> "ControlLaw":
        return cls(LawKind.ROTOR_GAIN, k=float(k))

    @classmethod
    def ht_rotor_gain(cls, k: float) -> "ControlLaw":
        return cls(LawKind.HT_ROTOR_GAIN, k=float(k))

    @classmethod
    def bloch(cls, eps: float) -> "ControlLaw":
        return cls(LawKind.BLOCH, eps=float(eps))

    @classmethod
    def custom(cls, fn) -> "ControlLaw":
        return cls(LawKind.CUSTOM, fn=fn)

    def admissible(self, sys: SystemDef) -> bool:
        return sys.variant in ADMISSIBLE[self.kind]

    def check(self, sys: SystemDef) -> None:
        if not self.admissible(sys):
            raise VariantMismatch(f"control '{self.kind.value}' not admissible for system '{sys.variant.value}'")

    def __call__(self, sys: SystemDef, x: np.ndarray) -> np.ndarray:
        kind = self.kind
        if kind is LawKind.TORQUE_P:
            return torque_law_p(self.p, sys.omega(x))
        if kind is LawKind.CONSTANT_TORQUE:
            return self.p.copy()
        if kind is LawKind.ROTOR_GAIN:
            return rotor_gain_law(self.k, x[:3], sys.omega(x))
        if kind is LawKind.HT_ROTOR_GAIN:
            return ht_rotor_gain_law(self.k, x[3:6], sys.omega(x))
        if kind is LawKind.BLOCH:
            inertia = sys.params.ibar if sys.variant is Variant.RIGID_BODY_ROTORS else sys.params.inertia
            return bloch_law(self.eps, inertia, x[:3])
        return np.asarray(self.fn(sys, x), dtype=float)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value}
        if self.p is not None:
            d["p"] = self.p.tolist()
        if self.k is not None:
            d["k"] = self.k
        if self.eps is not None:
            d["eps"] = self.eps
        return d


def closed_loop(sys: SystemDef, law: ControlLaw | None) -> Callable[[np.ndarray], np.ndarray]:
    """State derivative map x -> f(x) of the closed-loop system."""
    if law is None:
        return lambda x: sys.vf(x)
    law.check(sys)
    return lambda x: sys.vf(x, law(sys, x))


# -- equivalence maps -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EquivalenceMap:
    """Affine state map between closed-loop systems.

    ``jacobian`` is the constant linear part; it pushes forward tangent
    vectors of the source system.
    """

    forward: Callable[[np.ndarray], np.ndarray]
    jacobian: np.ndarray
    name: str = ""

    @property
    def source_dim(self) -> int:
        return self.jacobian.shape[1]

    @property
    def target_dim(self) -> int:
        return self.jacobian.shape[0]


def identity_map(dim: int) -> EquivalenceMap:
    return EquivalenceMap(lambda x: np.array(x, dtype=float), np.eye(dim), "identity")


def equiv_map_rotor_to_torque(k: float, p) -> EquivalenceMap:
    """(Pi, alpha, l) -> N = Pi - l.

    On the closed-loop set l = k Pi + p this is N = (1 - k) Pi - p.
    """
    if k == 1.0:
        raise DegenerateGain("gain k = 1 collapses N = (1 - k) Pi - p to a constant")
    vec3(p)
    jac = np.zeros((3, 9))
    jac[:, 0:3] = np.eye(3)
    jac[:, 6:9] = -np.eye(3)
    return EquivalenceMap(lambda x: x[:3] - x[6:9], jac, "N = Pi - l")


def equiv_map_heavy_top() -> EquivalenceMap:
    """(Pi, Gamma) -> N = Pi + Gamma."""
    jac = np.hstack([np.eye(3), np.eye(3)])
    return EquivalenceMap(lambda x: x[:3] + x[3:6], jac, "N = Pi + Gamma")


def equiv_map_ht_rotor(k: float, p0) -> EquivalenceMap:
    """(Pi, Gamma, theta, l) -> N = Pi + Gamma - lbar with lbar = (l1, l2, 0).

    On the closed-loop set lbar = k Gamma + p0 this is Pi + (1 - k) Gamma - p0.
    """
    vec3(p0)
    jac = np.zeros((3, 10))
    jac[:, 0:3] = np.eye(3)
    jac[:, 3:6] = np.eye(3)
    jac[0, 8] = -1.0
    jac[1, 9] = -1.0

    def forward(x):
        n = x[:3] + x[3:6]
        n[:2] -= x[8:10]
        return n

    return EquivalenceMap(forward, jac, "N = Pi + Gamma - lbar")


def matching_residual(
    sys1: SystemDef,
    u1: ControlLaw | None,
    sys2: SystemDef,
    u2: ControlLaw | None,
    emap: EquivalenceMap,
    samples,
) -> float:
    """max over samples x of |X1(phi(x)) - Dphi . X2(x)|.

    ``samples`` are states of ``sys2``; ``emap`` maps them into ``sys1``.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[1] != sys2.dim:
        raise DimensionMismatch(f"samples have {samples.shape[1]} components, {sys2!r} needs {sys2.dim}")
    if emap.source_dim != sys2.dim or emap.target_dim != sys1.dim:
        raise DimensionMismatch(
            f"map {emap.name!r} is {emap.source_dim}->{emap.target_dim}, "
            f"systems need {sys2.dim}->{sys1.dim}"
        )
    f1 = closed_loop(sys1, u1)
    f2 = closed_loop(sys2, u2)
    worst = 0.0
    for x in samples:
        r = f1(emap.forward(x)) - emap.jacobian @ f2(x)
        worst = max(worst, float(np.max(np.abs(r))))
    return worst
