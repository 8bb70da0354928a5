"""Numerical certificates for the structural identities of the toolkit.

Every checker returns a :class:`CheckReport`; ``passed`` is always
``observed <= tolerance``. Sampled checks draw states from the box
[-2, 2] per component (rotor angles from [0, 2 pi)) with a seeded
generator, so reports are reproducible.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import systems as S
from .control import (
    ControlLaw,
    equiv_map_heavy_top,
    equiv_map_ht_rotor,
    equiv_map_rotor_to_torque,
    matching_residual,
)
from .errors import DegenerateGain, EmptyTrajectory, MissingDiagnostic
from .integrate import IntegratorSpec, Trajectory, integrate
from .poisson import SmoothFn, Space, bracket, bracket_from_gradients, quadratic_fn

DEFAULT_SEED = 0x5EED
FD_STEP = 1e-6
BOX = 2.0


@dataclass(frozen=True)
class CheckReport:
    name: str
    observed: float
    tolerance: float
    context: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.observed <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "observed": float(self.observed),
            "tolerance": float(self.tolerance),
            "context": self.context,
        }

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: observed={self.observed:.3e} tol={self.tolerance:.1e} ({self.context})"


def rng_for(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(DEFAULT_SEED if seed is None else seed)


def sample_states(sys: S.SystemDef, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform box samples; rotor angles in [0, 2 pi), attitudes random."""
    out = rng.uniform(-BOX, BOX, size=(n, sys.dim))
    v = sys.variant
    if v is S.Variant.RIGID_BODY_ROTORS:
        out[:, 3:6] = rng.uniform(0.0, 2.0 * math.pi, size=(n, 3))
    elif v is S.Variant.HEAVY_TOP_ROTORS:
        out[:, 6:8] = rng.uniform(0.0, 2.0 * math.pi, size=(n, 2))
    elif v is S.Variant.RIGID_BODY_FULL:
        for row in out:
            q, r = np.linalg.qr(rng.normal(size=(3, 3)))
            q = q * np.sign(np.diag(r))
            if np.linalg.det(q) < 0:
                q[:, 0] *= -1.0
            row[:9] = q.ravel()
    return out


def fd_gradient(fn: Callable[[np.ndarray], float], x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.empty(x.size)
    for j in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[j] += step
        xm[j] -= step
        g[j] = (fn(xp) - fn(xm)) / (xp[j] - xm[j])
    return g


# -- conservation and reduction ------------------------------------------------------


def check_conservation(
    traj: Trajectory,
    fn,
    tol: float,
    relative: bool = False,
    name: str | None = None,
) -> CheckReport:
    """max_t |fn(x_t) - fn(x_0)|; ``fn`` may be a diagnostic name.

    Vector-valued ``fn`` is reduced by the max-abs component.
    """
    if len(traj) == 0:
        raise EmptyTrajectory("trajectory has no samples")
    if isinstance(fn, str):
        if fn not in traj.diagnostics:
            raise MissingDiagnostic(fn)
        series = np.asarray(traj.diagnostics[fn], dtype=float).reshape(len(traj), -1)
        label = fn
    else:
        series = np.array([np.atleast_1d(fn(x)) for x in traj.states], dtype=float)
        label = getattr(fn, "name", "") or getattr(fn, "__name__", "fn")
    drift = float(np.max(np.abs(series - series[0])))
    scale = ""
    if relative:
        ref = float(np.max(np.abs(series[0])))
        drift = drift / ref if ref > 0.0 else drift
        scale = " relative"
    return CheckReport(
        name or f"conservation[{label}]",
        drift,
        tol,
        f"{traj.variant.value}, {traj.method.value} h={traj.step:g}, {len(traj)} samples,{scale} drift",
    )


def check_reduction_consistency(
    params: S.RigidBodyParams,
    x0_full: S.FullState,
    spec: IntegratorSpec,
    torque=None,
    pi0=None,
    tol: float = 1e-12,
) -> CheckReport:
    """Integrate T*SO(3) and so(3)* dynamics side by side and compare Pi."""
    full = S.RigidBodyFull(params)
    law = None if torque is None else ControlLaw.constant_torque(torque)
    reduced = S.RigidBodyTorque(params) if torque is not None else S.RigidBody(params)
    start = x0_full.pi if pi0 is None else np.asarray(pi0, dtype=float)
    t_full = integrate(full, law, x0_full, spec)
    t_red = integrate(reduced, law, start, spec)
    gap = float(np.max(np.linalg.norm(t_full.states[:, 9:12] - t_red.states, axis=1)))
    return CheckReport(
        "reduction_consistency",
        gap,
        tol,
        f"{spec.method.value} h={spec.step:g} T={spec.t_final:g}, torque={'none' if torque is None else np.asarray(torque, float).tolist()}",
    )


# -- equivalence -------------------------------------------------------------------------


class Pairing(str, enum.Enum):
    RB_TORQUE_VS_ROTOR = "RB_TORQUE_VS_ROTOR"
    ROTOR_VS_HT = "ROTOR_VS_HT"
    HT_ROTOR_VS_ROTOR = "HT_ROTOR_VS_ROTOR"


@dataclass(frozen=True)
class EquivalenceParams:
    """Parameters of the closed-loop pairings.

    ``ibar``/``jrotor`` describe the rigid body with rotors,
    ``inertia``/``mgh``/``chi`` the heavy top, ``ht_ibar``/``ht_jrotor``
    the heavy top with two rotors. ``lam`` is the constant in Gamma = lam Omega.
    """

    ibar: tuple = (2.0, 3.0, 4.0)
    jrotor: tuple = (1.0, 1.0, 1.0)
    k: float = 0.5
    p: tuple = (0.1, 0.0, 0.0)
    inertia: tuple = (1.0, 2.0, 3.0)
    mgh: float = 1.0
    chi: tuple = (0.0, 0.0, 1.0)
    lam: float = 0.7
    p0: tuple = (0.1, -0.2, 0.3)
    ht_ibar: tuple = (2.0, 3.0, 4.0)
    ht_jrotor: tuple = (1.0, 1.0)

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def _rotor_leg(ibar, jrotor, k, p, perturb, rng, n, on_set=True):
    """Rotor closed loop against the torque system on N = Pi - l."""
    rotor = S.rigid_body_rotors(ibar, jrotor)
    torque = S.rigid_body_torque(ibar)
    p = np.asarray(p, dtype=float)
    emap = equiv_map_rotor_to_torque(k, p)
    x = sample_states(rotor, n, rng)
    if on_set:
        x[:, 6:9] = k * x[:, :3] + p
    return matching_residual(
        torque, ControlLaw.torque_p(p + perturb), rotor, ControlLaw.rotor_gain(k), emap, x
    )


def _ht_samples(top: S.HeavyTop, lam: float, n: int, rng, on_set=True) -> np.ndarray:
    x = sample_states(top, n, rng)
    if on_set:
        x[:, 3:6] = lam * top.omega(x)
    return x


def _ht_rotor_samples(top: S.HeavyTopRotors, k, lam, p0, n, rng, on_set=True) -> np.ndarray:
    """States with Gamma = lam Omega and lbar = k Gamma + p0 (lbar_3 = 0)."""
    x = sample_states(top, n, rng)
    if not on_set:
        return x
    p0 = np.asarray(p0, dtype=float)
    omega = rng.uniform(-BOX, BOX, size=(n, 3))
    if k * lam != 0.0:
        omega[:, 2] = -p0[2] / (k * lam)
    elif p0[2] != 0.0:
        raise ValueError("lbar = k Gamma + p0 has no solution with lbar_3 = 0 when k lam = 0 and p0_3 != 0")
    gamma = lam * omega
    lbar = k * gamma + p0
    x[:, 3:6] = gamma
    x[:, 8:10] = lbar[:, :2]
    x[:, :3] = omega * top.params.ibar
    x[:, :2] += lbar[:, :2]
    return x


def check_equivalence(
    pairing: Pairing | str,
    params: EquivalenceParams | None = None,
    samples: int = 1000,
    tol: float = 1e-12,
    seed: int | None = None,
    perturb: float = 0.0,
) -> CheckReport:
    """Vector-field pullback residual of a closed-loop pairing.

    Samples are drawn on the pairing's invariant set; the residual off that
    set is reported in the context. ``perturb`` shifts every component of
    the torque-side vector p, which must make the check fail.
    """
    pairing = Pairing(pairing)
    prm = params or EquivalenceParams()
    rng = rng_for(seed)
    delta = np.full(3, float(perturb))
    if prm.k == 1.0:
        raise DegenerateGain("gain k = 1 is degenerate for the equivalence maps")

    if pairing is Pairing.RB_TORQUE_VS_ROTOR:
        observed = _rotor_leg(prm.ibar, prm.jrotor, prm.k, prm.p, delta, rng, samples)
        off = _rotor_leg(prm.ibar, prm.jrotor, prm.k, prm.p, delta, rng, samples, on_set=False)
        restriction = "l = k Pi + p"
        legs = "rotor(k) vs torque(p x Omega) via N = Pi - l"

    elif pairing is Pairing.ROTOR_VS_HT:
        top = S.heavy_top(prm.inertia, prm.mgh, prm.chi)
        locked = np.asarray(prm.inertia, dtype=float) + prm.lam
        p = -prm.mgh * prm.lam * np.asarray(prm.chi, dtype=float)
        torque = S.rigid_body_torque(locked)
        law = ControlLaw.torque_p(p + delta)
        leg_top = matching_residual(torque, law, top, None, equiv_map_heavy_top(), _ht_samples(top, prm.lam, samples, rng))
        leg_rotor = _rotor_leg(locked, prm.jrotor, prm.k, p, delta, rng, samples)
        observed = max(leg_top, leg_rotor)
        off = matching_residual(
            torque, law, top, None, equiv_map_heavy_top(), _ht_samples(top, prm.lam, samples, rng, on_set=False)
        )
        restriction = "Gamma = lam Omega, p = -mgh lam chi; rotor leg on l = k Pi + p"
        legs = (
            f"heavy top vs torque(I + lam) via N = Pi + Gamma: {leg_top:.3e}; "
            f"rotor(Ibar = I + lam) vs torque: {leg_rotor:.3e}"
        )

    else:
        top = S.heavy_top_rotors(prm.ht_ibar, prm.ht_jrotor, prm.mgh, prm.chi)
        locked = np.asarray(prm.ht_ibar, dtype=float) + prm.lam
        p = np.asarray(prm.p0, dtype=float) - prm.mgh * prm.lam * np.asarray(prm.chi, dtype=float)
        torque = S.rigid_body_torque(locked)
        law = ControlLaw.torque_p(p + delta)
        emap = equiv_map_ht_rotor(prm.k, prm.p0)
        u2 = ControlLaw.ht_rotor_gain(prm.k)
        x = _ht_rotor_samples(top, prm.k, prm.lam, prm.p0, samples, rng)
        leg_top = matching_residual(torque, law, top, u2, emap, x)
        leg_rotor = _rotor_leg(locked, prm.jrotor, prm.k, p, delta, rng, samples)
        observed = max(leg_top, leg_rotor)
        x_off = _ht_rotor_samples(top, prm.k, prm.lam, prm.p0, samples, rng, on_set=False)
        off = matching_residual(torque, law, top, u2, emap, x_off)
        restriction = "Gamma = lam Omega, lbar = k Gamma + p0 (lbar_3 = 0 forces Omega_3 = -p0_3/(k lam)), p = p0 - mgh lam chi"
        legs = (
            f"heavy top with rotors vs torque(Ibar + lam) via N = Pi + Gamma - lbar: {leg_top:.3e}; "
            f"rotor(Ibar + lam) vs torque: {leg_rotor:.3e}"
        )

    context = (
        f"{pairing.value}; restricted to {restriction}; {samples} samples seed={seed if seed is not None else DEFAULT_SEED}; "
        f"{legs}; off-set residual {off:.3e}; perturb={perturb:g}"
    )
    return CheckReport(f"equivalence[{pairing.value}]", observed, tol, context)


# -- port Hamiltonian structure -------------------------------------------------------


@dataclass(frozen=True)
class CanonicalChart:
    """T*R^n in canonical coordinates z = (q, p) with omega = dq ^ dp."""

    n: int
    hamiltonian: SmoothFn
    name: str = "canonical"

    def hamiltonian_vf(self, z) -> np.ndarray:
        g = self.hamiltonian.grad(np.asarray(z, dtype=float))
        return np.concatenate([g[self.n :], -g[: self.n]])


def contract(y) -> np.ndarray:
    """i_Y omega for omega = sum dq_i ^ dp_i, as components on (dq, dp)."""
    y = np.asarray(y, dtype=float)
    n = y.size // 2
    return np.concatenate([-y[n:], y[:n]])


@dataclass(frozen=True)
class PortSpec:
    """Port (Y, alpha) with input channels B acting on the momenta."""

    y: Callable[[np.ndarray], np.ndarray]
    alpha: Callable[[np.ndarray], np.ndarray]
    channels: np.ndarray | None = None
    name: str = "port"


def trivial_port(chart: CanonicalChart) -> PortSpec:
    return PortSpec(chart.hamiltonian_vf, chart.hamiltonian.grad, None, "trivial (X_H, dH)")


def force_port(chart: CanonicalChart, channels, inputs: Callable[[np.ndarray], np.ndarray]) -> PortSpec:
    """Y = vlift(B f), alpha = i_Y omega."""
    b = np.asarray(channels, dtype=float).reshape(chart.n, -1)

    def y(z):
        return np.concatenate([np.zeros(chart.n), b @ np.atleast_1d(inputs(z))])

    return PortSpec(y, lambda z: contract(y(z)), b, "force-controlled")


def rotor_chart(sys: S.SystemDef, mu) -> CanonicalChart:
    """Canonical rotor factor (angles, rotor momenta) at a frozen Lie-Poisson point."""
    if sys.variant is S.Variant.RIGID_BODY_ROTORS:
        lp, k = 3, 3
    elif sys.variant is S.Variant.HEAVY_TOP_ROTORS:
        lp, k = 6, 2
    else:
        raise ValueError(f"{sys.variant.value} has no rotor factor")
    mu = np.asarray(mu, dtype=float)

    def embed(z):
        return np.concatenate([mu, z])

    h = SmoothFn(lambda z: float(sys.energy(embed(z))), lambda z: sys.gradient(embed(z))[lp:], "h|rotor")
    return CanonicalChart(k, h, f"rotor factor of {sys.variant.value}")


def collocated_output(sys: S.SystemDef, x) -> np.ndarray:
    """Port output e = B^T grad h, conjugate to the channel inputs."""
    return sys.channels.T @ sys.gradient(np.asarray(x, dtype=float))


def check_port_condition(
    port: PortSpec,
    chart: CanonicalChart,
    samples=1000,
    tol: float = 1e-13,
    seed: int | None = None,
) -> CheckReport:
    """max |alpha(z) - i_Y omega(z)| over chart samples."""
    if isinstance(samples, int):
        z = rng_for(seed).uniform(-BOX, BOX, size=(samples, 2 * chart.n))
    else:
        z = np.atleast_2d(np.asarray(samples, dtype=float))
    worst = max(float(np.max(np.abs(port.alpha(zi) - contract(port.y(zi))))) for zi in z)
    return CheckReport(f"port_condition[{port.name}]", worst, tol, f"{chart.name}, {len(z)} samples")


def port_balance_tolerance(step: float, scale: float = 10.0, floor: float = 1e-9) -> float:
    return scale * step * step + floor


def energy_balance_residual(traj: Trajectory) -> np.ndarray:
    if "supplied_power" not in traj.diagnostics:
        raise MissingDiagnostic("supplied_power")
    if len(traj) < 3:
        raise EmptyTrajectory("energy balance needs at least three samples")
    h = traj.diagnostics["energy"]
    power = traj.diagnostics["supplied_power"]
    rate = (h[2:] - h[:-2]) / (2.0 * traj.step)
    return np.abs(rate - power[1:-1])


def check_port_balance(
    traj: Trajectory,
    sys: S.SystemDef | None = None,
    port: PortSpec | None = None,
    tol: float | None = None,
) -> CheckReport:
    """Energy balance dH/dt = supplied power along a recorded trajectory."""
    observed = float(np.max(energy_balance_residual(traj)))
    tol = port_balance_tolerance(traj.step) if tol is None else tol
    label = sys.variant.value if sys is not None else traj.variant.value
    return CheckReport(
        "port_balance",
        observed,
        tol,
        f"{label}, central dH/dt vs supplied power, h={traj.step:g}{', ' + port.name if port else ''}",
    )


# -- gradients and brackets ---------------------------------------------------------------


def check_gradients(
    target: S.SystemDef | SmoothFn,
    samples=1000,
    tol: float = 1e-6,
    seed: int | None = None,
    dim: int | None = None,
) -> CheckReport:
    """Analytic gradient vs central differences, relative to max(|grad|, 1)."""
    rng = rng_for(seed)
    if isinstance(target, S.SystemDef):
        fn, label = target.hamiltonian, target.variant.value
        pts = sample_states(target, samples, rng) if isinstance(samples, int) else np.atleast_2d(samples)
    else:
        fn, label = target, target.name or "fn"
        if isinstance(samples, int):
            if dim is None:
                raise ValueError("dim is required to sample a bare SmoothFn")
            pts = rng.uniform(-BOX, BOX, size=(samples, dim))
        else:
            pts = np.atleast_2d(samples)
    worst = 0.0
    for x in pts:
        g = np.asarray(fn.grad(x), dtype=float)
        g_fd = fd_gradient(fn.value, x)
        worst = max(worst, float(np.max(np.abs(g - g_fd)) / max(float(np.max(np.abs(g))), 1.0)))
    return CheckReport(f"gradients[{label}]", worst, tol, f"central FD step {FD_STEP:g}, {len(pts)} samples")


def _random_quadratic(dim: int, rng) -> SmoothFn:
    return quadratic_fn(rng.uniform(-1, 1, (dim, dim)), rng.uniform(-1, 1, dim), rng.uniform(-1, 1))


def _linear_bracket_grad(a, b, space: Space, sign) -> np.ndarray:
    """Gradient of {F_a, F_b}; the Poisson tensor is affine in x."""
    dim = space.dim
    base = bracket_from_gradients(a, b, np.zeros(dim), space, sign)
    eye = np.eye(dim)
    return np.array([bracket_from_gradients(a, b, eye[k], space, sign) - base for k in range(dim)])


@dataclass
class BracketResiduals:
    antisymmetry: float = 0.0
    leibniz: float = 0.0
    jacobi: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def worst(self) -> float:
        return max(self.antisymmetry, self.leibniz, self.jacobi)


def _scaled(residual: float, *terms: float) -> float:
    """Residual relative to the largest term of the identity, floored at 1."""
    return abs(residual) / max(1.0, *(abs(t) for t in terms))


def bracket_residuals(space: Space, samples: int = 1000, seed: int | None = None, sign=-1) -> BracketResiduals:
    """Worst scaled residuals of the three bracket axioms over random samples."""
    rng = rng_for(seed)
    dim = space.dim
    out = BracketResiduals()
    for _ in range(samples):
        x = rng.uniform(-BOX, BOX, dim)
        f, g, k = (_random_quadratic(dim, rng) for _ in range(3))
        fk = bracket(f, k, x, space, sign)
        kf = bracket(k, f, x, space, sign)
        out.antisymmetry = max(out.antisymmetry, _scaled(fk + kf, fk, kf))
        lhs = bracket(f * g, k, x, space, sign)
        t1 = f(x) * bracket(g, k, x, space, sign)
        t2 = g(x) * fk
        out.leibniz = max(out.leibniz, _scaled(lhs - t1 - t2, lhs, t1, t2))
        a, b, c = (rng.uniform(-1, 1, dim) for _ in range(3))
        terms = (
            bracket_from_gradients(a, _linear_bracket_grad(b, c, space, sign), x, space, sign),
            bracket_from_gradients(b, _linear_bracket_grad(c, a, space, sign), x, space, sign),
            bracket_from_gradients(c, _linear_bracket_grad(a, b, space, sign), x, space, sign),
        )
        out.jacobi = max(out.jacobi, _scaled(sum(terms), *terms))
    return out


def check_bracket_axioms(
    space: Space,
    samples: int = 1000,
    tol: float = 1e-12,
    seed: int | None = None,
) -> CheckReport:
    r = bracket_residuals(space, samples, seed)
    return CheckReport(
        f"bracket_axioms[{space.name}]",
        r.worst,
        tol,
        f"{space.label}, {samples} samples, residuals scaled by max(1, largest term): antisymmetry {r.antisymmetry:.1e}, "
        f"Leibniz {r.leibniz:.1e}, Jacobi {r.jacobi:.1e}",
    )


def derivation_chain_residual(sys: S.SystemDef, samples: int = 1000, seed: int | None = None) -> float:
    """max |closed-form vector field - ({x_j, h}_-)_j| at zero control."""
    from .poisson import bracket_vector_field

    rng = rng_for(seed)
    h = sys.hamiltonian
    worst = 0.0
    for x in sample_states(sys, samples, rng):
        worst = max(worst, float(np.max(np.abs(sys.vf(x) - bracket_vector_field(h, x, sys.space)))))
    return worst


def check_derivation_chain(sys: S.SystemDef, samples: int = 1000, tol: float = 1e-12, seed: int | None = None) -> CheckReport:
    return CheckReport(
        f"derivation_chain[{sys.variant.value}]",
        derivation_chain_residual(sys, samples, seed),
        tol,
        f"closed-form equations vs minus-bracket field, {samples} samples",
    )
