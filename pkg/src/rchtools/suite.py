"""Built-in verification suites run by ``rchtools verify <suite>``."""

from __future__ import annotations

import math
from typing import Callable, Iterator

import numpy as np

from . import systems as S
from .algebra import exp_matrix_so3, hat
from .control import ControlLaw
from .integrate import IntegratorSpec, Method, integrate, rk4_step
from .poisson import Space
from .verify import (
    CheckReport,
    EquivalenceParams,
    Pairing,
    check_bracket_axioms,
    check_conservation,
    check_derivation_chain,
    check_equivalence,
    check_gradients,
    check_port_balance,
    check_port_condition,
    check_reduction_consistency,
    force_port,
    rotor_chart,
    trivial_port,
)

INERTIA = (1.0, 2.0, 3.0)
PI0 = (1.0, 1.0, 1.0)
DETECTOR_THRESHOLD = 1e-4


def reduced_systems() -> list[S.SystemDef]:
    """The five systems with a Lie-Poisson reduced form."""
    return [
        S.rigid_body(INERTIA),
        S.rigid_body_torque(INERTIA),
        S.rigid_body_rotors((2.0, 3.0, 4.0), (1.0, 1.0, 1.0)),
        S.heavy_top(INERTIA, 1.0, (0.0, 0.0, 1.0)),
        S.heavy_top_rotors((2.0, 3.0, 4.0), (1.0, 1.0), 1.0, (0.0, 0.0, 1.0)),
    ]


def detector(report: CheckReport) -> CheckReport:
    """Turns a perturbed check into a pass when its residual is large.

    observed is threshold / residual, so it passes iff residual >= threshold.
    """
    ratio = DETECTOR_THRESHOLD / report.observed if report.observed > 0 else math.inf
    return CheckReport(
        f"detector:{report.name}",
        ratio,
        1.0,
        f"perturbed residual {report.observed:.3e} must exceed {DETECTOR_THRESHOLD:g}; {report.context}",
    )


def series_exp(v, terms: int = 30) -> np.ndarray:
    """Truncated power series of the matrix exponential."""
    k = hat(v)
    out = np.eye(3)
    term = np.eye(3)
    for n in range(1, terms):
        term = term @ k / n
        out = out + term
    return out


def observed_rk4_order(h: float = 0.1) -> float:
    sys = S.rigid_body(INERTIA)
    f = lambda x: sys.vf(x)  # noqa: E731
    x0 = np.array(PI0)

    def run(step, n):
        x = x0.copy()
        for _ in range(n):
            x = rk4_step(f, x, step)
        return x

    ref = run(h / 64.0, 64 * 10)
    e1 = np.linalg.norm(run(h, 10) - ref)
    e2 = np.linalg.norm(run(h / 2.0, 20) - ref)
    return math.log2(e1 / e2)


def _bracket_checks(samples, seed):
    for space in Space:
        yield check_bracket_axioms(space, samples, 1e-12, seed)


def _derivation_checks(samples, seed):
    for sys in reduced_systems():
        yield check_derivation_chain(sys, samples, 1e-12, seed)


def _conservation_checks(samples, seed):
    rb = S.rigid_body(INERTIA)
    spec = IntegratorSpec(Method.RK4, 1e-3, 10.0)
    traj = integrate(rb, None, PI0, spec)
    yield check_conservation(traj, "energy", 1e-10, relative=True, name="rk4 energy drift")
    yield check_conservation(traj, "casimir_1", 1e-9, name="rk4 |Pi|^2 drift")
    split = integrate(rb, None, PI0, IntegratorSpec(Method.SPLITTING, 1e-3, 10.0))
    yield check_conservation(split, "casimir_1", 1e-12, name="splitting |Pi|^2 drift")
    top = S.heavy_top(INERTIA, 1.0, (0.0, 0.0, 1.0))
    ht = integrate(top, None, (1.0, 1.0, 1.0, 0.0, 0.6, 0.8), IntegratorSpec(Method.SPLITTING, 1e-3, 10.0))
    yield check_conservation(ht, "casimir_1", 1e-12, name="heavy top splitting |Gamma|^2 drift")
    yield check_conservation(ht, "casimir_2", 1e-12, name="heavy top splitting Pi.Gamma drift")


def _momentum_checks(samples, seed):
    params = S.RigidBodyParams(INERTIA)
    x0 = S.FullState(np.eye(3), PI0)
    spec = IntegratorSpec(Method.RK4, 1e-3, 10.0)
    traj = integrate(S.RigidBodyFull(params), None, x0, spec)
    yield check_conservation(traj, lambda x: x[:9].reshape(3, 3) @ x[9:12], 1e-9, name="spatial momentum A Pi drift")
    yield check_reduction_consistency(params, x0, spec, tol=1e-12)


def _equivalence_checks(samples, seed):
    prm = EquivalenceParams()
    for pairing in Pairing:
        yield check_equivalence(pairing, prm, samples, 1e-12, seed)
        yield detector(check_equivalence(pairing, prm, samples, 1e-12, seed, perturb=1e-3))
    k = prm.k
    rotor = S.rigid_body_rotors(prm.ibar, prm.jrotor)
    x0 = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0, *(k * np.ones(3) + np.asarray(prm.p))])
    traj = integrate(rotor, ControlLaw.rotor_gain(k), x0, IntegratorSpec(Method.RK4, 1e-3, 10.0))
    yield check_conservation(traj, lambda x: x[6:9] - k * x[:3], 1e-9, name="first integral l - k Pi drift")


def _port_checks(samples, seed):
    rotor = S.rigid_body_rotors((2.0, 3.0, 4.0), (1.0, 1.0, 1.0))
    chart = rotor_chart(rotor, PI0)
    yield check_port_condition(trivial_port(chart), chart, samples, 1e-13, seed)
    yield check_port_condition(force_port(chart, np.eye(3), lambda z: z[3:]), chart, samples, 1e-13, seed)
    law = ControlLaw.rotor_gain(0.5)
    x0 = (1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.2, 0.1, 0.3)
    obs = []
    for h in (1e-3, 5e-4):
        report = check_port_balance(integrate(rotor, law, x0, IntegratorSpec(Method.RK4, h, 2.0)), rotor)
        obs.append(report.observed)
        yield report
    exponent = math.log2(obs[0] / obs[1])
    yield CheckReport(
        "port balance O(h^2) exponent",
        abs(exponent - 2.0),
        0.2,
        f"measured exponent {exponent:.4f} between h=1e-3 and h=5e-4 (observed is |exponent - 2|)",
    )


def _numerics_checks(samples, seed):
    for sys in reduced_systems() + [S.rigid_body_full(INERTIA)]:
        yield check_gradients(sys, samples, 1e-6, seed)
    order = observed_rk4_order()
    yield CheckReport("rk4 observed order", abs(order - 4.0), 0.2, f"measured order {order:.4f} (observed is |order - 4|)")
    rng = np.random.default_rng(seed)
    worst = max(float(np.max(np.abs(exp_matrix_so3(v) - series_exp(v)))) for v in rng.uniform(-2, 2, (samples, 3)))
    yield CheckReport("exp_so3 vs 30-term series", worst, 1e-12, f"{samples} vectors in [-2, 2]^3")


CRITERIA: dict[str, Callable[[int, int | None], Iterator[CheckReport]]] = {
    "bracket axioms": _bracket_checks,
    "derivation chain": _derivation_checks,
    "conservation": _conservation_checks,
    "momentum map and reduction": _momentum_checks,
    "equivalence": _equivalence_checks,
    "port balance": _port_checks,
    "numerics": _numerics_checks,
}

SUITES = {"acceptance": 1000, "quick": 100}


def run_suite(name: str, seed: int | None = None) -> Iterator[tuple[str, CheckReport]]:
    """Yield (criterion, report) pairs for a named suite."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; available: {', '.join(SUITES)}")
    samples = SUITES[name]
    for criterion, make in CRITERIA.items():
        for report in make(samples, seed):
            yield criterion, report
