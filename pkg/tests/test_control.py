import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rchtools import systems as S
from rchtools.control import (
    ControlLaw,
    bloch_law,
    closed_loop,
    equiv_map_heavy_top,
    equiv_map_ht_rotor,
    equiv_map_rotor_to_torque,
    ht_rotor_gain_law,
    identity_map,
    matching_residual,
    rotor_gain_law,
    torque_law_p,
)
from rchtools.errors import DegenerateGain, DimensionMismatch, VariantMismatch

E1, E2, E3 = np.eye(3)
coord = st.floats(-2, 2, allow_nan=False)
vec = st.tuples(coord, coord, coord).map(np.array)


def test_torque_law_examples():
    assert np.array_equal(torque_law_p((1, 2, 3), (2, 4, 6)), np.zeros(3))
    assert np.array_equal(torque_law_p(E3, E1), E2)


def test_rotor_gain_examples():
    assert np.array_equal(rotor_gain_law(0.0, (2, 3, 4), (1, 1, 1)), np.zeros(3))
    np.testing.assert_allclose(rotor_gain_law(0.5, (2, 3, 4), (1, 1, 1)), (-0.5, 1, -0.5))


def test_ht_rotor_gain_examples():
    assert np.array_equal(ht_rotor_gain_law(0.0, E3, E1), np.zeros(2))
    assert np.array_equal(ht_rotor_gain_law(1.0, E3, E1), (0, 1))


def test_bloch_examples():
    assert np.array_equal(bloch_law(1.0, (1, 2, 3), (0, 3, 1)), np.zeros(3))
    np.testing.assert_allclose(bloch_law(1.0, (1, 2, 5), (2, 3, 7)), (0, 0, 3))


def test_admissibility():
    law = ControlLaw.rotor_gain(0.5)
    with pytest.raises(VariantMismatch, match="control 'rotor_gain' not admissible for system 'heavy_top'"):
        law.check(S.heavy_top((1, 2, 3), 1.0, E3))
    assert law.admissible(S.rigid_body_rotors((2, 3, 4), (1, 1, 1)))
    assert ControlLaw.bloch(0.5).admissible(S.rigid_body_torque((1, 2, 3)))
    assert not ControlLaw.torque_p((0, 0, 1)).admissible(S.rigid_body((1, 2, 3)))


def test_law_validation():
    with pytest.raises(ValueError):
        ControlLaw("torque_p")
    with pytest.raises(ValueError):
        ControlLaw("rotor_gain", k=float("nan"))
    with pytest.raises(ValueError):
        ControlLaw("no_such_law")


def test_equiv_map_examples():
    emap = equiv_map_rotor_to_torque(0.5, (1, 0, 0))
    pi = np.array([2.0, 0, 0])
    x = np.concatenate([pi, np.zeros(3), 0.5 * pi + (1, 0, 0)])
    assert np.array_equal(emap.forward(x), np.zeros(3))
    with pytest.raises(DegenerateGain):
        equiv_map_rotor_to_torque(1.0, (0, 0, 0))
    ht = equiv_map_ht_rotor(0.0, (0, 0, 0))
    x = np.array([1.0, 0, 0, 0, 1, 0, 0.2, 0.3, 0, 0])
    assert np.array_equal(ht.forward(x), [1, 1, 0])
    assert np.array_equal(equiv_map_heavy_top().forward(x[:6]), [1, 1, 0])


@given(st.lists(coord, min_size=10, max_size=10).map(np.array), st.lists(coord, min_size=10, max_size=10).map(np.array))
def test_equiv_map_jacobian_is_exact(x, dx):
    emap = equiv_map_ht_rotor(0.3, (0.1, 0.2, 0.3))
    np.testing.assert_allclose(emap.forward(x + dx) - emap.forward(x), emap.jacobian @ dx, atol=1e-12)


def test_matching_residual_identity():
    sys = S.rigid_body_rotors((2, 3, 4), (1, 1, 1))
    law = ControlLaw.rotor_gain(0.3)
    samples = np.random.default_rng(0).uniform(-2, 2, (50, 9))
    assert matching_residual(sys, law, sys, law, identity_map(9), samples) == 0.0


def _on_set(k, p, n, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-2, 2, (n, 9))
    x[:, 6:9] = k * x[:, :3] + p
    return x


def test_rotor_vs_torque_matching():
    k, p = 0.5, np.array([0.1, 0.0, 0.0])
    rotor = S.rigid_body_rotors((2, 3, 4), (1, 1, 1))
    torque = S.rigid_body_torque((2, 3, 4))
    emap = equiv_map_rotor_to_torque(k, p)
    x = _on_set(k, p, 1000)
    assert matching_residual(torque, ControlLaw.torque_p(p), rotor, ControlLaw.rotor_gain(k), emap, x) < 1e-12
    wrong = matching_residual(torque, ControlLaw.torque_p(p + 1e-3), rotor, ControlLaw.rotor_gain(k), emap, x)
    assert wrong >= 1e-4


@settings(max_examples=50)
@given(st.floats(-3, 3).filter(lambda k: abs(k - 1) > 1e-3), vec)
def test_rotor_matching_holds_for_any_gain(k, p):
    rotor = S.rigid_body_rotors((2, 3, 4), (1, 2, 3))
    torque = S.rigid_body_torque((2, 3, 4))
    x = _on_set(k, p, 20)
    r = matching_residual(
        torque, ControlLaw.torque_p(p), rotor, ControlLaw.rotor_gain(k), equiv_map_rotor_to_torque(k, p), x
    )
    assert r < 1e-11


def test_matching_residual_dimension_checks():
    rotor = S.rigid_body_rotors((2, 3, 4), (1, 1, 1))
    torque = S.rigid_body_torque((2, 3, 4))
    emap = equiv_map_rotor_to_torque(0.5, (0, 0, 0))
    with pytest.raises(DimensionMismatch):
        matching_residual(torque, None, rotor, None, emap, np.zeros((3, 6)))
    with pytest.raises(DimensionMismatch):
        matching_residual(rotor, None, rotor, None, emap, np.zeros((3, 9)))


def test_rotor_gain_first_integral_rate_vanishes():
    """d/dt (l - k Pi) = k Pi x Omega - k Pi x Omega = 0 along the closed loop."""
    sys = S.rigid_body_rotors((2, 3, 4), (1, 1, 1))
    f = closed_loop(sys, ControlLaw.rotor_gain(0.7))
    for x in np.random.default_rng(3).uniform(-2, 2, (100, 9)):
        dx = f(x)
        assert np.max(np.abs(dx[6:9] - 0.7 * dx[:3])) < 1e-14


def test_bloch_uses_locked_inertia_on_rotors():
    sys = S.rigid_body_rotors((1, 2, 3), (1, 1, 1))
    u = ControlLaw.bloch(1.0)(sys, np.array([2.0, 3, 0, 0, 0, 0, 0, 0, 0]))
    np.testing.assert_allclose(u, (0, 0, 3))


def test_to_dict():
    assert ControlLaw.rotor_gain(0.5).to_dict() == {"kind": "rotor_gain", "k": 0.5}
    assert ControlLaw.torque_p((1, 0, 0)).to_dict() == {"kind": "torque_p", "p": [1.0, 0.0, 0.0]}


def test_ht_rotor_gain_first_integral():
    """l - k Gamma_(1,2) is conserved; Gamma_3 moves freely while lbar_3 stays 0."""
    from rchtools.integrate import IntegratorSpec, integrate

    sys = S.heavy_top_rotors((2, 3, 4), (1, 1), 1.0, (0, 0, 1))
    k = 0.5
    x0 = np.array([1.0, 1, 1, 0, 0.6, 0.8, 0, 0, 0.2, 0.1])
    traj = integrate(sys, ControlLaw.ht_rotor_gain(k), x0, IntegratorSpec(step=1e-3, t_final=10.0))
    inv = traj.states[:, 8:10] - k * traj.states[:, 3:5]
    assert np.max(np.abs(inv - inv[0])) < 1e-9
    assert np.ptp(traj.states[:, 5]) > 1e-2
