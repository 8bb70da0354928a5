import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rchtools.algebra import SE3CoalgebraPoint
from rchtools.poisson import (
    ProductPoint,
    SmoothFn,
    Space,
    bracket,
    bracket_product,
    bracket_rotor,
    casimir_values,
    casimirs,
    coordinate_fn,
    ham_vf_se3,
    ham_vf_so3,
    kks_form,
    linear_fn,
    lp_bracket_se3,
    lp_bracket_so3,
    quadratic_fn,
)

coord = st.floats(-2, 2, allow_nan=False)


def point(dim):
    return st.lists(coord, min_size=dim, max_size=dim).map(np.array)


def quad(dim, seed):
    rng = np.random.default_rng(seed)
    return quadratic_fn(rng.normal(size=(dim, dim)), rng.normal(size=dim), rng.normal())


def test_lp_so3_linear_functionals():
    a, b, c = 0.7, -1.3, 2.5
    val = lp_bracket_so3(coordinate_fn(0, 3), coordinate_fn(1, 3), (a, b, c))
    assert val == -c
    assert lp_bracket_so3(coordinate_fn(0, 3), coordinate_fn(1, 3), (a, b, c), sign=+1) == c


@given(point(3))
def test_lp_so3_antisymmetry_and_casimir(pi):
    f, k = quad(3, 1), quad(3, 2)
    assert lp_bracket_so3(f, f, pi) == 0.0
    (c,) = casimirs(Space.SO3_DUAL)
    assert abs(lp_bracket_so3(c, k, pi)) < 1e-13


@given(point(6))
def test_lp_se3_casimirs(x):
    k = quad(6, 3)
    for c in casimirs(Space.SE3_DUAL):
        assert abs(lp_bracket_se3(c, k, x)) < 1e-13


def test_lp_se3_hand_value():
    p = SE3CoalgebraPoint((0, 0, 0), (0, 0, 1))
    assert lp_bracket_se3(coordinate_fn(0, 6), coordinate_fn(4, 6), p) == -1.0


def test_rotor_bracket_examples():
    t1, t2, l1 = coordinate_fn(0, 4), coordinate_fn(1, 4), coordinate_fn(2, 4)
    assert bracket_rotor(t1, l1, (0.3, 0.4), (0.1, 0.2)) == 1.0
    assert bracket_rotor(t1, t2, (0.3, 0.4), (0.1, 0.2)) == 0.0
    f = SmoothFn(lambda z: z[0] * z[3], lambda z: np.array([z[3], 0, 0, z[0]]))
    k = SmoothFn(lambda z: z[1] * z[2], lambda z: np.array([0, z[2], z[1], 0]))
    assert bracket_rotor(f, k, (1, 2), (3, 4)) == 5.0


def test_product_bracket_separates_and_adds():
    p = ProductPoint((0.5, -1.0, 2.0), (1.0, 2.0, 0.0), (3.0, 4.0, 0.0))
    assert p.space is Space.SO3_ROTOR
    mu_only = SmoothFn(lambda x: x[0] * x[1], lambda x: np.array([x[1], x[0], 0, 0, 0, 0, 0, 0, 0]))
    rot_only = SmoothFn(lambda x: x[3] * x[7], lambda x: np.array([0, 0, 0, x[7], 0, 0, 0, x[3], 0]))
    assert bracket_product(mu_only, rot_only, p) == 0.0
    # sum of an so(3)* piece (Pi_1 vs Pi_2: -Pi_3) and a rotor piece (theta_1 vs l_1: 1)
    f = coordinate_fn(0, 9) + coordinate_fn(3, 9)
    k = coordinate_fn(1, 9) + coordinate_fn(6, 9)
    assert bracket_product(f, k, p) == -2.0 + 1.0


def test_ham_vf_so3_examples():
    assert np.array_equal(ham_vf_so3((1, 0, 0), (1, 0, 0)), np.zeros(3))
    np.testing.assert_allclose(ham_vf_so3((1, 0.5, 1 / 3), (1, 1, 1)), (-1 / 6, 2 / 3, -1 / 2), atol=1e-15)


def test_ham_vf_se3_heavy_top_values():
    # h = |Pi|^2/2 + Gamma . e1 (mgh = 1, chi = e1): grad_Gamma = chi
    e1, e3 = np.eye(3)[0], np.eye(3)[2]
    out = ham_vf_se3(np.zeros(3), e1, SE3CoalgebraPoint(np.zeros(3), e3))
    assert np.array_equal(out.pi, [0, 1, 0]) and np.array_equal(out.gamma, np.zeros(3))
    upright = ham_vf_se3(np.zeros(3), e3, SE3CoalgebraPoint(np.zeros(3), e3))
    assert np.array_equal(upright.as_array(), np.zeros(6))


@given(point(6))
def test_ham_vf_se3_agrees_with_bracket_field(x):
    h = quad(6, 7)
    g = h.grad(x)
    from rchtools.poisson import bracket_vector_field

    vf = ham_vf_se3(g[:3], g[3:], x).as_array()
    np.testing.assert_allclose(vf, bracket_vector_field(h, x, Space.SE3_DUAL), atol=1e-12)


def test_kks_form_examples():
    e1, e2, e3 = np.eye(3)
    assert kks_form(e3, e1, e2) == -1.0
    assert kks_form((1, 2, 3), (0.5, 0.1, 0.2), (0.5, 0.1, 0.2)) == 0.0


@given(point(3), point(3), point(3))
def test_kks_form_is_antisymmetric(nu, xi, eta):
    assert abs(kks_form(nu, xi, eta) + kks_form(nu, eta, xi)) < 1e-12


def test_casimir_values():
    (c,) = casimirs(Space.SO3_DUAL)
    assert c((3, 4, 0)) == 25.0
    g2, pg = casimirs(Space.SE3_DUAL)
    assert pg((1, 0, 0, 0, 1, 0)) == 0.0
    assert g2((1, 0, 0, 0, 3, 4)) == 25.0
    v = casimir_values(np.array([[1.0, 2.0, 3.0, 0.0, 1.0, 2.0]]), Space.SE3_DUAL)
    assert v[0][0] == 5.0 and v[1][0] == 8.0


def test_rotor_space_casimir_is_lifted():
    (c,) = casimirs(Space.SO3_ROTOR)
    x = np.arange(9.0)
    assert c(x) == 5.0 and c.grad(x).shape == (9,)


@pytest.mark.parametrize("space", list(Space))
def test_leibniz_rule_on_each_space(space):
    rng = np.random.default_rng(11)
    dim = space.dim
    f, g, k = quad(dim, 1), quad(dim, 2), quad(dim, 3)
    for _ in range(50):
        x = rng.uniform(-2, 2, dim)
        lhs = bracket(f * g, k, x, space)
        rhs = f(x) * bracket(g, k, x, space) + g(x) * bracket(f, k, x, space)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_sign_validation():
    with pytest.raises(ValueError):
        lp_bracket_so3(linear_fn((1, 0, 0)), linear_fn((0, 1, 0)), (1, 2, 3), sign=0)
