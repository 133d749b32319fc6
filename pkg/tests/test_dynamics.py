import numpy as np
import pytest

from gpacl.dynamics import ModelKind, make_model, positions, step, step_jacobians
from gpacl.errors import InvalidArgumentError

MODELS = [ModelKind.DOUBLE_INTEGRATOR_2D, ModelKind.DOUBLE_INTEGRATOR_3D, ModelKind.UNICYCLE_4D]


def test_zero_dynamics_fixed_point():
    m = make_model(ModelKind.DOUBLE_INTEGRATOR_2D)
    assert np.array_equal(step(m, np.zeros(4), np.zeros(2)), np.zeros(4))


def test_unicycle_straight_motion():
    m = make_model(ModelKind.UNICYCLE_4D, dt=1.0)
    x1 = step(m, np.array([0.0, 0.0, 0.0, 1.0]), np.zeros(2))
    assert np.allclose(x1, [1.0, 0.0, 0.0, 1.0])


def test_di2d_zoh_hand_value():
    # p' = 0 + 1*1 + 0.5*1*1^2 = 1.5, v' = 1 + 1
    m = make_model(ModelKind.DOUBLE_INTEGRATOR_2D, dt=1.0)
    x1 = step(m, np.array([0.0, 0.0, 1.0, 0.0]), np.array([1.0, 0.0]))
    assert np.allclose(x1, [1.5, 0.0, 2.0, 0.0])


def test_di_jacobians_constant():
    m = make_model(ModelKind.DOUBLE_INTEGRATOR_2D, dt=1.0)
    a, b = step_jacobians(m, np.random.default_rng(0).normal(size=4), np.array([0.3, -0.2]))
    assert np.allclose(a, [[1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert np.allclose(b, [[0.5, 0], [0, 0.5], [1, 0], [0, 1]])


def test_unicycle_jacobian_entries():
    m = make_model(ModelKind.UNICYCLE_4D, dt=1.0)
    a, _ = step_jacobians(m, np.array([0.0, 0.0, 0.0, 1.0]), np.zeros(2))
    assert a[0, 2] == 0.0  # -v sin(0) dt
    a, _ = step_jacobians(m, np.array([0.0, 0.0, np.pi / 2, 2.0]), np.zeros(2))
    assert np.isclose(a[0, 2], -2.0)


@pytest.mark.parametrize("kind", MODELS)
def test_jacobians_match_finite_differences(kind):
    m = make_model(kind, dt=1.0)
    rng = np.random.default_rng(42)
    h = 1e-5
    for _ in range(100):
        x = rng.uniform(-3, 3, m.n)
        u = rng.uniform(-2, 2, m.n_i)
        a, b = step_jacobians(m, x, u)
        fd_a = np.zeros_like(a)
        for j in range(m.n):
            e = np.zeros(m.n)
            e[j] = h
            fd_a[:, j] = (step(m, x + e, u) - step(m, x - e, u)) / (2 * h)
        fd_b = np.zeros_like(b)
        for j in range(m.n_i):
            e = np.zeros(m.n_i)
            e[j] = h
            fd_b[:, j] = (step(m, x, u + e) - step(m, x, u - e)) / (2 * h)
        scale = 1.0 + max(np.abs(fd_a).max(), np.abs(fd_b).max())
        assert np.abs(a - fd_a).max() / scale < 1e-6
        assert np.abs(b - fd_b).max() / scale < 1e-6


@pytest.mark.parametrize("kind", [ModelKind.DOUBLE_INTEGRATOR_2D, ModelKind.DOUBLE_INTEGRATOR_3D])
def test_double_integrator_linearity(kind):
    m = make_model(kind)
    rng = np.random.default_rng(7)
    for _ in range(20):
        x1, x2 = rng.normal(size=(2, m.n))
        u1, u2 = rng.normal(size=(2, m.n_i))
        lhs = step(m, x1 + x2, u1 + u2)
        rhs = step(m, x1, u1) + step(m, x2, u2) - step(m, np.zeros(m.n), np.zeros(m.n_i))
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_step_determinism():
    m = make_model(ModelKind.UNICYCLE_4D)
    x = np.array([0.1, -0.4, 0.7, 1.3])
    u = np.array([0.2, -0.1])
    a = step(m, x, u)
    b = step(m, x, u)
    assert np.array_equal(a, b)


def test_dimension_mismatch_raises():
    m = make_model(ModelKind.DOUBLE_INTEGRATOR_2D)
    with pytest.raises(InvalidArgumentError):
        step(m, np.zeros(3), np.zeros(2))
    with pytest.raises(InvalidArgumentError):
        step_jacobians(m, np.zeros(4), np.zeros(3))


def test_position_projection():
    m = make_model(ModelKind.DOUBLE_INTEGRATOR_3D)
    x = np.arange(6.0)
    assert np.array_equal(positions(m, x), [0.0, 1.0, 2.0])
