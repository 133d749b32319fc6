import numpy as np
import pytest

from gpacl.lp import SolveStatus
from gpacl.nlp import NlpOptions, NlpProblem, solve_nlp


def quadratic_to(a):
    def f(z):
        d = z - a
        return float(d @ d), 2.0 * d

    return f


def test_unconstrained_quadratic():
    a = np.array([1.0, -2.0, 0.5])
    p = NlpProblem(3, quadratic_to(a), np.zeros(3))
    rep = solve_nlp(p)
    assert rep.status is SolveStatus.OPTIMAL
    assert np.allclose(rep.solution, a, atol=1e-7)
    lam, nu = rep.multipliers
    assert lam.size == 0 and nu.size == 0


def test_equality_constrained_quadratic():
    # min ||z||^2 s.t. z1 = 1 -> z = (1, 0); stationarity 2 z + nu e1 = 0 -> nu = -2
    def eq(z):
        return np.array([z[0] - 1.0]), np.array([[1.0, 0.0]])

    p = NlpProblem(2, quadratic_to(np.zeros(2)), np.array([0.3, 0.3]), eq_constraints=eq)
    rep = solve_nlp(p)
    assert rep.status is SolveStatus.OPTIMAL
    assert np.allclose(rep.solution, [1.0, 0.0], atol=1e-6)
    _, nu = rep.multipliers
    resid = 2.0 * rep.solution + nu[0] * np.array([1.0, 0.0])
    assert np.abs(resid).max() < 1e-6


def test_circle_avoidance_toy_matches_grid_oracle():
    # 3-point path a -> m -> b around the unit disk: optimize the midpoint m
    a = np.array([-2.0, 0.0])
    b = np.array([2.0, 0.0])

    def f(z):
        d1 = z - a
        d2 = b - z
        return float(d1 @ d1 + d2 @ d2), 2.0 * d1 - 2.0 * d2

    def ineq(z):
        # stay outside the unit disk: 1 - ||m||^2 <= 0
        return np.array([1.0 - z @ z]), np.array([-2.0 * z])

    p = NlpProblem(2, f, np.array([0.0, 1.5]), ineq_constraints=ineq)
    rep = solve_nlp(p)
    assert rep.status is SolveStatus.OPTIMAL

    # dense grid oracle over the midpoint
    xs = np.linspace(-2.5, 2.5, 501)
    ys = np.linspace(-2.5, 2.5, 501)
    best = np.inf
    for x in xs:
        for y in ys:
            if x * x + y * y < 1.0:
                continue
            m = np.array([x, y])
            val = np.sum((m - a) ** 2) + np.sum((b - m) ** 2)
            best = min(best, val)
    assert rep.objective_value == pytest.approx(best, abs=1e-3)


def test_inequality_multipliers_complementarity():
    def f(z):
        return float(z @ z), 2.0 * z

    def ineq(z):
        # z1 >= 1 and an inactive constraint z2 <= 5
        return np.array([1.0 - z[0], z[1] - 5.0]), np.array([[-1.0, 0.0], [0.0, 1.0]])

    p = NlpProblem(2, f, np.array([2.0, 0.5]), ineq_constraints=ineq)
    rep = solve_nlp(p)
    assert rep.status is SolveStatus.OPTIMAL
    assert np.allclose(rep.solution, [1.0, 0.0], atol=1e-6)
    lam, _ = rep.multipliers
    assert lam.min() >= -1e-8
    g = np.array([1.0 - rep.solution[0], rep.solution[1] - 5.0])
    assert np.abs(lam * g).max() < 1e-6


def test_merit_nonincreasing_across_outers():
    def f(z):
        return float(z @ z), 2.0 * z

    def eq(z):
        return np.array([z[0] + z[1] - 2.0]), np.array([[1.0, 1.0]])

    p = NlpProblem(2, f, np.array([5.0, -3.0]), eq_constraints=eq)
    rep = solve_nlp(p, NlpOptions(rho0=1.0))
    merits = [e["merit"] for e in rep.log]
    assert all(m2 <= m1 + 1e-6 for m1, m2 in zip(merits, merits[1:]))


def test_bounds_respected():
    p = NlpProblem(2, quadratic_to(np.array([3.0, -3.0])), np.zeros(2), bounds=[(-1.0, 1.0), (-1.0, 1.0)])
    rep = solve_nlp(p)
    assert rep.status is SolveStatus.OPTIMAL
    assert np.allclose(rep.solution, [1.0, -1.0], atol=1e-8)


def test_determinism():
    def f(z):
        return float(np.sin(z[0]) + z @ z), np.array([np.cos(z[0]), 0.0]) + 2.0 * z

    p = NlpProblem(2, f, np.array([0.7, -0.3]))
    r1 = solve_nlp(p)
    r2 = solve_nlp(p)
    assert np.array_equal(r1.solution, r2.solution)
