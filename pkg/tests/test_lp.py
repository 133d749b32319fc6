import itertools

import numpy as np
import pytest

from gpacl.lp import LinearProgram, SolveStatus, solve_lp


def vertex_enumeration_optimum(c, a_in, b_in, lo, hi):
    """Brute-force LP oracle: enumerate basic feasible points of the polytope
    {a_in z <= b_in, lo <= z <= hi} and take the best objective."""
    n = len(c)
    rows = [(np.array(a), float(b)) for a, b in zip(a_in, b_in)]
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        rows.append((e, hi[j]))
        rows.append((-e, -lo[j]))
    best = np.inf
    for combo in itertools.combinations(range(len(rows)), n):
        a = np.array([rows[i][0] for i in combo])
        b = np.array([rows[i][1] for i in combo])
        if abs(np.linalg.det(a)) < 1e-10:
            continue
        z = np.linalg.solve(a, b)
        feasible = all(r @ z <= rb + 1e-8 for r, rb in rows)
        if feasible:
            best = min(best, float(c @ z))
    return best


def test_min_x_nonnegative():
    lp = LinearProgram(c=np.array([1.0]), bounds=[(0.0, None)])
    rep = solve_lp(lp)
    assert rep.status is SolveStatus.OPTIMAL
    assert rep.objective_value == pytest.approx(0.0, abs=1e-12)
    assert rep.solution[0] == pytest.approx(0.0, abs=1e-12)


def test_l1_epigraph_drives_to_zero():
    # min |s| with s free and s = z1 - z2 achievable at 0: epigraph form
    # variables (s, e): min e s.t. s <= e, -s <= e, s = 0.3 - 0.3
    c = np.array([0.0, 1.0])
    a_in = np.array([[1.0, -1.0], [-1.0, -1.0]])
    b_in = np.zeros(2)
    a_eq = np.array([[1.0, 0.0]])
    b_eq = np.array([0.0])
    rep = solve_lp(LinearProgram(c, a_eq, b_eq, a_in, b_in))
    assert rep.status is SolveStatus.OPTIMAL
    assert rep.objective_value == pytest.approx(0.0, abs=1e-10)


def test_infeasible_detected():
    # x >= 1 and x <= 0
    lp = LinearProgram(
        c=np.array([1.0]),
        a_in=np.array([[-1.0], [1.0]]),
        b_in=np.array([-1.0, 0.0]),
    )
    assert solve_lp(lp).status is SolveStatus.INFEASIBLE


def test_unbounded_reported_degenerate():
    lp = LinearProgram(c=np.array([-1.0]), bounds=[(0.0, None)])
    assert solve_lp(lp).status is SolveStatus.DEGENERATE


def test_equality_with_multipliers():
    # min x1 + 2 x2 s.t. x1 + x2 = 1, x >= 0 -> x = (1, 0), nu = -1
    lp = LinearProgram(
        c=np.array([1.0, 2.0]),
        a_eq=np.array([[1.0, 1.0]]),
        b_eq=np.array([1.0]),
        bounds=[(0.0, None), (0.0, None)],
    )
    rep = solve_lp(lp)
    assert rep.status is SolveStatus.OPTIMAL
    assert np.allclose(rep.solution, [1.0, 0.0], atol=1e-10)
    assert rep.objective_value == pytest.approx(1.0)
    lam, nu = rep.multipliers
    assert nu[0] == pytest.approx(-1.0)


def test_random_lps_against_vertex_oracle():
    rng = np.random.default_rng(2024)
    n = 5
    solved = 0
    for trial in range(25):
        c = rng.normal(size=n)
        a_in = rng.normal(size=(6, n))
        b_in = rng.uniform(0.5, 3.0, size=6)
        lo = np.full(n, -4.0)
        hi = np.full(n, 4.0)
        oracle = vertex_enumeration_optimum(c, a_in, b_in, lo, hi)
        rep = solve_lp(LinearProgram(c, None, None, a_in, b_in, bounds=[(-4.0, 4.0)] * n))
        assert rep.status is SolveStatus.OPTIMAL
        assert rep.objective_value == pytest.approx(oracle, abs=1e-7)
        assert rep.kkt_residual < 1e-7
        solved += 1
    assert solved == 25


def test_dual_feasibility_and_complementarity():
    rng = np.random.default_rng(5)
    for _ in range(10):
        n = 8
        c = rng.normal(size=n)
        a_in = rng.normal(size=(10, n))
        b_in = rng.uniform(0.5, 2.0, size=10)
        a_eq = rng.normal(size=(2, n))
        z_feas = rng.uniform(-0.2, 0.2, size=n)
        b_eq = a_eq @ z_feas
        rep = solve_lp(LinearProgram(c, a_eq, b_eq, a_in, b_in, bounds=[(-5.0, 5.0)] * n))
        assert rep.status is SolveStatus.OPTIMAL
        lam, nu = rep.multipliers
        assert lam.min() >= -1e-10
        slack = b_in - a_in @ rep.solution
        assert np.abs(lam * slack).max() < 1e-6
        assert rep.kkt_residual < 1e-7


def test_determinism():
    rng = np.random.default_rng(9)
    c = rng.normal(size=12)
    a_in = rng.normal(size=(15, 12))
    b_in = rng.uniform(0.5, 2.0, size=15)
    lp = LinearProgram(c, None, None, a_in, b_in, bounds=[(-3.0, 3.0)] * 12)
    r1 = solve_lp(lp)
    r2 = solve_lp(lp)
    assert np.array_equal(r1.solution, r2.solution)
    assert r1.objective_value == r2.objective_value
    assert r1.iterations == r2.iterations


def test_free_variable_equality():
    # min |free var| style: min e s.t. -e <= x <= e, x = 2 -> e = 2
    c = np.array([0.0, 1.0])
    a_eq = np.array([[1.0, 0.0]])
    b_eq = np.array([2.0])
    a_in = np.array([[1.0, -1.0], [-1.0, -1.0]])
    b_in = np.zeros(2)
    rep = solve_lp(LinearProgram(c, a_eq, b_eq, a_in, b_in))
    assert rep.status is SolveStatus.OPTIMAL
    assert rep.objective_value == pytest.approx(2.0, abs=1e-9)
