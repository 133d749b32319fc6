"""Penalized nonlinear minimization: augmented Lagrangian outer loop with an
L-BFGS-B inner minimizer.

Handles smooth objectives with equality and inequality constraints plus box
bounds on the decision vector. Inequalities follow the g(z) <= 0 convention.
Multiplier estimates come from the final augmented-Lagrangian state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from gpacl.errors import InvalidArgumentError
from gpacl.lp import SolveReport, SolveStatus


@dataclass
class NlpProblem:
    """min f(z) s.t. eq(z) = 0, ineq(z) <= 0, lo <= z <= hi.

    Callbacks return (value, gradient) for f and (vector, jacobian) for the
    constraint maps; jacobians are dense, one row per constraint.
    """

    decision_dim: int
    objective: Callable[[np.ndarray], tuple[float, np.ndarray]]
    initial_point: np.ndarray
    eq_constraints: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None
    ineq_constraints: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None
    bounds: list[tuple[float | None, float | None]] | None = None


@dataclass
class NlpOptions:
    tol_feas: float = 1e-8
    tol_stat: float = 1e-7
    rho0: float = 100.0
    rho_growth: float = 10.0
    rho_max: float = 1e12
    max_outer: int = 12
    max_inner: int = 400
    # merit = f + merit_weight * total violation, logged per outer iteration
    merit_weight: float = 1e6


def _empty_con(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.zeros(0), np.zeros((0, z.shape[0]))


def solve_nlp(problem: NlpProblem, opts: NlpOptions | None = None) -> SolveReport:
    """Augmented-Lagrangian solve; OPTIMAL means constraint violation below
    tol_feas and projected stationarity below tol_stat."""
    opts = opts or NlpOptions()
    z0 = np.asarray(problem.initial_point, dtype=float)
    if z0.shape != (problem.decision_dim,):
        raise InvalidArgumentError("initial point dimension mismatch")
    if not np.all(np.isfinite(z0)):
        raise InvalidArgumentError("initial point must be finite")

    eq = problem.eq_constraints or _empty_con
    ineq = problem.ineq_constraints or _empty_con
    h0, _ = eq(z0)
    g0, _ = ineq(z0)
    m_eq, m_in = h0.shape[0], g0.shape[0]

    nu = np.zeros(m_eq)
    lam = np.zeros(m_in)
    rho = opts.rho0
    z = z0.copy()
    bounds = problem.bounds
    log: list[dict] = []
    status = SolveStatus.MAX_ITER
    last_viol = np.inf

    def al_value_grad(zv: np.ndarray) -> tuple[float, np.ndarray]:
        f, gf = problem.objective(zv)
        val = f
        grad = gf.copy()
        if m_eq:
            h, jh = eq(zv)
            val += nu @ h + 0.5 * rho * h @ h
            grad += jh.T @ (nu + rho * h)
        if m_in:
            g, jg = ineq(zv)
            t = np.maximum(0.0, lam + rho * g)
            val += (t @ t - lam @ lam) / (2.0 * rho)
            grad += jg.T @ t
        return val, grad

    no_progress = 0
    best_stat = np.inf
    for outer in range(opts.max_outer):
        # loose inner solves early, tight ones once multipliers settle
        gtol = max(0.1 * opts.tol_stat, 1e-3 * 0.1**outer)
        res = minimize(
            al_value_grad,
            z,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": opts.max_inner, "ftol": 1e-16, "gtol": gtol, "maxcor": 20},
        )
        z = res.x
        f, gf = problem.objective(z)
        h, jh = eq(z) if m_eq else _empty_con(z)
        g, jg = ineq(z) if m_in else _empty_con(z)
        viol = 0.0
        if m_eq:
            viol = max(viol, float(np.abs(h).max()))
        if m_in:
            viol = max(viol, float(np.maximum(g, 0.0).max(initial=0.0)))
        # multiplier updates (first-order)
        nu_new = nu + rho * h if m_eq else nu
        lam_new = np.maximum(0.0, lam + rho * g) if m_in else lam
        # projected stationarity at the updated multipliers
        grad_l = gf.copy()
        if m_eq:
            grad_l += jh.T @ nu_new
        if m_in:
            grad_l += jg.T @ lam_new
        stat = _projected_norm(grad_l, z, bounds)
        merit = f + opts.merit_weight * viol
        log.append({"outer": outer, "f": f, "viol": viol, "stat": stat, "merit": merit, "rho": rho})
        nu, lam = nu_new, lam_new
        if viol <= opts.tol_feas and stat <= opts.tol_stat:
            status = SolveStatus.OPTIMAL
            break
        if res.status == 2 and viol > opts.tol_feas and rho >= opts.rho_max:
            status = SolveStatus.DEGENERATE
            break
        # stop early when neither feasibility nor stationarity improves
        if viol <= opts.tol_feas:
            if stat > 0.5 * best_stat:
                no_progress += 1
            else:
                no_progress = 0
            best_stat = min(best_stat, stat)
            if no_progress >= 2:
                break
        if viol > 0.25 * last_viol:
            rho = min(rho * opts.rho_growth, opts.rho_max)
        last_viol = viol

    f, _ = problem.objective(z)
    kkt = max(
        log[-1]["viol"] if log else np.inf,
        log[-1]["stat"] if log else np.inf,
    )
    return SolveReport(status, z, float(f), float(kkt), (lam, nu), iterations=len(log), log=log)


def _projected_norm(grad: np.ndarray, z: np.ndarray, bounds) -> float:
    """Infinity norm of the gradient projected onto the feasible box."""
    if bounds is None:
        return float(np.abs(grad).max(initial=0.0))
    g = grad.copy()
    for j, (lo, hi) in enumerate(bounds):
        if lo is not None and z[j] <= lo + 1e-12 and g[j] > 0:
            g[j] = 0.0
        if hi is not None and z[j] >= hi - 1e-12 and g[j] < 0:
            g[j] = 0.0
    return float(np.abs(g).max(initial=0.0))
