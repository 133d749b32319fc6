"""Simulated expert: solves the forward trajectory problem to local optimality.

Decision vector layout is (x_1..x_T, u_1..u_{T-1}) with endpoint positions
pinned through variable bounds. Endpoint velocities / headings stay free; the
cost is the position-smoothness sum, so trajectories tighten against the
avoid set exactly where the path has to bend.

The stored trajectory carries T control rows for schema stability; the last
row is zero padding (no transition consumes it).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from gpacl.constraints import ConstraintSpace, GroundTruthConstraint
from gpacl.dynamics import DynamicsModel, step, step_batch, step_jacobians_batch
from gpacl.errors import InvalidArgumentError
from gpacl.lp import SolveStatus
from gpacl.nlp import NlpOptions, NlpProblem, solve_nlp

_FEAS_TOL = 1e-6
_PUSHOUT_MARGIN = 0.2


@dataclass
class Multipliers:
    """Lagrange multipliers of the forward problem at the returned solution."""

    nu_dyn: np.ndarray  # (T-1, n) dynamics rows
    lam_unknown: np.ndarray  # (T,) avoid-set rows, >= 0
    lam_u_lo: np.ndarray  # (T-1, n_i) control lower bounds, >= 0
    lam_u_hi: np.ndarray  # (T-1, n_i) control upper bounds, >= 0
    mu_start: np.ndarray  # (n_c,) start-position rows
    mu_goal: np.ndarray  # (n_c,) goal-position rows


@dataclass
class Trajectory:
    states: np.ndarray  # (T, n)
    controls: np.ndarray  # (T, n_i), last row zero padding
    T: int
    model_id: str
    dt: float
    meta: dict = field(default_factory=dict)
    multipliers: Multipliers | None = None
    status: SolveStatus = SolveStatus.OPTIMAL

    @property
    def cost(self) -> float:
        return float(self.meta.get("cost", np.nan))

    def to_json_dict(self) -> dict:
        return {
            "model": self.model_id,
            "T": self.T,
            "dt": self.dt,
            "states": [[float(v) for v in row] for row in self.states],
            "controls": [[float(v) for v in row] for row in self.controls],
            "kappa_s": [float(v) for v in self.meta["kappa_s"]],
            "kappa_g": [float(v) for v in self.meta["kappa_g"]],
            "cost": float(self.meta["cost"]),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def from_json_dict(d: dict) -> "Trajectory":
        states = np.array(d["states"], dtype=float)
        controls = np.array(d["controls"], dtype=float)
        return Trajectory(
            states,
            controls,
            int(d["T"]),
            str(d["model"]),
            float(d["dt"]),
            meta={
                "kappa_s": np.array(d["kappa_s"], dtype=float),
                "kappa_g": np.array(d["kappa_g"], dtype=float),
                "cost": float(d["cost"]),
            },
        )


@dataclass
class ForwardProblem:
    """The demonstrator's constrained problem; truth is never shown to the learner."""

    model: DynamicsModel
    truth: GroundTruthConstraint
    horizon: int

    def __post_init__(self):
        if self.horizon < 3:
            raise InvalidArgumentError("horizon must be >= 3")

    @property
    def space(self) -> ConstraintSpace:
        return ConstraintSpace.for_model(self.model)

    @property
    def constraint_scale(self) -> float:
        return _constraint_scale(self.truth)


_SCALE_CACHE: dict = {}


def _constraint_scale(truth: GroundTruthConstraint) -> float:
    """Typical gradient magnitude of the avoid-set function near its boundary.

    Used to normalize the unknown-constraint rows inside the solver; steep
    constraints (quartic bowls) otherwise give the penalty terms curvature
    several orders above the cost and stall the inner minimizer.
    """
    key = (truth.id, truth.box_lo, truth.box_hi)
    if key in _SCALE_CACHE:
        return _SCALE_CACHE[key]
    rng = np.random.default_rng(np.random.SeedSequence([7, 11]))
    lo, hi = np.array(truth.box_lo), np.array(truth.box_hi)
    pts = rng.uniform(lo, hi, size=(512, truth.dim))
    vals = truth.evaluate_batch(pts)
    band = np.abs(vals) <= 0.25 * (np.abs(vals).max() + 1e-12)
    sample = pts[band] if band.sum() >= 16 else pts
    norms = np.linalg.norm(truth.subgradient_batch(sample), axis=1)
    scale = float(np.median(norms))
    scale = max(scale, 1e-3)
    _SCALE_CACHE[key] = scale
    return scale


def smoothness_cost(positions: np.ndarray) -> float:
    d = np.diff(positions, axis=0)
    return float((d * d).sum())


class _Transcription:
    """Index bookkeeping plus vectorized constraint/cost callbacks."""

    def __init__(self, fp: ForwardProblem, kappa_s: np.ndarray, kappa_g: np.ndarray):
        self.fp = fp
        m = fp.model
        self.T = fp.horizon
        self.n = m.n
        self.ni = m.n_i
        self.nx = self.n * self.T
        self.dim = self.nx + self.ni * (self.T - 1)
        self.kappa_s = kappa_s
        self.kappa_g = kappa_g
        self.pos_idx = np.array(m.position_indices)
        self.sel = fp.space.selection_matrix(self.n)
        # precomputed index grids for scattering Jacobian blocks
        t_idx = np.arange(self.T - 1)
        rr = (t_idx[:, None] * self.n + np.arange(self.n)[None, :]).reshape(-1)
        self._rows_a = np.repeat(rr, self.n)
        self._cols_a = (
            (t_idx[:, None, None] * self.n + np.arange(self.n)[None, None, :]).repeat(self.n, axis=1).reshape(-1)
        )
        self._rows_b = np.repeat(rr, self.ni)
        self._cols_b = (
            self.nx
            + (t_idx[:, None, None] * self.ni + np.arange(self.ni)[None, None, :]).repeat(self.n, axis=1).reshape(-1)
        )
        eye_rows = np.arange(self.n * (self.T - 1))
        self._eye_cols = self.n + eye_rows
        # inequality rows touch only position columns of their own state
        self._ineq_cols = (np.arange(self.T)[:, None] * self.n + self.pos_idx[None, :]).reshape(-1)
        self._ineq_rows = np.repeat(np.arange(self.T), len(self.pos_idx))
        self.g_scale = fp.constraint_scale
        # reusable Jacobian buffers; for linear dynamics the eq Jacobian is constant
        self._jac_eq = np.zeros((self.n * (self.T - 1), self.dim))
        self._jac_eq[np.arange(self.n * (self.T - 1)), self._eye_cols] = 1.0
        self._jac_ineq = np.zeros((self.T, self.dim))
        self._eq_const = fp.model.kind is not None and fp.model.kind.value != "unicycle"
        if self._eq_const:
            a, b = step_jacobians_batch(fp.model, np.zeros((self.T - 1, self.n)), np.zeros((self.T - 1, self.ni)))
            self._jac_eq[self._rows_a, self._cols_a] = -a.ravel()
            self._jac_eq[self._rows_b, self._cols_b] = -b.ravel()

    def split(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = z[: self.nx].reshape(self.T, self.n)
        u = z[self.nx :].reshape(self.T - 1, self.ni)
        return x, u

    def join(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return np.concatenate([x.ravel(), u.ravel()])

    def objective(self, z: np.ndarray) -> tuple[float, np.ndarray]:
        x = z[: self.nx].reshape(self.T, self.n)
        p = x[:, self.pos_idx]
        d = np.diff(p, axis=0)
        val = float((d * d).sum())
        gp = np.zeros_like(p)
        gp[:-1] -= 2.0 * d
        gp[1:] += 2.0 * d
        grad = np.zeros(self.dim)
        gx = grad[: self.nx].reshape(self.T, self.n)
        gx[:, self.pos_idx] = gp
        return val, grad

    def dynamics_residual(self, z: np.ndarray) -> np.ndarray:
        x, u = self.split(z)
        return (x[1:] - step_batch(self.fp.model, x[:-1], u)).ravel()

    def eq_constraints(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Dynamics defects. The returned Jacobian aliases an internal buffer
        that stays valid until the next call."""
        x, u = self.split(z)
        m = self.fp.model
        vals = (x[1:] - step_batch(m, x[:-1], u)).ravel()
        if not self._eq_const:
            a, b = step_jacobians_batch(m, x[:-1], u)
            self._jac_eq[self._rows_a, self._cols_a] = -a.ravel()
            self._jac_eq[self._rows_b, self._cols_b] = -b.ravel()
        return vals, self._jac_eq

    def ineq_constraints(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Avoid-set rows, normalized by the constraint's gradient scale.
        Same buffer-aliasing caveat as eq_constraints."""
        x = z[: self.nx].reshape(self.T, self.n)
        truth = self.fp.truth
        kappas = x[:, self.pos_idx]
        vals = truth.evaluate_batch(kappas) / self.g_scale
        self._jac_ineq[self._ineq_rows, self._ineq_cols] = truth.subgradient_batch(kappas).ravel() / self.g_scale
        return vals, self._jac_ineq

    def bounds(self) -> list[tuple[float | None, float | None]]:
        b: list[tuple[float | None, float | None]] = [(None, None)] * self.dim
        for j, idx in enumerate(self.pos_idx):
            b[idx] = (float(self.kappa_s[j]), float(self.kappa_s[j]))
            b[(self.T - 1) * self.n + idx] = (float(self.kappa_g[j]), float(self.kappa_g[j]))
        m = self.fp.model
        for t in range(self.T - 1):
            for i in range(self.ni):
                b[self.nx + t * self.ni + i] = (m.control_lo[i], m.control_hi[i])
        return b


def _initial_guess(tr: _Transcription, rng: np.random.Generator, perturb: float) -> np.ndarray:
    fp = tr.fp
    m = fp.model
    T, n, ni = tr.T, tr.n, tr.ni
    alphas = np.linspace(0.0, 1.0, T)[:, None]
    p = tr.kappa_s[None, :] * (1 - alphas) + tr.kappa_g[None, :] * alphas
    if perturb > 0:
        p[1:-1] += rng.normal(scale=perturb, size=p[1:-1].shape)
    # push interior waypoints out of the avoid set along the true gradient
    for t in range(1, T - 1):
        for _ in range(60):
            val = fp.truth.evaluate(p[t])
            if val <= -_PUSHOUT_MARGIN:
                break
            g = fp.truth.subgradient(p[t])
            ng = np.linalg.norm(g)
            if ng < 1e-9:
                p[t] = p[t] + rng.normal(scale=0.1, size=p[t].shape)
                continue
            p[t] = p[t] - (val + _PUSHOUT_MARGIN) / (ng * ng) * g
    x = np.zeros((T, n))
    x[:, tr.pos_idx] = p
    dp = np.vstack([np.diff(p, axis=0), p[-1] - p[-2]]) / m.dt
    if m.kind.value == "unicycle":
        x[:, 3] = np.linalg.norm(dp, axis=1)
        x[:, 2] = np.arctan2(dp[:, 1], dp[:, 0])
    else:
        x[:, n // 2 :] = dp
    u = np.zeros((T - 1, ni))
    if m.kind.value == "unicycle":
        u[:, 0] = np.diff(x[:, 2]) / m.dt
        u[:, 1] = np.diff(x[:, 3]) / m.dt
    else:
        u = np.diff(x[:, n // 2 :], axis=0) / m.dt
    u = np.clip(u, np.array(m.control_lo), np.array(m.control_hi))
    return tr.join(x, u)


def solve_forward(
    fp: ForwardProblem,
    kappa_s: np.ndarray,
    kappa_g: np.ndarray,
    seed: int = 0,
    n_starts: int = 3,
    opts: NlpOptions | None = None,
) -> Trajectory:
    """Locally-optimal trajectory between safe endpoint constraint states.

    Returns a Trajectory whose status is OPTIMAL only if dynamics, endpoint
    and avoid-set feasibility hold to 1e-6 and the reconstructed stationarity
    residual is small. Infeasible endpoints yield status INFEASIBLE.
    """
    kappa_s = np.asarray(kappa_s, dtype=float)
    kappa_g = np.asarray(kappa_g, dtype=float)
    m = fp.model
    if kappa_s.shape != (m.n_c,) or kappa_g.shape != (m.n_c,):
        raise InvalidArgumentError("endpoint constraint-state dimension mismatch")
    tr = _Transcription(fp, kappa_s, kappa_g)
    empty = Trajectory(
        np.zeros((tr.T, tr.n)), np.zeros((tr.T, tr.ni)), tr.T, m.kind.value, m.dt,
        meta={"kappa_s": kappa_s, "kappa_g": kappa_g, "cost": np.inf},
    )
    if fp.truth.evaluate(kappa_s) >= 0 or fp.truth.evaluate(kappa_g) >= 0:
        empty.status = SolveStatus.INFEASIBLE
        return empty

    opts = opts or NlpOptions(tol_feas=1e-9, tol_stat=3e-6, rho0=100.0, max_outer=14, max_inner=500)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    best: Trajectory | None = None
    for start in range(n_starts):
        z0 = _initial_guess(tr, rng, perturb=0.0 if start == 0 else 0.6)
        problem = NlpProblem(
            tr.dim, tr.objective, z0,
            eq_constraints=tr.eq_constraints,
            ineq_constraints=tr.ineq_constraints,
            bounds=tr.bounds(),
        )
        report = solve_nlp(problem, opts)
        if report.solution is None:
            continue
        x, u = tr.split(report.solution)
        dyn_res = np.abs(tr.dynamics_residual(report.solution)).max()
        gvals = np.array([fp.truth.evaluate(x[t, tr.pos_idx]) for t in range(tr.T)])
        feasible = dyn_res <= _FEAS_TOL and gvals.max() <= _FEAS_TOL
        cost, _ = tr.objective(report.solution)
        if not feasible:
            continue
        if best is None or cost < best.meta["cost"] - 1e-12:
            controls = np.vstack([u, np.zeros((1, tr.ni))])
            traj = Trajectory(
                x.copy(), controls, tr.T, m.kind.value, m.dt,
                meta={"kappa_s": kappa_s, "kappa_g": kappa_g, "cost": cost, "seed": seed},
                status=report.status,
            )
            traj.multipliers = _assemble_multipliers(tr, report)
            best = traj
    if best is None:
        empty.status = SolveStatus.MAX_ITER
        return empty
    return best


def _assemble_multipliers(tr: _Transcription, report) -> Multipliers:
    lam, nu = report.multipliers
    T, n, ni = tr.T, tr.n, tr.ni
    nu_dyn = nu.reshape(T - 1, n) if nu.size else np.zeros((T - 1, n))
    # the solver works with gradient-scaled avoid-set rows; report raw multipliers
    lam_unknown = (lam / tr.g_scale) if lam.size else np.zeros(T)
    z = report.solution
    # residual of the free stationarity rows determines the bound multipliers
    _, grad_c = tr.objective(z)
    _, jh = tr.eq_constraints(z)
    _, jg = tr.ineq_constraints(z)
    r = grad_c + jh.T @ nu + jg.T @ lam
    m = tr.fp.model
    x, u = tr.split(z)
    lam_u_lo = np.zeros((T - 1, ni))
    lam_u_hi = np.zeros((T - 1, ni))
    lo = np.array(m.control_lo)
    hi = np.array(m.control_hi)
    for t in range(T - 1):
        for i in range(ni):
            j = tr.nx + t * ni + i
            if u[t, i] >= hi[i] - 1e-9:
                lam_u_hi[t, i] = max(0.0, -r[j])
            elif u[t, i] <= lo[i] + 1e-9:
                lam_u_lo[t, i] = max(0.0, r[j])
    mu_start = -r[tr.pos_idx]
    mu_goal = -r[(T - 1) * n + tr.pos_idx]
    return Multipliers(nu_dyn, lam_unknown, lam_u_lo, lam_u_hi, mu_start, mu_goal)


def kkt_residual(fp: ForwardProblem, traj: Trajectory, mult: Multipliers) -> float:
    """Infinity norm of the stationarity vector assembled from the given
    multipliers, over all state and control blocks."""
    m = fp.model
    T = traj.T
    if mult.nu_dyn.shape != (T - 1, m.n) or mult.lam_unknown.shape != (T,):
        raise InvalidArgumentError("multiplier dimensions do not match the trajectory")
    tr = _Transcription(fp, np.asarray(traj.meta["kappa_s"], float), np.asarray(traj.meta["kappa_g"], float))
    z = tr.join(traj.states, traj.controls[:-1])
    _, grad = tr.objective(z)
    _, jh = tr.eq_constraints(z)
    _, jg = tr.ineq_constraints(z)
    s = grad + jh.T @ mult.nu_dyn.ravel() + jg.T @ mult.lam_unknown
    # control bound rows
    for t in range(T - 1):
        for i in range(m.n_i):
            j = tr.nx + t * m.n_i + i
            s[j] += mult.lam_u_hi[t, i] - mult.lam_u_lo[t, i]
    # endpoint position rows
    s[tr.pos_idx] += mult.mu_start
    s[(T - 1) * m.n + tr.pos_idx] += mult.mu_goal
    return float(np.abs(s).max())


def validate_trajectory(fp: ForwardProblem, traj: Trajectory, tol: float = _FEAS_TOL) -> bool:
    """The three feasibility invariants: dynamics, endpoints, avoid set."""
    m = fp.model
    x = traj.states
    for t in range(traj.T - 1):
        if np.abs(x[t + 1] - step(m, x[t], traj.controls[t])).max() > tol:
            return False
    sel = list(m.position_indices)
    if np.abs(x[0, sel] - traj.meta["kappa_s"]).max() > tol:
        return False
    if np.abs(x[-1, sel] - traj.meta["kappa_g"]).max() > tol:
        return False
    for t in range(traj.T):
        if fp.truth.evaluate(x[t, sel]) > tol:
            return False
    return True
