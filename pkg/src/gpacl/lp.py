"""Dense linear programming via two-phase simplex.

Sized for the inverse-KKT programs (tens to hundreds of variables). Pivoting
is Dantzig's rule with deterministic lowest-index tie-breaks, switching to
Bland's rule after a stall to guarantee termination. Everything is dense
numpy; no sparse machinery.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from gpacl.errors import InvalidArgumentError

_FEAS_TOL = 1e-9
_PIVOT_TOL = 1e-10
_STALL_LIMIT = 60


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"
    DEGENERATE = "degenerate"


@dataclass
class SolveReport:
    """Result of an LP or NLP solve.

    multipliers holds (lam, nu): lam >= 0 for inequality rows, nu free for
    equality rows, in the caller's row order.
    """

    status: SolveStatus
    solution: np.ndarray | None
    objective_value: float
    kkt_residual: float
    multipliers: tuple[np.ndarray, np.ndarray]
    iterations: int = 0
    log: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


@dataclass
class LinearProgram:
    """min c.z  s.t.  a_eq z = b_eq,  a_in z <= b_in,  bounds on z.

    bounds is a list of (lo, hi) pairs with None for unbounded ends; None as
    a whole means all variables free.
    """

    c: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    a_in: np.ndarray | None = None
    b_in: np.ndarray | None = None
    bounds: list[tuple[float | None, float | None]] | None = None

    def dims(self) -> tuple[int, int, int]:
        n = len(self.c)
        m_eq = 0 if self.a_eq is None else self.a_eq.shape[0]
        m_in = 0 if self.a_in is None else self.a_in.shape[0]
        return n, m_eq, m_in


def _validate(lp: LinearProgram) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    c = np.asarray(lp.c, dtype=float)
    n = c.shape[0]
    a_eq = np.zeros((0, n)) if lp.a_eq is None else np.atleast_2d(np.asarray(lp.a_eq, dtype=float))
    b_eq = np.zeros(0) if lp.b_eq is None else np.atleast_1d(np.asarray(lp.b_eq, dtype=float))
    a_in = np.zeros((0, n)) if lp.a_in is None else np.atleast_2d(np.asarray(lp.a_in, dtype=float))
    b_in = np.zeros(0) if lp.b_in is None else np.atleast_1d(np.asarray(lp.b_in, dtype=float))
    if a_eq.shape != (b_eq.shape[0], n) or a_in.shape != (b_in.shape[0], n):
        raise InvalidArgumentError("inconsistent LP dimensions")
    for m in (c, a_eq, b_eq, a_in, b_in):
        if m.size and not np.all(np.isfinite(m)):
            raise InvalidArgumentError("LP data must be finite")
    return c, a_eq, b_eq, a_in, b_in


class _Simplex:
    """Tableau simplex over min c.x s.t. A x = b (b >= 0), x >= 0."""

    def __init__(self, a: np.ndarray, b: np.ndarray, max_iter: int):
        self.a = a
        self.b = b
        self.m, self.n = a.shape
        self.max_iter = max_iter
        self.iterations = 0

    def run(self, c: np.ndarray, basis: list[int], allow_cols: np.ndarray) -> str:
        """Optimize c over the current basic solution. Returns a status string."""
        a, b = self.a, self.b
        m = self.m
        # reduced cost row: c - c_B . (B^-1 A) maintained incrementally
        z = c.copy().astype(float)
        for i, col in enumerate(basis):
            if abs(z[col]) > 0:
                z -= z[col] * a[i]
        use_bland = False
        stall = 0
        while True:
            if self.iterations >= self.max_iter:
                return "max_iter"
            cand = np.where(allow_cols & (z < -_PIVOT_TOL))[0]
            if cand.size == 0:
                return "optimal"
            if use_bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmin(z[cand])])
            col = a[:, j]
            pos = col > _PIVOT_TOL
            if not np.any(pos):
                return "unbounded"
            ratios = np.full(m, np.inf)
            ratios[pos] = b[pos] / col[pos]
            rmin = ratios.min()
            # lowest basis-index tie-break for determinism / anti-cycling
            ties = np.where(ratios <= rmin + 1e-12)[0]
            i = int(ties[np.argmin([basis[t] for t in ties])])
            piv = a[i, j]
            a[i] /= piv
            b[i] /= piv
            factors = a[:, j].copy()
            factors[i] = 0.0
            a -= np.outer(factors, a[i])
            b -= factors * b[i]
            z -= z[j] * a[i]
            basis[i] = j
            self.iterations += 1
            # degenerate pivots make no progress; after a stall switch to Bland
            if rmin <= _PIVOT_TOL:
                stall += 1
                if stall > _STALL_LIMIT:
                    use_bland = True
            else:
                stall = 0


def solve_lp(lp: LinearProgram, max_iter: int | None = None, debug_log: list | None = None) -> SolveReport:
    """Two-phase simplex solve of a dense LP.

    On OPTIMAL the primal feasibility residual is <= 1e-9 and the returned
    multipliers satisfy dual feasibility and complementary slackness to the
    same order. Unbounded problems are reported as DEGENERATE.
    """
    c, a_eq, b_eq, a_in, b_in = _validate(lp)
    n = c.shape[0]
    m_eq, m_in = a_eq.shape[0], a_in.shape[0]
    bounds = lp.bounds if lp.bounds is not None else [(None, None)] * n
    if len(bounds) != n:
        raise InvalidArgumentError("bounds length mismatch")

    # ---- convert to standard form: min c~.x~ s.t. A~ x~ = b~, x~ >= 0 ----
    # column construction per original variable
    cols: list[tuple[int, float, float]] = []  # (orig var, sign, shift): z_j = shift + sign * x_col
    extra_rows: list[tuple[np.ndarray, float]] = []  # range-bound rows, appended after eq+in
    col_of_var: list[list[int]] = [[] for _ in range(n)]
    for j, (lo, hi) in enumerate(bounds):
        if lo is None and hi is None:
            col_of_var[j] = [len(cols), len(cols) + 1]
            cols.append((j, 1.0, 0.0))
            cols.append((j, -1.0, 0.0))
        elif lo is not None:
            col_of_var[j] = [len(cols)]
            cols.append((j, 1.0, float(lo)))
        else:  # hi only
            col_of_var[j] = [len(cols)]
            cols.append((j, -1.0, float(hi)))
    n_std = len(cols)

    a_rows = np.vstack([a_eq, a_in]) if (m_eq + m_in) else np.zeros((0, n))
    b_rows = np.concatenate([b_eq, b_in])

    a_std = np.zeros((m_eq + m_in, n_std))
    b_std = b_rows.copy()
    for k, (j, sign, shift) in enumerate(cols):
        if shift != 0.0:
            b_std -= a_rows[:, j] * shift
        a_std[:, k] = sign * a_rows[:, j]
    c_std = np.zeros(n_std)
    obj_shift = 0.0
    for k, (j, sign, shift) in enumerate(cols):
        c_std[k] = sign * c[j]
        obj_shift += c[j] * shift

    # range bounds become extra <= rows in standard variables
    for j, (lo, hi) in enumerate(bounds):
        if lo is not None and hi is not None:
            row = np.zeros(n_std)
            row[col_of_var[j][0]] = 1.0
            extra_rows.append((row, float(hi) - float(lo)))

    m_rng = len(extra_rows)
    if m_rng:
        a_std = np.vstack([a_std] + [r for r, _ in extra_rows])
        b_std = np.concatenate([b_std, [rhs for _, rhs in extra_rows]])

    m = a_std.shape[0]
    # slacks for inequality + range rows
    n_slack = m_in + m_rng
    slack_cols = np.zeros((m, n_slack))
    for i in range(n_slack):
        slack_cols[m_eq + i, i] = 1.0
    a_full = np.hstack([a_std, slack_cols]) if n_slack else a_std
    c_full = np.concatenate([c_std, np.zeros(n_slack)])

    # make b >= 0
    neg = b_std < 0
    a_full[neg] *= -1.0
    b_std = np.abs(b_std)

    # artificials: one per row, but rows whose slack survived the sign flip
    # can use the slack directly
    basis: list[int] = [-1] * m
    art_cols: list[int] = []
    art_of_row: dict[int, int] = {}
    ncol = a_full.shape[1]
    add = []
    for i in range(m):
        si = i - m_eq  # slack index if any
        if si >= 0 and not neg[i]:
            basis[i] = n_std + si
        else:
            col = np.zeros(m)
            col[i] = 1.0
            add.append(col)
            basis[i] = ncol + len(add) - 1
            art_cols.append(basis[i])
            art_of_row[i] = basis[i]
    if add:
        a_full = np.hstack([a_full, np.array(add).T])
    total_cols = a_full.shape[1]

    if max_iter is None:
        max_iter = 200 * (m + total_cols + 10)
    sx = _Simplex(a_full, b_std, max_iter)

    art_mask = np.zeros(total_cols, dtype=bool)
    for jcol in art_cols:
        art_mask[jcol] = True

    # ---- phase 1 ----
    status_p1 = "optimal"
    if art_cols:
        c1 = np.zeros(total_cols)
        c1[art_mask] = 1.0
        status_p1 = sx.run(c1, basis, np.ones(total_cols, dtype=bool))
        if status_p1 == "max_iter":
            return SolveReport(SolveStatus.MAX_ITER, None, np.nan, np.inf, (np.zeros(m_in), np.zeros(m_eq)), sx.iterations)
        p1_val = float(sum(sx.b[i] for i in range(m) if art_mask[basis[i]]))
        if debug_log is not None:
            debug_log.append({"phase": 1, "objective": p1_val, "iterations": sx.iterations})
        if p1_val > _FEAS_TOL:
            return SolveReport(SolveStatus.INFEASIBLE, None, np.nan, p1_val, (np.zeros(m_in), np.zeros(m_eq)), sx.iterations)
        # pivot remaining artificials out where possible
        for i in range(m):
            if art_mask[basis[i]]:
                row = sx.a[i]
                pivots = np.where((~art_mask) & (np.abs(row) > 1e-8))[0]
                if pivots.size:
                    j = int(pivots[0])
                    piv = sx.a[i, j]
                    sx.a[i] /= piv
                    sx.b[i] /= piv
                    factors = sx.a[:, j].copy()
                    factors[i] = 0.0
                    sx.a -= np.outer(factors, sx.a[i])
                    sx.b -= factors * sx.b[i]
                    basis[i] = j

    # ---- phase 2 ----
    allow = ~art_mask
    c2 = np.zeros(total_cols)
    c2[: c_full.shape[0]] = c_full
    status = sx.run(c2, basis, allow)
    if status == "max_iter":
        return SolveReport(SolveStatus.MAX_ITER, None, np.nan, np.inf, (np.zeros(m_in), np.zeros(m_eq)), sx.iterations)
    if status == "unbounded":
        return SolveReport(SolveStatus.DEGENERATE, None, -np.inf, np.inf, (np.zeros(m_in), np.zeros(m_eq)), sx.iterations)

    # ---- extract primal solution ----
    x_std = np.zeros(total_cols)
    for i, jcol in enumerate(basis):
        x_std[jcol] = sx.b[i]
    z = np.zeros(n)
    for k, (j, sign, shift) in enumerate(cols):
        z[j] += sign * x_std[k]
    for j, (lo, hi) in enumerate(bounds):
        if lo is not None or hi is not None:
            k = col_of_var[j][0]
            _, sign, shift = cols[k]
            z[j] = shift + sign * x_std[k]
    obj = float(c @ z)

    # ---- duals: solve B^T y = c_B on the original (pre-pivot) matrix ----
    a_orig = np.zeros((m, total_cols))
    arows2 = np.vstack([a_eq, a_in]) if (m_eq + m_in) else np.zeros((0, n))
    for k, (j, sign, shift) in enumerate(cols):
        a_orig[: m_eq + m_in, k] = sign * arows2[:, j]
    for r, (row, _) in enumerate(extra_rows):
        a_orig[m_eq + m_in + r, :n_std] = row
    for i in range(n_slack):
        a_orig[m_eq + i, n_std + i] = 1.0
    a_orig[neg] *= -1.0
    for i, jcol in art_of_row.items():
        a_orig[i, jcol] = 1.0  # artificials were added after the sign flip
    c_ext = np.zeros(total_cols)
    c_ext[: c_full.shape[0]] = c_full
    bmat = a_orig[:, basis]
    try:
        y = np.linalg.solve(bmat.T, c_ext[basis])
    except np.linalg.LinAlgError:
        y = np.linalg.lstsq(bmat.T, c_ext[basis], rcond=None)[0]
    y[neg] *= -1.0  # undo row sign flips

    nu = -y[:m_eq]
    lam = -y[m_eq : m_eq + m_in]
    lam = np.where(lam > 0, lam, 0.0)

    # ---- KKT residual ----
    res = 0.0
    if m_eq:
        res = max(res, float(np.max(np.abs(a_eq @ z - b_eq))))
    if m_in:
        slack_v = b_in - a_in @ z
        res = max(res, float(np.max(-slack_v.clip(max=0))) if slack_v.size else 0.0)
        res = max(res, float(np.max(np.abs(lam * slack_v))) if slack_v.size else 0.0)
    for j, (lo, hi) in enumerate(bounds):
        if lo is not None:
            res = max(res, max(0.0, lo - z[j]))
        if hi is not None:
            res = max(res, max(0.0, z[j] - hi))
    r = c.copy()
    if m_in:
        r = r + a_in.T @ lam
    if m_eq:
        r = r + a_eq.T @ nu
    for j, (lo, hi) in enumerate(bounds):
        at_lo = lo is not None and z[j] - lo <= 1e-7
        at_hi = hi is not None and hi - z[j] <= 1e-7
        if at_lo and r[j] >= -1e-7:
            continue
        if at_hi and r[j] <= 1e-7:
            continue
        if at_lo or at_hi:
            res = max(res, abs(min(r[j], 0.0)) if at_lo else abs(max(r[j], 0.0)))
        else:
            res = max(res, abs(r[j]))

    if debug_log is not None:
        debug_log.append({"phase": 2, "objective": obj, "iterations": sx.iterations, "kkt_residual": res})
    return SolveReport(SolveStatus.OPTIMAL, z, obj, res, (lam, nu), sx.iterations)
