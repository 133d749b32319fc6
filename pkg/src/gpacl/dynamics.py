"""Discrete-time dynamics models used as equality constraints by the demonstrator.

Double integrators use the exact zero-order-hold discretization (linear), the
unicycle uses forward Euler on (p_x, p_y, theta, v) with controls (omega, a).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from gpacl.errors import InvalidArgumentError


class ModelKind(enum.Enum):
    DOUBLE_INTEGRATOR_2D = "di2d"
    DOUBLE_INTEGRATOR_3D = "di3d"
    UNICYCLE_4D = "unicycle"


@dataclass(frozen=True)
class DynamicsModel:
    """Immutable dynamics description.

    position_indices selects the leading position entries of the state; those
    coordinates form the constraint space.
    """

    kind: ModelKind
    n: int
    n_i: int
    dt: float
    control_lo: tuple[float, ...]
    control_hi: tuple[float, ...]
    position_indices: tuple[int, ...] = field(default=())

    @property
    def n_c(self) -> int:
        return len(self.position_indices)


_DI_UMAX = 5.0
_UNI_UMAX = (1.0, 2.0)  # (omega, a)


def make_model(kind: ModelKind | str, dt: float = 1.0, control_scale: float = 1.0) -> DynamicsModel:
    """Build one of the three supported models with default control boxes."""
    if isinstance(kind, str):
        kind = ModelKind(kind)
    if kind is ModelKind.DOUBLE_INTEGRATOR_2D:
        hi = (_DI_UMAX * control_scale,) * 2
        return DynamicsModel(kind, 4, 2, dt, tuple(-h for h in hi), hi, (0, 1))
    if kind is ModelKind.DOUBLE_INTEGRATOR_3D:
        hi = (_DI_UMAX * control_scale,) * 3
        return DynamicsModel(kind, 6, 3, dt, tuple(-h for h in hi), hi, (0, 1, 2))
    if kind is ModelKind.UNICYCLE_4D:
        hi = tuple(u * control_scale for u in _UNI_UMAX)
        return DynamicsModel(kind, 4, 2, dt, tuple(-h for h in hi), hi, (0, 1))
    raise InvalidArgumentError(f"unknown model kind: {kind}")


def _check_dims(model: DynamicsModel, x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != (model.n,):
        raise InvalidArgumentError(f"state must have shape ({model.n},), got {x.shape}")
    if u.shape != (model.n_i,):
        raise InvalidArgumentError(f"control must have shape ({model.n_i},), got {u.shape}")
    return x, u


def step(model: DynamicsModel, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """One discrete step x_{t+1} = f(x_t, u_t)."""
    x, u = _check_dims(model, x, u)
    dt = model.dt
    if model.kind is ModelKind.UNICYCLE_4D:
        px, py, th, v = x
        omega, acc = u
        return np.array([
            px + v * np.cos(th) * dt,
            py + v * np.sin(th) * dt,
            th + omega * dt,
            v + acc * dt,
        ])
    # double integrators: p' = p + v dt + u dt^2/2, v' = v + u dt
    d = model.n // 2
    p, v = x[:d], x[d:]
    return np.concatenate([p + v * dt + 0.5 * u * dt * dt, v + u * dt])


def step_jacobians(model: DynamicsModel, x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Analytic Jacobians (df/dx, df/du) of step."""
    x, u = _check_dims(model, x, u)
    dt = model.dt
    if model.kind is ModelKind.UNICYCLE_4D:
        _, _, th, v = x
        a = np.eye(4)
        a[0, 2] = -v * np.sin(th) * dt
        a[0, 3] = np.cos(th) * dt
        a[1, 2] = v * np.cos(th) * dt
        a[1, 3] = np.sin(th) * dt
        b = np.zeros((4, 2))
        b[2, 0] = dt
        b[3, 1] = dt
        return a, b
    d = model.n // 2
    a = np.eye(model.n)
    a[:d, d:] = dt * np.eye(d)
    b = np.vstack([0.5 * dt * dt * np.eye(d), dt * np.eye(d)])
    return a, b


def positions(model: DynamicsModel, x: np.ndarray) -> np.ndarray:
    """Constraint-space projection phi_sep(x) of a single state."""
    return np.asarray(x, dtype=float)[list(model.position_indices)]


def step_batch(model: DynamicsModel, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """step applied row-wise to (N, n) states and (N, n_i) controls."""
    dt = model.dt
    if model.kind is ModelKind.UNICYCLE_4D:
        th, v = x[:, 2], x[:, 3]
        return np.stack(
            [
                x[:, 0] + v * np.cos(th) * dt,
                x[:, 1] + v * np.sin(th) * dt,
                th + u[:, 0] * dt,
                v + u[:, 1] * dt,
            ],
            axis=1,
        )
    d = model.n // 2
    return np.hstack([x[:, :d] + x[:, d:] * dt + 0.5 * u * dt * dt, x[:, d:] + u * dt])


def step_jacobians_batch(model: DynamicsModel, x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(N, n, n) and (N, n, n_i) stacked Jacobians of step."""
    n_rows = x.shape[0]
    dt = model.dt
    if model.kind is ModelKind.UNICYCLE_4D:
        th, v = x[:, 2], x[:, 3]
        a = np.tile(np.eye(4), (n_rows, 1, 1))
        a[:, 0, 2] = -v * np.sin(th) * dt
        a[:, 0, 3] = np.cos(th) * dt
        a[:, 1, 2] = v * np.cos(th) * dt
        a[:, 1, 3] = np.sin(th) * dt
        b = np.zeros((n_rows, 4, 2))
        b[:, 2, 0] = dt
        b[:, 3, 1] = dt
        return a, b
    a1, b1 = step_jacobians(model, x[0], u[0])
    return np.tile(a1, (n_rows, 1, 1)), np.tile(b1, (n_rows, 1, 1))
