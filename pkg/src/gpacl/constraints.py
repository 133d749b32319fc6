"""Ground-truth unknown constraints and the constraint-space projection.

Only the demonstrator and the evaluator may touch these; the learner never
sees them. Each constraint is a max over M analytic components; the avoid set
is where the max is positive.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from gpacl.dynamics import DynamicsModel
from gpacl.errors import DegeneratePointError, InvalidArgumentError

_KINK_TOL = 1e-9


class ConstraintId(enum.Enum):
    G1 = "g1"
    G2 = "g2"
    G3 = "g3"
    G4 = "g4"
    G5 = "g5"
    G6 = "g6"


@dataclass(frozen=True)
class ConstraintSpace:
    """Coordinate projection from system states to constraint states."""

    n_c: int
    map_indices: tuple[int, ...]

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float)[list(self.map_indices)]

    def selection_matrix(self, n: int) -> np.ndarray:
        """Constant Jacobian of the projection: an n_c x n 0/1 matrix."""
        s = np.zeros((self.n_c, n))
        for row, idx in enumerate(self.map_indices):
            s[row, idx] = 1.0
        return s

    @staticmethod
    def for_model(model: DynamicsModel) -> "ConstraintSpace":
        return ConstraintSpace(model.n_c, model.position_indices)


# G2 lobes: identical quadratic forms, mirrored linear terms.
_G2_Q = np.array([[0.0868, 0.0243], [0.0243, 0.0868]])
_G2_q = [np.array([-0.8403, -0.7153]), np.array([0.8403, 0.7153])]
_G2_r = 1.7534

# G6 ellipsoids: centers and shape matrices, shared offset.
_G6_V = [np.zeros(3), np.array([5.0, 0.0, 5.0]), np.array([-5.0, 0.0, -5.0])]
_G6_W = [np.diag([2.0, 2.0, 1.0]), np.diag([1.0, 4.0, 4.0]), np.diag([1.0, 4.0, 4.0])]
_G6_R = 49.0

_DIMS = {
    ConstraintId.G1: 2,
    ConstraintId.G2: 2,
    ConstraintId.G3: 2,
    ConstraintId.G4: 2,
    ConstraintId.G5: 3,
    ConstraintId.G6: 3,
}

_DEFAULT_HALF_WIDTH = {2: 12.0, 3: 10.0}


@dataclass(frozen=True)
class GroundTruthConstraint:
    """Analytic avoid-set constraint; evaluate(kappa) > 0 means unsafe."""

    id: ConstraintId
    dim: int
    box_lo: tuple[float, ...]
    box_hi: tuple[float, ...]

    @property
    def n_components(self) -> int:
        return {ConstraintId.G2: 2, ConstraintId.G6: 3}.get(self.id, 1)

    def _check(self, kappa: np.ndarray) -> np.ndarray:
        kappa = np.asarray(kappa, dtype=float)
        if kappa.shape != (self.dim,):
            raise InvalidArgumentError(
                f"{self.id.value} expects constraint states of dimension {self.dim}, got shape {kappa.shape}"
            )
        return kappa

    def components(self, kappa: np.ndarray) -> np.ndarray:
        """Values of the M scalar components; evaluate() is their max."""
        kappa = self._check(kappa)
        cid = self.id
        if cid is ConstraintId.G1:
            s1 = 1.732 * kappa[0] + kappa[1]
            s2 = kappa[0] - 1.732 * kappa[1]
            return np.array([-0.02 * abs(s1) ** 1.4 - 0.042 * abs(s2) ** 1.4 + 1.0])
        if cid is ConstraintId.G2:
            vals = [kappa @ _G2_Q @ kappa + q @ kappa + _G2_r for q in _G2_q]
            return -np.array(vals)
        if cid is ConstraintId.G3:
            s = 0.25 * kappa[0] ** 2 + kappa[1] ** 2 - 25.0
            return np.array([-(s**2) - 50.0 * kappa[0] ** 2 + 687.5])
        if cid is ConstraintId.G4:
            return np.array([-max(abs(kappa[0]) / 5.0, abs(kappa[1]) / 4.0) + 1.0])
        if cid is ConstraintId.G5:
            s = kappa[0] ** 2 / 9.0 + kappa[1] ** 2 / 9.0 + kappa[2] ** 2 - 6.0
            return np.array([-(s**2) - 16.0 / 3.0 * (kappa[0] ** 2 + kappa[1] ** 2) + 39.6])
        if cid is ConstraintId.G6:
            d = [kappa - v for v in _G6_V]
            return np.array([-(di @ w @ di) + _G6_R for di, w in zip(d, _G6_W)])
        raise InvalidArgumentError(f"unknown constraint id {cid}")

    def evaluate(self, kappa: np.ndarray) -> float:
        return float(np.max(self.components(kappa)))

    def _component_gradient(self, kappa: np.ndarray, idx: int) -> np.ndarray:
        cid = self.id
        if cid is ConstraintId.G1:
            s1 = 1.732 * kappa[0] + kappa[1]
            s2 = kappa[0] - 1.732 * kappa[1]
            # d/ds |s|^1.4 = 1.4 |s|^0.4 sign(s); continuous through s = 0
            d1 = -0.02 * 1.4 * abs(s1) ** 0.4 * np.sign(s1)
            d2 = -0.042 * 1.4 * abs(s2) ** 0.4 * np.sign(s2)
            return np.array([d1 * 1.732 + d2, d1 - d2 * 1.732])
        if cid is ConstraintId.G2:
            return -(2.0 * _G2_Q @ kappa + _G2_q[idx])
        if cid is ConstraintId.G3:
            s = 0.25 * kappa[0] ** 2 + kappa[1] ** 2 - 25.0
            return np.array([-s * kappa[0] - 100.0 * kappa[0], -4.0 * s * kappa[1]])
        if cid is ConstraintId.G4:
            a, b = abs(kappa[0]) / 5.0, abs(kappa[1]) / 4.0
            if a >= b:
                return np.array([-np.sign(kappa[0]) / 5.0, 0.0])
            return np.array([0.0, -np.sign(kappa[1]) / 4.0])
        if cid is ConstraintId.G5:
            s = kappa[0] ** 2 / 9.0 + kappa[1] ** 2 / 9.0 + kappa[2] ** 2 - 6.0
            return np.array([
                -4.0 * s * kappa[0] / 9.0 - 32.0 / 3.0 * kappa[0],
                -4.0 * s * kappa[1] / 9.0 - 32.0 / 3.0 * kappa[1],
                -4.0 * s * kappa[2],
            ])
        if cid is ConstraintId.G6:
            return -2.0 * _G6_W[idx] @ (kappa - _G6_V[idx])
        raise InvalidArgumentError(f"unknown constraint id {cid}")

    def is_kink(self, kappa: np.ndarray, tol: float = _KINK_TOL) -> bool:
        """True within tol of a component switch or an active abs kink."""
        kappa = self._check(kappa)
        vals = self.components(kappa)
        if len(vals) > 1:
            top = np.sort(vals)[-2:]
            if top[1] - top[0] <= tol:
                return True
        if self.id is ConstraintId.G4:
            a, b = abs(kappa[0]) / 5.0, abs(kappa[1]) / 4.0
            if abs(a - b) <= tol:
                return True
            arg = kappa[0] if a >= b else kappa[1]
            if abs(arg) <= tol:
                return True
        return False

    def gradient(self, kappa: np.ndarray) -> np.ndarray:
        """Analytic gradient of evaluate; raises at non-differentiable points."""
        kappa = self._check(kappa)
        if self.is_kink(kappa):
            raise DegeneratePointError(f"{self.id.value} is not differentiable at {kappa}")
        return self.subgradient(kappa)

    def subgradient(self, kappa: np.ndarray) -> np.ndarray:
        """Gradient of the max-attaining component, lowest index on ties."""
        kappa = self._check(kappa)
        idx = int(np.argmax(self.components(kappa)))
        return self._component_gradient(kappa, idx)

    def _check_batch(self, kappas: np.ndarray) -> np.ndarray:
        kappas = np.asarray(kappas, dtype=float)
        if kappas.ndim != 2 or kappas.shape[1] != self.dim:
            raise InvalidArgumentError(f"expected (N, {self.dim}) constraint states, got {kappas.shape}")
        return kappas

    def components_batch(self, kappas: np.ndarray) -> np.ndarray:
        """(N, M) component values for a batch of constraint states."""
        k = self._check_batch(kappas)
        cid = self.id
        if cid is ConstraintId.G1:
            s1 = 1.732 * k[:, 0] + k[:, 1]
            s2 = k[:, 0] - 1.732 * k[:, 1]
            return (-0.02 * np.abs(s1) ** 1.4 - 0.042 * np.abs(s2) ** 1.4 + 1.0)[:, None]
        if cid is ConstraintId.G2:
            quad = np.einsum("ni,ij,nj->n", k, _G2_Q, k)
            return -np.stack([quad + k @ q + _G2_r for q in _G2_q], axis=1)
        if cid is ConstraintId.G3:
            s = 0.25 * k[:, 0] ** 2 + k[:, 1] ** 2 - 25.0
            return (-(s**2) - 50.0 * k[:, 0] ** 2 + 687.5)[:, None]
        if cid is ConstraintId.G4:
            return (-np.maximum(np.abs(k[:, 0]) / 5.0, np.abs(k[:, 1]) / 4.0) + 1.0)[:, None]
        if cid is ConstraintId.G5:
            s = k[:, 0] ** 2 / 9.0 + k[:, 1] ** 2 / 9.0 + k[:, 2] ** 2 - 6.0
            return (-(s**2) - 16.0 / 3.0 * (k[:, 0] ** 2 + k[:, 1] ** 2) + 39.6)[:, None]
        if cid is ConstraintId.G6:
            return np.stack(
                [-np.einsum("ni,ij,nj->n", k - v, w, k - v) + _G6_R for v, w in zip(_G6_V, _G6_W)],
                axis=1,
            )
        raise InvalidArgumentError(f"unknown constraint id {cid}")

    def evaluate_batch(self, kappas: np.ndarray) -> np.ndarray:
        return self.components_batch(kappas).max(axis=1)

    def subgradient_batch(self, kappas: np.ndarray) -> np.ndarray:
        """(N, dim) gradients of the max-attaining component per row."""
        k = self._check_batch(kappas)
        cid = self.id
        if cid is ConstraintId.G1:
            s1 = 1.732 * k[:, 0] + k[:, 1]
            s2 = k[:, 0] - 1.732 * k[:, 1]
            d1 = -0.02 * 1.4 * np.abs(s1) ** 0.4 * np.sign(s1)
            d2 = -0.042 * 1.4 * np.abs(s2) ** 0.4 * np.sign(s2)
            return np.stack([d1 * 1.732 + d2, d1 - d2 * 1.732], axis=1)
        if cid is ConstraintId.G3:
            s = 0.25 * k[:, 0] ** 2 + k[:, 1] ** 2 - 25.0
            return np.stack([-s * k[:, 0] - 100.0 * k[:, 0], -4.0 * s * k[:, 1]], axis=1)
        if cid is ConstraintId.G4:
            a = np.abs(k[:, 0]) / 5.0
            b = np.abs(k[:, 1]) / 4.0
            gx = np.where(a >= b, -np.sign(k[:, 0]) / 5.0, 0.0)
            gy = np.where(a >= b, 0.0, -np.sign(k[:, 1]) / 4.0)
            return np.stack([gx, gy], axis=1)
        if cid is ConstraintId.G5:
            s = k[:, 0] ** 2 / 9.0 + k[:, 1] ** 2 / 9.0 + k[:, 2] ** 2 - 6.0
            return np.stack(
                [
                    -4.0 * s * k[:, 0] / 9.0 - 32.0 / 3.0 * k[:, 0],
                    -4.0 * s * k[:, 1] / 9.0 - 32.0 / 3.0 * k[:, 1],
                    -4.0 * s * k[:, 2],
                ],
                axis=1,
            )
        if cid is ConstraintId.G2:
            idx = np.argmax(self.components_batch(k), axis=1)
            base = -(2.0 * k @ _G2_Q)
            return base - np.array(_G2_q)[idx]
        if cid is ConstraintId.G6:
            idx = np.argmax(self.components_batch(k), axis=1)
            out = np.zeros_like(k)
            for i, (v, w) in enumerate(zip(_G6_V, _G6_W)):
                mask = idx == i
                if mask.any():
                    out[mask] = -2.0 * (k[mask] - v) @ w
            return out
        raise InvalidArgumentError(f"unknown constraint id {cid}")


def make_constraint(cid: ConstraintId | str, half_width: float | None = None) -> GroundTruthConstraint:
    """Construct a ground-truth constraint with its default domain box."""
    if isinstance(cid, str):
        cid = ConstraintId(cid.lower())
    dim = _DIMS[cid]
    hw = _DEFAULT_HALF_WIDTH[dim] if half_width is None else float(half_width)
    return GroundTruthConstraint(cid, dim, (-hw,) * dim, (hw,) * dim)


def evaluate(c: GroundTruthConstraint, kappa: np.ndarray) -> float:
    return c.evaluate(kappa)


def gradient(c: GroundTruthConstraint, kappa: np.ndarray) -> np.ndarray:
    return c.gradient(kappa)
