"""Active constraint learning from locally-optimal demonstrations.

The package infers unknown state-space constraints by (1) synthesizing
locally-optimal demonstrations with a simulated expert, (2) extracting tight
states and constraint-gradient directions from the demonstrations' KKT
conditions, (3) fitting a Gaussian-process constraint representation with
derivative observations, and (4) actively querying start/goal states that
make the next demonstrations maximally informative.
"""

from gpacl.dynamics import DynamicsModel, ModelKind, make_model
from gpacl.constraints import ConstraintId, ConstraintSpace, GroundTruthConstraint, make_constraint
from gpacl.lp import LinearProgram, SolveReport, SolveStatus, solve_lp
from gpacl.nlp import NlpOptions, NlpProblem, solve_nlp
from gpacl.demonstrator import ForwardProblem, Multipliers, Trajectory, kkt_residual, solve_forward, validate_trajectory

__all__ = [
    "DynamicsModel",
    "ModelKind",
    "make_model",
    "ConstraintId",
    "ConstraintSpace",
    "GroundTruthConstraint",
    "make_constraint",
    "LinearProgram",
    "SolveReport",
    "SolveStatus",
    "solve_lp",
    "NlpOptions",
    "NlpProblem",
    "solve_nlp",
    "ForwardProblem",
    "Multipliers",
    "Trajectory",
    "kkt_residual",
    "solve_forward",
    "validate_trajectory",
]
