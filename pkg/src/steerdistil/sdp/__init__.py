"""Subpackage for block structured semidefinite programming.

A small self contained primal-dual interior point solver for the dense,
low dimensional SDPs of the robustness measures.
"""
from steerdistil.sdp.problem import (
    DEFAULT_SOLVER_OPTIONS,
    SDPProblem,
    SDPSolution,
    SolutionStatus,
    SolverOptions,
)
from steerdistil.sdp.solver import solve

__all__ = [
    "DEFAULT_SOLVER_OPTIONS",
    "SDPProblem",
    "SDPSolution",
    "SolutionStatus",
    "SolverOptions",
    "solve",
]
