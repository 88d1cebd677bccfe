"""Exact and heuristic solvers behind one entry point."""

from __future__ import annotations

from typing import Optional

from ..core import Instance
from ..evaluator import RoutingPlan
from .common import (
    FEASIBLE_BOUND,
    INFEASIBLE,
    LIMIT_REACHED,
    OPTIMAL,
    Kernel,
    SolveResult,
    lower_bound,
    relative_gap,
)
from .exact import BRUTE_FORCE_MAX, solve_brute_force, solve_exact
from .heuristic import AnnealingParams, anneal, construct_initial, solve_heuristic, two_opt_delta

SOLVERS = ("exact", "heuristic", "brute")


def solve(
    instance: Instance,
    solver: str = "exact",
    params: Optional[AnnealingParams] = None,
    max_nodes: Optional[int] = None,
    max_seconds: Optional[float] = None,
    initial: Optional[RoutingPlan] = None,
) -> SolveResult:
    if solver == "exact":
        return solve_exact(instance, max_nodes=max_nodes, max_seconds=max_seconds, initial=initial)
    if solver == "heuristic":
        return solve_heuristic(instance, params or AnnealingParams())
    if solver == "brute":
        return solve_brute_force(instance)
    raise ValueError(f"unknown solver {solver!r}; choose from {', '.join(SOLVERS)}")


__all__ = [
    "AnnealingParams", "BRUTE_FORCE_MAX", "FEASIBLE_BOUND", "INFEASIBLE", "Kernel", "LIMIT_REACHED", "OPTIMAL",
    "SOLVERS", "SolveResult", "anneal", "construct_initial", "lower_bound", "relative_gap", "solve",
    "solve_brute_force", "solve_exact", "solve_heuristic", "two_opt_delta",
]
