"""Pushing solutions forward along symmetry flows."""

from __future__ import annotations

from .flows import FlowStep, flow_point, flow_point_numeric, map_time_interval, point_map, reach_interval
from .grid import GridSpec, ResidualReport
from .solutions import SolutionDescriptor, Transformed

__all__ = [
    "FlowStep",
    "flow_point",
    "flow_point_numeric",
    "map_time_interval",
    "point_map",
    "reach_interval",
    "pushforward",
    "verify_transformed",
]


def pushforward(sol: SolutionDescriptor, step: FlowStep) -> Transformed:
    """Image of ``sol`` under ``exp(eps X)``.

    The new solution at ``(t, x)`` is the base value at the pulled-back point
    times the forward ``u``-multiplier.  Pushing a ``Transformed`` again
    appends to its flow list.  Raises ``DomainError`` if nothing of the base
    domain survives the flow.
    """
    if isinstance(sol, Transformed):
        return Transformed(sol.base, sol.steps + (step,))
    return Transformed(sol, (step,))


def verify_transformed(
    sol: SolutionDescriptor, step: FlowStep, grid: GridSpec, tol: float = 1e-6
) -> ResidualReport:
    """PDE residual report of ``pushforward(sol, step)`` on ``grid``."""
    from .verify import residual_report

    return residual_report(pushforward(sol, step), grid, tol)
