"""Centralized numeric tolerances.

Every space and checker receives a NumericPolicy instead of hard-coding
tolerances at call sites, so refinement studies can vary them coherently.
"""
from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerance record shared by all geometric operations.

    Attributes
    ----------
    abs_tol : float
        Absolute tolerance for exact (closed-form) backends.
    coord_tol : float
        Allowed constraint violation when constructing points
        (e.g. deviation from the sphere radius).
    arccos_slack : float
        arccos arguments are clamped to [-1, 1]; values outside the
        interval by more than this raise InternalConsistencyError
        instead of being clamped silently.
    coincide_tol : float
        Distances below this are treated as coincident points where a
        direction is required.
    projection_tol : float
        Tolerance for projection idempotence and convex-cone projections.
    gate_tie_tol : float
        Two gates whose path lengths differ by at most this are a tie.
    """

    abs_tol: float = 1e-9
    coord_tol: float = 1e-9
    arccos_slack: float = 1e-8
    coincide_tol: float = 1e-12
    projection_tol: float = 1e-12
    gate_tie_tol: float = 1e-9

    def scaled(self, factor: float) -> "NumericPolicy":
        """A policy with every tolerance multiplied by `factor`."""
        return replace(
            self,
            abs_tol=self.abs_tol * factor,
            coord_tol=self.coord_tol * factor,
            arccos_slack=self.arccos_slack * factor,
            coincide_tol=self.coincide_tol * factor,
            projection_tol=self.projection_tol * factor,
            gate_tie_tol=self.gate_tie_tol * factor,
        )


DEFAULT_POLICY = NumericPolicy()
