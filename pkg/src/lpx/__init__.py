"""Steady-state LP diagnostics for LP-MPC controllers.

Solves the target LP of one control interval, attributes each constrained
CV's shadow price to the free MVs enforcing it, and resolves one-to-one
MV-CV pairings -- for single snapshots, what-if perturbations and long
historical runs.
"""

__version__ = "0.1.0"

from .active_set import ActiveSet, analytic_shadow_prices, invert_active, partition
from .attribution import (
    ContributionMatrices,
    ExplanationDocument,
    PairingAssignment,
    PenaltyMatrix,
    assign,
    contributions,
    explain,
    normalize,
    penalty_matrix,
)
from .engine import (
    ConstraintStatus,
    KktReport,
    LPSolution,
    enumerate_vertices,
    kkt_residuals,
    solve,
)
from .history import (
    HistoryReport,
    IntervalRecord,
    aggregate,
    overlay_live,
    run_history,
)
from .model import (
    Bounds,
    ControllerSnapshot,
    GainMatrix,
    VariableMeta,
    iter_snapshots,
    load_snapshot,
    validate_snapshot,
)
from .sensitivity import SweepResult, delta_p, sweep_cost_ratio

__all__ = [
    "ActiveSet",
    "Bounds",
    "ConstraintStatus",
    "ContributionMatrices",
    "ControllerSnapshot",
    "ExplanationDocument",
    "GainMatrix",
    "HistoryReport",
    "IntervalRecord",
    "KktReport",
    "LPSolution",
    "PairingAssignment",
    "PenaltyMatrix",
    "SweepResult",
    "VariableMeta",
    "aggregate",
    "analytic_shadow_prices",
    "assign",
    "contributions",
    "delta_p",
    "enumerate_vertices",
    "explain",
    "invert_active",
    "iter_snapshots",
    "kkt_residuals",
    "load_snapshot",
    "normalize",
    "overlay_live",
    "partition",
    "penalty_matrix",
    "run_history",
    "solve",
    "sweep_cost_ratio",
    "validate_snapshot",
]
