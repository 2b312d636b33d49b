"""Shadow-price attribution and one-to-one MV-CV pairing.

Each constrained CV's shadow price is decomposed into per-MV contributions
w_ij = c_u[i] * g_a_inv[i][j], whose column sums recover lambda_j. Columns
are sign-corrected so negative entries always mean "economically aligned
with the objective", then normalized by the magnitude of each column's most
negative entry, making the matrix dimensionless and marking every CV's
locally most effective MV with -1. Structural zeros become infinite
penalties and a minimum-cost assignment resolves the competition for shared
MVs into one pairing per MV and CV.

explain() chains the whole pipeline for one snapshot and bundles every
intermediate product into an ExplanationDocument, the wire object consumed
by the CLI, HTTP service and UI (docs/explanation-schema.md).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from . import active_set as aset
from . import engine
from .assignment import solve_min_cost_assignment
from .engine import ConstraintStatus, KktReport, LPSolution
from .errors import ComputeError, StageError, ZeroColumn
from .model import ControllerSnapshot

SCHEMA_VERSION = 1
ZERO_TOL = 1.0e-12
ASSIGN_MAX_K = 10_000


def lambda_epsilon(c_u: np.ndarray) -> float:
    """Threshold below which a net shadow price counts as numerically zero."""
    scale = float(np.max(np.abs(c_u))) if len(c_u) else 0.0
    return 1e-9 * max(1.0, scale)


@dataclass(frozen=True)
class ContributionMatrices:
    """w, its sign-corrected form, and the normalized dimensionless matrix.

    All are k x k with MV rows (mv_u order) and CV columns (cv_c order).
    sign_vector holds the per-column multipliers; anomalous_columns lists
    columns that had no negative entry (possible only at zero shadow price)
    and were normalized by max-abs instead.
    """

    w: np.ndarray
    w_corr: np.ndarray
    sign_vector: np.ndarray
    pi: np.ndarray | None = None
    anomalous_columns: tuple[int, ...] = ()

    @property
    def k(self) -> int:
        return self.w.shape[0]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "w": self.w.tolist(),
            "w_corr": self.w_corr.tolist(),
            "pi": None if self.pi is None else self.pi.tolist(),
            "sign_vector": self.sign_vector.tolist(),
            "anomalous_columns": list(self.anomalous_columns),
        }


@dataclass(frozen=True)
class PenaltyMatrix:
    """Normalized contributions with structural zeros mapped to +inf."""

    p: np.ndarray

    @property
    def k(self) -> int:
        return self.p.shape[0]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "p": [[None if math.isinf(v) else v for v in row] for row in self.p.tolist()]
        }


@dataclass(frozen=True)
class Pair:
    row: int              # position in mv_u
    col: int              # position in cv_c
    penalty: float        # original P entry (may be +inf on forbidden pairs)
    local_best: bool      # penalty equals its column minimum
    forbidden: bool       # the pair used a structurally-excluded cell


@dataclass(frozen=True)
class PairingAssignment:
    pairs: tuple[Pair, ...]
    total_penalty: float
    assignment_matrix: np.ndarray
    forbidden_used: bool

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "pairs": [
                {
                    "row": p.row,
                    "col": p.col,
                    "penalty": None if math.isinf(p.penalty) else p.penalty,
                    "local_best": p.local_best,
                    "forbidden": p.forbidden,
                }
                for p in self.pairs
            ],
            "total_penalty": None if math.isinf(self.total_penalty) else self.total_penalty,
            "assignment_matrix": self.assignment_matrix.astype(int).tolist(),
            "forbidden_used": self.forbidden_used,
        }


def contributions(active: aset.ActiveSet, cv_status: tuple[ConstraintStatus, ...]) -> ContributionMatrices:
    """Per-MV shadow-price contributions w = diag(c_u) . G_A^-1, sign-corrected.

    The column sign is -sgn(lambda_j); when the net dual is numerically zero
    the active bound side supplies the limit of that sign (-1 at a lower
    bound, +1 at an upper bound).
    """
    if active.g_a_inv is None:
        raise ComputeError("active set inverse missing; run invert_active first")
    k = active.k
    w = active.c_u[:, None] * active.g_a_inv if k else np.zeros((0, 0))
    eps = lambda_epsilon(active.c_u)
    signs = np.empty(k)
    for col, j in enumerate(active.cv_c):
        lam = active.lambda_active[col]
        if abs(lam) > eps:
            signs[col] = -math.copysign(1.0, lam)
        else:
            signs[col] = -1.0 if cv_status[j] == ConstraintStatus.AT_LOWER else 1.0
    w_corr = w * signs[None, :] if k else w
    return ContributionMatrices(w=w, w_corr=w_corr, sign_vector=signs)


def normalize(matrices: ContributionMatrices) -> ContributionMatrices:
    """Divide each column by |most negative entry|, marking the local best -1.

    Columns with no negative entry (zero shadow price only) are normalized
    by their max-abs entry and reported as anomalous; an all-zero column is
    an error because the CV would be unreachable from every free MV.
    """
    k = matrices.k
    pi = np.zeros((k, k))
    anomalous: list[int] = []
    for col in range(k):
        column = matrices.w_corr[:, col]
        col_min = float(column.min()) if k else 0.0
        if col_min < 0.0:
            pi[:, col] = column / abs(col_min)
            continue
        max_abs = float(np.max(np.abs(column))) if k else 0.0
        if max_abs <= ZERO_TOL:
            raise ZeroColumn(col)
        pi[:, col] = column / max_abs
        anomalous.append(col)
    return replace(matrices, pi=pi, anomalous_columns=tuple(anomalous))


def penalty_matrix(matrices: ContributionMatrices) -> PenaltyMatrix:
    """Copy pi, turning numerically-zero cells into infinite penalties."""
    if matrices.pi is None:
        raise ComputeError("pi missing; run normalize first")
    p = matrices.pi.copy()
    p[np.abs(p) <= ZERO_TOL] = np.inf
    return PenaltyMatrix(p=p)


def assign(penalty: PenaltyMatrix) -> PairingAssignment:
    """Resolve the pairing by minimum total penalty.

    Infinite cells enter the solver as big-M = 1e9 + k * max|finite|; if the
    optimum still uses one, the matching is structurally forced and the pair
    is flagged rather than rejected.
    """
    p = penalty.p
    k = penalty.k
    if k > ASSIGN_MAX_K:
        raise ComputeError(f"assignment limited to k <= {ASSIGN_MAX_K}, got {k}")
    if k == 0:
        return PairingAssignment(
            pairs=(), total_penalty=0.0, assignment_matrix=np.zeros((0, 0)), forbidden_used=False
        )
    finite = p[np.isfinite(p)]
    big_m = 1e9 + k * (float(np.max(np.abs(finite))) if finite.size else 0.0)
    solver_cost = np.where(np.isfinite(p), p, big_m)
    col_of_row = solve_min_cost_assignment(solver_cost)

    col_min = np.min(p, axis=0)
    pairs = []
    total = 0.0
    forbidden_used = False
    X = np.zeros((k, k))
    for row in range(k):
        col = int(col_of_row[row])
        X[row, col] = 1.0
        value = float(p[row, col])
        forbidden = math.isinf(value)
        forbidden_used |= forbidden
        total += value
        pairs.append(
            Pair(
                row=row,
                col=col,
                penalty=value,
                local_best=bool(value == col_min[col]),
                forbidden=forbidden,
            )
        )
    return PairingAssignment(
        pairs=tuple(pairs),
        total_penalty=float(total),
        assignment_matrix=X,
        forbidden_used=forbidden_used,
    )


@dataclass(frozen=True)
class Pairing:
    mv_id: str
    cv_id: str
    side: str  # HI | LO


@dataclass(frozen=True)
class ExplanationDocument:
    """Everything the pipeline produced for one snapshot, for display/audit."""

    snapshot: ControllerSnapshot
    solution: LPSolution
    kkt: KktReport
    active: aset.ActiveSet
    matrices: ContributionMatrices
    penalty: PenaltyMatrix
    assignment: PairingAssignment

    def pairings(self) -> tuple[Pairing, ...]:
        out = []
        for pair in self.assignment.pairs:
            mv = self.snapshot.mvs[self.active.mv_u[pair.row]]
            cv_idx = self.active.cv_c[pair.col]
            cv = self.snapshot.cvs[cv_idx]
            side = "HI" if self.solution.cv_status[cv_idx] == ConstraintStatus.AT_UPPER else "LO"
            out.append(Pairing(mv_id=mv.id, cv_id=cv.id, side=side))
        return tuple(out)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "timestamp": self.snapshot.timestamp,
            "mv_ids": list(self.snapshot.mv_ids),
            "cv_ids": list(self.snapshot.cv_ids),
            "solution": self.solution.to_json_dict(),
            "kkt": self.kkt.to_json_dict(),
            "active_set": self.active.to_json_dict(),
            "matrices": self.matrices.to_json_dict(),
            "penalty": self.penalty.to_json_dict(),
            "assignment": self.assignment.to_json_dict(),
            "pairings": [
                {"mv": p.mv_id, "cv": p.cv_id, "side": p.side} for p in self.pairings()
            ],
        }


def explain(snapshot: ControllerSnapshot) -> ExplanationDocument:
    """Run solve -> verify -> partition -> invert -> attribute -> assign.

    Errors raised by any stage are wrapped in StageError with the stage name
    so callers can report where the pipeline stopped.
    """

    def run(stage, fn):
        try:
            return fn()
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc

    solution = run("solve", lambda: engine.solve(snapshot))

    def check_kkt() -> KktReport:
        report = engine.kkt_residuals(snapshot, solution)
        if not report.passed:
            raise ComputeError(
                f"KKT verification failed: stationarity {report.stationarity_inf:.3e}, "
                f"complementary slackness {report.comp_slack_max:.3e}, "
                f"primal {report.primal_violation_max:.3e} vs tol {report.tolerance:.3e}"
            )
        return report

    kkt = run("kkt", check_kkt)
    active = run("partition", lambda: aset.partition(snapshot, solution))
    active = run("invert", lambda: aset.invert_active(active))
    run("shadow_prices", lambda: aset.analytic_shadow_prices(active))
    matrices = run("contributions", lambda: contributions(active, solution.cv_status))
    matrices = run("normalize", lambda: normalize(matrices))
    penalty = run("penalty", lambda: penalty_matrix(matrices))
    assignment = run("assign", lambda: assign(penalty))
    return ExplanationDocument(
        snapshot=snapshot,
        solution=solution,
        kkt=kkt,
        active=active,
        matrices=matrices,
        penalty=penalty,
        assignment=assignment,
    )
