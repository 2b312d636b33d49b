"""Active-set partition of the gain matrix and analytic shadow prices.

At a non-degenerate optimum the constrained CVs and the free MVs form a
square k x k system: the free MVs are the degrees of freedom holding those
CVs at their limits. Partitioning follows the solver basis, not bound
geometry, so degenerate solutions stay consistent with the reported duals.
Given-up CVs sit outside the square system: they no longer consume a
degree of freedom.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .engine import ConstraintStatus, LPSolution
from .errors import DualMismatch, NonSquareActiveSet, SingularActiveMatrix
from .model import ControllerSnapshot

COND_WARN_LIMIT = 1.0e8


@dataclass(frozen=True)
class ActiveSet:
    """Square active system: g_a rows follow cv_c order, columns mv_u order.

    g_a_inv (MVs as rows, CVs as columns) exposes the closed-loop routes the
    optimizer uses to hold each CV, including indirect ones absent from the
    open-loop gains.
    """

    mv_u: tuple[int, ...]
    mv_c: tuple[int, ...]
    cv_c: tuple[int, ...]
    cv_u: tuple[int, ...]
    g_a: np.ndarray
    c_u: np.ndarray
    lambda_active: np.ndarray
    g_a_inv: np.ndarray | None = None
    cond_estimate: float | None = None

    @property
    def k(self) -> int:
        return len(self.mv_u)

    @property
    def cond_warning(self) -> bool:
        return self.cond_estimate is not None and self.cond_estimate > COND_WARN_LIMIT

    def to_json_dict(self) -> dict:
        return {
            "mv_u": list(self.mv_u),
            "mv_c": list(self.mv_c),
            "cv_c": list(self.cv_c),
            "cv_u": list(self.cv_u),
            "k": self.k,
            "g_a": self.g_a.tolist(),
            "g_a_inv": None if self.g_a_inv is None else self.g_a_inv.tolist(),
            "c_u": self.c_u.tolist(),
            "lambda_active": self.lambda_active.tolist(),
            "cond_estimate": self.cond_estimate,
            "cond_warning": self.cond_warning,
        }


def partition(snapshot: ControllerSnapshot, solution: LPSolution) -> ActiveSet:
    """Split variables by constraint status into the four gain blocks.

    mv_u holds basic (free) MVs; everything else -- clamped, pinned, or a
    parked degree of freedom on a degenerate solution -- lands in mv_c.
    cv_c holds CVs at bounds that were not given up.
    """
    mv_u = [i for i in range(snapshot.n) if solution.mv_in_basis[i]]
    mv_c = [i for i in range(snapshot.n) if not solution.mv_in_basis[i]]
    cv_c = [j for j in range(snapshot.m) if solution.cv_status[j].at_bound]
    cv_u = [j for j in range(snapshot.m) if not solution.cv_status[j].at_bound]

    if len(mv_u) != len(cv_c):
        raise NonSquareActiveSet(len(mv_u), len(cv_c))

    G = snapshot.gains.entries
    g_a = G[np.ix_(cv_c, mv_u)].copy() if mv_u else np.zeros((0, 0))
    c_u = snapshot.costs[mv_u].copy() if mv_u else np.zeros(0)
    lam_a = solution.lam[cv_c].copy() if cv_c else np.zeros(0)
    return ActiveSet(
        mv_u=tuple(mv_u),
        mv_c=tuple(mv_c),
        cv_c=tuple(cv_c),
        cv_u=tuple(cv_u),
        g_a=g_a,
        c_u=c_u,
        lambda_active=lam_a,
    )


def invert_active(active: ActiveSet) -> ActiveSet:
    """LU-invert g_a with partial pivoting; 1-norm condition estimate.

    The returned inverse is verified: ||g_a . g_a_inv - I||_inf must stay
    within 1e-8 x cond_estimate or the matrix is reported singular.
    """
    k = active.k
    if k == 0:
        return replace(active, g_a_inv=np.zeros((0, 0)), cond_estimate=1.0)
    maxabs = float(np.max(np.abs(active.g_a)))
    if maxabs == 0.0:
        raise SingularActiveMatrix("all gains are zero")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # exact singularity handled below
            lu, piv = lu_factor(active.g_a)
    except ValueError as exc:
        raise SingularActiveMatrix(str(exc)) from exc
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) <= 1e-12 * maxabs:
        raise SingularActiveMatrix(f"pivot {np.min(pivots):.3e} below tolerance")

    inv = lu_solve((lu, piv), np.eye(k))
    cond = float(np.linalg.norm(active.g_a, 1) * np.linalg.norm(inv, 1))
    residual = float(np.max(np.abs(active.g_a @ inv - np.eye(k))))
    if residual > 1e-8 * cond:
        raise SingularActiveMatrix(f"inverse residual {residual:.3e} exceeds tolerance")
    # g_a_inv maps (CV row, MV col) gains to MV rows / CV columns.
    return replace(active, g_a_inv=inv, cond_estimate=cond)


def analytic_shadow_prices(active: ActiveSet) -> np.ndarray:
    """CV shadow prices from the inverse active gains: lambda' = c_u' G_A^-1.

    Must agree with the solver duals restricted to cv_c; disagreement means
    a degenerate basis or a solver bug and raises DualMismatch.
    """
    if active.g_a_inv is None:
        raise SingularActiveMatrix("inverse not computed; call invert_active first")
    lam = active.c_u @ active.g_a_inv
    scale = max(float(np.max(np.abs(lam))) if active.k else 0.0, 1e-12)
    diff = float(np.max(np.abs(lam - active.lambda_active))) if active.k else 0.0
    if diff > 1e-6 * scale:
        raise DualMismatch(
            f"analytic shadow prices deviate from solver duals by {diff:.3e} "
            f"(relative scale {scale:.3e})"
        )
    return lam
