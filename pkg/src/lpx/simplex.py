"""Dense bounded-variable primal simplex.

Solves   min c.z   s.t.  A z = 0,  lo <= z <= hi
with nonbasic variables resting at a bound, or "parked" at an interior
value (used for decision variables that start at zero move and for free
variables). A parked column may enter the basis moving in either direction
and never returns to parked state.

Determinism: Dantzig pricing (most negative rate), ties broken by lowest
column index; ratio-test ties broken by largest pivot magnitude, then
lowest column index. After `bland_after` consecutive zero-step pivots the
solver switches to Bland's rule (lowest eligible index) until it makes a
real step, which guarantees termination on degenerate problems.

The basis is refactorized each iteration (problems here are small and
dense; robustness and reproducibility over speed) and basic values are
recomputed from scratch, so there is no accumulated drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import SolverStall

BASIC = 0
AT_LO = 1
AT_HI = 2
PARKED = 3
FIXED = 4


@dataclass
class SimplexResult:
    z: np.ndarray          # final values, all columns
    basis: np.ndarray      # column index per row
    state: np.ndarray      # nonbasic state codes per column
    y: np.ndarray          # row duals for the true costs
    d: np.ndarray          # reduced costs for the true costs
    iterations: int
    objective: float
    unbounded_col: int | None = None

    @property
    def optimal(self) -> bool:
        return self.unbounded_col is None


def basis_duals(A: np.ndarray, basis: np.ndarray, costs: np.ndarray) -> np.ndarray:
    """Solve B^T y = c_B for an arbitrary cost vector at a given basis."""
    lu = lu_factor(A[:, basis])
    return lu_solve(lu, costs[basis], trans=1)


def solve_bounded_lp(
    A: np.ndarray,
    c: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    basis: np.ndarray,
    state: np.ndarray,
    z0: np.ndarray,
    *,
    dual_tol: float,
    step_tol: float,
    pivot_tol: float = 1e-10,
    bland_after: int = 50,
    max_iter: int = 50_000,
) -> SimplexResult:
    m, n_cols = A.shape
    z = z0.astype(float).copy()
    basis = basis.astype(int).copy()
    state = state.astype(np.int8).copy()
    state[basis] = BASIC

    nonbasic_mask = np.ones(n_cols, dtype=bool)
    nonbasic_mask[basis] = False

    stalled = 0
    bland = False
    y = np.zeros(m)
    d = c.copy()

    it = 0
    while True:
        if it > max_iter:
            raise SolverStall(f"simplex exceeded {max_iter} iterations")

        B = A[:, basis]
        lu = lu_factor(B)

        # Recompute basic values exactly from the nonbasic rest points.
        zn = np.where(nonbasic_mask, z, 0.0)
        rhs = -(A @ zn)
        z[basis] = lu_solve(lu, rhs)

        y = lu_solve(lu, c[basis], trans=1)
        d = c - A.T @ y

        # Noise floor for reduced costs grows with the dual magnitudes
        # (big-M bases); 1e-11 stays two decades under the big-M index
        # perturbation that settles give-up ties.
        tol = max(dual_tol, 1e-11 * (float(np.max(np.abs(y))) if m else 0.0))

        want_up = (state == AT_LO) & (d < -tol)
        want_dn = (state == AT_HI) & (d > tol)
        parked = state == PARKED
        want_up |= parked & (d < -tol)
        want_dn |= parked & (d > tol)
        eligible = want_up | want_dn
        if not eligible.any():
            break

        if bland:
            q = int(np.argmax(eligible))
        else:
            rate = np.where(eligible, np.abs(d), -np.inf)
            q = int(np.argmax(rate))
        sigma = 1.0 if want_up[q] else -1.0

        w = lu_solve(lu, A[:, q])

        # Ratio test over basic columns.
        delta = sigma * w
        zB = z[basis]
        t_basic = np.full(m, np.inf)
        pos = delta > pivot_tol
        neg = delta < -pivot_tol
        with np.errstate(invalid="ignore"):
            t_basic[pos] = (zB[pos] - lo[basis][pos]) / delta[pos]
            t_basic[neg] = (zB[neg] - hi[basis][neg]) / delta[neg]
        t_basic = np.maximum(t_basic, 0.0)  # drift guard

        t_min_basic = float(np.min(t_basic)) if m else np.inf
        t_own = (hi[q] - z[q]) if sigma > 0 else (z[q] - lo[q])

        if not np.isfinite(min(t_min_basic, t_own)):
            obj = float(c @ z)
            return SimplexResult(z, basis, state, y, d, it, obj, unbounded_col=q)

        it += 1
        if t_own <= t_min_basic:
            # Bound flip: the entering column hits its own opposite bound.
            t = t_own
            z[q] = hi[q] if sigma > 0 else lo[q]
            state[q] = AT_HI if sigma > 0 else AT_LO
            z[basis] = zB - t * delta
        else:
            t = t_min_basic
            cand = np.flatnonzero(t_basic <= t * (1.0 + 1e-12) + 1e-300)
            if bland:
                p = int(cand[np.argmin(basis[cand])])
            else:
                mags = np.abs(delta[cand])
                best = mags == mags.max()
                tied = cand[best]
                p = int(tied[np.argmin(basis[tied])])
            leaving = int(basis[p])
            z[basis] = zB - t * delta
            hit_lo = delta[p] > 0
            z[leaving] = lo[leaving] if hit_lo else hi[leaving]
            state[leaving] = AT_LO if hit_lo else AT_HI
            z[q] = z[q] + sigma * t
            state[q] = BASIC
            basis[p] = q
            nonbasic_mask[q] = False
            nonbasic_mask[leaving] = True

        if t <= step_tol:
            stalled += 1
            if stalled >= bland_after:
                bland = True
        else:
            stalled = 0
            bland = False

    obj = float(c @ z)
    return SimplexResult(z, basis, state, y, d, it, obj)
