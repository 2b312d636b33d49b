"""Steady-state target LP: solve, verify KKT conditions, enumerate vertices.

The LP minimizes c.dMV subject to four inequality blocks -- CV lower/upper
and MV lower/upper limits on the incremental moves. MV limits are hard; CV
limits are soft: every CV bound carries an elastic slack penalized by a
rank-weighted big-M, so an infeasible problem gives up its least important
CVs instead of failing.

Internally the problem is equilibrated with power-of-two row/column scales
(exact in floating point) and solved by the bounded-variable simplex in
`simplex.py`. Reported shadow prices for given-up CVs are zero: the duals
are re-derived at the final basis with basic elastic costs removed, which
is the dual solution of the minimally relaxed problem at the same vertex.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import simplex
from .errors import NoInServiceMV, TooManyVariables, Unbounded
from .model import ControllerSnapshot

BIG_M_BASE = 1.0e6
KKT_TOL_FACTOR = 1.0e-8
ENUM_MAX_MVS = 12


class ConstraintStatus(str, Enum):
    FREE_WITHIN = "FreeWithin"
    AT_LOWER = "AtLower"
    AT_UPPER = "AtUpper"
    GIVEN_UP_LOWER = "GivenUpLower"
    GIVEN_UP_UPPER = "GivenUpUpper"
    PINNED = "Pinned"

    @property
    def at_bound(self) -> bool:
        return self in (ConstraintStatus.AT_LOWER, ConstraintStatus.AT_UPPER)

    @property
    def given_up(self) -> bool:
        return self in (ConstraintStatus.GIVEN_UP_LOWER, ConstraintStatus.GIVEN_UP_UPPER)


@dataclass(frozen=True)
class LPSolution:
    """Optimal basic solution with net signed shadow prices.

    Sign convention: lambda_j > 0 means CV j sits at its lower bound,
    lambda_j < 0 at its upper bound (same for mu on MVs). Given-up CVs
    report lambda = 0; pinned MVs absorb whatever mu stationarity needs.
    mv_in_basis records the simplex basis so downstream partitioning can
    follow the basis rather than bound geometry on degenerate solutions.
    """

    delta_mv: np.ndarray
    objective: float
    lam: np.ndarray
    mu: np.ndarray
    mv_status: tuple[ConstraintStatus, ...]
    cv_status: tuple[ConstraintStatus, ...]
    infeasible_cvs: tuple[int, ...]
    iterations: int
    degenerate: bool
    mv_in_basis: tuple[bool, ...]

    @property
    def delta_cv(self) -> np.ndarray | None:
        return None  # filled per-call via snapshot gains; kept off the wire object

    def to_json_dict(self) -> dict:
        return {
            "delta_mv": self.delta_mv.tolist(),
            "objective": self.objective,
            "lambda": self.lam.tolist(),
            "mu": self.mu.tolist(),
            "mv_status": [s.value for s in self.mv_status],
            "cv_status": [s.value for s in self.cv_status],
            "infeasible_cvs": list(self.infeasible_cvs),
            "iterations": self.iterations,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class KktReport:
    stationarity: np.ndarray
    stationarity_inf: float
    comp_slack_max: float
    primal_violation_max: float
    givenup_violation_max: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return (
            self.stationarity_inf <= self.tolerance
            and self.comp_slack_max <= self.tolerance
            and self.primal_violation_max <= self.tolerance
        )

    def to_json_dict(self) -> dict:
        return {
            "stationarity_inf": self.stationarity_inf,
            "comp_slack_max": self.comp_slack_max,
            "primal_violation_max": self.primal_violation_max,
            "givenup_violation_max": self.givenup_violation_max,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _pow2_scale(values: np.ndarray) -> np.ndarray:
    """Per-entry power-of-two scale ~ max-abs, 1.0 where the max is zero."""
    out = np.ones(len(values))
    for i, v in enumerate(values):
        if v > 0.0 and math.isfinite(v):
            out[i] = 2.0 ** math.frexp(v)[1]
    return out


@dataclass
class _Assembled:
    """Scaled LP data plus the bookkeeping needed to interpret the result."""

    A: np.ndarray
    c: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    basis: np.ndarray
    state: np.ndarray
    z0: np.ndarray
    row_scale: np.ndarray   # rho: CV row divisors
    col_scale: np.ndarray   # gamma: MV column multipliers on x
    n: int
    m: int
    col_s: np.ndarray       # s column index per CV row
    col_em: np.ndarray      # lower-side elastic column per CV row
    col_ep: np.ndarray      # upper-side elastic column per CV row
    pinned: np.ndarray      # bool per MV: fixed column (OOS or lower == upper)
    cost_scale: float


def _assemble(snapshot: ControllerSnapshot) -> _Assembled:
    G = snapshot.gains.entries
    m, n = G.shape

    rho = _pow2_scale(np.max(np.abs(G), axis=1))
    G1 = G / rho[:, None]
    gamma = _pow2_scale(np.max(np.abs(G1), axis=0))
    Gs = G1 / gamma[None, :]

    x_lo = snapshot.delta_mv_lo * gamma
    x_hi = snapshot.delta_mv_hi * gamma
    s_lo = snapshot.delta_cv_lo / rho
    s_hi = snapshot.delta_cv_hi / rho
    cs = snapshot.costs / gamma

    cost_scale = max(1.0, float(np.max(np.abs(cs))) if n else 1.0)
    ranks = snapshot.cv_rank.astype(float)
    max_rank = float(ranks.max()) if m else 1.0
    big_m = BIG_M_BASE * (10.0 ** (max_rank - ranks)) * cost_scale
    # Exact same-rank give-up ties resolve toward the higher CV index: make
    # its violation infinitesimally cheaper (way below any rank spacing).
    big_m = big_m * (1.0 - 1e-9 * (np.arange(m) + 1))

    n_cols = n + 3 * m
    A = np.zeros((m, n_cols))
    A[:, :n] = Gs
    col_s = np.arange(n, n + m)
    A[np.arange(m), col_s] = -1.0
    # Elastic columns ordered by descending CV index so the solver's
    # lowest-column-index tie-break prefers giving up higher-index CVs.
    col_em = np.array([n + m + (m - 1 - j) for j in range(m)])
    col_ep = np.array([n + 2 * m + (m - 1 - j) for j in range(m)])
    A[np.arange(m), col_em] = 1.0
    A[np.arange(m), col_ep] = -1.0

    lo = np.concatenate([x_lo, s_lo, np.zeros(2 * m)])
    hi = np.concatenate([x_hi, s_hi, np.full(2 * m, np.inf)])
    c = np.zeros(n_cols)
    c[:n] = cs
    c[col_em] = big_m
    c[col_ep] = big_m

    pinned = x_lo == x_hi
    state = np.full(n_cols, simplex.AT_LO, dtype=np.int8)
    z0 = np.zeros(n_cols)
    for i in range(n):
        if pinned[i]:
            state[i] = simplex.FIXED
            z0[i] = x_lo[i]
        else:
            v = min(max(0.0, x_lo[i]), x_hi[i])
            z0[i] = v
            if v == x_lo[i]:
                state[i] = simplex.AT_LO
            elif v == x_hi[i]:
                state[i] = simplex.AT_HI
            else:
                state[i] = simplex.PARKED

    # Initial basis: one column per row, feasible by construction. Rows whose
    # starting activity violates a CV bound begin given-up via their elastic.
    basis = np.empty(m, dtype=int)
    activity = Gs @ z0[:n]
    for j in range(m):
        if activity[j] < s_lo[j]:
            z0[col_s[j]] = s_lo[j]
            state[col_s[j]] = simplex.AT_LO
            basis[j] = col_em[j]
        elif activity[j] > s_hi[j]:
            z0[col_s[j]] = s_hi[j]
            state[col_s[j]] = simplex.AT_HI
            basis[j] = col_ep[j]
        else:
            basis[j] = col_s[j]

    return _Assembled(
        A=A, c=c, lo=lo, hi=hi, basis=basis, state=state, z0=z0,
        row_scale=rho, col_scale=gamma, n=n, m=m,
        col_s=col_s, col_em=col_em, col_ep=col_ep,
        pinned=pinned, cost_scale=cost_scale,
    )


def solve(snapshot: ControllerSnapshot) -> LPSolution:
    """Solve the snapshot's steady-state LP and report the optimal vertex."""
    if not snapshot.mv_in_service().any():
        raise NoInServiceMV()

    asm = _assemble(snapshot)
    n, m = asm.n, asm.m
    dual_tol = 1e-9 * asm.cost_scale
    finite = asm.hi[np.isfinite(asm.hi)]
    span = max(
        float(np.max(np.abs(finite))) if finite.size else 1.0,
        float(np.max(np.abs(asm.lo[np.isfinite(asm.lo)]))) if np.isfinite(asm.lo).any() else 1.0,
        1.0,
    )
    step_tol = 1e-11 * span

    res = simplex.solve_bounded_lp(
        asm.A, asm.c, asm.lo, asm.hi, asm.basis, asm.state, asm.z0,
        dual_tol=dual_tol, step_tol=step_tol,
    )
    if not res.optimal:
        q = res.unbounded_col
        if q is not None and q < n:
            mv_idx = int(q)
        else:
            # Blame the free MV moving fastest along the unbounded ray.
            in_basis = [int(b) for b in res.basis if b < n]
            mv_idx = int(in_basis[0]) if in_basis else -1
        raise Unbounded(mv_idx)

    z, state, basis = res.z, res.state, res.basis
    basic_mask = np.zeros(asm.A.shape[1], dtype=bool)
    basic_mask[basis] = True

    # Clean duals: zero out big-M costs on basic elastic columns, which is
    # exactly the dual solution with given-up rows carrying zero price.
    c_clean = asm.c.copy()
    for j in range(m):
        for col in (asm.col_em[j], asm.col_ep[j]):
            if basic_mask[col]:
                c_clean[col] = 0.0
    y_clean = simplex.basis_duals(asm.A, basis, c_clean)
    d_clean = c_clean - asm.A.T @ y_clean

    # Zero duals are structural, not numerical: a basic slack or elastic
    # forces its row's clean dual to exactly zero, a basic or parked column
    # has zero reduced cost. Snap them so "unconstrained means zero price"
    # holds exactly.
    free_row = basic_mask[asm.col_s] | basic_mask[asm.col_em] | basic_mask[asm.col_ep]
    y_clean[free_row] = 0.0
    free_col = basic_mask[:n] | (state[:n] == simplex.PARKED)

    lam = y_clean / asm.row_scale
    mu = np.where(free_col, 0.0, d_clean[:n]) * asm.col_scale
    delta_mv = z[:n] / asm.col_scale
    objective = float(snapshot.costs @ delta_mv)

    eps_l = 1e-9 * max(1.0, float(np.max(np.abs(snapshot.costs))))
    mv_status: list[ConstraintStatus] = []
    for i, meta in enumerate(snapshot.mvs):
        if not meta.in_service or asm.pinned[i]:
            mv_status.append(ConstraintStatus.PINNED)
        elif basic_mask[i] or state[i] == simplex.PARKED:
            mv_status.append(ConstraintStatus.FREE_WITHIN)
        elif state[i] == simplex.AT_LO:
            mv_status.append(ConstraintStatus.AT_LOWER)
        else:
            mv_status.append(ConstraintStatus.AT_UPPER)

    cv_status: list[ConstraintStatus] = []
    infeasible: list[int] = []
    for j in range(m):
        if basic_mask[asm.col_em[j]]:
            cv_status.append(ConstraintStatus.GIVEN_UP_LOWER)
            infeasible.append(j)
        elif basic_mask[asm.col_ep[j]]:
            cv_status.append(ConstraintStatus.GIVEN_UP_UPPER)
            infeasible.append(j)
        elif basic_mask[asm.col_s[j]]:
            cv_status.append(ConstraintStatus.FREE_WITHIN)
        elif asm.lo[asm.col_s[j]] == asm.hi[asm.col_s[j]]:
            # Pinned CV: both bounds coincide, let the dual sign pick the side.
            if lam[j] > eps_l:
                cv_status.append(ConstraintStatus.AT_LOWER)
            elif lam[j] < -eps_l:
                cv_status.append(ConstraintStatus.AT_UPPER)
            else:
                cv_status.append(
                    ConstraintStatus.AT_LOWER
                    if state[asm.col_s[j]] == simplex.AT_LO
                    else ConstraintStatus.AT_UPPER
                )
        elif state[asm.col_s[j]] == simplex.AT_LO:
            cv_status.append(ConstraintStatus.AT_LOWER)
        else:
            cv_status.append(ConstraintStatus.AT_UPPER)

    # Degeneracy: a basic value at a bound, or a nonbasic column priced at
    # zero (parked columns left at optimum are dual-degenerate by definition).
    degenerate = False
    zB = z[basis]
    loB, hiB = asm.lo[basis], asm.hi[basis]
    with np.errstate(invalid="ignore"):
        near_lo = np.isfinite(loB) & (np.abs(zB - loB) <= 1e-9 * (1.0 + np.abs(loB)))
        near_hi = np.isfinite(hiB) & (np.abs(zB - hiB) <= 1e-9 * (1.0 + np.abs(hiB)))
    if bool(np.any(near_lo | near_hi)):
        degenerate = True
    nb = ~basic_mask
    nb_live = nb & (res.state != simplex.FIXED)
    tol_d = max(dual_tol, 1e-11 * (float(np.max(np.abs(res.y))) if m else 0.0))
    if bool(np.any(nb_live & (np.abs(res.d) <= tol_d))):
        degenerate = True

    return LPSolution(
        delta_mv=delta_mv,
        objective=objective,
        lam=lam,
        mu=mu,
        mv_status=tuple(mv_status),
        cv_status=tuple(cv_status),
        infeasible_cvs=tuple(infeasible),
        iterations=res.iterations,
        degenerate=degenerate,
        mv_in_basis=tuple(bool(basic_mask[i]) for i in range(n)),
    )


def kkt_residuals(snapshot: ControllerSnapshot, solution: LPSolution) -> KktReport:
    """Check Eq.-level optimality: stationarity c - G'lambda - mu = 0, the
    worst complementary-slackness product, and primal feasibility (given-up
    CV sides excluded from feasibility, reported as their own magnitude)."""
    G = snapshot.gains.entries
    c = snapshot.costs
    lam, mu = solution.lam, solution.mu
    delta = solution.delta_mv

    stationarity = c - G.T @ lam - mu
    stat_inf = float(np.max(np.abs(stationarity))) if len(c) else 0.0

    # Complementary slackness per inequality: the multiplier pairs with the
    # slack of the side the solution reports active (a nonzero dual on a
    # variable strictly inside its limits is what this must catch).
    dcv = G @ delta

    def slack_gap(value: float, lo: float, hi: float, status: ConstraintStatus) -> float:
        if status == ConstraintStatus.AT_LOWER or status == ConstraintStatus.GIVEN_UP_LOWER:
            return abs(value - lo) if math.isfinite(lo) else math.inf
        if status == ConstraintStatus.AT_UPPER or status == ConstraintStatus.GIVEN_UP_UPPER:
            return abs(hi - value) if math.isfinite(hi) else math.inf
        if status == ConstraintStatus.PINNED:
            return 0.0
        gaps = [abs(value - b) for b in (lo, hi) if math.isfinite(b)]
        return min(gaps) if gaps else math.inf

    comp = 0.0
    for j in range(snapshot.m):
        gap = slack_gap(dcv[j], snapshot.delta_cv_lo[j], snapshot.delta_cv_hi[j],
                        solution.cv_status[j])
        if lam[j] != 0.0:
            comp = max(comp, abs(lam[j]) * gap)
    for i in range(snapshot.n):
        gap = slack_gap(delta[i], snapshot.delta_mv_lo[i], snapshot.delta_mv_hi[i],
                        solution.mv_status[i])
        if mu[i] != 0.0:
            comp = max(comp, abs(mu[i]) * gap)

    primal = 0.0
    givenup = 0.0
    for i in range(snapshot.n):
        lo, hi = snapshot.delta_mv_lo[i], snapshot.delta_mv_hi[i]
        if math.isfinite(lo):
            primal = max(primal, lo - delta[i])
        if math.isfinite(hi):
            primal = max(primal, delta[i] - hi)
    for j in range(snapshot.m):
        lo, hi = snapshot.delta_cv_lo[j], snapshot.delta_cv_hi[j]
        st = solution.cv_status[j]
        if math.isfinite(lo):
            v = lo - dcv[j]
            if st == ConstraintStatus.GIVEN_UP_LOWER:
                givenup = max(givenup, v)
            else:
                primal = max(primal, v)
        if math.isfinite(hi):
            v = dcv[j] - hi
            if st == ConstraintStatus.GIVEN_UP_UPPER:
                givenup = max(givenup, v)
            else:
                primal = max(primal, v)

    tol = KKT_TOL_FACTOR * max(1.0, float(np.max(np.abs(c))) if len(c) else 1.0)
    return KktReport(
        stationarity=stationarity,
        stationarity_inf=stat_inf,
        comp_slack_max=comp,
        primal_violation_max=max(primal, 0.0),
        givenup_violation_max=max(givenup, 0.0),
        tolerance=tol,
    )


@dataclass(frozen=True)
class Vertex:
    active: frozenset[tuple[str, int, str]]   # ("CV"|"MV", index, "L"|"U")
    delta_mv: np.ndarray
    objective: float
    feasible: bool


def enumerate_vertices(snapshot: ControllerSnapshot) -> list[Vertex]:
    """Brute-force candidate vertices: every invertible choice of n active
    constraints, feasibility-checked against the rest (1e-9 relative)."""
    G = snapshot.gains.entries
    m, n = G.shape
    free = [i for i in range(n) if snapshot.delta_mv_lo[i] != snapshot.delta_mv_hi[i]]
    if len(free) > ENUM_MAX_MVS:
        raise TooManyVariables(len(free), ENUM_MAX_MVS)
    pinned = [i for i in range(n) if i not in free]
    v_pin = snapshot.delta_mv_lo[pinned] if pinned else np.zeros(0)
    base_obj = float(snapshot.costs[pinned] @ v_pin) if pinned else 0.0
    offset = G[:, pinned] @ v_pin if pinned else np.zeros(m)

    rows: list[tuple[tuple[str, int, str], np.ndarray, float]] = []
    for j in range(m):
        if not snapshot.cvs[j].in_service:
            continue
        if math.isfinite(snapshot.delta_cv_lo[j]):
            rows.append((("CV", j, "L"), G[j, free], snapshot.delta_cv_lo[j] - offset[j]))
        if math.isfinite(snapshot.delta_cv_hi[j]):
            rows.append((("CV", j, "U"), G[j, free], snapshot.delta_cv_hi[j] - offset[j]))
    for pos, i in enumerate(free):
        unit = np.zeros(len(free))
        unit[pos] = 1.0
        if math.isfinite(snapshot.delta_mv_lo[i]):
            rows.append((("MV", i, "L"), unit, snapshot.delta_mv_lo[i]))
        if math.isfinite(snapshot.delta_mv_hi[i]):
            rows.append((("MV", i, "U"), unit, snapshot.delta_mv_hi[i]))

    k = len(free)
    out: list[Vertex] = []
    if k == 0:
        return out
    for combo in combinations(range(len(rows)), k):
        M = np.array([rows[r][1] for r in combo])
        rhs = np.array([rows[r][2] for r in combo])
        maxabs = float(np.max(np.abs(M))) if M.size else 0.0
        if maxabs == 0.0:
            continue
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")  # exact singularity is filtered below
                lu, piv = lu_factor(M)
        except ValueError:
            continue
        if np.min(np.abs(np.diag(lu))) <= 1e-12 * maxabs:
            continue
        x_free = lu_solve((lu, piv), rhs)

        feasible = True
        for label, row, b in rows:
            ax = float(row @ x_free)
            side = label[2]
            tol = 1e-9 * max(1.0, abs(b))
            if side == "L" and ax < b - tol:
                feasible = False
                break
            if side == "U" and ax > b + tol:
                feasible = False
                break

        delta = np.zeros(n)
        delta[free] = x_free
        for idx, i in enumerate(pinned):
            delta[i] = v_pin[idx]
        obj = base_obj + float(snapshot.costs[free] @ x_free)
        out.append(
            Vertex(
                active=frozenset(rows[r][0] for r in combo),
                delta_mv=delta,
                objective=obj,
                feasible=feasible,
            )
        )
    return out
