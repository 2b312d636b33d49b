"""Minimum-cost perfect matching (Kuhn-Munkres with potentials).

Shortest-augmenting-path variant, rows processed in ascending order and
column scans in ascending order with strict improvement, so tie-breaking is
a stable row scan: among equally cheap matchings the lowest row/column
indices win. Costs must be finite; callers encode forbidden cells as a
large finite penalty.
"""

from __future__ import annotations

import numpy as np


def solve_min_cost_assignment(cost: np.ndarray) -> np.ndarray:
    """Return col_of_row: the column assigned to each row, minimizing total cost."""
    a = np.asarray(cost, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("costs must be finite; substitute a big-M for forbidden cells")
    k = a.shape[0]
    if k == 0:
        return np.zeros(0, dtype=int)

    INF = np.inf
    u = np.zeros(k + 1)
    v = np.zeros(k + 1)
    row_of_col = np.full(k + 1, -1, dtype=int)  # index k is the virtual start column

    for i in range(k):
        row_of_col[k] = i
        j0 = k
        minv = np.full(k, INF)
        way = np.full(k, -1, dtype=int)
        used = np.zeros(k + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = row_of_col[j0]
            cur = a[i0, :k] - u[i0] - v[:k]
            better = (~used[:k]) & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            masked = np.where(used[:k], INF, minv)
            j1 = int(np.argmin(masked))
            delta = masked[j1]
            u[row_of_col[used]] += delta
            v[used] -= delta
            minv[~used[:k]] -= delta
            j0 = j1
            if row_of_col[j0] == -1:
                break
        while j0 != k:
            j1 = int(way[j0])
            row_of_col[j0] = row_of_col[j1]
            j0 = j1

    col_of_row = np.empty(k, dtype=int)
    for j in range(k):
        col_of_row[row_of_col[j]] = j
    return col_of_row


def brute_force_assignment(cost: np.ndarray) -> tuple[tuple[int, ...], float]:
    """Exhaustive k! oracle; returns (col per row, total). Only for small k."""
    from itertools import permutations

    a = np.asarray(cost, dtype=float)
    k = a.shape[0]
    best: tuple[int, ...] | None = None
    best_total = np.inf
    for perm in permutations(range(k)):
        total = 0.0
        for i in range(k):
            total += a[i, perm[i]]
        if total < best_total:
            best_total = total
            best = perm
    assert best is not None
    return best, float(best_total)
