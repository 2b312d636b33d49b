import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpx.assignment import brute_force_assignment, solve_min_cost_assignment


def total(cost, cols):
    return float(sum(cost[i, c] for i, c in enumerate(cols)))


def test_forced_diagonal():
    big = 1e9
    cost = np.array([[-1.0, big], [big, -1.0]])
    cols = solve_min_cost_assignment(cost)
    assert cols.tolist() == [0, 1]
    assert total(cost, cols) == -2.0


def test_rejects_non_square_and_non_finite():
    with pytest.raises(ValueError):
        solve_min_cost_assignment(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        solve_min_cost_assignment(np.array([[np.inf, 0.0], [0.0, 1.0]]))


def test_empty():
    assert solve_min_cost_assignment(np.zeros((0, 0))).size == 0


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=150)
def test_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 8))
    cost = rng.uniform(-2.0, 2.0, (k, k))
    # occasionally plant near-forbidden cells, as penalty matrices do
    mask = rng.random((k, k)) < 0.15
    cost[mask] = 1e9 + cost[mask]
    cols = solve_min_cost_assignment(cost)
    _, best = brute_force_assignment(cost)
    assert sorted(cols.tolist()) == list(range(k))
    assert total(cost, cols) == best


def test_deterministic_across_runs():
    rng = np.random.default_rng(7)
    cost = rng.uniform(-1, 1, (6, 6))
    first = solve_min_cost_assignment(cost).tolist()
    for _ in range(5):
        assert solve_min_cost_assignment(cost.copy()).tolist() == first


def test_tie_broken_by_stable_row_scan():
    # Both matchings cost 0; the row scan settles on the diagonal.
    cost = np.zeros((2, 2))
    assert solve_min_cost_assignment(cost).tolist() == [0, 1]


def test_local_dominance_is_not_a_guarantee():
    # (0,0) is the unique minimum of its row and column, yet one row is so
    # hostile elsewhere that the optimal matching routes around it. The
    # solver must return the true optimum, not the locally dominant pair.
    cost = np.array([
        [-1.0, -0.5, -0.5],
        [-0.9, -1.0, -1.0],
        [-0.7, 100.0, 100.0],
    ])
    cols = solve_min_cost_assignment(cost)
    perm, best = brute_force_assignment(cost)
    assert total(cost, cols) == best == pytest.approx(-2.2)
    assert cols[0] != 0  # the doubly-unique minimum is *not* selected here
