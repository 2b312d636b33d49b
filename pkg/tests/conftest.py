"""Shared fixtures and random-instance generators for the test suite."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np
import pytest
from hypothesis import settings

from lpx.model import ControllerSnapshot, validate_snapshot

settings.register_profile("lpx", max_examples=60, derandomize=True, deadline=None)
settings.load_profile("lpx")

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


@pytest.fixture(scope="session")
def sec32_raw() -> dict[str, Any]:
    with open(FIXTURES / "sec32.json", "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture()
def sec32(sec32_raw) -> ControllerSnapshot:
    return validate_snapshot(json.loads(json.dumps(sec32_raw)))


def make_raw(
    gains,
    costs,
    cv_lo,
    cv_hi,
    mv_lo=None,
    mv_hi=None,
    *,
    timestamp: str = "2024-01-01T00:00:00+00:00",
    mv_current=None,
    cv_ss=None,
    cv_rank=None,
    mv_in_service=None,
    cv_in_service=None,
) -> dict[str, Any]:
    """Build a raw snapshot dict from delta-space bounds (current values 0)."""
    G = np.asarray(gains, dtype=float)
    m, n = G.shape
    mv_current = np.zeros(n) if mv_current is None else np.asarray(mv_current, float)
    cv_ss = np.zeros(m) if cv_ss is None else np.asarray(cv_ss, float)

    def bound(val, base):
        return None if val is None else float(val + base)

    mv_lo = [None] * n if mv_lo is None else mv_lo
    mv_hi = [None] * n if mv_hi is None else mv_hi
    mvs = []
    for i in range(n):
        mvs.append({
            "id": f"MV{i + 1}",
            "in_service": True if mv_in_service is None else bool(mv_in_service[i]),
        })
    cvs = []
    for j in range(m):
        cvs.append({
            "id": f"CV{j + 1}",
            "in_service": True if cv_in_service is None else bool(cv_in_service[j]),
        })
    return {
        "timestamp": timestamp,
        "mvs": mvs,
        "cvs": cvs,
        "gains": [list(map(float, row)) for row in G],
        "costs": list(map(float, costs)),
        "mv_current": mv_current.tolist(),
        "cv_ss": cv_ss.tolist(),
        "mv_bounds": [
            {"lower": bound(lo, mv_current[i]), "upper": bound(hi, mv_current[i])}
            for i, (lo, hi) in enumerate(zip(mv_lo, mv_hi))
        ],
        "cv_bounds": [
            {"lower": bound(lo, cv_ss[j]), "upper": bound(hi, cv_ss[j])}
            for j, (lo, hi) in enumerate(zip(cv_lo, cv_hi))
        ],
        "cv_rank": None if cv_rank is None else list(map(int, cv_rank)),
    }


def make_snapshot(*args, **kwargs) -> ControllerSnapshot:
    return validate_snapshot(make_raw(*args, **kwargs))


def random_snapshot(
    rng: np.random.Generator,
    n: int | None = None,
    m: int | None = None,
    *,
    feasible: bool = True,
    oos_prob: float = 0.0,
    ranks: bool = False,
) -> ControllerSnapshot:
    """Bounded random instance; with feasible=True, zero move is feasible so
    the LP has an optimal vertex and no CV needs to be given up."""
    n = int(rng.integers(1, 4)) if n is None else n
    m = int(rng.integers(1, 6)) if m is None else m
    G = rng.uniform(-3.0, 3.0, (m, n))
    costs = rng.uniform(-10.0, 10.0, n)
    mv_lo = -rng.uniform(0.5, 20.0, n)
    mv_hi = rng.uniform(0.5, 20.0, n)
    cv_lo = -rng.uniform(0.5, 60.0, m)
    cv_hi = rng.uniform(0.5, 60.0, m)
    if not feasible:
        j = int(rng.integers(0, m))
        shift = rng.uniform(5.0, 30.0)
        cv_lo[j] += shift
        cv_hi[j] = cv_lo[j] + rng.uniform(0.5, 5.0)
    mv_in_service = rng.random(n) >= oos_prob
    if not mv_in_service.any():
        mv_in_service[int(rng.integers(0, n))] = True
    cv_rank = rng.integers(1, 4, m) if ranks else None
    return make_snapshot(
        G,
        costs,
        cv_lo,
        cv_hi,
        mv_lo,
        mv_hi,
        mv_current=rng.uniform(-50.0, 50.0, n),
        cv_ss=rng.uniform(-100.0, 100.0, m),
        cv_rank=cv_rank,
        mv_in_service=mv_in_service,
    )
