"""Snapshot data model: one control interval's gains, costs, limits and values.

A snapshot is the contract boundary of the toolkit: the steady-state CV
predictions are taken as given (prediction-bias updating happens upstream in
the controller), and out-of-service variables stay in the arrays so indices
are stable across a historical run.

The on-disk format is a UTF-8 JSON document described in
docs/snapshot-schema.md; history runs are JSON-Lines with one snapshot per
line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Iterable

import numpy as np

from .errors import (
    BAD_TYPE,
    BOUND_ORDER_VIOLATION,
    DIMENSION_MISMATCH,
    DUPLICATE_ID,
    MISSING_FIELD,
    NON_FINITE_ENTRY,
    SnapshotValidationError,
    Violation,
)

SNAPSHOT_FIELDS = (
    "timestamp",
    "mvs",
    "cvs",
    "gains",
    "costs",
    "mv_current",
    "cv_ss",
    "mv_bounds",
    "cv_bounds",
    "cv_rank",
)


class VariableKind(str, Enum):
    MV = "MV"
    CV = "CV"


@dataclass(frozen=True)
class VariableMeta:
    """Identity and service state of one MV or CV."""

    id: str
    kind: VariableKind
    index: int
    in_service: bool = True
    description: str | None = None


@dataclass(frozen=True)
class Bounds:
    """Operating limits in engineering units; None marks an unbounded side."""

    lower: float | None
    upper: float | None

    def as_floats(self) -> tuple[float, float]:
        lo = -math.inf if self.lower is None else self.lower
        hi = math.inf if self.upper is None else self.upper
        return lo, hi


@dataclass(frozen=True)
class GainMatrix:
    """Dense m x n steady-state gains (dCV per dMV), CV rows, MV columns."""

    entries: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape  # type: ignore[return-value]


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 parse; 'Z' suffix accepted, naive times assumed UTC."""
    raw = text.replace("Z", "+00:00") if text.endswith("Z") else text
    ts = datetime.fromisoformat(raw)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


@dataclass(frozen=True)
class ControllerSnapshot:
    """Validated, immutable input to every downstream computation.

    Delta bounds are derived once at validation time: the LP works on
    incremental moves, so the usable MV range is (MV_L - MV, MV_U - MV) and
    the usable CV range is (CV_L - CV_ss, CV_U - CV_ss). Out-of-service MVs
    are pinned at zero delta rather than removed, keeping indices stable.
    """

    timestamp: str
    mvs: tuple[VariableMeta, ...]
    cvs: tuple[VariableMeta, ...]
    gains: GainMatrix
    costs: np.ndarray
    mv_current: np.ndarray
    cv_ss: np.ndarray
    mv_bounds: tuple[Bounds, ...]
    cv_bounds: tuple[Bounds, ...]
    cv_rank: np.ndarray
    # Derived delta bounds, +-inf on absent sides; OOS MVs pinned to [0, 0].
    delta_mv_lo: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    delta_mv_hi: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    delta_cv_lo: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    delta_cv_hi: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def n(self) -> int:
        return len(self.mvs)

    @property
    def m(self) -> int:
        return len(self.cvs)

    @property
    def mv_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.mvs)

    @property
    def cv_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.cvs)

    def mv_in_service(self) -> np.ndarray:
        return np.array([v.in_service for v in self.mvs], dtype=bool)

    def cv_in_service(self) -> np.ndarray:
        return np.array([v.in_service for v in self.cvs], dtype=bool)

    def time(self) -> datetime:
        return parse_timestamp(self.timestamp)

    def to_json_dict(self) -> dict[str, Any]:
        """Round-trippable plain-dict form (floats keep their exact values)."""

        def var(v: VariableMeta) -> dict[str, Any]:
            d: dict[str, Any] = {"id": v.id, "in_service": v.in_service}
            if v.description is not None:
                d["description"] = v.description
            return d

        def bounds(b: Bounds) -> dict[str, Any]:
            return {"lower": b.lower, "upper": b.upper}

        return {
            "timestamp": self.timestamp,
            "mvs": [var(v) for v in self.mvs],
            "cvs": [var(v) for v in self.cvs],
            "gains": [list(row) for row in self.gains.entries.tolist()],
            "costs": self.costs.tolist(),
            "mv_current": self.mv_current.tolist(),
            "cv_ss": self.cv_ss.tolist(),
            "mv_bounds": [bounds(b) for b in self.mv_bounds],
            "cv_bounds": [bounds(b) for b in self.cv_bounds],
            "cv_rank": self.cv_rank.tolist(),
        }


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _check_vector(
    raw: Any, name: str, violations: list[Violation], *, integer: bool = False
) -> np.ndarray | None:
    if not isinstance(raw, (list, tuple)):
        violations.append(Violation(BAD_TYPE, name, "expected an array"))
        return None
    try:
        vec = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        violations.append(Violation(BAD_TYPE, name, "entries must be numbers"))
        return None
    if vec.ndim != 1:
        violations.append(Violation(BAD_TYPE, name, "expected a flat array"))
        return None
    if not np.all(np.isfinite(vec)):
        violations.append(Violation(NON_FINITE_ENTRY, name, "contains NaN or infinity"))
        return None
    if integer and not np.all(vec == np.round(vec)):
        violations.append(Violation(BAD_TYPE, name, "entries must be integers"))
        return None
    return vec


def _check_variables(
    raw: Any, name: str, kind: VariableKind, violations: list[Violation]
) -> tuple[VariableMeta, ...] | None:
    if not isinstance(raw, list) or not raw:
        violations.append(Violation(BAD_TYPE, name, "expected a non-empty array"))
        return None
    out: list[VariableMeta] = []
    for i, item in enumerate(raw):
        if isinstance(item, str):
            item = {"id": item}
        if not isinstance(item, dict) or "id" not in item:
            violations.append(Violation(BAD_TYPE, f"{name}[{i}]", "expected an object with an id"))
            return None
        out.append(
            VariableMeta(
                id=str(item["id"]),
                kind=kind,
                index=i,
                in_service=bool(item.get("in_service", True)),
                description=item.get("description"),
            )
        )
    return tuple(out)


def _check_bounds(
    raw: Any, name: str, violations: list[Violation]
) -> tuple[Bounds, ...] | None:
    if not isinstance(raw, list):
        violations.append(Violation(BAD_TYPE, name, "expected an array of bound objects"))
        return None
    out: list[Bounds] = []
    for i, item in enumerate(raw):
        where = f"{name}[{i}]"
        if isinstance(item, dict):
            lo, hi = item.get("lower"), item.get("upper")
        elif isinstance(item, (list, tuple)) and len(item) == 2:
            lo, hi = item
        else:
            violations.append(Violation(BAD_TYPE, where, "expected {lower, upper}"))
            return None
        for side, v in (("lower", lo), ("upper", hi)):
            if v is not None and not isinstance(v, (int, float)):
                violations.append(Violation(BAD_TYPE, f"{where}.{side}", "expected number or null"))
                return None
            if v is not None and not math.isfinite(v):
                violations.append(
                    Violation(NON_FINITE_ENTRY, f"{where}.{side}", "must be finite or null")
                )
                return None
        if lo is not None and hi is not None and lo > hi:
            violations.append(
                Violation(BOUND_ORDER_VIOLATION, where, f"lower {lo} exceeds upper {hi}")
            )
            continue
        out.append(Bounds(None if lo is None else float(lo), None if hi is None else float(hi)))
    return None if len(out) != len(raw) else tuple(out)


def validate_snapshot(raw: dict[str, Any]) -> ControllerSnapshot:
    """Validate a parsed snapshot document and derive the delta bounds.

    Collects every finding before raising, so a caller sees all problems in
    one SnapshotValidationError rather than the first.
    """
    violations: list[Violation] = []
    if not isinstance(raw, dict):
        raise SnapshotValidationError([Violation(BAD_TYPE, "$", "snapshot must be an object")])

    for key in ("timestamp", "mvs", "cvs", "gains", "costs", "mv_current", "cv_ss",
                "mv_bounds", "cv_bounds"):
        if key not in raw:
            violations.append(Violation(MISSING_FIELD, key, "required field is missing"))
    if violations:
        raise SnapshotValidationError(violations)

    timestamp = raw["timestamp"]
    if not isinstance(timestamp, str):
        violations.append(Violation(BAD_TYPE, "timestamp", "expected an ISO-8601 string"))
    else:
        try:
            parse_timestamp(timestamp)
        except ValueError:
            violations.append(Violation(BAD_TYPE, "timestamp", "not a valid ISO-8601 time"))

    mvs = _check_variables(raw["mvs"], "mvs", VariableKind.MV, violations)
    cvs = _check_variables(raw["cvs"], "cvs", VariableKind.CV, violations)

    ids_seen: set[str] = set()
    for v in (mvs or ()) + (cvs or ()):
        if v.id in ids_seen:
            violations.append(Violation(DUPLICATE_ID, v.id, "variable id used more than once"))
        ids_seen.add(v.id)

    gains_raw = raw["gains"]
    gains = None
    if not isinstance(gains_raw, list) or not all(isinstance(r, (list, tuple)) for r in gains_raw):
        violations.append(Violation(BAD_TYPE, "gains", "expected an array of row arrays"))
    else:
        widths = {len(r) for r in gains_raw}
        if len(widths) > 1:
            violations.append(Violation(DIMENSION_MISMATCH, "gains", "ragged rows"))
        else:
            try:
                gains = np.asarray(gains_raw, dtype=float)
            except (TypeError, ValueError):
                violations.append(Violation(BAD_TYPE, "gains", "entries must be numbers"))
            if gains is not None and not np.all(np.isfinite(gains)):
                violations.append(Violation(NON_FINITE_ENTRY, "gains", "contains NaN or infinity"))
                gains = None

    costs = _check_vector(raw["costs"], "costs", violations)
    mv_current = _check_vector(raw["mv_current"], "mv_current", violations)
    cv_ss = _check_vector(raw["cv_ss"], "cv_ss", violations)
    mv_bounds = _check_bounds(raw["mv_bounds"], "mv_bounds", violations)
    cv_bounds = _check_bounds(raw["cv_bounds"], "cv_bounds", violations)

    if "cv_rank" in raw and raw["cv_rank"] is not None:
        cv_rank = _check_vector(raw["cv_rank"], "cv_rank", violations, integer=True)
        if cv_rank is not None and np.any(cv_rank < 1):
            violations.append(Violation(BAD_TYPE, "cv_rank", "ranks must be positive integers"))
            cv_rank = None
    else:
        cv_rank = None  # defaulted below once m is known

    if violations:
        raise SnapshotValidationError(violations)
    assert mvs is not None and cvs is not None and gains is not None
    assert costs is not None and mv_current is not None and cv_ss is not None
    assert mv_bounds is not None and cv_bounds is not None

    n, m = len(mvs), len(cvs)
    if gains.ndim != 2 or gains.shape != (m, n):
        violations.append(
            Violation(
                DIMENSION_MISMATCH,
                "gains",
                f"expected {m} CV rows x {n} MV columns, got {gains.shape}",
            )
        )
    for name, vec, want in (
        ("costs", costs, n),
        ("mv_current", mv_current, n),
        ("cv_ss", cv_ss, m),
    ):
        if len(vec) != want:
            violations.append(
                Violation(DIMENSION_MISMATCH, name, f"expected length {want}, got {len(vec)}")
            )
    for name, seq, want in (("mv_bounds", mv_bounds, n), ("cv_bounds", cv_bounds, m)):
        if len(seq) != want:
            violations.append(
                Violation(DIMENSION_MISMATCH, name, f"expected length {want}, got {len(seq)}")
            )
    if cv_rank is None:
        cv_rank = np.ones(m)
    elif len(cv_rank) != m:
        violations.append(
            Violation(DIMENSION_MISMATCH, "cv_rank", f"expected length {m}, got {len(cv_rank)}")
        )
    if violations:
        raise SnapshotValidationError(violations)

    # Delta bounds. OOS MVs are pinned at zero delta.
    dmv_lo = np.empty(n)
    dmv_hi = np.empty(n)
    for i, (b, v) in enumerate(zip(mv_bounds, mvs)):
        if not v.in_service:
            dmv_lo[i] = dmv_hi[i] = 0.0
            continue
        lo, hi = b.as_floats()
        dmv_lo[i] = lo - mv_current[i]
        dmv_hi[i] = hi - mv_current[i]
    dcv_lo = np.empty(m)
    dcv_hi = np.empty(m)
    for j, (b, v) in enumerate(zip(cv_bounds, cvs)):
        if not v.in_service:
            dcv_lo[j], dcv_hi[j] = -math.inf, math.inf
            continue
        lo, hi = b.as_floats()
        dcv_lo[j] = lo - cv_ss[j]
        dcv_hi[j] = hi - cv_ss[j]

    return ControllerSnapshot(
        timestamp=timestamp,
        mvs=mvs,
        cvs=cvs,
        gains=GainMatrix(_freeze(gains)),
        costs=_freeze(costs),
        mv_current=_freeze(mv_current),
        cv_ss=_freeze(cv_ss),
        mv_bounds=mv_bounds,
        cv_bounds=cv_bounds,
        cv_rank=_freeze(cv_rank.astype(int)),
        delta_mv_lo=_freeze(dmv_lo),
        delta_mv_hi=_freeze(dmv_hi),
        delta_cv_lo=_freeze(dcv_lo),
        delta_cv_hi=_freeze(dcv_hi),
    )


def load_snapshot(path: str) -> ControllerSnapshot:
    import json

    with open(path, "r", encoding="utf-8") as fh:
        return validate_snapshot(json.load(fh))


def iter_snapshots(path: str) -> Iterable[ControllerSnapshot]:
    """Yield validated snapshots from a JSON-Lines history file."""
    import json

    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield validate_snapshot(json.loads(line))
