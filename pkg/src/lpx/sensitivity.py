"""Cost-space sensitivity: critical regions, vertex switches, pairing flips.

Two selected MV costs are swept around the unit circle (angle, not ratio,
so sign changes of either cost are interior sample points) while the rest
stay fixed. Within a critical region the optimal vertex is constant; the
pairing can still flip inside a region when competing CVs share their
locally best MV and a swept cost crosses zero. Boundaries of both kinds
are bracketed by bisection.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import active_set as aset
from .attribution import ContributionMatrices, ExplanationDocument, explain, lambda_epsilon
from .errors import ComputeError, InputError, LpxError, NotApplicable
from .model import ControllerSnapshot

TWO_PI = 2.0 * math.pi
REFINE_TOL = 1.0e-6
BOUNDARY_TOL = 1.0e-7


@dataclass(frozen=True)
class SweepSample:
    theta: float
    vertex_signature: str | None
    pairing_signature: str | None
    degenerate: bool
    failed: bool
    forbidden: bool = False
    error: str | None = None
    vertex_id: str | None = None

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "theta": self.theta,
            "vertex_id": self.vertex_id,
            "vertex_signature": self.vertex_signature,
            "pairing_signature": self.pairing_signature,
            "degenerate": self.degenerate,
            "failed": self.failed,
            "forbidden": self.forbidden,
            "error": self.error,
        }


@dataclass(frozen=True)
class Region:
    theta_start: float
    theta_end: float           # may exceed 2*pi for the region wrapping zero
    vertex_id: str
    vertex_signature: str

    def contains(self, theta: float) -> bool:
        t = theta % TWO_PI
        lo, hi = self.theta_start, self.theta_end
        if hi <= TWO_PI:
            return lo <= t <= hi
        return t >= lo or t <= hi - TWO_PI

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "theta_start": self.theta_start,
            "theta_end": self.theta_end,
            "vertex_id": self.vertex_id,
            "vertex_signature": self.vertex_signature,
        }


@dataclass(frozen=True)
class FlipPoint:
    theta: float
    changed: str  # vertex | pairing | both

    def to_json_dict(self) -> dict[str, Any]:
        return {"theta": self.theta, "changed": self.changed}


@dataclass(frozen=True)
class SweepResult:
    mv_i: int
    mv_j: int
    samples: tuple[SweepSample, ...]
    regions: tuple[Region, ...]
    flip_points: tuple[FlipPoint, ...]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "mv_i": self.mv_i,
            "mv_j": self.mv_j,
            "samples": [s.to_json_dict() for s in self.samples],
            "regions": [r.to_json_dict() for r in self.regions],
            "flip_points": [f.to_json_dict() for f in self.flip_points],
        }

    def to_csv_rows(self) -> list[tuple[Any, ...]]:
        head = ("theta", "vertex_id", "vertex_signature", "pairing_signature",
                "degenerate", "failed")
        rows: list[tuple[Any, ...]] = [head]
        for s in self.samples:
            rows.append((
                f"{s.theta:.9f}",
                s.vertex_id or "",
                s.vertex_signature or "",
                s.pairing_signature or "",
                int(s.degenerate),
                int(s.failed),
            ))
        return rows


def vertex_signature(doc: ExplanationDocument) -> str:
    parts = [f"{v.id}:{st.value}" for v, st in zip(doc.snapshot.mvs, doc.solution.mv_status)]
    parts += [f"{v.id}:{st.value}" for v, st in zip(doc.snapshot.cvs, doc.solution.cv_status)]
    return "|".join(parts)


def pairing_signature(doc: ExplanationDocument) -> str:
    marks = {p.row: "!" if p.forbidden else "" for p in doc.assignment.pairs}
    return ",".join(
        f"{p.mv_id}>{p.cv_id}-{p.side}{marks[i]}"
        for i, p in enumerate(doc.pairings())
    )


def _with_costs(snapshot: ControllerSnapshot, costs: np.ndarray) -> ControllerSnapshot:
    frozen = costs.astype(float)
    frozen.flags.writeable = False
    return dataclasses.replace(snapshot, costs=frozen)


def sweep_cost_ratio(
    snapshot: ControllerSnapshot, mv_i: int, mv_j: int, steps: int = 360
) -> SweepResult:
    """Sweep (c_i, c_j) = (cos t, sin t) over [0, 2pi) through the pipeline.

    Degenerate samples (cost normal to a feasible edge) are tagged and kept
    out of region interiors; per-sample failures are recorded and skipped.
    Adjacent samples that disagree are bisected to 1e-6 in angle.
    """
    if steps < 8:
        raise InputError(f"sweep needs at least 8 steps, got {steps}")
    for idx in (mv_i, mv_j):
        if not 0 <= idx < snapshot.n:
            raise InputError(f"MV index {idx} out of range")
        if not snapshot.mvs[idx].in_service:
            raise InputError(f"{snapshot.mvs[idx].id} is out of service")
    if mv_i == mv_j:
        raise InputError("sweep needs two distinct MVs")

    def probe(theta: float) -> SweepSample:
        costs = snapshot.costs.copy()
        costs[mv_i] = math.cos(theta)
        costs[mv_j] = math.sin(theta)
        try:
            doc = explain(_with_costs(snapshot, costs))
        except LpxError as exc:
            return SweepSample(theta, None, None, False, True, error=str(exc))
        return SweepSample(
            theta=theta,
            vertex_signature=vertex_signature(doc),
            pairing_signature=pairing_signature(doc),
            degenerate=doc.solution.degenerate,
            failed=False,
            forbidden=doc.assignment.forbidden_used,
        )

    samples = [probe(TWO_PI * t / steps) for t in range(steps)]
    extra: list[SweepSample] = []

    def bisect(lo: SweepSample, hi: SweepSample, key: Callable[[SweepSample], Any]) -> float:
        a, b = lo, hi
        target = key(a)
        while b.theta - a.theta > REFINE_TOL:
            mid = probe(0.5 * (a.theta + b.theta))
            extra.append(mid)
            if not mid.failed and key(mid) == target:
                a = mid
            else:
                b = mid
        return 0.5 * (a.theta + b.theta)

    valid = [s for s in samples if not s.failed and not s.degenerate]
    flips: list[FlipPoint] = []
    if valid:
        ring = valid + [dataclasses.replace(valid[0], theta=valid[0].theta + TWO_PI)]
        for a, b in zip(ring, ring[1:]):
            vertex_changed = a.vertex_signature != b.vertex_signature
            pairing_changed = a.pairing_signature != b.pairing_signature
            if not vertex_changed and not pairing_changed:
                continue
            if vertex_changed:
                theta = bisect(a, b, lambda s: s.vertex_signature)
                kind = "both" if pairing_changed else "vertex"
            else:
                theta = bisect(a, b, lambda s: s.pairing_signature)
                kind = "pairing"
            flips.append(FlipPoint(theta=theta % TWO_PI, changed=kind))

    # Coalesce flips landing within the boundary-degeneracy width.
    flips.sort(key=lambda f: f.theta)
    merged: list[FlipPoint] = []
    for f in flips:
        if merged and f.theta - merged[-1].theta <= BOUNDARY_TOL:
            prev = merged.pop()
            kind = prev.changed if prev.changed == f.changed else "both"
            merged.append(FlipPoint(theta=prev.theta, changed=kind))
        else:
            merged.append(f)
    flips = merged

    # Regions are the circle arcs between vertex boundaries; each arc carries
    # the signature of the valid samples inside it.
    regions: list[Region] = []
    if valid:
        boundaries = sorted(f.theta for f in flips if f.changed in ("vertex", "both"))
        ids: dict[str, str] = {}

        def sig_id(sig: str) -> str:
            if sig not in ids:
                ids[sig] = f"V{len(ids) + 1}"
            return ids[sig]

        if not boundaries:
            sig = valid[0].vertex_signature
            assert sig is not None
            regions.append(Region(0.0, TWO_PI, sig_id(sig), sig))
        else:
            ring = boundaries + [boundaries[0] + TWO_PI]
            for start, end in zip(ring, ring[1:]):

                def in_arc(theta: float) -> bool:
                    t = theta % TWO_PI
                    return (start + REFINE_TOL < t < end - REFINE_TOL) or (
                        start + REFINE_TOL < t + TWO_PI < end - REFINE_TOL
                    )

                inside = [s for s in valid if in_arc(s.theta)]
                if not inside:
                    continue
                sig = inside[0].vertex_signature
                assert sig is not None
                regions.append(Region(start % TWO_PI, end, sig_id(sig), sig))

        id_of_sig = {r.vertex_signature: r.vertex_id for r in regions}
        samples = [
            dataclasses.replace(s, vertex_id=id_of_sig.get(s.vertex_signature or ""))
            for s in samples
        ]
        extra = [
            dataclasses.replace(s, vertex_id=id_of_sig.get(s.vertex_signature or ""))
            for s in extra
        ]

    all_samples = tuple(sorted(samples + extra, key=lambda s: s.theta))
    return SweepResult(
        mv_i=mv_i,
        mv_j=mv_j,
        samples=all_samples,
        regions=tuple(regions),
        flip_points=tuple(flips),
    )


def delta_p(active: aset.ActiveSet, matrices: ContributionMatrices) -> float:
    """Pairing-switch margin for 2x2 active sets sharing a locally best MV.

    Returns the factorized form; negative means the diagonal pairing wins,
    zero is the switching point. Verified against the direct penalty
    difference (P_diag - P_off) computed from the normalized matrix, which
    agrees with the P-form wherever the latter is finite.
    """
    if active.k != 2 or matrices.pi is None:
        raise NotApplicable("switch analysis needs a 2x2 active set with pi computed")
    pi = matrices.pi
    mins = pi.min(axis=0)
    shared = [r for r in range(2) if pi[r, 0] == mins[0] and pi[r, 1] == mins[1]]
    if not shared:
        raise NotApplicable("the two CVs do not share a locally best MV")
    r = shared[0]
    o = 1 - r
    c = active.c_u
    if c[r] == 0.0:
        raise NotApplicable("shared MV has zero cost; normalization is anomalous")
    ginv = active.g_a_inv
    assert ginv is not None
    eps = lambda_epsilon(active.c_u)
    sgn = np.empty(2)
    for col in range(2):
        lam = active.lambda_active[col]
        sgn[col] = math.copysign(1.0, lam) if abs(lam) > eps else -matrices.sign_vector[col]
    if ginv[r, 0] == 0.0 or ginv[r, 1] == 0.0:
        raise NotApplicable("shared MV has a zero route to one CV")

    # P_diag - P_off reduces to +/-(Pi[o,1] - Pi[o,0]): the -1 entries cancel,
    # and which column survives with which sign depends on the shared row.
    orient = 1.0 if r == 0 else -1.0
    factorized = orient * (c[o] / abs(c[r])) * (
        ginv[o, 0] * sgn[0] / abs(ginv[r, 0]) - ginv[o, 1] * sgn[1] / abs(ginv[r, 1])
    )
    direct = (pi[0, 0] + pi[1, 1]) - (pi[0, 1] + pi[1, 0])
    if abs(factorized - direct) > 1e-9 * max(1.0, abs(direct)):
        raise ComputeError(
            f"switch margin mismatch: factorized {factorized!r} vs direct {direct!r}"
        )
    return float(factorized)
