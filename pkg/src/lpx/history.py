"""Historical pairing statistics over a time-ordered snapshot stream.

Every interval is explained independently (embarrassingly parallel), then
reduced into per-MV ranked label occupancy: which CV each MV was pairing
with, or whether it sat clamped at a limit / out of service. The rendered
table mirrors the operations display: top-C columns per MV plus a tail
bucket for rare labels and a footer of CVs that had to be given up.

A live explanation can be overlaid on the report: green dots for pairings
matching the configured design intent, yellow for clamped MVs or pairings
outside the intent, red for infeasible CVs.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Sequence

from .attribution import ExplanationDocument, explain
from .engine import ConstraintStatus
from .errors import EmptyHistory, IdMismatch, LpxError, OutOfOrderTimestamp
from .model import ControllerSnapshot

DEFAULT_COLUMNS = 3


class LabelKind(str, Enum):
    PAIRED = "paired"
    CLAMPED_LO = "clamped_lo"
    CLAMPED_HI = "clamped_hi"
    OOS = "oos"
    FREE = "free"  # dual-degenerate: in service, inside limits, not paired


@dataclass(frozen=True)
class MvLabel:
    kind: LabelKind
    cv_id: str | None = None
    side: str | None = None  # HI | LO for paired labels

    @property
    def text(self) -> str:
        if self.kind == LabelKind.PAIRED:
            return f"{self.cv_id}-{self.side}"
        return {
            LabelKind.CLAMPED_LO: "MV-LO",
            LabelKind.CLAMPED_HI: "MV-HI",
            LabelKind.OOS: "OOS",
            LabelKind.FREE: "FREE",
        }[self.kind]


@dataclass(frozen=True)
class IntervalRecord:
    timestamp: str
    mv_labels: dict[str, MvLabel] = field(default_factory=dict)
    infeasible: tuple[tuple[str, str], ...] = ()  # (cv id, HI|LO)
    degenerate: bool = False
    cond_warning: bool = False
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def record_from_document(doc: ExplanationDocument) -> IntervalRecord:
    snap, sol = doc.snapshot, doc.solution
    labels: dict[str, MvLabel] = {}
    for pairing in doc.pairings():
        labels[pairing.mv_id] = MvLabel(LabelKind.PAIRED, pairing.cv_id, pairing.side)
    for i, meta in enumerate(snap.mvs):
        if meta.id in labels:
            continue
        st = sol.mv_status[i]
        if not meta.in_service:
            labels[meta.id] = MvLabel(LabelKind.OOS)
        elif st == ConstraintStatus.AT_LOWER:
            labels[meta.id] = MvLabel(LabelKind.CLAMPED_LO)
        elif st == ConstraintStatus.AT_UPPER:
            labels[meta.id] = MvLabel(LabelKind.CLAMPED_HI)
        elif st == ConstraintStatus.PINNED:
            # Clamped to a point; the binding side follows the dual sign.
            kind = LabelKind.CLAMPED_HI if sol.mu[i] < 0 else LabelKind.CLAMPED_LO
            labels[meta.id] = MvLabel(kind)
        else:
            labels[meta.id] = MvLabel(LabelKind.FREE)

    infeasible = []
    for j in sol.infeasible_cvs:
        side = "LO" if sol.cv_status[j] == ConstraintStatus.GIVEN_UP_LOWER else "HI"
        infeasible.append((snap.cvs[j].id, side))

    return IntervalRecord(
        timestamp=snap.timestamp,
        mv_labels=labels,
        infeasible=tuple(infeasible),
        degenerate=sol.degenerate,
        cond_warning=doc.active.cond_warning,
    )


def _explain_one(snapshot: ControllerSnapshot) -> IntervalRecord:
    try:
        return record_from_document(explain(snapshot))
    except LpxError as exc:
        return IntervalRecord(timestamp=snapshot.timestamp, error=str(exc))


def run_history(
    snapshots: Iterable[ControllerSnapshot], jobs: int | None = None
) -> list[IntervalRecord]:
    """Explain each interval in timestamp order; failures are recorded inline."""
    snaps = list(snapshots)
    previous = None
    for s in snaps:
        t = s.time()
        if previous is not None and t < previous[0]:
            raise OutOfOrderTimestamp(previous[1], s.timestamp)
        previous = (t, s.timestamp)

    if jobs is not None and jobs > 1 and len(snaps) > 1:
        import multiprocessing as mp

        chunk = max(1, len(snaps) // (jobs * 8))
        with mp.Pool(processes=jobs) as pool:
            return list(pool.imap(_explain_one, snaps, chunksize=chunk))
    return [_explain_one(s) for s in snaps]


def format_pct(pct: float) -> str:
    """Deterministic rendering: half-even at 0.1%, rare values keep their
    first significant digit (0.05, 0.001, ...)."""
    if pct <= 0.0:
        return "0.0"
    if pct >= 0.1 - 1e-12:
        return f"{round(pct, 1):.1f}"
    digits = max(1, math.ceil(-math.log10(pct)))
    return f"{round(pct, digits):.{digits}f}"


@dataclass(frozen=True)
class LabelStat:
    text: str
    count: int
    pct: float

    @property
    def pct_text(self) -> str:
        return format_pct(self.pct)

    def to_json_dict(self) -> dict[str, Any]:
        return {"label": self.text, "count": self.count, "pct": self.pct,
                "pct_text": self.pct_text}


@dataclass(frozen=True)
class MvRow:
    mv_id: str
    top: tuple[LabelStat, ...]       # the S_1..S_C display columns
    tail: tuple[LabelStat, ...]      # S_inf: everything ranked below

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "mv": self.mv_id,
            "top": [s.to_json_dict() for s in self.top],
            "tail": [s.to_json_dict() for s in self.tail],
        }


@dataclass(frozen=True)
class InfeasibleStat:
    cv_id: str
    count: int
    pct: float
    sides: tuple[str, ...]
    partners: tuple[LabelStat, ...]  # MVs historically paired with this CV

    @property
    def pct_text(self) -> str:
        return format_pct(self.pct)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "cv": self.cv_id,
            "count": self.count,
            "pct": self.pct,
            "pct_text": self.pct_text,
            "sides": list(self.sides),
            "partners": [p.to_json_dict() for p in self.partners],
        }


@dataclass(frozen=True)
class HistoryReport:
    start: str
    end: str
    intervals: int
    explained: int
    failed: int
    columns: int
    rows: tuple[MvRow, ...]
    infeasible: tuple[InfeasibleStat, ...]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "window": {"start": self.start, "end": self.end, "intervals": self.intervals},
            "explained": self.explained,
            "failed": self.failed,
            "columns": self.columns,
            "rows": [r.to_json_dict() for r in self.rows],
            "infeasible": [s.to_json_dict() for s in self.infeasible],
        }


def aggregate(records: Sequence[IntervalRecord], columns: int = DEFAULT_COLUMNS) -> HistoryReport:
    """Rank per-MV label occupancy over the window (counts over explained
    intervals; re-running on the same records is bit-identical)."""
    if not records:
        raise EmptyHistory()
    ok = [r for r in records if not r.failed]
    if not ok:
        raise EmptyHistory()
    n_ok = len(ok)

    mv_order: list[str] = []
    seen: set[str] = set()
    for r in ok:
        for mv in r.mv_labels:
            if mv not in seen:
                seen.add(mv)
                mv_order.append(mv)

    rows: list[MvRow] = []
    for mv in mv_order:
        counts: Counter[str] = Counter()
        for r in ok:
            label = r.mv_labels.get(mv)
            if label is not None:
                counts[label.text] += 1
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        stats = [LabelStat(text, c, 100.0 * c / n_ok) for text, c in ranked]
        rows.append(MvRow(mv_id=mv, top=tuple(stats[:columns]), tail=tuple(stats[columns:])))

    given: Counter[str] = Counter()
    sides: dict[str, set[str]] = {}
    partners: dict[str, Counter[str]] = {}
    for r in ok:
        for cv, side in r.infeasible:
            given[cv] += 1
            sides.setdefault(cv, set()).add(side)
        for mv, label in r.mv_labels.items():
            if label.kind == LabelKind.PAIRED and label.cv_id is not None:
                partners.setdefault(label.cv_id, Counter())[mv] += 1
    infeasible = []
    for cv in sorted(given):
        part = sorted(partners.get(cv, Counter()).items(), key=lambda kv: (-kv[1], kv[0]))
        infeasible.append(
            InfeasibleStat(
                cv_id=cv,
                count=given[cv],
                pct=100.0 * given[cv] / n_ok,
                sides=tuple(sorted(sides[cv])),
                partners=tuple(LabelStat(mv, c, 100.0 * c / n_ok) for mv, c in part),
            )
        )

    return HistoryReport(
        start=records[0].timestamp,
        end=records[-1].timestamp,
        intervals=len(records),
        explained=n_ok,
        failed=len(records) - n_ok,
        columns=columns,
        rows=tuple(rows),
        infeasible=tuple(infeasible),
    )


@dataclass(frozen=True)
class MvAnnotation:
    label: str
    color: str | None  # GREEN | YELLOW | None (no judgement / no dot)


@dataclass(frozen=True)
class Overlay:
    mv: dict[str, MvAnnotation]
    infeasible: tuple[tuple[str, str], ...]  # (cv id, side) -> RED
    intent_configured: bool

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "mv": {
                k: {"label": a.label, "color": a.color} for k, a in sorted(self.mv.items())
            },
            "infeasible": [
                {"cv": cv, "side": side, "color": "RED"} for cv, side in self.infeasible
            ],
            "intent_configured": self.intent_configured,
        }


def overlay_live(
    report: HistoryReport,
    live: ExplanationDocument,
    intent: Sequence[dict[str, str]] | None,
) -> Overlay:
    """Annotate the report with the live controller state.

    GREEN: live pairing matches the design intent. YELLOW: the MV is
    clamped, floating unpaired, or paired outside the intent. RED: the CV is
    infeasible right now. Without an intent list pairings carry no color.
    """
    report_mvs = {row.mv_id for row in report.rows}
    live_mvs = set(live.snapshot.mv_ids)
    if report_mvs != live_mvs:
        raise IdMismatch(
            f"live MVs {sorted(live_mvs)} do not match report MVs {sorted(report_mvs)}"
        )

    wanted: set[tuple[str, str, str | None]] = set()
    for item in intent or ():
        wanted.add((item["mv"], item["cv"], item.get("side")))

    def matches(mv: str, cv: str, side: str) -> bool:
        return (mv, cv, side) in wanted or (mv, cv, None) in wanted

    record = record_from_document(live)
    annotations: dict[str, MvAnnotation] = {}
    for mv, label in record.mv_labels.items():
        if label.kind == LabelKind.PAIRED:
            assert label.cv_id is not None and label.side is not None
            if intent is None:
                color = None
            elif matches(mv, label.cv_id, label.side):
                color = "GREEN"
            else:
                color = "YELLOW"
        elif label.kind in (LabelKind.CLAMPED_LO, LabelKind.CLAMPED_HI, LabelKind.FREE):
            color = "YELLOW"
        else:  # OOS carries no dot
            color = None
        annotations[mv] = MvAnnotation(label=label.text, color=color)

    return Overlay(
        mv=annotations,
        infeasible=record.infeasible,
        intent_configured=intent is not None,
    )


def _cell(stat: LabelStat | None, marker: str = "") -> str:
    if stat is None:
        return ""
    prefix = f"[{marker}] " if marker else ""
    return f"{prefix}{stat.text} ({stat.pct_text}%)"


def _marker_for(overlay: Overlay | None, mv: str, text: str) -> str:
    if overlay is None:
        return ""
    ann = overlay.mv.get(mv)
    if ann is None or ann.label != text or ann.color is None:
        return ""
    return ann.color[0]  # G / Y


def render_markdown(report: HistoryReport, overlay: Overlay | None = None) -> str:
    headers = ["MV"] + [f"S{i + 1}" for i in range(report.columns)] + ["S_inf"]
    lines = ["| " + " | ".join(headers) + " |",
             "|" + "|".join(["---"] * len(headers)) + "|"]
    for row in report.rows:
        cells = [row.mv_id]
        for i in range(report.columns):
            stat = row.top[i] if i < len(row.top) else None
            marker = _marker_for(overlay, row.mv_id, stat.text) if stat else ""
            cells.append(_cell(stat, marker))
        tail = ", ".join(
            _cell(s, _marker_for(overlay, row.mv_id, s.text)) for s in row.tail
        )
        cells.append(tail)
        lines.append("| " + " | ".join(cells) + " |")
    if report.infeasible or (overlay and overlay.infeasible):
        live_red = {cv for cv, _ in (overlay.infeasible if overlay else ())}
        parts = []
        for s in report.infeasible:
            marker = "[R] " if s.cv_id in live_red else ""
            parts.append(f"{marker}{s.cv_id} ({s.pct_text}%)")
        for cv in sorted(live_red - {s.cv_id for s in report.infeasible}):
            parts.append(f"[R] {cv} (live)")
        lines.append("| Infeasible | " + ", ".join(parts)
                     + " |" + " |" * report.columns)
    return "\n".join(lines) + "\n"


def render_csv_rows(report: HistoryReport, overlay: Overlay | None = None) -> list[list[str]]:
    headers = ["mv"] + [f"s{i + 1}" for i in range(report.columns)] + ["s_inf", "live", "color"]
    rows = [headers]
    for row in report.rows:
        cells = [row.mv_id]
        for i in range(report.columns):
            cells.append(_cell(row.top[i] if i < len(row.top) else None))
        cells.append("; ".join(_cell(s) for s in row.tail))
        ann = overlay.mv.get(row.mv_id) if overlay else None
        cells.append(ann.label if ann else "")
        cells.append(ann.color or "" if ann else "")
        rows.append(cells)
    for s in report.infeasible:
        rows.append(["infeasible", s.cv_id, f"{s.pct_text}%",
                     "; ".join(f"{p.text} ({p.pct_text}%)" for p in s.partners), "", ""])
    return rows
