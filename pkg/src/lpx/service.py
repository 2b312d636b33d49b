"""HTTP/JSON API for the explanation pipeline and the what-if workflow.

Endpoints (all under /api/v1): explain a posted snapshot, run a what-if
(base snapshot plus sparse limit/cost/service overrides, recomputed from
scratch on every request -- nothing is persisted and nothing writes back to
a control system), fetch the history summary, and post a live snapshot
that the summary overlays as colored dots. Static UI assets are served
from the configured directory when present.

The server is stateless apart from the single live-snapshot slot
(last-writer-wins under a lock); identical requests return identical
bodies.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI
from fastapi.responses import HTMLResponse, JSONResponse

from . import __version__
from . import history as hist
from .attribution import ExplanationDocument, explain
from .errors import (
    InputError,
    LpxError,
    SnapshotValidationError,
    StageError,
)
from .model import ControllerSnapshot, iter_snapshots, validate_snapshot

SIDE_OF_STATUS = {"AtLower": "LO", "AtUpper": "HI",
                  "GivenUpLower": "LO", "GivenUpUpper": "HI"}


def apply_overrides(
    snapshot: ControllerSnapshot, overrides: list[dict[str, Any]]
) -> ControllerSnapshot:
    """Return a new validated snapshot with per-variable overrides applied.

    Recognized override keys: lower, upper (present-and-null clears the
    bound), cost (MVs only), in_service. Unknown ids or a CV cost raise
    InputError; bound-order problems surface as validation errors.
    """
    doc = snapshot.to_json_dict()
    mv_pos = {v["id"]: i for i, v in enumerate(doc["mvs"])}
    cv_pos = {v["id"]: j for j, v in enumerate(doc["cvs"])}
    for ov in overrides:
        if "id" not in ov:
            raise InputError("override missing variable id")
        vid = ov["id"]
        if vid in mv_pos:
            idx, bounds_key, vars_key = mv_pos[vid], "mv_bounds", "mvs"
            if "cost" in ov:
                doc["costs"][idx] = float(ov["cost"])
        elif vid in cv_pos:
            idx, bounds_key, vars_key = cv_pos[vid], "cv_bounds", "cvs"
            if "cost" in ov:
                raise InputError(f"{vid} is a CV; costs apply to MVs only")
        else:
            raise InputError(f"override references unknown variable {vid!r}")
        if "lower" in ov:
            doc[bounds_key][idx]["lower"] = ov["lower"]
        if "upper" in ov:
            doc[bounds_key][idx]["upper"] = ov["upper"]
        if "in_service" in ov:
            doc[vars_key][idx]["in_service"] = bool(ov["in_service"])
    return validate_snapshot(doc)


def _pair_map(doc: ExplanationDocument) -> dict[str, tuple[str, str]]:
    return {p.mv_id: (p.cv_id, p.side) for p in doc.pairings()}


def diff_documents(before: ExplanationDocument, after: ExplanationDocument) -> dict[str, Any]:
    """Pairing, status and shadow-price changes between two explanations."""
    pb, pa = _pair_map(before), _pair_map(after)
    added = [
        {"mv": mv, "cv": cv, "side": side}
        for mv, (cv, side) in sorted(pa.items())
        if mv not in pb
    ]
    removed = [
        {"mv": mv, "cv": cv, "side": side}
        for mv, (cv, side) in sorted(pb.items())
        if mv not in pa
    ]
    rerouted = [
        {
            "mv": mv,
            "from_cv": pb[mv][0], "from_side": pb[mv][1],
            "to_cv": pa[mv][0], "to_side": pa[mv][1],
        }
        for mv in sorted(pb)
        if mv in pa and pb[mv] != pa[mv]
    ]

    mv_status_changes = []
    for i, mv in enumerate(before.snapshot.mv_ids):
        b = before.solution.mv_status[i].value
        a = after.solution.mv_status[i].value
        if b != a:
            mv_status_changes.append({"mv": mv, "before": b, "after": a})
    cv_changes = []
    lambda_changes = []
    for j, cv in enumerate(before.snapshot.cv_ids):
        b = before.solution.cv_status[j].value
        a = after.solution.cv_status[j].value
        if b != a:
            cv_changes.append({
                "cv": cv, "before": b, "after": a,
                "before_side": SIDE_OF_STATUS.get(b), "after_side": SIDE_OF_STATUS.get(a),
            })
        lb = float(before.solution.lam[j])
        la = float(after.solution.lam[j])
        if abs(lb - la) > 1e-9 * max(1.0, abs(lb), abs(la)):
            lambda_changes.append({"cv": cv, "before": lb, "after": la})

    return {
        "pairs_added": added,
        "pairs_removed": removed,
        "pairs_rerouted": rerouted,
        "mv_status_changes": mv_status_changes,
        "cv_changes": cv_changes,
        "lambda_changes": lambda_changes,
    }


def _error_response(exc: LpxError) -> JSONResponse:
    if isinstance(exc, SnapshotValidationError):
        return JSONResponse(
            status_code=422,
            content={
                "error": "validation",
                "violations": [
                    {"code": v.code, "field": v.field, "message": v.message}
                    for v in exc.violations
                ],
            },
        )
    if isinstance(exc, StageError):
        cause = exc.cause
        if isinstance(cause, SnapshotValidationError):
            return _error_response(cause)
        status = 422 if isinstance(cause, InputError) else 409
        return JSONResponse(
            status_code=status,
            content={
                "error": type(cause).__name__,
                "stage": exc.stage,
                "detail": str(cause),
            },
        )
    if isinstance(exc, InputError):
        return JSONResponse(status_code=422, content={"error": type(exc).__name__,
                                                      "detail": str(exc)})
    return JSONResponse(status_code=409, content={"error": type(exc).__name__,
                                                  "detail": str(exc)})


def build_app(
    history_path: str | None = None,
    intent_path: str | None = None,
    ui_dir: str | None = None,
    columns: int = hist.DEFAULT_COLUMNS,
    jobs: int | None = None,
) -> FastAPI:
    app = FastAPI(title="lpx", version=__version__)

    intent: list[dict[str, str]] | None = None
    if intent_path is not None:
        with open(intent_path, "r", encoding="utf-8") as fh:
            intent = json.load(fh)

    report: hist.HistoryReport | None = None
    latest_snapshot: ControllerSnapshot | None = None
    if history_path is not None:
        snapshots = list(iter_snapshots(history_path))
        records = hist.run_history(snapshots, jobs=jobs)
        report = hist.aggregate(records, columns=columns)
        latest_snapshot = snapshots[-1] if snapshots else None

    live_lock = threading.Lock()
    live_slot: dict[str, ExplanationDocument] = {}

    if ui_dir is None:
        default_ui = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_root = default_ui if default_ui.is_dir() else None
    else:
        ui_root = Path(ui_dir)

    @app.get("/api/v1/health")
    def health() -> dict[str, Any]:
        return {
            "name": "lpx",
            "version": __version__,
            "schema_version": 1,
            "history_loaded": report is not None,
            "intent_configured": intent is not None,
        }

    @app.post("/api/v1/explain")
    def explain_endpoint(body: dict[str, Any] = Body(...)):
        try:
            doc = explain(validate_snapshot(body))
        except LpxError as exc:
            return _error_response(exc)
        return JSONResponse(doc.to_json_dict())

    @app.post("/api/v1/whatif")
    def whatif_endpoint(body: dict[str, Any] = Body(...)):
        base = body.get("base")
        overrides = body.get("overrides", [])
        try:
            if base == "latest" or base is None:
                if latest_snapshot is None:
                    return JSONResponse(
                        status_code=404,
                        content={"error": "NoHistory",
                                 "detail": "no history loaded; post the base snapshot inline"},
                    )
                base_snap = latest_snapshot
            else:
                base_snap = validate_snapshot(base)
            if not isinstance(overrides, list):
                raise InputError("overrides must be a list")
            after_snap = apply_overrides(base_snap, overrides)
            before = explain(base_snap)
            after = explain(after_snap)
        except LpxError as exc:
            return _error_response(exc)
        return JSONResponse({
            "before": before.to_json_dict(),
            "after": after.to_json_dict(),
            "diff": diff_documents(before, after),
        })

    @app.post("/api/v1/live")
    def live_endpoint(body: dict[str, Any] = Body(...)):
        try:
            doc = explain(validate_snapshot(body))
        except LpxError as exc:
            return _error_response(exc)
        with live_lock:
            live_slot["doc"] = doc
        return JSONResponse({"ok": True, "timestamp": doc.snapshot.timestamp})

    @app.get("/api/v1/history/summary")
    def summary_endpoint():
        if report is None:
            return JSONResponse(
                status_code=404,
                content={"error": "NoHistory", "detail": "server started without --history"},
            )
        payload = report.to_json_dict()
        with live_lock:
            live = live_slot.get("doc")
        if live is not None:
            try:
                payload["overlay"] = hist.overlay_live(report, live, intent).to_json_dict()
            except LpxError as exc:
                return _error_response(exc)
        payload["intent_configured"] = intent is not None
        return JSONResponse(payload)

    if ui_root is not None and ui_root.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_root), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index() -> str:
            return (
                "<html><body><h1>lpx</h1><p>API is up. UI assets not built; "
                "see the README for building the dashboard.</p></body></html>"
            )

    return app
