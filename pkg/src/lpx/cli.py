"""Command-line front door: explain, history, sweep, serve.

Exit codes: 0 success, 2 input/validation/usage problems, 3 solver or
pipeline failures. Diagnostics go to stderr, data to stdout or -o. The
LPX_LOG environment variable sets the logging level. Identical inputs and
flags produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import history as hist
from . import sensitivity
from .attribution import ExplanationDocument, explain
from .errors import ComputeError, InputError, LpxError, StageError
from .model import ControllerSnapshot, iter_snapshots, load_snapshot

log = logging.getLogger("lpx")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3


def _setup_logging() -> None:
    level = os.environ.get("LPX_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _dump_json(data: dict[str, Any]) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _fmt_matrix(mat, row_ids: Sequence[str], col_ids: Sequence[str]) -> str:
    width = max([9] + [len(r) for r in row_ids])
    head = " " * (width + 1) + " ".join(f"{c:>12}" for c in col_ids)
    lines = [head]
    for rid, row in zip(row_ids, np.asarray(mat, dtype=float)):
        cells = " ".join("         inf" if not np.isfinite(v) else f"{v:12.4f}" for v in row)
        lines.append(f"{rid:<{width}} {cells}")
    return "\n".join(lines)


def render_table(doc: ExplanationDocument) -> str:
    snap, sol, active = doc.snapshot, doc.solution, doc.active
    out: list[str] = []
    out.append(f"Snapshot {snap.timestamp}  ({snap.m} CVs x {snap.n} MVs)")
    out.append("")
    out.append("Pairings")
    pairings = doc.pairings()
    if not pairings:
        out.append("  (no active set: no degrees of freedom in use)")
    for p, pair in zip(pairings, doc.assignment.pairs):
        star = "  [forced]" if pair.forbidden else ""
        out.append(f"  {p.mv_id} -> {p.cv_id} ({p.side})  penalty {pair.penalty:.4g}{star}")
    out.append("")
    out.append("MV status")
    for i, v in enumerate(snap.mvs):
        out.append(
            f"  {v.id:<12} {sol.mv_status[i].value:<12} dMV {sol.delta_mv[i]:12.4f}"
            f"   mu {sol.mu[i]:.6g}"
        )
    out.append("CV status")
    for j, v in enumerate(snap.cvs):
        flag = "  [given up]" if j in sol.infeasible_cvs else ""
        out.append(
            f"  {v.id:<12} {sol.cv_status[j].value:<12} lambda {sol.lam[j]:.6g}{flag}"
        )
    out.append("")
    out.append(f"Objective {sol.objective:.6g}   iterations {sol.iterations}"
               f"   degenerate {sol.degenerate}")
    if active.k:
        mv_ids = [snap.mvs[i].id for i in active.mv_u]
        cv_ids = [snap.cvs[j].id for j in active.cv_c]
        out.append("")
        out.append("Shadow price contributions (W)")
        out.append(_fmt_matrix(doc.matrices.w, mv_ids, cv_ids))
        out.append("")
        out.append("Normalized contributions (Pi)")
        out.append(_fmt_matrix(doc.matrices.pi, mv_ids, cv_ids))
        out.append("")
        out.append("Assignment penalties (P)")
        out.append(_fmt_matrix(doc.penalty.p, mv_ids, cv_ids))
    return "\n".join(out) + "\n"


def cmd_explain(args: argparse.Namespace) -> int:
    snapshot = load_snapshot(args.file)
    doc = explain(snapshot)
    if args.format == "json":
        _write(_dump_json(doc.to_json_dict()), args.output)
    else:
        _write(render_table(doc), args.output)
    return EXIT_OK


def _load_intent(path: str | None) -> list[dict[str, str]] | None:
    if path is None:
        return None
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise InputError("intent file must be a JSON list of {mv, cv, side}")
    return data


def cmd_history(args: argparse.Namespace) -> int:
    snapshots = list(iter_snapshots(args.file))
    records = hist.run_history(snapshots, jobs=args.jobs)
    report = hist.aggregate(records, columns=args.columns)
    overlay = None
    intent = _load_intent(args.intent)
    if args.live:
        live_doc = explain(load_snapshot(args.live))
        overlay = hist.overlay_live(report, live_doc, intent)
    if args.format == "json":
        payload = report.to_json_dict()
        if overlay is not None:
            payload["overlay"] = overlay.to_json_dict()
        _write(_dump_json(payload), args.output)
    elif args.format == "md":
        _write(hist.render_markdown(report, overlay), args.output)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(hist.render_csv_rows(report, overlay))
        _write(buf.getvalue(), args.output)
    return EXIT_OK


def _resolve_mv(snapshot: ControllerSnapshot, token: str) -> int:
    token = token.strip()
    if token in snapshot.mv_ids:
        return snapshot.mv_ids.index(token)
    try:
        idx = int(token)
    except ValueError:
        raise InputError(f"unknown MV {token!r}") from None
    if not 0 <= idx < snapshot.n:
        raise InputError(f"MV index {idx} out of range")
    return idx


def cmd_sweep(args: argparse.Namespace) -> int:
    snapshot = load_snapshot(args.file)
    parts = args.mvs.split(",")
    if len(parts) != 2:
        raise InputError("--mvs expects two comma-separated MVs (ids or indices)")
    mv_i, mv_j = (_resolve_mv(snapshot, p) for p in parts)
    result = sensitivity.sweep_cost_ratio(snapshot, mv_i, mv_j, steps=args.steps)
    if args.csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(result.to_csv_rows())
        _write(buf.getvalue(), args.csv)
    _write(_dump_json(result.to_json_dict()), args.output)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import build_app

    app = build_app(
        history_path=args.history,
        intent_path=args.intent,
        ui_dir=args.ui_dir,
        columns=args.columns,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpx",
        description="Explain steady-state LP targets: shadow-price attribution "
                    "and MV-CV pairing diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explain", help="explain one snapshot")
    p.add_argument("file")
    p.add_argument("--format", choices=["json", "table"], default="json")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_explain)

    p = sub.add_parser("history", help="aggregate pairing statistics over a JSONL stream")
    p.add_argument("file")
    p.add_argument("--intent", default=None)
    p.add_argument("--live", default=None)
    p.add_argument("--columns", type=int, default=hist.DEFAULT_COLUMNS)
    p.add_argument("--format", choices=["json", "md", "csv"], default="json")
    p.add_argument("--jobs", type=int, default=os.cpu_count())
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_history)

    p = sub.add_parser("sweep", help="sweep two MV costs around the circle")
    p.add_argument("file")
    p.add_argument("--mvs", required=True, help="two MVs, ids or indices: MV1,MV2")
    p.add_argument("--steps", type=int, default=360)
    p.add_argument("--csv", default=None, help="also write per-sample CSV here")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("serve", help="run the HTTP API / UI server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8087)
    p.add_argument("--history", default=None)
    p.add_argument("--intent", default=None)
    p.add_argument("--ui-dir", default=None)
    p.add_argument("--columns", type=int, default=hist.DEFAULT_COLUMNS)
    p.set_defaults(fn=cmd_serve)
    return parser


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, StageError):
        return exit_code_for(exc.cause) if isinstance(exc.cause, LpxError) else EXIT_SOLVER
    if isinstance(exc, InputError):
        return EXIT_INPUT
    if isinstance(exc, ComputeError):
        return EXIT_SOLVER
    if isinstance(exc, (OSError, json.JSONDecodeError)):
        return EXIT_INPUT
    return EXIT_SOLVER


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (LpxError, OSError, json.JSONDecodeError) as exc:
        print(f"lpx: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
