#!/usr/bin/env python3
"""Generate a synthetic industrial-scale snapshot stream as JSON-Lines.

Useful for load testing the history pipeline and demoing the server:

    python scripts/gen_history.py --count 2000 -o /tmp/plant.jsonl
    lpx history /tmp/plant.jsonl --format md | head
"""

import argparse
import json
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--mvs", type=int, default=30)
    ap.add_argument("--cvs", type=int, default=63)
    ap.add_argument("--seed", type=int, default=1234)
    ap.add_argument("-o", "--output", default="-")
    args = ap.parse_args()

    sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "tests"))
    from test_acceptance import synthetic_stream

    snaps = synthetic_stream(args.count, n_mv=args.mvs, n_cv=args.cvs, seed=args.seed)
    out = sys.stdout if args.output == "-" else open(args.output, "w", encoding="utf-8")
    try:
        for snap in snaps:
            out.write(json.dumps(snap.to_json_dict()) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"wrote {len(snaps)} snapshots", file=sys.stderr)


if __name__ == "__main__":
    main()
