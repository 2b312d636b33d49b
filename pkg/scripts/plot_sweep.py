#!/usr/bin/env python3
"""Polar plot of a cost-angle sweep: critical regions and pairing flips.

    python scripts/plot_sweep.py fixtures/sec32.json --mvs 0,1 -o /tmp/sweep.png
"""

import argparse
import math
import pathlib
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from lpx.model import load_snapshot
from lpx.sensitivity import sweep_cost_ratio


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("snapshot")
    ap.add_argument("--mvs", default="0,1")
    ap.add_argument("--steps", type=int, default=720)
    ap.add_argument("-o", "--output", default="sweep.png")
    args = ap.parse_args()

    i, j = (int(t) for t in args.mvs.split(","))
    result = sweep_cost_ratio(load_snapshot(args.snapshot), i, j, steps=args.steps)

    fig, ax = plt.subplots(subplot_kw={"projection": "polar"}, figsize=(7, 7))
    cmap = plt.get_cmap("tab10")
    for idx, region in enumerate(result.regions):
        thetas = [region.theta_start + t * (region.theta_end - region.theta_start) / 128
                  for t in range(129)]
        ax.fill_between(thetas, 0.75, 1.0, color=cmap(idx % 10), alpha=0.5,
                        label=f"{region.vertex_id}")
    for flip in result.flip_points:
        style = {"vertex": "k-", "pairing": "r--", "both": "k--"}[flip.changed]
        ax.plot([flip.theta, flip.theta], [0.0, 1.0], style, lw=1.2)
    ax.set_yticklabels([])
    ax.set_title(f"cost-angle sweep over MVs {i},{j}: regions and flips "
                 f"(dashed red = pairing flip)")
    ax.legend(loc="lower left", bbox_to_anchor=(1.02, 0.0))
    fig.savefig(args.output, dpi=130, bbox_inches="tight")
    print(f"wrote {args.output} ({len(result.regions)} regions, "
          f"{len(result.flip_points)} flips)", file=sys.stderr)


if __name__ == "__main__":
    main()
