#!/usr/bin/env python3
"""Walk the bundled 2-MV fixture through every pipeline stage, printing the
intermediate matrices the way you'd inspect them during a controller review.
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from lpx import sensitivity
from lpx.attribution import explain
from lpx.model import load_snapshot

np.set_printoptions(precision=4, suppress=True)


def main() -> None:
    root = pathlib.Path(__file__).resolve().parents[1]
    snap = load_snapshot(str(root / "fixtures" / "sec32.json"))
    doc = explain(snap)
    sol, active = doc.solution, doc.active

    print(f"snapshot: {snap.m} CVs x {snap.n} MVs, costs {snap.costs}")
    print(f"optimal move dMV* = {sol.delta_mv}, objective {sol.objective:.3f}")
    print(f"net shadow prices lambda = {sol.lam}")
    print()
    mv_ids = [snap.mvs[i].id for i in active.mv_u]
    cv_ids = [snap.cvs[j].id for j in active.cv_c]
    print(f"active set: free MVs {mv_ids} hold {cv_ids} at their limits")
    print("G_A =\n", active.g_a)
    print("G_A^-1 =\n", active.g_a_inv)
    print("W = diag(c_u) G_A^-1 =\n", doc.matrices.w)
    print("W sign-corrected =\n", doc.matrices.w_corr)
    print("Pi (normalized) =\n", doc.matrices.pi)
    print("P (penalties) =\n", doc.penalty.p)
    print()
    for pairing, pair in zip(doc.pairings(), doc.assignment.pairs):
        tag = " (local best)" if pair.local_best else ""
        print(f"  {pairing.mv_id} -> {pairing.cv_id}-{pairing.side}"
              f"  penalty {pair.penalty:+.3f}{tag}")
    print(f"total penalty {doc.assignment.total_penalty:+.3f}")

    dp = sensitivity.delta_p(active, doc.matrices)
    print(f"\npairing switch margin dP = {dp:+.3f} "
          f"({'diagonal' if dp < 0 else 'off-diagonal'} pairing wins)")


if __name__ == "__main__":
    main()
