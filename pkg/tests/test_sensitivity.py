import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpx import attribution as attr
from lpx import sensitivity as sens
from lpx.errors import InputError, NotApplicable

from conftest import make_snapshot
from test_attribution import full_matrices, synthetic_active


class TestDeltaP:
    def test_golden_fixture(self, sec32):
        doc = attr.explain(sec32)
        dp = sens.delta_p(doc.active, doc.matrices)
        assert dp == pytest.approx(-1.23, abs=0.01)
        pi = doc.matrices.pi
        direct = (pi[0, 0] + pi[1, 1]) - (pi[0, 1] + pi[1, 0])
        assert abs(dp - direct) <= 1e-9 * max(1.0, abs(direct))

    def test_zero_other_cost_is_switching_point(self):
        # Shared-preference geometry with the competing MV's cost at zero.
        active = synthetic_active([[-0.115, 0.001], [3.09, 0.08]], [12.5, 0.0])
        matrices = full_matrices(active)
        assert sens.delta_p(active, matrices) == 0.0

    def test_not_applicable_without_shared_preference(self):
        active = synthetic_active([[1.0, 0.1], [0.1, 1.0]], [1.0, 1.0])
        matrices = full_matrices(active)
        pi = matrices.pi
        assert np.argmin(pi[:, 0]) != np.argmin(pi[:, 1])
        with pytest.raises(NotApplicable):
            sens.delta_p(active, matrices)

    def test_not_applicable_for_k1(self):
        active = synthetic_active([[2.0]], [1.0])
        with pytest.raises(NotApplicable):
            sens.delta_p(active, full_matrices(active))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=100)
    def test_factorized_equals_direct(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(20):
            g = rng.uniform(-3, 3, (2, 2)) + np.eye(2) * rng.uniform(1, 3)
            c = rng.uniform(-8, 8, 2)
            try:
                active = synthetic_active(g, c)
            except Exception:
                continue
            matrices = full_matrices(active)
            pi = matrices.pi
            mins = pi.min(axis=0)
            shared = [r for r in range(2) if pi[r, 0] == mins[0] and pi[r, 1] == mins[1]]
            if not shared:
                continue
            dp = sens.delta_p(active, matrices)
            direct = (pi[0, 0] + pi[1, 1]) - (pi[0, 1] + pi[1, 0])
            assert abs(dp - direct) <= 1e-9 * max(1.0, abs(direct))
            return


class TestSweep:
    def test_sec32_four_regions(self, sec32):
        res = sens.sweep_cost_ratio(sec32, 0, 1, steps=360)
        assert len(res.regions) == 4
        assert {r.vertex_id for r in res.regions} == {"V1", "V2", "V3", "V4"}
        # Adjacent regions always switch vertex.
        ring = list(res.regions) + [res.regions[0]]
        for a, b in zip(ring, ring[1:]):
            assert a.vertex_signature != b.vertex_signature

    def test_regions_partition_circle(self, sec32):
        res = sens.sweep_cost_ratio(sec32, 0, 1, steps=180)
        spans = sorted((r.theta_start, r.theta_end) for r in res.regions)
        covered = sum(end - start for start, end in spans)
        assert covered == pytest.approx(2 * math.pi, abs=1e-3)

    def test_pairing_flips_only_at_cost_axis_crossings(self, sec32):
        res = sens.sweep_cost_ratio(sec32, 0, 1, steps=720)
        axes = [0.0, math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi]
        for f in res.flip_points:
            if f.changed != "pairing":
                continue
            assert min(abs(f.theta - a) for a in axes) < 1e-3

    def test_box_geometry_four_quadrant_cones(self):
        # No CV can bind: the MV box alone shapes four quadrant cones.
        snap = make_snapshot(
            [[1e-4, 1e-4]], [1.0, 1.0],
            cv_lo=[-1000], cv_hi=[1000], mv_lo=[-1, -2], mv_hi=[3, 4],
        )
        res = sens.sweep_cost_ratio(snap, 0, 1, steps=360)
        assert len(res.regions) == 4
        for f in res.flip_points:
            if f.changed in ("vertex", "both"):
                nearest = min(
                    abs(f.theta - a)
                    for a in (0, math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi)
                )
                assert nearest < 1e-3

    def test_samples_sorted_and_flagged(self, sec32):
        res = sens.sweep_cost_ratio(sec32, 0, 1, steps=64)
        thetas = [s.theta for s in res.samples]
        assert thetas == sorted(thetas)
        assert len(res.samples) >= 64
        assert all(not s.failed for s in res.samples)

    def test_region_membership_constant(self, sec32):
        # Dense re-check: the vertex signature holds throughout each region.
        res = sens.sweep_cost_ratio(sec32, 0, 1, steps=360)
        region = max(res.regions, key=lambda r: r.theta_end - r.theta_start)
        inside = [
            s for s in res.samples
            if not s.degenerate and region.contains(s.theta)
            and region.theta_start + 1e-5 < (s.theta % (2 * math.pi)) < region.theta_end - 1e-5
        ]
        assert inside and all(s.vertex_signature == region.vertex_signature for s in inside)

    def test_min_steps_enforced(self, sec32):
        with pytest.raises(InputError):
            sens.sweep_cost_ratio(sec32, 0, 1, steps=7)

    def test_oos_mv_rejected(self, sec32):
        raw = sec32.to_json_dict()
        raw["mvs"][1]["in_service"] = False
        from lpx.model import validate_snapshot

        with pytest.raises(InputError):
            sens.sweep_cost_ratio(validate_snapshot(raw), 0, 1)
