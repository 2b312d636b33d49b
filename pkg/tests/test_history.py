import copy
import os
import json

import pytest

from lpx import history as hist
from lpx.attribution import explain
from lpx.errors import EmptyHistory, IdMismatch, OutOfOrderTimestamp
from lpx.model import validate_snapshot

from conftest import make_snapshot


@pytest.fixture(scope="module")
def demo_records():
    snaps = []
    with open("fixtures/history_demo.jsonl") as fh:
        for line in fh:
            snaps.append(validate_snapshot(json.loads(line)))
    return hist.run_history(snaps)


def repeat_fixture(sec32_raw, count, mutate=None):
    snaps = []
    for i in range(count):
        raw = copy.deepcopy(sec32_raw)
        raw["timestamp"] = f"2024-05-06T{10 + i // 60:02d}:{i % 60:02d}:00+00:00"
        if mutate:
            mutate(i, raw)
        snaps.append(validate_snapshot(raw))
    return snaps


class TestRunHistory:
    def test_identical_snapshots_identical_records(self, sec32_raw):
        records = hist.run_history(repeat_fixture(sec32_raw, 4))
        for r in records:
            assert r.mv_labels["MV1"].text == "CV1-HI"
            assert r.mv_labels["MV2"].text == "CV2-LO"
            assert not r.failed and not r.degenerate

    def test_clamped_interval_repairs_remaining_mv(self, sec32_raw):
        # Hand-solved reduced problem: with dMV1 floored at -2 the cheap MV
        # runs CV2 to its low bound alone.
        def clamp(i, raw):
            if i == 1:
                raw["mv_bounds"][0] = {"lower": 46.0, "upper": None}

        records = hist.run_history(repeat_fixture(sec32_raw, 2, clamp))
        assert records[1].mv_labels["MV1"].text == "MV-LO"
        assert records[1].mv_labels["MV2"].text == "CV2-LO"

    def test_out_of_order_rejected(self, sec32_raw):
        snaps = repeat_fixture(sec32_raw, 2)
        with pytest.raises(OutOfOrderTimestamp):
            hist.run_history(list(reversed(snaps)))

    def test_oos_interval_labeled(self, sec32_raw):
        def kill(i, raw):
            if i == 0:
                raw["mvs"][0]["in_service"] = False

        records = hist.run_history(repeat_fixture(sec32_raw, 1, kill))
        assert records[0].mv_labels["MV1"].text == "OOS"

    def test_free_label_on_degenerate_zero_cost(self):
        snap = make_snapshot(
            [[1.0, -0.5]], [0.0, 0.0],
            cv_lo=[-1], cv_hi=[1], mv_lo=[-2, -2], mv_hi=[2, 2],
        )
        record = hist.run_history([snap])[0]
        assert record.degenerate
        assert {label.text for label in record.mv_labels.values()} == {"FREE"}

    def test_parallel_matches_serial(self, sec32_raw):
        snaps = repeat_fixture(sec32_raw, 6)
        serial = hist.run_history(snaps)
        parallel = hist.run_history(snaps, jobs=2)
        assert serial == parallel

    @pytest.mark.skipif(
        not os.environ.get("LPX_BIGLOAD"),
        reason="200-day full-scale run (~288k intervals, the better part of an "
               "hour); set LPX_BIGLOAD=1 to include it",
    )
    def test_200_day_minute_interval_run(self):
        from test_acceptance import synthetic_stream

        snaps = synthetic_stream(288_000)
        records = hist.run_history(snaps, jobs=os.cpu_count())
        report = hist.aggregate(records)
        assert report.intervals == 288_000
        assert report.explained + report.failed == 288_000
        assert len(report.rows) == 30


class TestAggregate:
    def test_table_one_row_shape(self):
        # 994 + 5 + 1 intervals: the classic dominant-pair row.
        records = []
        for i, (cv, count) in enumerate([("CV2", 994), ("CV3", 5), ("CV9", 1)]):
            for _ in range(count):
                records.append(
                    hist.IntervalRecord(
                        timestamp=f"t{len(records)}",
                        mv_labels={"MV2": hist.MvLabel(hist.LabelKind.PAIRED, cv, "HI")},
                    )
                )
        report = hist.aggregate(records)
        row = report.rows[0]
        cells = [f"{s.text} ({s.pct_text}%)" for s in row.top]
        assert cells == ["CV2-HI (99.4%)", "CV3-HI (0.5%)", "CV9-HI (0.1%)"]
        assert row.tail == ()
        assert sum(s.pct for s in row.top) == pytest.approx(100.0, abs=0.01)

    def test_single_record(self, sec32_raw):
        records = hist.run_history(repeat_fixture(sec32_raw, 1))
        report = hist.aggregate(records)
        assert report.rows[0].top[0].pct == 100.0
        assert len(report.rows[0].top) == 1

    def test_infeasible_summary(self, demo_records):
        report = hist.aggregate(demo_records)
        assert [s.cv_id for s in report.infeasible] == ["CV3"]
        stat = report.infeasible[0]
        assert stat.count == 1 and stat.sides == ("LO",)
        assert stat.pct == pytest.approx(100.0 / 3)

    def test_tail_bucket_below_top_columns(self, sec32_raw):
        def wiggle(i, raw):
            if i % 4 == 1:
                raw["mv_bounds"][0] = {"lower": 46.0, "upper": None}
            if i % 8 == 3:
                raw["mvs"][0]["in_service"] = False

        records = hist.run_history(repeat_fixture(sec32_raw, 16, wiggle))
        report = hist.aggregate(records, columns=2)
        for row in report.rows:
            pcts = [s.pct for s in row.top] + [s.pct for s in row.tail]
            assert pcts == sorted(pcts, reverse=True)
            assert sum(s.count for s in row.top) + sum(s.count for s in row.tail) == 16
            for s in row.tail:
                assert s.pct <= row.top[-1].pct

    def test_percentages_sum_to_100(self, demo_records):
        report = hist.aggregate(demo_records)
        for row in report.rows:
            total = sum(s.pct for s in row.top) + sum(s.pct for s in row.tail)
            assert total == pytest.approx(100.0, abs=0.01)

    def test_empty_history(self):
        with pytest.raises(EmptyHistory):
            hist.aggregate([])

    def test_deterministic_rerun_bit_identical(self, demo_records):
        a = json.dumps(hist.aggregate(demo_records).to_json_dict(), sort_keys=True)
        b = json.dumps(hist.aggregate(list(demo_records)).to_json_dict(), sort_keys=True)
        assert a == b

    def test_order_insensitive_percentages(self, demo_records):
        base = hist.aggregate(demo_records)
        flipped = hist.aggregate(list(demo_records)[::-1])
        for r1, r2 in zip(base.rows, flipped.rows):
            assert [(s.text, s.pct) for s in r1.top] == [(s.text, s.pct) for s in r2.top]


class TestFormatPct:
    def test_standard_rounding(self):
        assert hist.format_pct(99.4) == "99.4"
        assert hist.format_pct(0.5) == "0.5"
        assert hist.format_pct(0.1) == "0.1"

    def test_rare_values_keep_first_digit(self):
        assert hist.format_pct(0.05) == "0.05"
        assert hist.format_pct(0.001) == "0.001"
        assert hist.format_pct(0.0062) == "0.006"

    def test_half_even(self):
        assert hist.format_pct(0.25) == f"{round(0.25, 1):.1f}"


class TestOverlay:
    def make(self, demo_records, intent):
        report = hist.aggregate(demo_records)
        with open("fixtures/history_demo.jsonl") as fh:
            last = validate_snapshot(json.loads(fh.readlines()[-1]))
        return report, hist.overlay_live(report, explain(last), intent)

    def test_green_on_intent_match(self, demo_records):
        intent = json.load(open("fixtures/intent_demo.json"))
        _, overlay = self.make(demo_records, intent)
        assert overlay.mv["MV1"].color == "GREEN"
        assert overlay.mv["MV2"].color == "GREEN"

    def test_yellow_when_outside_intent(self, demo_records):
        _, overlay = self.make(demo_records, [{"mv": "MV1", "cv": "CV3", "side": "HI"}])
        assert overlay.mv["MV1"].color == "YELLOW"

    def test_red_on_infeasible(self, demo_records):
        intent = json.load(open("fixtures/intent_demo.json"))
        _, overlay = self.make(demo_records, intent)
        assert overlay.infeasible == (("CV3", "LO"),)

    def test_no_intent_no_judgement(self, demo_records):
        _, overlay = self.make(demo_records, None)
        assert overlay.mv["MV1"].color is None
        assert not overlay.intent_configured

    def test_clamped_is_yellow(self, sec32_raw):
        raw = copy.deepcopy(sec32_raw)
        raw["mv_bounds"][0] = {"lower": 46.0, "upper": None}
        records = hist.run_history([validate_snapshot(raw)])
        report = hist.aggregate(records)
        overlay = hist.overlay_live(report, explain(validate_snapshot(raw)), [])
        assert overlay.mv["MV1"].label == "MV-LO"
        assert overlay.mv["MV1"].color == "YELLOW"

    def test_id_mismatch(self, demo_records):
        report = hist.aggregate(demo_records)
        other = make_snapshot([[1.0]], [1.0], cv_lo=[-1], cv_hi=[1], mv_lo=[-1], mv_hi=[1])
        with pytest.raises(IdMismatch):
            hist.overlay_live(report, explain(other), None)


class TestRenderers:
    def test_markdown_layout(self, demo_records):
        report = hist.aggregate(demo_records)
        md = hist.render_markdown(report)
        lines = md.strip().splitlines()
        assert lines[0].startswith("| MV | S1 | S2 | S3 | S_inf |")
        assert any("CV1-HI" in line for line in lines)
        assert lines[-1].startswith("| Infeasible | CV3")

    def test_markdown_dots(self, demo_records):
        intent = json.load(open("fixtures/intent_demo.json"))
        report = hist.aggregate(demo_records)
        with open("fixtures/history_demo.jsonl") as fh:
            last = validate_snapshot(json.loads(fh.readlines()[-1]))
        overlay = hist.overlay_live(report, explain(last), intent)
        md = hist.render_markdown(report, overlay)
        assert "[G] CV1-HI" in md
        assert "[R] CV3" in md

    def test_csv_rows(self, demo_records):
        report = hist.aggregate(demo_records)
        rows = hist.render_csv_rows(report)
        assert rows[0][:2] == ["mv", "s1"]
        assert len(rows) == 1 + len(report.rows) + len(report.infeasible)
