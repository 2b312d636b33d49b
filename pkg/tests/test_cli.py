import json


from lpx.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExplain:
    def test_table_shows_pairings(self, capsys):
        code, out, _ = run(capsys, "explain", "fixtures/sec32.json", "--format", "table")
        assert code == 0
        assert "MV1 -> CV1 (HI)" in out
        assert "MV2 -> CV2 (LO)" in out

    def test_missing_file_exit_2(self, capsys):
        code, _, err = run(capsys, "explain", "fixtures/nope.json")
        assert code == 2
        assert "nope.json" in err

    def test_json_revalidates_against_schema(self, capsys, sec32):
        code, out, _ = run(capsys, "explain", "fixtures/sec32.json", "--format", "json")
        assert code == 0
        doc = json.loads(out)
        assert doc["schema_version"] == 1
        for key in ("solution", "kkt", "active_set", "matrices", "penalty",
                    "assignment", "pairings"):
            assert key in doc
        k = doc["active_set"]["k"]
        for name in ("w", "w_corr", "pi"):
            mat = doc["matrices"][name]
            assert len(mat) == k and all(len(row) == k for row in mat)
        assert len(doc["solution"]["lambda"]) == sec32.m
        assert len(doc["solution"]["delta_mv"]) == sec32.n
        assert {p["mv"] for p in doc["pairings"]} <= set(doc["mv_ids"])

    def test_unbounded_exit_3(self, capsys):
        code, _, err = run(capsys, "explain", "fixtures/unbounded.json")
        assert code == 3
        assert "solve" in err and "nbounded" in err

    def test_invalid_snapshot_exit_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        raw = json.load(open("fixtures/sec32.json"))
        raw["cv_bounds"][0] = {"lower": 0.7, "upper": -0.7}
        bad.write_text(json.dumps(raw))
        code, _, err = run(capsys, "explain", str(bad))
        assert code == 2
        assert "BoundOrderViolation" in err

    def test_byte_identical_reruns(self, capsys):
        _, out1, _ = run(capsys, "explain", "fixtures/sec32.json")
        _, out2, _ = run(capsys, "explain", "fixtures/sec32.json")
        assert out1 == out2


class TestHistory:
    def test_markdown_three_data_columns(self, capsys):
        code, out, _ = run(
            capsys, "history", "fixtures/history_demo.jsonl", "--format", "md", "--jobs", "1"
        )
        assert code == 0
        header = out.splitlines()[0]
        assert header.split("|")[2:5] == [" S1 ", " S2 ", " S3 "]

    def test_empty_file_exit_2(self, capsys, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        code, _, err = run(capsys, "history", str(empty))
        assert code == 2
        assert "history" in err.lower()

    def test_live_intent_annotations_in_json(self, capsys, tmp_path):
        with open("fixtures/history_demo.jsonl") as fh:
            last = fh.readlines()[-1]
        live = tmp_path / "live.json"
        live.write_text(last)
        code, out, _ = run(
            capsys, "history", "fixtures/history_demo.jsonl",
            "--intent", "fixtures/intent_demo.json", "--live", str(live),
            "--jobs", "1",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["overlay"]["mv"]["MV1"]["color"] == "GREEN"
        assert payload["overlay"]["infeasible"][0]["cv"] == "CV3"

    def test_columns_flag(self, capsys):
        code, out, _ = run(
            capsys, "history", "fixtures/history_demo.jsonl",
            "--format", "md", "--columns", "2", "--jobs", "1",
        )
        assert code == 0
        assert out.splitlines()[0].count("S") == 3  # S1, S2, S_inf


class TestSweep:
    def test_four_regions_json(self, capsys):
        code, out, _ = run(
            capsys, "sweep", "fixtures/sec32.json", "--mvs", "MV1,MV2", "--steps", "180"
        )
        assert code == 0
        payload = json.loads(out)
        assert len(payload["regions"]) == 4

    def test_too_few_steps_exit_2(self, capsys):
        code, _, _ = run(
            capsys, "sweep", "fixtures/sec32.json", "--mvs", "0,1", "--steps", "4"
        )
        assert code == 2

    def test_csv_rows_match_samples(self, capsys, tmp_path):
        csv_path = tmp_path / "sweep.csv"
        code, out, _ = run(
            capsys, "sweep", "fixtures/sec32.json", "--mvs", "0,1",
            "--steps", "64", "--csv", str(csv_path),
        )
        assert code == 0
        payload = json.loads(out)
        rows = csv_path.read_text().strip().splitlines()
        assert len(rows) == 1 + len(payload["samples"])

    def test_unknown_mv_exit_2(self, capsys):
        code, _, err = run(capsys, "sweep", "fixtures/sec32.json", "--mvs", "MVX,MV2")
        assert code == 2
        assert "MVX" in err
