"""Tests for the command-line entry points."""

from __future__ import annotations

import csv
import io
import json

import numpy as np
import pytest

from bayescj import Criterion, Item, run_session
from bayescj.cli import main


@pytest.fixture()
def session_log(tmp_path):
    res = run_session(
        [Item(i) for i in range(4)],
        [Criterion(0, "overall")],
        "nrp",
        lambda i, j, d: min(i, j),
        K=2,
        seed=1,
    )
    path = tmp_path / "log.jsonl"
    with open(path, "w") as fh:
        for entry in res.log:
            fh.write(json.dumps(entry) + "\n")
    return path


@pytest.fixture()
def multi_log(tmp_path):
    res = run_session(
        [Item(i) for i in range(4)],
        [Criterion(0, "a", 0.5), Criterion(1, "b", 0.5)],
        "entropy",
        lambda i, j, d: min(i, j) if d == 0 else max(i, j),
        K=2,
        seed=2,
    )
    path = tmp_path / "multi.jsonl"
    with open(path, "w") as fh:
        for entry in res.log:
            fh.write(json.dumps(entry) + "\n")
    return path


# ---------------------------------------------------------------------------
# rank
# ---------------------------------------------------------------------------


def test_rank_json_to_stdout(session_log, capsys):
    assert main(["rank", "--log", str(session_log)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["order"] == [0, 1, 2, 3]
    assert len(doc["items"]) == 4


def test_rank_csv_format(session_log, capsys):
    assert main(["rank", "--log", str(session_log), "--format", "csv"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [row["item_id"] for row in rows] == ["0", "1", "2", "3"]


def test_rank_multi_criteria_aggregations_differ_only_in_method(multi_log, capsys):
    assert main(["rank", "--log", str(multi_log), "--aggregation", "mcp"]) == 0
    mcp_doc = json.loads(capsys.readouterr().out)
    assert main(["rank", "--log", str(multi_log), "--aggregation", "mcr"]) == 0
    mcr_doc = json.loads(capsys.readouterr().out)
    assert sorted(mcp_doc["order"]) == sorted(mcr_doc["order"]) == [0, 1, 2, 3]


def test_rank_single_criterion_index_aggregation(multi_log, capsys):
    assert main(["rank", "--log", str(multi_log), "--aggregation", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    # Criterion 1 was judged "higher id wins", so the order reverses.
    assert doc["order"] == [3, 2, 1, 0]


def test_rank_explicit_criteria_names(multi_log, capsys):
    rc = main(
        ["rank", "--log", str(multi_log), "--criteria", "a:0.7,b:0.3"]
    )
    assert rc == 0
    json.loads(capsys.readouterr().out)


# ---------------------------------------------------------------------------
# reliability / report
# ---------------------------------------------------------------------------


def test_reliability_lists_every_pair(session_log, capsys):
    assert main(["reliability", "--log", str(session_log)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["pairs"]) == 6
    assert {"i", "j", "d", "map", "eap", "n", "flagged", "moderated"} <= set(
        doc["pairs"][0]
    )


def test_reliability_csv(session_log, capsys):
    assert main(["reliability", "--log", str(session_log), "--format", "csv"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 6


def test_report_bundles_rankings_reliability_and_flags(session_log, capsys):
    assert main(["report", "--log", str(session_log)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert {"rankings", "reliability", "flagged"} <= set(doc)
    assert doc["rankings"]["holistic"]
    assert set(doc["rankings"]["per_criterion"]) == {"0"}


def test_report_csv_writes_files(session_log, tmp_path, capsys):
    out = tmp_path / "report-out"
    rc = main(
        [
            "report",
            "--log",
            str(session_log),
            "--format",
            "csv",
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    names = {p.name for p in out.iterdir()}
    assert "ranking_holistic.csv" in names
    assert "ranking_criterion_0.csv" in names
    assert "reliability.csv" in names


def test_report_on_empty_log_is_the_prior_state(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert main(["report", "--log", str(empty), "--items", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    ranks = [row["expected_rank"] for row in doc["rankings"]["holistic"]]
    assert ranks == [2.0, 2.0, 2.0]


def test_empty_log_without_item_count_is_a_usage_error(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert main(["report", "--log", str(empty)]) == 2
    assert "error" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# Failure modes
# ---------------------------------------------------------------------------


def test_malformed_log_reports_line_number_and_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text(
        '{"seq": 0, "pair": [0, 1], "criterion": 0, "winner": 0}\n{oops\n'
    )
    assert main(["rank", "--log", str(bad)]) == 2
    err = capsys.readouterr().err
    assert f"{bad}:2" in err
    assert "malformed" in err


def test_log_with_bad_winner_reports_line_number(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"seq": 0, "pair": [0, 1], "criterion": 0, "winner": 7}\n')
    assert main(["rank", "--log", str(bad)]) == 2
    assert f"{bad}:1" in capsys.readouterr().err


def test_missing_log_file_exits_2(capsys):
    assert main(["rank", "--log", "/definitely/not/here.jsonl"]) == 2
    assert "not found" in capsys.readouterr().err


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# weights / gen-marks
# ---------------------------------------------------------------------------


def test_weights_emits_simplex_rows(capsys):
    assert main(["weights", "--criteria", "3", "--count", "4"]) == 0
    rows = [
        [float(cell) for cell in line.split(",")]
        for line in capsys.readouterr().out.strip().splitlines()
    ]
    assert len(rows) == 4
    for row in rows:
        assert sum(row) == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(rows[0], [1 / 3, 1 / 6, 1 / 2], atol=1e-12)


def test_weights_json_format(capsys):
    assert main(["weights", "--criteria", "4", "--count", "2", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["weights"]) == 2
    assert len(doc["weights"][0]) == 4


def test_gen_marks_echoes_seed_and_emits_csv(capsys):
    assert main(["gen-marks", "--items", "3", "--criteria", "a,b", "--seed", "4"]) == 0
    captured = capsys.readouterr()
    assert "# seed=4" in captured.err
    rows = list(csv.DictReader(io.StringIO(captured.out)))
    assert len(rows) == 3
    assert set(rows[0]) == {"id", "a", "b"}


def test_gen_marks_to_file_round_trips(tmp_path, capsys):
    out = tmp_path / "marks.csv"
    assert main(
        [
            "gen-marks",
            "--items",
            "5",
            "--criteria",
            "overall",
            "--profile",
            "strict",
            "--seed",
            "0",
            "--out",
            str(out),
        ]
    ) == 0
    from bayescj.harness import ingest_marks

    items = ingest_marks(out, "strict")
    assert len(items) == 5


def test_gen_marks_is_deterministic(capsys):
    main(["gen-marks", "--items", "3", "--criteria", "x", "--seed", "9"])
    first = capsys.readouterr().out
    main(["gen-marks", "--items", "3", "--criteria", "x", "--seed", "9"])
    assert capsys.readouterr().out == first


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def test_simulate_tiny_grid_writes_results(tmp_path, capsys):
    out = tmp_path / "results"
    rc = main(
        [
            "simulate",
            "--synthetic",
            "8",
            "--n",
            "5",
            "--k",
            "3",
            "--strategy",
            "bcj-entropy,mcr-random",
            "--trials",
            "2",
            "--seed",
            "0",
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    summary = list(csv.DictReader(io.StringIO((out / "summary.csv").read_text())))
    assert {row["strategy"] for row in summary} == {"bcj-entropy", "mcr-random"}
    assert all(0.0 <= float(row["median_tau"]) <= 1.0 for row in summary)
    cells = list((out / "cells").glob("*.jsonl"))
    assert len(cells) == 2
    assert (out / "comparison_n5_k3.csv").exists()
    assert "# seed=0" in capsys.readouterr().err


def test_rank_on_emitted_log_reproduces_the_simulated_ranking(tmp_path, capsys):
    out = tmp_path / "results"
    rc = main(
        [
            "simulate",
            "--synthetic",
            "8",
            "--n",
            "6",
            "--k",
            "4",
            "--strategy",
            "bcj-entropy",
            "--trials",
            "1",
            "--seed",
            "3",
            "--out",
            str(out),
            "--emit-logs",
        ]
    )
    assert rc == 0
    capsys.readouterr()
    cell = json.loads(
        (out / "cells" / "n6_k4_bcj-entropy.jsonl").read_text().splitlines()[0]
    )
    log_path = out / "logs" / "n6_k4_bcj-entropy_w0_t0.jsonl"
    assert main(["rank", "--log", str(log_path), "--aggregation", "0"]) == 0
    replayed = json.loads(capsys.readouterr().out)
    assert replayed["order"] == cell["final_order"]


def test_simulate_emit_logs_without_out_is_a_usage_error(capsys):
    rc = main(
        ["simulate", "--synthetic", "8", "--n", "5", "--k", "2", "--emit-logs"]
    )
    assert rc == 2
    assert "--emit-logs requires --out" in capsys.readouterr().err


def test_simulate_requires_enough_marks(tmp_path, capsys):
    rc = main(
        [
            "simulate",
            "--synthetic",
            "3",
            "--n",
            "5",
            "--k",
            "2",
            "--strategy",
            "bcj-entropy",
            "--trials",
            "1",
            "--out",
            str(tmp_path / "r"),
        ]
    )
    # The trial fails inside the grid and is recorded, not raised.
    assert rc == 0
    rows = [
        json.loads(line)
        for line in (tmp_path / "r" / "cells" / "n5_k2_bcj-entropy.jsonl")
        .read_text()
        .splitlines()
    ]
    assert rows[0]["error"]


def test_simulate_from_marks_file(tmp_path, capsys):
    marks_path = tmp_path / "marks.csv"
    main(
        [
            "gen-marks",
            "--items",
            "8",
            "--criteria",
            "overall",
            "--seed",
            "3",
            "--out",
            str(marks_path),
        ]
    )
    capsys.readouterr()
    rc = main(
        [
            "simulate",
            "--marks",
            str(marks_path),
            "--n",
            "4",
            "--k",
            "2",
            "--strategy",
            "bcj-entropy",
            "--trials",
            "1",
            "--out",
            str(tmp_path / "results"),
        ]
    )
    assert rc == 0
