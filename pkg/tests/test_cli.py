import json

import pytest

from spellerkit.cli import main
from spellerkit.dialogue import bundled_dataset_path, load_bundled_dataset


def test_simulate_report_shape(tmp_path, capsys):
    out = tmp_path / "rep"
    rc = main(["simulate", "--modes", "naive,oracle", "--p", "1.0",
               "--out", str(out), "--seed", "3"])
    assert rc == 0
    csv_lines = (out / "report.csv").read_text().strip().splitlines()
    assert csv_lines[0].startswith("category,mode,")
    # 4 categories + overall, 2 modes each
    assert len(csv_lines) == 1 + 5 * 2
    doc = json.loads((out / "report.json").read_text())
    naive_rows = [r for r in doc if r["mode"] == "naive" and r["category"] == "overall"]
    items = load_bundled_dataset()
    expected = sum(len(i.target) + 1 for i in items) / len(items)
    assert naive_rows[0]["mean_keystrokes"] == pytest.approx(expected)


def test_simulate_deterministic_reports(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["simulate", "--modes", "naive,dwg", "--p", "0.9", "--runs", "2",
          "--seed", "11", "--out", str(a)])
    main(["simulate", "--modes", "naive,dwg", "--p", "0.9", "--runs", "2",
          "--seed", "11", "--out", str(b)])
    assert (a / "report.csv").read_bytes() == (b / "report.csv").read_bytes()
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_simulate_traces(tmp_path):
    out = tmp_path / "rep"
    rc = main(["simulate", "--modes", "naive", "--out", str(out), "--traces"])
    assert rc == 0
    lines = (out / "traces.jsonl").read_text().strip().splitlines()
    assert len(lines) == len(load_bundled_dataset())
    first = json.loads(lines[0])
    assert first["completed"] is True
    assert first["keystrokes"] == len(first["trace"])


def test_simulate_rejects_unknown_mode(tmp_path, capsys):
    rc = main(["simulate", "--modes", "telepathy", "--out", str(tmp_path)])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_simulate_missing_dataset(tmp_path, capsys):
    rc = main(["simulate", "--dataset", str(tmp_path / "nope.jsonl"),
               "--out", str(tmp_path)])
    assert rc == 1


def test_decode_bench_grid(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    rc = main(["decode-bench", "--subjects", "2", "--classes", "6",
               "--snr", "0", "--train-trials", "2", "--test-trials", "6",
               "--methods", "FBSCCA,FBTRCA", "--seed", "1", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "subject,FBSCCA,FBTRCA"
    assert len(lines) == 4  # 2 subjects + header + Avg
    assert lines[-1].startswith("Avg,")
    for row in lines[1:]:
        for cell in row.split(",")[1:]:
            assert 0.0 <= float(cell) <= 100.0


def test_dataset_stats_cli(capsys):
    rc = main(["dataset-stats", "--dataset", str(bundled_dataset_path())])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("category,utterances,words,characters")
    assert "total,16," in out


def test_layout_cli(capsys):
    rc = main(["layout"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["keys"]) == 40
