import csv
import io
import json

import pytest

from ppfim.bench import BenchRow, check_row, dispersion, run_cell, run_grid
from ppfim.cli import EXIT_DATAERR, EXIT_IOERR, EXIT_USAGE, main
from ppfim.crypto import DoubleEncryptionKey
from ppfim.dataset import generate_synthetic, parse_basket_file

from conftest import SAMPLE


@pytest.fixture
def sample_file(tmp_path):
    path = tmp_path / "sample.txt"
    path.write_bytes(SAMPLE)
    return path


def _itemsets(report):
    return {tuple(f["items"]) for f in report["frequent_itemsets"]}


def test_mine_sample(sample_file, tmp_path):
    out = tmp_path / "report.json"
    code = main(["mine", "--input", str(sample_file), "--sigma", "0.5", "--ics", "1", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert _itemsets(report) == {("a",), ("b",), ("c",), ("a", "b"), ("a", "c")}
    assert report["format_version"] == 1
    assert report["mode"] == "union"
    assert report["visits_total"] == 14


def test_mine_rejects_bad_sigma(sample_file, capsys):
    assert main(["mine", "--input", str(sample_file), "--sigma", "1.1"]) == EXIT_USAGE
    assert "sigma" in capsys.readouterr().err


def test_mine_report_is_reproducible(sample_file, tmp_path):
    bodies = []
    for name in ("one.json", "two.json"):
        out = tmp_path / name
        main(["mine", "--input", str(sample_file), "--ics", "2", "--seed", "17", "--no-timing", "--out", str(out)])
        bodies.append(out.read_bytes())
    assert bodies[0] == bodies[1]


def test_mine_io_and_data_errors(tmp_path, capsys):
    assert main(["mine", "--input", str(tmp_path / "missing.txt")]) == EXIT_IOERR
    bad = tmp_path / "bad.txt"
    bad.write_bytes(b"a b\n\xff\n")
    assert main(["mine", "--input", str(bad)]) == EXIT_DATAERR
    assert "line 2" in capsys.readouterr().err


def test_key_from_environment(sample_file, tmp_path, monkeypatch):
    monkeypatch.setenv("PPFIM_CAESAR_SHIFT", "300")
    assert main(["mine", "--input", str(sample_file)]) == EXIT_USAGE
    # an explicit flag beats the environment
    out = tmp_path / "r.json"
    assert main(["mine", "--input", str(sample_file), "--caesar-shift", "9", "--sigma", "0.5", "--out", str(out)]) == 0


def test_split_report_cli(sample_file, capsys):
    assert main(["split-report", "--input", str(sample_file), "--ics", "3", "--seed", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert [b["size"] for b in report["blocks"]] == [2, 1, 1]


def test_bench_rows_respect_invariants():
    report = run_grid(owners=[1], ics=[1, 2, 4], sigmas=[0.1], n_transactions=[400], seed=3)
    assert len(report.rows) == 3
    for row in report.rows:
        assert not row.error
        assert row.visits_customized <= row.visits_classic
        assert row.recall_vs_exact == 1.0
    assert len({r.visits_classic_unsplit for r in report.rows}) == 1


def test_bench_sigma_one_keeps_only_universal_items():
    db = parse_basket_file(b"a b\na c\na b c\n")
    row = run_cell(db, 1, 1, 1.0)
    assert not row.error
    assert row.itemsets_exact == 1 and row.itemsets_found == 1


def test_bench_union_recall_on_1000():
    db = generate_synthetic(1000, 20, 5, seed=1)
    union = run_cell(db, 1, 4, 0.1, mode="union")
    summed = run_cell(db, 1, 4, 0.1, mode="sum")
    assert union.recall_vs_exact == 1.0 and not union.error
    assert summed.precision_vs_exact == 1.0 and not summed.error


def test_bench_records_cell_failure_and_continues():
    report = run_grid(owners=[1], ics=[0, 2], sigmas=[0.1], n_transactions=[50])
    assert report.rows[0].error.startswith("InvalidParameterError")
    assert not report.rows[1].error
    assert not report.ok


def test_check_row_flags_violations():
    row = BenchRow(1, 1, 0.1, 10, "union", visits_customized=5, visits_classic=4, recall_vs_exact=0.5)
    assert len(check_row(row)) == 2
    row = BenchRow(1, 1, 0.1, 10, "sum", precision_vs_exact=0.9)
    assert check_row(row) == ["sum-mode precision 0.9 != 1.0"]


def test_bench_cli_csv(tmp_path):
    out = tmp_path / "bench.csv"
    code = main(["bench", "--ics", "1,2", "--tx", "200", "--sigma", "0.2,0.5", "--owners", "1,2", "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 8
    assert {"visits_customized", "visits_classic", "recall_vs_exact", "wall_ms_pipeline"} <= set(rows[0])


def test_bench_cli_deterministic_without_timing(tmp_path, capsys):
    args = ["bench", "--ics", "1,3", "--tx", "150", "--no-timing"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first
    assert "wall_ms" not in first


def test_dispersion_single_block_is_exact():
    db = generate_synthetic(50, 6, 3, seed=2)
    report = dispersion(db, DoubleEncryptionKey(), 1, [0, 1, 2])
    assert report.max_deviation == 0.0
    assert report.max_mean_share_error == 0.0


def test_dispersion_two_blocks_average_to_half():
    db = generate_synthetic(200, 10, 4, seed=4)
    report = dispersion(db, DoubleEncryptionKey(), 2, range(1000))
    for shares in report.mean_shares:
        for share in shares.values():
            assert share == pytest.approx(0.5, abs=0.05)


def test_dispersion_cli_deterministic(sample_file, capsys):
    args = ["dispersion", "--input", str(sample_file), "--ics", "2", "--seed", "5", "--seeds", "3"]
    assert main(args) == 0
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first
    assert json.loads(first)["n_ics"] == 2
