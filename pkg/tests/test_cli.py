import csv
import io
import json

import numpy as np
import pytest

from amspca.cli import main


@pytest.fixture
def matrix_csv(tmp_path):
    rng = np.random.default_rng(0)
    path = tmp_path / "a.csv"
    np.savetxt(path, rng.standard_normal((12, 8)), delimiter=",")
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_json(matrix_csv, capsys):
    code, out, _ = run(["solve", "--input", matrix_csv, "--s", 3, "--starts", 5, "--strategy", "sfa"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["formulation"]["index"] == 1
    assert doc["best"]["l0_norm"] <= 3
    assert len(doc["per_start"]["objective"]) == 5
    assert doc["best"]["objective"] == max(doc["per_start"]["objective"])
    assert 0 < doc["best"]["explained_variance_ratio"] <= 1
    loading = np.zeros(8)
    for i, v in doc["best"]["loading"]:
        loading[i] = v
    assert np.linalg.norm(loading) == pytest.approx(1.0)


def test_solve_deterministic_except_wall_time(matrix_csv, capsys, tmp_path):
    docs = []
    for name in ("x.json", "y.json"):
        out = tmp_path / name
        args = ["solve", "--input", matrix_csv, "--variance", "l1", "--sparsity", "l1", "--mode", "penalty",
                "--gamma", 0.5, "--starts", 7, "--strategy", "otf", "--batch", 3, "--seed", 4, "--output", out]
        assert run(args, capsys)[0] == 0
        doc = json.loads(out.read_text())
        doc.pop("wall_time")
        docs.append(doc)
    assert docs[0] == docs[1]


@pytest.mark.parametrize("strategy", [["nai"], ["sfa"], ["bat", "--batch", "2"], ["otf", "--batch", "3"]])
def test_strategy_invariant_report(matrix_csv, capsys, strategy):
    code, out, _ = run(["solve", "--input", matrix_csv, "--s", 2, "--starts", 6, "--strategy", *strategy], capsys)
    assert code == 0
    doc = json.loads(out)
    ref_code, ref_out, _ = run(["solve", "--input", matrix_csv, "--s", 2, "--starts", 6, "--strategy", "nai"], capsys)
    ref = json.loads(ref_out)
    assert doc["best"] == ref["best"]
    assert doc["per_start"] == ref["per_start"]


def test_s_out_of_range(matrix_csv, capsys):
    code, _, err = run(["solve", "--input", matrix_csv, "--s", 0], capsys)
    assert code == 2
    assert "s must be in [1, p] (p=8)" in err
    code, _, err = run(["solve", "--input", matrix_csv, "--s", 9], capsys)
    assert code == 2


def test_missing_file(tmp_path, capsys):
    code, _, err = run(["solve", "--input", tmp_path / "nope.csv", "--s", 1], capsys)
    assert code == 2
    assert "error" in err


def test_malformed_matrix_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n2 2 1\n5 1 1\n")
    code, _, err = run(["solve", "--input", path, "--s", 1], capsys)
    assert code == 2
    assert "line 3" in err


def test_usage_error_exit_2(matrix_csv):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--input", str(matrix_csv), "--variance", "l3", "--s", "1"])
    assert exc.value.code == 2


def test_all_degenerate_exit_3(tmp_path, capsys):
    path = tmp_path / "z.csv"
    path.write_text("0,0\n0,0\n")
    code, out, err = run(["solve", "--input", path, "--s", 1, "--starts", 2, "--strategy", "sfa"], capsys)
    assert code == 3
    assert json.loads(out)["best"]["status"] == "degenerate"


def test_variance_sweep_csv(matrix_csv, capsys):
    code, out, _ = run(["variance-sweep", "--input", matrix_csv, "--s-grid", "pow2", "--starts", 4, "--strategy", "sfa"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    # grid 1,2,4,8 times 4 starts
    assert len(rows) == 16
    assert sorted({float(r["s"]) for r in rows}) == [1, 2, 4, 8]
    for r in rows:
        assert 0 <= float(r["fraction_of_best"]) <= 1 + 1e-15


def test_bench_strategies_csv(matrix_csv, capsys):
    code, out, _ = run(["bench-strategies", "--input", matrix_csv, "--s", 3, "--starts", 6,
                        "--strategies", "nai,sfa,bat2,otf3"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["strategy"] for r in rows] == ["nai", "sfa", "bat", "otf"]
    assert len({r["best_objective"] for r in rows}) == 1
    sweeps = {r["strategy"]: int(r["total_sweeps"]) for r in rows}
    assert sweeps["sfa"] <= sweeps["nai"]


def test_center_flag(tmp_path, capsys):
    path = tmp_path / "c.csv"
    path.write_text("a,b\n1,5\n3,5\n")
    code, out, _ = run(["solve", "--input", path, "--header", "--center", "--s", 1], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["best"]["loading"] == [[0, 1.0]] or doc["best"]["loading"] == [[0, -1.0]]


def test_report_round_trips_objective(matrix_csv, capsys):
    from amspca.formulations import Formulation, objective
    from amspca.matrix import load_matrix

    for flags, form in [
        (["--s", "3"], Formulation.from_index(1, 3)),
        (["--variance", "l1", "--sparsity", "l1", "--s", "2.5"], Formulation.from_index(4, 2.5)),
        (["--mode", "penalty", "--gamma", "0.4"], Formulation.from_index(5, 0.4)),
    ]:
        code, out, _ = run(["solve", "--input", matrix_csv, "--starts", 4, *flags], capsys)
        assert code == 0
        doc = json.loads(out)
        x = np.zeros(8)
        for i, v in doc["best"]["loading"]:
            x[i] = v
        ref = objective(form, load_matrix(matrix_csv), x)
        assert abs(ref - doc["best"]["objective"]) <= 1e-10 * max(1.0, abs(ref))


def test_single_value_grid_rows(matrix_csv, capsys):
    code, out, _ = run(["variance-sweep", "--input", matrix_csv, "--s-grid", "8", "--starts", 5], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 6
    rows = list(csv.DictReader(io.StringIO(out)))
    assert all(0 < float(r["fraction_of_best"]) <= 1 for r in rows)
    # s = p: no local maxima left on a Gaussian matrix
    assert all(float(r["fraction_of_best"]) >= 0.999 for r in rows)


def test_bench_nai_speedup_is_one(matrix_csv, capsys):
    code, out, _ = run(["bench-strategies", "--input", matrix_csv, "--s", 2, "--starts", 4, "--strategies", "nai,otf2"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["speedup_vs_nai"]) == 1.0
