import csv
import io
import json
import math

import numpy as np
import pytest

from freeprobe import __version__
from freeprobe.cli import EXIT_FAIL, EXIT_NONCONVERGED, EXIT_OK, EXIT_USAGE, main
from freeprobe.unitaries import UnitaryFamily


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


# -- norm -------------------------------------------------------------------------

def test_norm_d1(capsys):
    code, out, _ = run(capsys, "norm", "--haar", "1", "--rank", "2", "--seed", "7")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["value"] == pytest.approx(4.0, abs=1e-9)
    assert doc["gap"] == pytest.approx(4 - 2 * math.sqrt(3), abs=1e-9)
    assert doc["converged"] and "threshold" in doc and "traceless" in doc
    assert doc["tool"] == "freeprobe" and doc["version"] == __version__
    assert doc["config"]["seed"] == 7 and doc["config"]["command"] == "norm"


def test_norm_from_file(capsys, tmp_path):
    path = tmp_path / "fam.json"
    UnitaryFamily.haar(4, 2, seed=0).save(path)
    code, out, _ = run(capsys, "norm", "--unitaries", str(path), "--subspace", "traceless")
    assert code == EXIT_OK
    assert json.loads(out)["value"] < 4


def test_norm_rejects_non_unitary(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"N": 1, "d": 1, "matrices": [[[2.0, 0.0]]]}))
    code, _, err = run(capsys, "norm", "--unitaries", str(path))
    assert code == EXIT_USAGE and "unitary" in err


def test_norm_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "norm", "--unitaries", str(tmp_path / "none.json"))
    assert code == EXIT_USAGE


def test_norm_nonconvergence(capsys):
    code, out, _ = run(capsys, "norm", "--haar", "6", "--max-iter", "2", "--subspace", "traceless")
    assert code == EXIT_NONCONVERGED
    assert json.loads(out)["converged"] is False


def test_norm_large_family(capsys):
    code, out, _ = run(capsys, "norm", "--haar", "50", "--rank", "2", "--seed", "1", "--subspace", "full")
    value = json.loads(out)["value"]
    assert code == EXIT_OK
    assert 2 * math.sqrt(3) - 0.05 < value <= 4 + 1e-9


# -- moments and walks --------------------------------------------------------------

def test_moments_delta(capsys):
    code, out, _ = run(capsys, "moments", "--char", "delta", "--max-n", "3")
    assert code == EXIT_OK
    assert out.startswith(f"# freeprobe {__version__}\n# config ")
    rows = csv_rows(out)
    assert [int(r["2n"]) for r in rows] == [2, 4, 6]
    assert [float(r["moment"]) for r in rows] == [4, 28, 232]


def test_moments_trace_d1(capsys):
    code, out, _ = run(capsys, "moments", "--char", "trace", "--haar", "1", "--max-n", "4")
    rows = csv_rows(out)
    assert [float(r["moment"]) for r in rows] == pytest.approx([4.0 ** (2 * n) for n in range(1, 5)])


def test_moments_empty_table_equals_delta(capsys, tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"N": 2, "entries": []}))
    _, table, _ = run(capsys, "moments", "--char", "table", "--table", str(path), "--max-n", "4")
    _, delta, _ = run(capsys, "moments", "--char", "delta", "--max-n", "4")
    assert [float(r["moment"]) for r in csv_rows(table)] == [float(r["moment"]) for r in csv_rows(delta)]


def test_moments_roots_nondecreasing(capsys):
    _, out, _ = run(capsys, "moments", "--char", "trace", "--haar", "3", "--seed", "2", "--max-n", "8")
    roots = [float(r["root"]) for r in csv_rows(out)]
    assert all(b >= a - 1e-12 for a, b in zip(roots, roots[1:]))


def test_table_without_file_is_usage_error(capsys):
    code, _, _ = run(capsys, "moments", "--char", "table")
    assert code == EXIT_USAGE


def test_walks_csv(capsys):
    code, out, _ = run(capsys, "walks", "--max-n", "3", "--rank", "3")
    rows = csv_rows(out)
    assert code == EXIT_OK
    assert list(rows[0]) == ["n", "k", "C_nk", "N_nk", "exact_count"]
    assert all(int(r["exact_count"]) >= int(r["N_nk"]) for r in rows)
    assert rows[1]["exact_count"] == "6"


# -- construct and verify -------------------------------------------------------------

def test_construct_report(capsys):
    code, out, _ = run(capsys, "construct", "--g0", "1 2", "--i", "5", "--k0", "4", "--char", "trace", "--haar", "1")
    doc = json.loads(out)
    assert code == EXIT_OK
    sizes = {r["label"]: r["cardinality"] for r in doc["reports"]}
    assert sizes["C_i"] == 216 and sizes["R_i_sigma"] == 2 * sizes["R_i"]
    ci = next(r for r in doc["reports"] if r["label"] == "C_i")
    assert ci["mass"] == pytest.approx(216)


def test_construct_script_set(capsys):
    code, out, _ = run(capsys, "construct", "--i", "5", "--k", "11", "--set", "script_C_i_k", "--char", "delta")
    rep = json.loads(out)["reports"][0]
    assert code == EXIT_OK and rep["label"] == "script_C_i_k" and rep["mass"] == 0


@pytest.mark.parametrize("argv", [
    ["construct", "--g0", "1 2 1", "--i", "5"],
    ["construct", "--g0", "1 2", "--i", "5", "--k0", "2"],
    ["verify", "--lemma", "nonsense"],
    ["walks", "--max-n", "-1"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    ["verify", "--lemma", "catalan", "--max-n", "12"],
    ["verify", "--lemma", "circular", "--trials", "2000", "--seed", "3"],
    ["verify", "--lemma", "cardinality", "--i-values", "5 6"],
    ["verify", "--lemma", "gram", "--samples", "5"],
])
def test_verify_passes(capsys, argv):
    code, out, _ = run(capsys, *argv)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["passed"] and doc["counterexamples"] == []


def test_verify_failure_exit_code(capsys, monkeypatch):
    from freeprobe import verify

    def failing(**kw):
        rep = verify.VerifyReport("catalan")
        rep.add("forced", {}, False)
        return rep

    monkeypatch.setattr(verify, "verify_catalan", failing)
    code, out, _ = run(capsys, "verify", "--lemma", "catalan")
    assert code == EXIT_FAIL and json.loads(out)["passed"] is False


def test_disjoint_close_levels_report_mode(capsys):
    code, out, _ = run(capsys, "verify", "--lemma", "disjoint", "--i", "5", "--i2", "6", "--k", "12")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["checks"][0]["mode"] == "report"


# -- global behaviour ---------------------------------------------------------------

def test_output_is_deterministic(capsys):
    argv = ["norm", "--haar", "4", "--seed", "3"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
    argv = ["verify", "--lemma", "alphabeta", "--samples", "6", "--seed", "1"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_output_file(capsys, tmp_path):
    path = tmp_path / "out.csv"
    code, out, _ = run(capsys, "-o", str(path), "moments", "--char", "delta", "--max-n", "2")
    assert code == EXIT_OK and out == ""
    assert "28" in path.read_text()


def test_threads_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("FREEPROBE_THREADS", "3")
    _, out, _ = run(capsys, "verify", "--lemma", "gram", "--samples", "4")
    doc3 = json.loads(out)
    assert doc3["config"]["threads"] == 3
    _, out, _ = run(capsys, "--threads", "1", "verify", "--lemma", "gram", "--samples", "4")
    doc1 = json.loads(out)
    assert doc1["config"]["threads"] == 1
    assert doc1["checks"] == doc3["checks"]


def test_bad_threads_environment(capsys, monkeypatch):
    monkeypatch.setenv("FREEPROBE_THREADS", "many")
    assert run(capsys, "walks", "--max-n", "1")[0] == EXIT_USAGE


def test_version(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_plots_written(capsys, tmp_path):
    pytest.importorskip("matplotlib")
    for argv, name in [
        (["moments", "--char", "delta", "--max-n", "5"], "m.png"),
        (["walks", "--max-n", "4"], "w.png"),
        (["construct", "--i", "4", "--set", "C_i", "--set", "R_0", "--char", "delta"], "c.png"),
    ]:
        path = tmp_path / name
        assert run(capsys, *argv, "--plot", str(path))[0] == EXIT_OK
        assert path.stat().st_size > 1000


def test_module_entry_point():
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "freeprobe", "walks", "--max-n", "1"],
                         capture_output=True, text=True, check=True).stdout
    assert "exact_count" in out


def test_family_file_rank_mismatch(capsys, tmp_path):
    path = tmp_path / "f.json"
    UnitaryFamily(np.eye(2, dtype=complex)[None]).save(path)
    assert run(capsys, "norm", "--unitaries", str(path), "--rank", "2")[0] == EXIT_USAGE
