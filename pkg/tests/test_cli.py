import csv
import io
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from sineqpe.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(lines))))
    meta = dict(ln[2:].split("=", 1) for ln in text.splitlines() if ln.startswith("# "))
    return rows[0], rows[1:], meta


def test_prepare_m2(capsys):
    code, out, _ = run(capsys, "prepare", "--m", "2")
    assert code == 0
    header, rows, meta = parse_csv(out)
    assert header == ["n", "amplitude", "prepared_re", "prepared_im"]
    assert len(rows) == 4
    assert float(meta["fidelity"]) >= 1 - 1e-10
    np.testing.assert_allclose([float(r[1]) for r in rows], [0.371748, 0.601501, 0.601501, 0.371748], atol=1e-6)


def test_prepare_m1(capsys):
    code, out, _ = run(capsys, "prepare", "--m", "1")
    _, rows, _ = parse_csv(out)
    np.testing.assert_allclose([float(r[1]) for r in rows], [0.7071068, 0.7071068], atol=1e-7)


def test_prepare_json(capsys):
    code, out, _ = run(capsys, "prepare", "--m", "3", "--format", "json")
    payload = json.loads(out)
    assert payload["columns"][0] == "n" and len(payload["rows"]) == 8
    assert payload["fidelity"] >= 1 - 1e-10


def test_invalid_m_is_usage_error():
    proc = subprocess.run([sys.executable, "-m", "sineqpe", "prepare", "--m", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert proc.stderr.strip()
    assert proc.stdout == ""


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--max-m", "8")
    report = json.loads(out)
    assert code == 0
    assert report["passed"] and not report["failed"]
    assert all(c["status"] == "pass" for c in report["checks"])


def test_verify_fault_injection(capsys):
    code, out, err = run(capsys, "verify", "--max-m", "4", "--inject-mu-error", "1e-3")
    assert code == 1
    report = json.loads(out)
    assert "recurrence" in report["failed"]
    assert "recurrence" in err


def test_verify_max_m_1(capsys):
    code, out, _ = run(capsys, "verify", "--max-m", "1")
    assert code == 0 and json.loads(out)["passed"]


def test_distribution_m2(capsys):
    code, out, _ = run(capsys, "distribution", "--m", "2")
    assert code == 0
    header, rows, meta = parse_csv(out)
    assert header == ["phase", "k", "estimate", "p_enumerated", "p_canonical", "p_inverse_qft"]
    table = np.array([[float(v) for v in r[3:]] for r in rows])
    for col in table.T:
        np.testing.assert_allclose(col, [0.947214, 0.026393, 0, 0.026393], atol=1e-6)
    assert np.max(np.abs(table - table[:, [1]])) <= 1e-10
    assert float(meta["max_disagreement"]) <= 1e-10


def test_distribution_uniform_on_grid(capsys):
    phase = repr(2 * math.pi * 3 / 8)
    code, out, _ = run(capsys, "distribution", "--m", "3", "--phase", phase, "--state-kind", "uniform")
    _, rows, _ = parse_csv(out)
    probs = np.array([float(r[4]) for r in rows])
    expected = np.zeros(8)
    expected[3] = 1
    np.testing.assert_allclose(probs, expected, atol=1e-12)


def test_distribution_grid_and_covariant(capsys):
    code, out, _ = run(capsys, "distribution", "--m", "3", "--phase", "grid:4", "--covariant",
                       "--offset", "0.3")
    assert code == 0
    _, rows, _ = parse_csv(out)
    assert len(rows) == 4 * 8
    assert float(rows[0][2]) == pytest.approx(0.3)


def test_distribution_bad_offset(capsys):
    code, _, err = run(capsys, "distribution", "--m", "3", "--covariant", "--offset", "1.0")
    assert code == 2 and "offset" in err


def test_distribution_m8_under_a_second(capsys):
    start = time.perf_counter()
    code, _, _ = run(capsys, "distribution", "--m", "8")
    assert code == 0
    assert time.perf_counter() - start < 1.0


def test_simulate_is_deterministic(tmp_path, capsys):
    outs, csvs = [], []
    for i in range(2):
        path = tmp_path / f"trials{i}.csv"
        code, out, _ = run(capsys, "simulate", "--m", "5", "--trials", "3000", "--covariant",
                           "--seed", "9", "--trials-csv", str(path))
        assert code == 0
        outs.append(out)
        csvs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert csvs[0] == csvs[1]
    header = csvs[0].decode().splitlines()[0]
    assert header == "trial,offset,k,estimate,error"
    assert b"\r\n" not in csvs[0]


def test_simulate_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("SINEQPE_SEED", "77")
    _, out, _ = run(capsys, "simulate", "--m", "3", "--trials", "100")
    assert json.loads(out)["seed"] == 77
    monkeypatch.setenv("SINEQPE_SEED", "xyz")
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--m", "3", "--trials", "100"])
    assert exc.value.code == 2


def test_simulate_thread_count_does_not_change_output(tmp_path):
    import os
    env = dict(os.environ, NUMBA_NUM_THREADS="4")
    outs = []
    for t in ("1", "3"):
        proc = subprocess.run([sys.executable, "-m", "sineqpe", "simulate", "--m", "6", "--trials", "20000",
                               "--covariant", "--seed", "5", "--threads", t],
                              capture_output=True, text=True, env=env, check=True)
        outs.append(proc.stdout)
    assert outs[0] == outs[1]


def test_simulate_too_many_threads_is_usage_error(capsys):
    code, _, err = run(capsys, "simulate", "--m", "3", "--trials", "10", "--threads", "1024")
    assert code == 2 and "threads" in err


def test_uniform_worse_than_optimal(capsys):
    vals = {}
    for kind in ("optimal", "uniform"):
        _, out, _ = run(capsys, "simulate", "--m", "6", "--trials", "100000", "--covariant",
                        "--state-kind", kind)
        vals[kind] = json.loads(out)["stats"]["holevo"]
    assert vals["uniform"] > vals["optimal"]


def test_sweep_values_and_normalisation(capsys):
    code, out, _ = run(capsys, "sweep", "--N", "10", "--points", "2001")
    header, rows, _ = parse_csv(out)
    assert header == ["theta", "pdf_optimal", "pdf_uniform"]
    data = np.array(rows, dtype=float)
    assert len(data) == 2001
    mid = data[1000]
    assert mid[0] == 0.0
    assert mid[1] == pytest.approx(1.53043, abs=1e-4)
    assert mid[2] == pytest.approx(1.750704, abs=1e-6)
    for col in (1, 2):
        assert np.trapezoid(data[:, col], data[:, 0]) == pytest.approx(1, abs=1e-6)


def test_float_formatting_round_trips(capsys):
    _, out, _ = run(capsys, "sweep", "--N", "3", "--points", "11")
    _, rows, _ = parse_csv(out)
    from sineqpe.analysis import pdf_optimal
    thetas = np.array([float(r[0]) for r in rows])
    np.testing.assert_array_equal(thetas, np.linspace(-math.pi, math.pi, 11))
    np.testing.assert_array_equal([float(r[1]) for r in rows], pdf_optimal(thetas, 3))
    for r in rows:
        assert len(r[1].replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 17


def test_output_file(tmp_path, capsys):
    path = tmp_path / "sweep.json"
    code, out, _ = run(capsys, "sweep", "--points", "5", "--format", "json", "-o", str(path))
    assert code == 0 and out == ""
    assert len(json.loads(path.read_text())["rows"]) == 5


def test_unwritable_output(capsys):
    code, _, err = run(capsys, "sweep", "--points", "5", "-o", "/nonexistent/dir/x.csv")
    assert code == 2 and err
