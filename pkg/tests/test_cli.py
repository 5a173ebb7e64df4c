import json

import numpy as np
import pytest

from knotwave import tau_wavelets as tw
from knotwave.cli import main
from knotwave.knots import tau_integers
from knotwave.piecewise import evaluate


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    lines = text.strip().split("\n")
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return header, data


@pytest.mark.parametrize("argv", [
    ("build", "--family", "quad", "--theta", "1.2"),
    ("build", "--family", "quad", "--theta", "0"),
    ("build", "--family", "poly", "--samples", "1"),
    ("build", "--family", "poly", "--knots", "0,2,1"),
    ("build", "--family", "poly", "--knots", "0,x"),
    ("build", "--family", "poly", "--degree", "0"),
    ("build",),
    ("build", "--family", "spline"),
    ("frobnicate",),
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and err


def test_not_a_refinement_exits_3_and_names_the_clause(capsys):
    code, out, err = run(capsys, "wavelets", "--family", "quad", "--knots0", "0,1,2,3", "--knots1", "0,0.3,1,2,3", "--theta", "0.5")
    assert code == 3 and out == ""
    report = json.loads(err[err.index("{"):])
    assert report["nesting_condition"] == "failed" and report["failed_clauses"]


def test_perturbed_verify_exits_4(capsys):
    code, out, _ = run(capsys, "verify", "--family", "poly", "--perturb", "1e-3")
    assert code == 4 and "FAIL" in out
    code, out, _ = run(capsys, "verify", "--family", "poly")
    assert code == 0 and "FAIL" not in out


@pytest.mark.parametrize("family, extra", [
    ("poly", ("--degree", "3", "--knots", "0,1,2.5,3")),
    ("quad", ("--theta", "0.4", "--knots", "0,1,2.5,3")),
    ("tau-haar", ("--count", "8")),
    ("tau-quad", ("--count", "8", "--level", "1")),
])
def test_build_csv_contract(capsys, family, extra):
    code, out, err = run(capsys, "build", "--family", family, "--samples", "101", *extra)
    assert code == 0 and err.startswith("runtime ") and err.count("\n") == 1
    header, data = parse_csv(out)
    assert header[0] == "x" and len(header) > 1
    assert all(len(h.split(":")) == 3 and h.split(":")[1] in ("bar", "breve") for h in header[1:])
    assert data.shape == (101, len(header)) and np.all(np.isfinite(data))
    assert np.allclose(np.diff(data[:, 0]), data[1, 0] - data[0, 0])


def test_zero_outside_support(capsys):
    _, out, _ = run(capsys, "build", "--family", "poly", "--knots", "0,1,2,3,4", "--samples", "81")
    header, data = parse_csv(out)
    x = data[:, 0]
    for c, h in enumerate(header[1:], start=1):
        knot = float(h.split(":")[0])
        flav = h.split(":")[1]
        lo, hi = (knot - 1, knot + 1) if flav == "bar" else (knot, knot + 1)
        assert np.all(data[(x < lo - 1e-12) | (x > hi + 1e-12), c] == 0.0)


def test_manifest_and_out_directory(tmp_path, capsys):
    code, out, _ = run(capsys, "build", "--family", "tau-quad", "--count", "12", "--out", str(tmp_path))
    assert code == 0 and out == ""
    man = json.loads((tmp_path / "manifest.json").read_text())
    for key in ("command", "config", "window", "dims", "total", "normalization", "sign_convention", "root_branch", "family_parameters"):
        assert key in man
    header = (tmp_path / "basis.csv").read_text().split("\n")[0].split(",")
    knots = {h.split(":")[0] for h in header[1:]}
    assert {"1", "tau", "1+tau"} <= knots
    assert man["total"] == len(header) - 1


def test_wavelets_outputs(tmp_path, capsys):
    code, _, _ = run(capsys, "wavelets", "--family", "tau-quad", "--out", str(tmp_path))
    assert code == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"wavelets.csv", "dimensions.json", "manifest.json", "tables.json"} <= names
    tables = json.loads((tmp_path / "tables.json").read_text())
    assert "sign_convention" in tables and tables["tables"]


def test_poly_wavelet_names(capsys):
    code, out, _ = run(capsys, "wavelets", "--family", "poly", "--degree", "2")
    assert code == 0
    names = [h.split(":")[2] for h in out.split("\n")[0].split(",")[1:]]
    for prefix in ("what", "wtilde", "wbreve"):
        assert any(n.startswith(prefix) for n in names)
    assert all(n.startswith(("what", "wtilde", "wbreve")) for n in names)


def test_bundle_json(capsys):
    code, out, _ = run(capsys, "wavelets", "--family", "quad", "--theta", "0.5", "--format", "json")
    assert code == 0
    assert isinstance(json.loads(out), dict)


def test_at_file_inputs(tmp_path, capsys):
    kf = tmp_path / "knots.txt"
    kf.write_text("0 1\n2.5 3\n")
    tf = tmp_path / "theta.txt"
    tf.write_text("0.3,0.5,0.7\n")
    code, out, _ = run(capsys, "build", "--family", "quad", "--knots", f"@{kf}", "--theta", f"@{tf}", "--format", "json")
    assert code == 0
    man = json.loads(out)
    assert man["family_parameters"]["theta"] == [0.3, 0.5, 0.7]
    assert man["window"]["knots"] == [0.0, 1.0, 2.5, 3.0]


def test_tau_haar_wavelet_samples_match_closed_form(capsys):
    code, out, _ = run(capsys, "wavelets", "--family", "tau-haar", "--count", "8", "--samples", "97")
    assert code == 0
    header, data = parse_csv(out)
    x = data[:, 0]
    psi = tw.haar_psi()
    w = tw.lattice_window(0, tau_integers(8)[-1])
    start = {w.label(i): w.array[i] for i in range(len(w))}
    for c, h in enumerate(header[1:], start=1):
        a = start[h.split(":")[0]]
        want = evaluate(psi, x - a)
        away = np.abs(x - a - 1 / tw.TAU) > 1e-9  # the jump value depends on the side convention
        assert np.max(np.abs(data[away, c] - want[away])) < 1e-12


def test_tolerance_env_is_clamped(monkeypatch, capsys):
    monkeypatch.setenv("KNOTWAVE_TOL", "1")
    code, out, _ = run(capsys, "verify", "--family", "tau-haar", "--format", "json", "--count", "10")
    assert code == 0
    assert json.loads(out)["tolerance"] == 1e-4


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and out.startswith("knotwave ")
