import json

import pytest

from knotwave import verification as vf


@pytest.mark.parametrize("raw, want", [
    (None, 1e-9), ("", 1e-9), ("abc", 1e-9), ("nan", 1e-9), ("1e-20", 1e-14), ("0.1", 1e-4), ("3e-7", 3e-7),
])
def test_tolerance_from_env(monkeypatch, raw, want):
    if raw is None:
        monkeypatch.delenv("KNOTWAVE_TOL", raising=False)
    else:
        monkeypatch.setenv("KNOTWAVE_TOL", raw)
    assert vf.tolerance_from_env() == want


@pytest.mark.parametrize("family", ["poly", "quad", "tau-haar"])
def test_suites_pass_and_perturbation_fails(family):
    suite = vf.SUITES[family]
    good = suite()
    assert good.passed, good.text()
    bad = suite(perturb=1e-3)
    assert not bad.passed
    assert "FAIL" in bad.text()


def test_tau_quad_suite():
    res = vf.tau_quad_suite()
    assert res.passed, res.text()
    assert any("orthonormal across" in c.name for c in res.checks)


def test_suite_json_is_finite_and_serializable():
    res = vf.poly_suite(degree=3, tol=1e-8)
    js = json.loads(json.dumps(res.to_json()))
    assert js["family"].startswith("poly") and js["passed"] is True
    assert all(isinstance(c["value"], float) for c in js["checks"])


def test_suite_result_records_infinities():
    res = vf.SuiteResult("x")
    res.below("inf", float("inf"), 1.0)
    assert not res.passed and res.to_json()["checks"][0]["value"] == "inf"
