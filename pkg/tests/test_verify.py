import json

import pytest

from angular_qcrb.verify import DEFAULT_TOLERANCES, VerifyGrid, verify


@pytest.fixture(scope="module")
def report():
    return verify()


def families(rep):
    return {f["family"]: f for f in rep["families"]}


def test_default_passes(report):
    assert report["passed"]
    fams = families(report)
    for name in ("oracle_vs_closed_form", "dense_vs_structured", "delta_opt_vs_argmax", "lossless_consistency", "kraus_completeness"):
        assert fams[name]["status"] == "pass"
        assert fams[name]["checks"] > 0


def test_documented_discrepancies(report):
    fams = families(report)
    printed = fams["a2_printed_vs_oracle"]
    assert printed["status"] == "documented"
    assert printed["worst"] > 1e-3
    assert fams["delta_opt_physical_anchors"]["status"] == "documented"
    assert fams["delta_opt_outside_unit_interval"]["notes"]


def test_report_is_json(report):
    assert json.loads(json.dumps(report)) == report


def test_worst_within_tolerance(report):
    for fam in report["families"]:
        if fam["status"] == "pass":
            assert fam["worst"] <= fam["tol"]


def test_tight_profile_names_failures():
    rep = verify("tight")
    assert not rep["passed"]
    failing = [f["family"] for f in rep["families"] if f["status"] == "fail"]
    assert failing
    for name in failing:
        assert families(rep)[name]["failures"]


def test_custom_profile_overrides():
    rep = verify({"eq7_identity": 0.0}, VerifyGrid(nbar=(2,), d=(3,)))
    assert families(rep)["eq7_identity"]["tol"] == 0.0
    assert rep["tolerances"]["oracle_vs_closed_form"] == DEFAULT_TOLERANCES["oracle_vs_closed_form"]


def test_empty_grid():
    rep = verify(grid=VerifyGrid(nbar=()))
    assert rep["passed"] and rep["families"] == []
