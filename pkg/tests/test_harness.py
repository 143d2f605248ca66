import xml.etree.ElementTree as ET

import pytest

from corrops import harness
from corrops.errors import InputError

ALL_SUITES = [
    "cli", "coeffs", "factorization", "flip", "geometry", "modulation",
    "mollify", "nehari", "norms", "oracle", "strip", "translation",
    "trivial",
]


def test_registry_is_complete():
    assert harness.list_suites() == ALL_SUITES
    summaries = harness.suite_summaries()
    assert sorted(summaries) == ALL_SUITES
    assert all(isinstance(s, str) and s for s in summaries.values())


def test_coverage_has_no_gaps():
    missing, unknown = harness.coverage_gaps()
    assert missing == []
    assert unknown == []
    cov = harness.coverage_map()
    assert set(cov) == set(harness.COVERAGE_KEYS)
    for key, suites in cov.items():
        assert suites, f"checklist key {key} has no suite"


def test_run_suite_unknown_name():
    with pytest.raises(InputError):
        harness.run_suite("nope")


def test_trivial_suite_passes():
    report = harness.run_suite("trivial", seed=0)
    assert report.passed
    assert report.results
    for r in report.results:
        assert r.deviation <= r.case.tolerance
        assert r.case.suite == "trivial"


@pytest.mark.parametrize(
    "name,count",
    [
        ("oracle", 8),
        ("coeffs", 6),
        ("geometry", 12),
        ("translation", 6),
        ("flip", 6),
        ("modulation", 6),
        ("mollify", 6),
        ("norms", 8),
        ("nehari", 6),
        ("factorization", 5),
        ("strip", 2),
    ],
)
def test_reduced_suites_pass(name, count):
    report = harness.run_suite(name, seed=7, count=count)
    assert report.count == count
    detail = "; ".join(
        f"{r.case.name}: {r.deviation:.3e} > {r.case.tolerance:.3e} ({r.detail})"
        for r in report.failures
    )
    assert report.passed, detail


def test_suite_runs_are_reproducible():
    a = harness.run_suite("oracle", seed=3, count=5)
    b = harness.run_suite("oracle", seed=3, count=5)
    assert [(r.case.name, r.deviation) for r in a.results] == [
        (r.case.name, r.deviation) for r in b.results
    ]


def test_recorder_turns_exceptions_into_failures():
    rec = harness._Recorder("scratch", 0)
    rec.run("boom", lambda: 1 // 0, tolerance=1.0, anchor="none")
    (res,) = rec.results
    assert not res.passed
    assert res.deviation == float("inf")
    assert "ZeroDivisionError" in res.detail


def test_report_worst_failures_and_dict():
    rec = harness._Recorder("scratch", 0)
    rec.run("ok", lambda: (0.0, "fine"), tolerance=1e-9, anchor="none")
    rec.run("near", lambda: (0.5, "close"), tolerance=1.0, anchor="none")
    rec.run("bad", lambda: (2.0, "off"), tolerance=1e-3, anchor="none")
    report = harness.SuiteReport("scratch", 0, 3, tuple(rec.results), 0.01)
    assert not report.passed
    assert [r.case.name for r in report.failures] == ["bad"]
    assert report.worst().case.name == "bad"
    doc = harness.report_to_dict(report)
    assert doc["suite"] == "scratch"
    assert doc["n_cases"] == 3
    assert doc["n_failed"] == 1
    assert doc["worst_case"] == "bad"
    assert len(doc["cases"]) == 3
    assert doc["cases"][0]["record"]["suite"] == "scratch"


def test_junit_output(tmp_path):
    rec = harness._Recorder("scratch", 0)
    rec.run("ok", lambda: (0.0, "fine"), tolerance=1e-9, anchor="none")
    rec.run("bad", lambda: (2.0, "off"), tolerance=1e-3, anchor="none")
    report = harness.SuiteReport("scratch", 0, 2, tuple(rec.results), 0.01)
    path = tmp_path / "junit.xml"
    harness.write_junit_xml(report, path)
    root = ET.parse(path).getroot()
    assert root.tag == "testsuites"
    assert root.get("tests") == "2"
    assert root.get("failures") == "1"
    cases = root.findall(".//testcase")
    assert {c.get("name") for c in cases} == {"ok", "bad"}
    failures = root.findall(".//failure")
    assert len(failures) == 1
    assert "tolerance" in failures[0].get("message")
