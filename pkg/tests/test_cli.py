import hashlib
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from corrops.cli import main
from corrops.coeffs import MultiSequence, save_multisequence
from corrops.factorization import CubeFunction, save_cubefunction, tent_values
from corrops.operators import Kernel, save_kernel


def write_json(path, doc):
    path.write_text(json.dumps(doc) + "\n")
    return str(path)


@pytest.fixture
def tri_kernel(tmp_path):
    path = tmp_path / "kernel.json"
    save_kernel(Kernel(np.array([-1]), np.array([1.0, 0.0, 1.0])), path)
    return str(path)


@pytest.fixture
def box_domain(tmp_path):
    return write_json(tmp_path / "box.json", {"kind": "box", "lo": [0], "hi": [15]})


@pytest.fixture
def staircase_domain(tmp_path):
    doc = {
        "kind": "staircase",
        "h": 1.0,
        "spec": {"d": 1, "boxes": [{"lo": [0.0], "hi": [33.0]}], "bound": 33.0},
    }
    return write_json(tmp_path / "stairs.json", doc)


def run(capsys, argv):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_no_subcommand_exits():
    with pytest.raises(SystemExit):
        main([])


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "corrops" in capsys.readouterr().out


def test_norm_report_and_digest(tmp_path, capsys, tri_kernel, box_domain):
    out = tmp_path / "report.json"
    rc, stdout, _ = run(capsys, [
        "norm", "--kernel", tri_kernel, "--domain", box_domain,
        "--flavor", "theta", "--out", str(out),
    ])
    assert rc == 0
    report = json.loads(stdout)
    assert set(report) == {"command", "version", "seed", "digest", "wall_s", "result"}
    assert report["command"] == "norm"
    assert report["result"]["converged"]
    assert report["result"]["cells"] == [16, 16]
    assert 0.0 < report["result"]["value"] <= 2.0 + 1e-9
    canon = json.dumps(
        {"command": "norm", "seed": report["seed"], "result": report["result"]},
        sort_keys=True, separators=(",", ":"),
    )
    assert hashlib.sha256(canon.encode()).hexdigest() == report["digest"]
    assert json.loads(out.read_text()) == report


def test_norm_digest_is_stable(capsys, tri_kernel, box_domain):
    argv = ["norm", "--kernel", tri_kernel, "--domain", box_domain]
    rc1, out1, _ = run(capsys, argv)
    rc2, out2, _ = run(capsys, argv)
    assert rc1 == rc2 == 0
    r1, r2 = json.loads(out1), json.loads(out2)
    assert r1["digest"] == r2["digest"]
    assert r1["result"] == r2["result"]


def test_gamma_flavor_is_hankel_alias(capsys, tri_kernel, box_domain):
    rc, stdout, _ = run(capsys, [
        "norm", "--kernel", tri_kernel, "--domain", box_domain, "--flavor", "gamma",
    ])
    assert rc == 0
    assert json.loads(stdout)["result"]["flavor"] == "psi"


def test_bad_input_exits_2(tmp_path, capsys, box_domain):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    rc, _, err = run(capsys, ["norm", "--kernel", str(bad), "--domain", box_domain])
    assert rc == 2
    assert err.startswith("error:")


def test_unconverged_exits_3_but_writes_report(tmp_path, capsys, tri_kernel, box_domain):
    out = tmp_path / "report.json"
    rc, stdout, _ = run(capsys, [
        "norm", "--kernel", tri_kernel, "--domain", box_domain,
        "--tol", "1e-15", "--max-iter", "2", "--out", str(out),
    ])
    assert rc == 3
    report = json.loads(out.read_text())
    assert not report["result"]["converged"]
    assert report["result"]["iterations"] == 2


def test_resource_cap_exits_4(tmp_path, capsys, tri_kernel):
    doc = {
        "kind": "staircase",
        "h": 1e-7,
        "spec": {"d": 1, "boxes": [{"lo": [0.0], "hi": [1.0]}], "bound": 1.0},
    }
    domain = write_json(tmp_path / "huge.json", doc)
    rc, _, err = run(capsys, ["norm", "--kernel", tri_kernel, "--domain", domain])
    assert rc == 4
    assert err.startswith("error:")


def test_certify(tmp_path, capsys, tri_kernel, staircase_domain):
    out = tmp_path / "cert.json"
    rc, stdout, _ = run(capsys, [
        "certify", "--kernel", tri_kernel, "--domain", staircase_domain,
        "--xi", "0.0", "--nu", "-1.0", "--out", str(out),
    ])
    assert rc == 0
    result = json.loads(stdout)["result"]
    assert result["domain_kind"] == "orthant-sandwiched"
    assert result["cells"] == 32
    assert len(result["per_eps"]) == 4
    assert result["best"] == max(v for _, v in result["per_eps"])
    assert result["best"] <= 2.0 + 1e-9
    assert (tmp_path / "cert.png").exists()


def test_certify_no_plot(tmp_path, capsys, tri_kernel, staircase_domain):
    out = tmp_path / "cert.json"
    rc, _, _ = run(capsys, [
        "certify", "--kernel", tri_kernel, "--domain", staircase_domain,
        "--xi", "0.0", "--nu", "-1.0", "--out", str(out), "--no-plot",
    ])
    assert rc == 0
    assert out.exists()
    assert not (tmp_path / "cert.png").exists()


def test_certify_rejects_bad_direction(capsys, tri_kernel, staircase_domain):
    rc, _, err = run(capsys, [
        "certify", "--kernel", tri_kernel, "--domain", staircase_domain,
        "--xi", "0.0", "--nu", "1.0",
    ])
    assert rc == 2
    assert "error:" in err


def test_extend(tmp_path, capsys):
    path = tmp_path / "window.json"
    save_multisequence(MultiSequence.from_entries((2,), {(1,): 2.0}), path)
    out = tmp_path / "ext.json"
    rc, stdout, _ = run(capsys, ["extend", "--input", str(path), "--out", str(out)])
    assert rc == 0
    result = json.loads(stdout)["result"]
    assert abs(result["extension"]["t_grid"] - 2.0) <= 1e-6
    assert result["extension"]["converged"]
    assert len(result["checked_sections"]) == 4
    assert (tmp_path / "ext.png").exists()


def test_sweep_csv_is_deterministic(tmp_path, capsys):
    csv1 = tmp_path / "rows1.csv"
    csv2 = tmp_path / "rows2.csv"
    base = ["sweep", "--d", "1", "--n", "2", "--trials", "2", "--seed", "4"]
    rc1, out1, _ = run(capsys, base + ["--out", str(csv1)])
    rc2, out2, _ = run(capsys, base + ["--out", str(csv2), "--no-plot"])
    assert rc1 == rc2 == 0
    assert csv1.read_bytes() == csv2.read_bytes()
    lines = csv1.read_text().strip().splitlines()
    assert lines[0] == "trial,seed,section_norm,t_cert,ratio"
    assert len(lines) == 3
    assert (tmp_path / "rows1.png").exists()
    assert not (tmp_path / "rows2.png").exists()
    r1, r2 = json.loads(out1), json.loads(out2)
    assert r1["digest"] == r2["digest"]
    assert r1["result"]["excluded"] == 0


def test_factorize(tmp_path, capsys):
    g = 64
    t = np.arange(g) / g
    vals = (1.0 + 0.6 * np.cos(2 * np.pi * t)) * tent_values(1, g)
    path = tmp_path / "cube.json"
    save_cubefunction(CubeFunction(1, g, 0, vals), path)
    out = tmp_path / "fact.json"
    rc, stdout, _ = run(capsys, [
        "factorize", "--input", str(path), "--kmax", "2",
        "--min-margin", "0", "--out", str(out),
    ])
    assert rc == 0
    result = json.loads(stdout)["result"]
    assert abs(result["partial_l1"] - 1.6) <= 1e-9
    assert result["residual_sup"] <= 1e-9
    assert (tmp_path / "fact.png").exists()


def test_demo_hilbert(tmp_path, capsys):
    out = tmp_path / "demo.csv"
    rc, stdout, _ = run(capsys, [
        "demo", "hilbert", "--sizes", "4,8,16", "--out", str(out),
    ])
    assert rc == 0
    result = json.loads(stdout)["result"]
    assert result["monotone"] and result["bounded"]
    assert [r["size"] for r in result["rows"]] == [4, 8, 16]
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "size,norm"
    assert len(lines) == 4
    assert (tmp_path / "demo.png").exists()


def test_demo_rejects_unknown_name():
    with pytest.raises(SystemExit):
        main(["demo", "nope"])


def test_suite_with_junit(tmp_path, capsys):
    junit = tmp_path / "report.xml"
    rc, stdout, _ = run(capsys, [
        "suite", "trivial", "--seed", "0", "--junit", str(junit),
    ])
    assert rc == 0
    result = json.loads(stdout)["result"]
    assert result["failures"] == 0
    assert result["cases"] > 0
    tree = ET.parse(junit)
    suites = tree.getroot().findall(".//testsuite")
    assert len(suites) == 1
    assert int(suites[0].get("failures")) == 0


def test_suite_unknown_name_exits_2(capsys):
    rc, _, err = run(capsys, ["suite", "nope"])
    assert rc == 2
    assert err.startswith("error:")
