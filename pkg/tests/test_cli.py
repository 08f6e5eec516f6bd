import json

import pytest

from qushadow.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_norm_stab_projector_anchor(capsys):
    code, out, _ = run(["norm", "--stab-projector", "--n", "1", "--d", "3", "--K", "1"], capsys)
    assert code == 0
    values = [float(line.rsplit("=", 1)[1]) for line in out.strip().splitlines()]
    assert values == [pytest.approx(8 / 3, abs=1e-12), pytest.approx(16 / 9, abs=1e-12)]


def test_norm_gamma_anchor(capsys):
    code, out, _ = run(["norm", "--gamma", "--d", "7", "--k", "1"], capsys)
    assert code == 0 and "7.5" in out


def test_norm_local_weyl_anchor(capsys):
    code, out, _ = run(["norm", "--local-weyl", "--d", "3", "--m", "2"], capsys)
    assert code == 0 and "16.0" in out


def test_norm_json_envelope(capsys):
    code, out, _ = run(["norm", "--gamma", "--d", "7", "--k", "1", "--format", "json"], capsys)
    assert code == 0
    report = json.loads(out)
    assert set(report) == {"config", "results", "version"}
    assert report["results"][0]["gamma"] == 7.5


def test_estimate_writes_deterministic_csv(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QUSHADOW_OUTDIR", str(tmp_path))
    args = ["estimate", "--d", "3", "--n", "2", "--N", "90", "--runs", "2",
            "--L", "3", "--seed", "4"]
    code, out, _ = run(args, capsys)
    assert code == 0
    path = tmp_path / "estimate_d3_n2_k0_seed4.csv"
    first = path.read_bytes()
    assert first.startswith(b"scheme,d,n,k,N,run_count,")
    code, _, _ = run(args, capsys)
    assert code == 0 and path.read_bytes() == first


def test_estimate_json_envelope(tmp_path, capsys):
    out_file = tmp_path / "run.json"
    args = ["estimate", "--d", "3", "--n", "2", "--scheme", "clifford+t", "--k", "1",
            "--t", "canonical", "--N", "60", "--runs", "1", "--seed", "2",
            "--format", "json", "--out", str(out_file)]
    code, _, _ = run(args, capsys)
    assert code == 0
    report = json.loads(out_file.read_text())
    assert set(report) == {"config", "results", "version"}
    assert report["config"]["k"] == 1
    assert report["results"][0]["theory_bound"] > 0


def test_estimate_rejects_bad_config(capsys):
    code, _, err = run(["estimate", "--d", "4", "--n", "2", "--seed", "1"], capsys)
    assert code == 2 and "odd prime" in err


def test_verify_subset_and_report(tmp_path, capsys):
    out_file = tmp_path / "report.json"
    code, out, _ = run(["verify", "--only", "diagonal-law", "--out", str(out_file)], capsys)
    assert code == 0 and "PASS" in out
    report = json.loads(out_file.read_text())
    assert report["results"][0]["name"] == "diagonal-law"
    assert report["results"][0]["passed"] is True


def test_verify_unknown_check(capsys):
    code, _, err = run(["verify", "--only", "nope"], capsys)
    assert code == 2 and "unknown checks" in err


def test_randobs_writes_bounds(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QUSHADOW_OUTDIR", str(tmp_path))
    code, out, _ = run(["randobs", "--d", "3", "--k", "1", "--count", "10",
                        "--diagonal", "--seed", "6"], capsys)
    assert code == 0
    lines = (tmp_path / "randobs_d3_k1_diag_seed6.csv").read_text().splitlines()
    assert lines[0] == "sample,d,n,k,diagonal,norm,spectral_sq,bound"
    assert len(lines) == 11
    for line in lines[1:]:
        fields = line.split(",")
        assert float(fields[5]) <= float(fields[7]) * (1 + 1e-9)
