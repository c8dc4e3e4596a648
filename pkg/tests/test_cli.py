import json
import shutil
import subprocess
import sys

import pytest

from dwellcert.cli import main
from dwellcert.io import parse_system_file

from conftest import DATA

EX1 = str(DATA / "example1.json")
EX2 = str(DATA / "example2.json")


def test_jsr_and_verify(tmp_path, capsys):
    cert = tmp_path / "c.json"
    assert main(["jsr", EX1, "--h", "0.2", "--certificate", str(cert)]) == 0
    out = capsys.readouterr().out
    assert "rho_hat      1.0331" in out
    assert "certified" in out
    assert main(["verify", str(cert), EX1]) == 0
    assert "certificate verified" in capsys.readouterr().out


def test_verify_failures_exit_2(tmp_path, capsys):
    cert = tmp_path / "c.json"
    main(["jsr", EX1, "--h", "0.2", "--certificate", str(cert)])
    doc = json.loads(cert.read_text())
    doc["rho_hat"] *= 1.1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["verify", str(bad), EX1]) == 2
    assert main(["verify", str(cert), EX2]) == 2
    assert "different system" in capsys.readouterr().err


def test_bounds_csv(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["bounds", EX1, "--format", "csv", "-o", str(out), "--certificates", str(tmp_path / "certs")]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "h,lb,ub,leading_cycle,epsilon,verdict"
    h, lb, ub, cycle, eps, verdict = lines[1].split(",")
    assert float(lb) == pytest.approx(0.0325, abs=1e-3)
    assert float(ub) == pytest.approx(0.0469, abs=1e-3)
    assert verdict == "unstable"
    (cert,) = (tmp_path / "certs").iterdir()
    assert main(["verify", str(cert), EX1]) == 0


def test_bounds_with_no_steps_in_file(tmp_path, capsys):
    p = tmp_path / "s.json"
    doc = json.loads((DATA / "example1.json").read_text())
    doc["run"]["steps"] = []
    p.write_text(json.dumps(doc))
    assert main(["bounds", str(p), "--format", "csv"]) == 0
    assert capsys.readouterr().out == "h,lb,ub,leading_cycle,epsilon,verdict\n"


def test_parse_errors_exit_1(tmp_path, capsys):
    p = tmp_path / "s.json"
    doc = json.loads((DATA / "example1.json").read_text())
    doc["bogus"] = 1
    p.write_text(json.dumps(doc))
    assert main(["bounds", str(p)]) == 1
    assert "bogus" in capsys.readouterr().err
    assert main(["bounds", str(tmp_path / "missing.json")]) == 1


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as info:
        main(["bounds"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1


def test_numerical_failure_exit_3(tmp_path, capsys):
    p = tmp_path / "rot.json"
    p.write_text(json.dumps({"schema_version": "1", "matrices": [[[0, -3], [3, 0]]], "dwell_time": 1.0}))
    assert main(["jsr", str(p), "--h", "0.5"]) == 3
    assert "ComplexLeading" in capsys.readouterr().err


def test_plot2d(tmp_path, capsys):
    out = tmp_path / "ex1.svg"
    assert main(["plot2d", EX1, "--h", "0.2", "-o", str(out)]) == 0
    side = json.loads(out.with_suffix(".json").read_text())
    assert len(side["components"]) == 2 and len(side["images"]) == 4
    assert main(["plot2d", EX2, "--h", "0.4", "-o", str(tmp_path / "x.svg")]) == 1


@pytest.mark.parametrize("family", ["gaussian", "metzler"])
def test_generate(tmp_path, family):
    p = tmp_path / "g.json"
    assert main(["generate", "--family", family, "--modes", "3", "--dim", "4", "--seed", "7", "-o", str(p)]) == 0
    sys_, cfg = parse_system_file(p)
    assert (sys_.n, sys_.dim) == (3, 4)
    assert 0 < sys_.dwell_time < 1
    assert cfg.steps == ()
    q = tmp_path / "g2.json"
    main(["generate", "--family", family, "--modes", "3", "--dim", "4", "--seed", "7", "-o", str(q)])
    assert p.read_bytes() == q.read_bytes()


def test_console_script(tmp_path):
    exe = shutil.which("dwellcert")
    cmd = [exe] if exe else [sys.executable, "-m", "dwellcert.cli"]
    res = subprocess.run(cmd + ["--version"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("dwellcert ")
