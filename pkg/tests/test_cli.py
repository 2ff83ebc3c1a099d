from __future__ import annotations

import json
import subprocess
import sys

import pytest

from ppg.cli import main
from ppg.presentations import parse_dsl


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cohomology_demushkin(capsys):
    code, out, _ = run(capsys, "cohomology", "family:demushkin(3,1,2)")
    data = json.loads(out)
    assert code == 0 and data["h1"] == 4 and data["h2"] == 1
    assert {"i": "x1", "j": "y1", "value": [1]} in data["cup_table"]


def test_determinism(capsys):
    outs = [run(capsys, "massey-scan", "family:f2(3,1,2,x1,x2)", "--sample", "25")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_subgroup_out_and_cache(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("PPG_CACHE", str(tmp_path / "cache"))
    target = tmp_path / "u.ppg"
    code, out, _ = run(capsys, "subgroup", "family:f1(3,1,2)", "--kernel", "0,1,0,0", "--out", str(target))
    assert code == 0 and json.loads(out)["abelianization"]["torsion"] == [3, 3]
    text = target.read_text()
    assert "# phi: 0,1,0,0" in text and "sha256" in text
    U, _ = parse_dsl(text)
    assert U.n == 10
    code, out2, _ = run(capsys, "subgroup", "family:f1(3,1,2)", "--kernel", "0,1,0,0")
    assert json.loads(out2)["relators"] == json.loads(out)["relators"]
    assert list((tmp_path / "cache").rglob("*.json"))
    code, out3, _ = run(capsys, "abelianization", str(target))
    assert json.loads(out3)["display"] == "Z_p^8 x (Z/3)^2"


def test_kummerian_and_precision_env(capsys, monkeypatch):
    monkeypatch.setenv("PPG_PRECISION", "30")
    code, out, _ = run(capsys, "kummerian", "family:demushkin(3,1,2)")
    data = json.loads(out)
    assert data["status"] == "KUMMERIAN" and data["precision"] == 30
    monkeypatch.setenv("PPG_PRECISION", "lots")
    assert run(capsys, "kummerian", "family:demushkin(3,1,2)")[0] == 2


def test_cyclotomic_and_manifest(capsys, tmp_path):
    manifest = tmp_path / "m.json"
    code, out, _ = run(capsys, "cyclotomic", "family:f1(3,1,2)", "--depth", "1", "--jobs", "1",
                       "--manifest", str(manifest))
    assert code == 0 and json.loads(out)["witness_chain"] == [[0, 1, 0, 0]]
    m = json.loads(manifest.read_text())
    assert m["verdicts"] == "NOT_1-CYCLOTOMIC" and m["precision"] == 20 and "total" in m["timings"]


def test_massey_and_strict(capsys):
    code, out, _ = run(capsys, "massey", "family:demushkin(3,1,2)", "--chars", "1,0,0,0;0,0,1,0;1,0,0,0")
    data = json.loads(out)
    assert code == 0 and data["status"] == "VANISHES" and data["certificate"]["size"] == 4
    args = ("massey", "family:f2(3,1,2,x1,x2)", "--chars", "0,0,0,0;0,0,0,0;0,0,0,0;0,0,0,0", "--budget", "1")
    assert run(capsys, *args)[0] == 0
    assert run(capsys, *args, "--strict")[0] == 1


def test_graded_and_koszul(capsys):
    code, out, _ = run(capsys, "graded", "family:chain(3,3)", "--degree", "5")
    assert code == 0 and json.loads(out)["hilbert_prefix"] == [1, 6, 34, 192, 1084, 6120]
    code, out, _ = run(capsys, "koszul", "family:f1(3,1,2)", "--degree", "5", "--order", "rev")
    assert code == 0 and json.loads(out)["consistent"]


def test_report_writes_figures(capsys, tmp_path):
    code, out, _ = run(capsys, "report", "family:demushkin(3,1,2)", "--out", str(tmp_path), "--sample", "30")
    doc = json.loads(out)
    assert code == 0 and doc["summary"]["FAIL"] == 0
    for name in ("report.json", "hilbert.png", "massey.png", "subgroups.png"):
        assert (tmp_path / name).stat().st_size > 0
    assert json.loads((tmp_path / "report.json").read_text())["figures"] == ["hilbert.png", "massey.png",
                                                                             "subgroups.png"]


def test_report_fail_exit_code(capsys):
    code, out, _ = run(capsys, "report", "family:f1(3,1,2)", "--sample", "20")
    failed = [c["id"] for c in json.loads(out)["claims"] if c["status"] == "FAIL"]
    assert code == 1 and failed == ["f1.U_ab"]


@pytest.mark.parametrize("argv,code", [
    (["cohomology", "/no/such/file"], 2),
    (["cohomology", "family:f9(3)"], 2),
    (["subgroup", "family:f1(3,1,2)", "--kernel", "0,0,0,0"], 2),
    (["report", "family:f1(3,1,2)", "--bogus"], 2),
])
def test_usage_errors(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_input_file_errors(capsys, tmp_path):
    bad = tmp_path / "bad.ppg"
    bad.write_text("group G {\n  prime 3;\n  generators a b;\n  relator a^3 [a,b;\n}\n")
    code, _, err = run(capsys, "cohomology", str(bad))
    assert code == 2 and "line 4, column 15" in err


def test_console_script_unknown_command():
    proc = subprocess.run([sys.executable, "-m", "ppg.cli", "frobnicate", "x"], capture_output=True, text=True)
    assert proc.returncode == 2 and "usage" in proc.stderr
