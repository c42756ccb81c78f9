import json
import subprocess
import sys

import numpy as np
import pytest

from kreinstab.cli import main
from kreinstab.fileio import bbt_to_json, qbh_to_json
from kreinstab.models import bkc, bkc_bbt, single_mode_kpr


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_csv(capsys):
    code, out, _ = run(capsys, "spectrum", "--model", "single_mode", "--alpha", "1", "--beta", "2")
    assert code == 0
    rows = out.splitlines()
    assert rows[0].startswith("eigen_index,re_omega")
    assert float(rows[2].split(",")[1]) == pytest.approx(2 * np.sqrt(2))


def test_classify_json(capsys):
    code, out, _ = run(capsys, "classify", "--model", "single_mode", "--alpha", "1", "--beta", "-1", "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["verdict"] == "unstable"
    assert d["max_abs_im_omega"] == pytest.approx(2.0)


def test_kpr_contour(capsys, tmp_path):
    out_path = tmp_path / "k.csv"
    code, _, _ = run(capsys, "kpr", "--model", "single_mode", "--sigma", "0.5", "2", "4",
                     "--set", "beta=sigma**2", "--out", str(out_path))
    assert code == 0
    rows = [r.split(",") for r in out_path.read_text().splitlines()[1:]]
    for s, k in rows:
        assert float(k) == pytest.approx(single_mode_kpr(1.0, float(s) ** 2), abs=1e-12)


def test_flow(capsys):
    code, out, _ = run(capsys, "flow", "--model", "cavity_qed", "--x", "1", "--sigma", "0", "1", "5", "--set", "y=sigma")
    assert code == 0
    assert len(out.splitlines()) == 1 + 5 * 4


def test_scan_with_refine(capsys, tmp_path):
    b = tmp_path / "b.csv"
    code, out, _ = run(capsys, "scan", "--model", "cavity_qed", "--axis", "x", "0.5", "1", "0.5",
                       "--axis", "y", "0", "1", "0.25", "--refine", "--boundary-out", str(b))
    assert code == 0
    assert len(out.splitlines()) == 1 + 2 * 5
    assert len(b.read_text().splitlines()) > 1


def test_spec_file_input(capsys, tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(qbh_to_json(bkc(3, 1.0, 0.3))))
    code, out, _ = run(capsys, "spectrum", "--spec", str(p))
    assert code == 0
    assert sum(int(r.split(",")[5]) for r in out.splitlines()[1:]) == 6


def test_gbt_bbt_file(capsys, tmp_path):
    p = tmp_path / "b.json"
    p.write_text(json.dumps(bbt_to_json(bkc_bbt(5, 1.0, 0.3, 1.0, 0.6))))
    code, out, _ = run(capsys, "gbt", "--bbt", str(p), "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["complete"] and d["found"] == 10


@pytest.mark.parametrize("extra", [["--s", "0"], ["--s", "1", "--phi", "0.8"]])
def test_gbt_auto_strategy(capsys, extra):
    code, out, _ = run(capsys, "gbt", "--model", "bkc", "--N", "6", "--Delta", "0.4", *extra, "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["complete"] and d["found"] == 12


def test_gbt_analytic_roots_needs_solvable_point(capsys):
    code, _, _ = run(capsys, "gbt", "--model", "bkc", "--N", "6", "--Delta", "0.4", "--s", "1", "--phi", "0.8",
                     "--strategy", "analytic-roots")
    assert code == 2


def test_evolve_reports_growth(capsys):
    code, out, err = run(capsys, "evolve", "--model", "single_mode", "--alpha", "1", "--beta", "-1",
                         "--times", "0", "10", "11")
    assert code == 0
    assert "exponential" in err
    assert len(out.splitlines()) == 1 + 11 * 2


def test_oracle_check(capsys):
    code, out, _ = run(capsys, "oracle-check", "--suite", "cavity_qed")
    assert code == 0 and out.startswith("PASS")


def test_config_file(capsys, tmp_path):
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"command": "spectrum", "model": "single_mode", "params": {"alpha": 1, "beta": 4}}))
    code, out, _ = run(capsys, "--config", str(c))
    assert code == 0
    assert float(out.splitlines()[2].split(",")[1]) == pytest.approx(4.0)


@pytest.mark.parametrize(
    "argv,code",
    [
        (["spectrum"], 2),
        (["spectrum", "--model", "bkc", "--N", "1"], 3),
        (["spectrum", "--model", "bkc", "--param", "oops"], 2),
        (["kpr", "--model", "single_mode", "--sigma", "0", "1", "3", "--set", "beta=__import__('os')"], 3),
        (["kpr", "--model", "single_mode", "--sigma", "0", "1", "3", "--set", "beta=().__class__"], 3),
        (["nosuch"], 2),
    ],
)
def test_error_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "kreinstab", "spectrum", "--model", "single_mode"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("eigen_index")
