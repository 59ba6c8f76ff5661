import json
import subprocess
import sys

import pytest

from molanneal.cli import main
from molanneal.export import read_csv


def run(tmp_path, capsys, command, doc=None, *flags):
    argv = [command, "--out", str(tmp_path / "out"), *flags]
    if doc is not None:
        p = tmp_path / "c.json"
        p.write_text(json.dumps(doc))
        argv += ["--config", str(p)]
    code = main(argv)
    return code, capsys.readouterr()


def test_spectrum(tmp_path, capsys):
    code, out = run(tmp_path, capsys, "spectrum")
    assert code == 0
    header, rows = read_csv(tmp_path / "out" / "spectrum.csv")
    assert header == ["E_kV_cm", "state_index", "label", "energy_Hz"]
    assert {int(r[1]) for r in rows} == set(range(5))
    for name in ("spectrum.svg", "spectrum.png", "crossing.csv", "manifest"):
        assert (tmp_path / "out" / name).exists()


def test_anneal(tmp_path, capsys):
    code, out = run(tmp_path, capsys, "anneal", {"experiment": "two_qubit", "schedule": {"n_steps": 50}})
    assert code == 0
    d = tmp_path / "out"
    header, rows = read_csv(d / "trajectory_T15ms.csv")
    assert header == ["s", "t_ms", "p_solution", "p_invalid", "p_valid_other"] and len(rows) == 51
    header, rows = read_csv(d / "distribution_T15ms.csv")
    assert header == ["qubit_bitstring_or_INVALID", "probability"]
    for name in ("ising_edges.csv", "ising_bias.csv", "distribution_T15ms.svg", "distribution_T15ms.png",
                 "trajectory_T15ms.svg", "traces.csv"):
        assert (d / name).exists()


def test_env_out(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MOLANNEAL_OUT", str(tmp_path / "env"))
    p = tmp_path / "c.json"
    p.write_text('{"experiment": "spectrum", "fields": {"n_points": 21}}')
    assert main(["spectrum", "--config", str(p)]) == 0
    assert (tmp_path / "env" / "spectrum.csv").exists()


def error_record(capsys_out):
    return json.loads(capsys_out.err.strip().splitlines()[-1])


@pytest.mark.parametrize("doc,code", [
    ({"lattice": {"r1_nm": -1}}, 2),
    ({"experiment": "scan"}, 2),
    ({"lattice": {"family": "chain_1d", "n_qubits": 9}}, 4),
])
def test_anneal_exit_codes(tmp_path, capsys, doc, code):
    got, out = run(tmp_path, capsys, "anneal", doc)
    assert got == code and error_record(out)["exit_code"] == code


def test_numerical_failure(tmp_path, capsys):
    got, out = run(tmp_path, capsys, "spectrum", {"experiment": "spectrum", "fields": {"B_mT": 0}})
    assert got == 3 and error_record(out)["type"] == "LabelingError"


def test_scale_ceiling(tmp_path, capsys):
    doc = {"experiment": "scale", "scale": {"families": ["2D-AF"], "sizes": {"2D-AF": [[3, 3]]}}}
    got, out = run(tmp_path, capsys, "scale", doc)
    assert got == 4


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "molanneal", "anneal", "--config", str(tmp_path / "missing.json")],
                       capture_output=True, text=True)
    assert r.returncode == 2 and json.loads(r.stderr)["error"] == "config"
