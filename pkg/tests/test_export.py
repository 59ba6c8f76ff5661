import json

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from molanneal.dynamics import Schedule, propagate
from molanneal.export import (
    DISTRIBUTION_HEADER,
    TRAJECTORY_HEADER,
    atomic_write_text,
    csv_text,
    distribution_rows,
    fmt,
    read_csv,
    trajectory_rows,
    write_csv,
    write_ising,
    write_manifest,
)
from molanneal.lattice import effective_ising, two_qubit_rectangle


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_full_precision(x):
    assert float(fmt(x)) == x


def test_csv_lf_and_roundtrip(tmp_path):
    p = write_csv(tmp_path / "a.csv", ("x", "y"), [(0.1, 1), (1 / 3, 2)])
    raw = p.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    header, rows = read_csv(p)
    assert header == ["x", "y"] and float(rows[1][0]) == 1 / 3
    assert csv_text(("a",), []) == "a\n"


def test_atomic_write_leaves_no_temporaries(tmp_path):
    atomic_write_text(tmp_path / "sub" / "f.txt", "hello")
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["f.txt"]


def test_anneal_exports(tmp_path):
    res = propagate(two_qubit_rectangle(), Schedule(6.71738, 7.32027, 15.0, n_steps=20))
    traj = list(trajectory_rows(res))
    assert len(traj) == 21 and len(traj[0]) == len(TRAJECTORY_HEADER)
    dist = list(distribution_rows(res))
    assert [d[0] for d in dist] == ["00", "01", "10", "11", "INVALID"]
    assert abs(sum(d[1] for d in dist) - 1) < 1e-10
    split = list(distribution_rows(res, split_invalid=True))
    assert len(split) == 4 + 2 and split[-1][0].startswith("INVALID:")
    write_csv(tmp_path / "d.csv", DISTRIBUTION_HEADER, dist)
    assert read_csv(tmp_path / "d.csv")[0] == list(DISTRIBUTION_HEADER)


def test_ising_and_manifest(tmp_path):
    e, b = write_ising(tmp_path, effective_ising(two_qubit_rectangle(), 7.32027))
    assert read_csv(e)[0] == ["qubit_a", "qubit_b", "J_Hz"] and len(read_csv(e)[1]) == 1
    assert read_csv(b)[0] == ["qubit", "h_Hz"] and len(read_csv(b)[1]) == 2
    m = write_manifest(tmp_path, {"x": np.float64(1.5), "v": np.arange(2)})
    body = json.loads(m.read_text())
    assert body["configuration"] == {"x": 1.5, "v": [0, 1]}
    assert "constants" in body
