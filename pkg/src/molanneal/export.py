"""CSV and manifest writers.

Numbers are written with 17 significant digits so every double survives a
round trip. Files are written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from molanneal import constants

SPECTRUM_HEADER = ("E_kV_cm", "state_index", "label", "energy_Hz")
COUPLING_HEADER = ("E_kV_cm", "B_mT", "R_nm", "theta_rad", "J_perp_Hz", "J_z_Hz", "W_Hz", "K_Hz", "V_Hz")
EDGE_HEADER = ("qubit_a", "qubit_b", "J_Hz")
BIAS_HEADER = ("qubit", "h_Hz")
TRAJECTORY_HEADER = ("s", "t_ms", "p_solution", "p_invalid", "p_valid_other")
DISTRIBUTION_HEADER = ("qubit_bitstring_or_INVALID", "probability")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    return atomic_write_text(path, csv_text(header, rows))


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# ---------------------------------------------------------------- row builders


def spectrum_rows(ts):
    names = {idx: name for name, idx in ts.labels.items()}
    for g, E in enumerate(ts.grid):
        for k in range(ts.energies.shape[1]):
            yield (float(E), k, names.get(k, ""), float(ts.energies[g, k]))


def trajectory_rows(result):
    yield from zip(result.s, result.t_ms, result.p_solution, result.p_invalid, result.p_valid_other)


def distribution_rows(result, split_invalid: bool = False):
    for config, p in result.final.histogram.items():
        yield (config, p)
    if split_invalid:
        cls = result.classification
        for idx, p in sorted(result.final.invalid.items()):
            yield (f"INVALID:{cls.basis.label(cls.basis.unrank(idx))}", p)
    else:
        yield ("INVALID", result.final.p_invalid)


def ising_rows(model):
    edges = [(a, b, J) for a, b, J in model.edges()]
    biases = [(a, float(h)) for a, h in enumerate(model.h)]
    return edges, biases


def write_ising(directory, model, stem: str = "ising") -> tuple[Path, Path]:
    edges, biases = ising_rows(model)
    d = Path(directory)
    return (write_csv(d / f"{stem}_edges.csv", EDGE_HEADER, edges),
            write_csv(d / f"{stem}_bias.csv", BIAS_HEADER, biases))


def write_manifest(directory, config: dict) -> Path:
    """Plain-text manifest: resolved configuration and pinned constants as JSON."""
    body = {"configuration": config, "constants": constants.pinned()}
    return atomic_write_text(Path(directory) / "manifest", json.dumps(body, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")
