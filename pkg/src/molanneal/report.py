"""Artifact writers behind the CLI subcommands.

Every ``write_*`` function takes a resolved :class:`RunConfig` and an output
directory, writes CSV tables with companion SVG and PNG plots plus a
``manifest``, and returns the list of files written.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from molanneal import experiments as X
from molanneal.config import RunConfig, build_lattice, to_dict
from molanneal.dynamics import Schedule
from molanneal.export import (
    COUPLING_HEADER,
    DISTRIBUTION_HEADER,
    SPECTRUM_HEADER,
    TRAJECTORY_HEADER,
    distribution_rows,
    spectrum_rows,
    trajectory_rows,
    write_csv,
    write_ising,
    write_manifest,
)
from molanneal.lattice import effective_ising
from molanneal.molecule import MOLECULES
from molanneal.plotting import plot_bars, plot_lines
from molanneal.svg import BarTable, LineTable, emit_svg

log = logging.getLogger(__name__)


def _figure(table, stem: Path, logx: bool = False) -> list[Path]:
    svg = stem.with_suffix(".svg")
    png = stem.with_suffix(".png")
    emit_svg(table, svg)
    if isinstance(table, BarTable):
        plot_bars(table, png)
    else:
        plot_lines(table, png, logx=logx)
    return [svg, png]


def _tag(T: float) -> str:
    return f"T{T:g}ms"


def _finish(cfg: RunConfig, out: Path, files: list[Path], extra: dict | None = None) -> list[Path]:
    body = to_dict(cfg)
    if extra:
        body["run"] = extra
    files.append(write_manifest(out, body))
    return files


# ---------------------------------------------------------------- spectrum


def write_spectrum(cfg: RunConfig, out: Path, **extra) -> list[Path]:
    f = cfg.fields
    mol = cfg.molecule.constants()
    ts, E_x = X.spectrum(mol, f.B_mT, E_max=f.E_max_kV_cm or 2.0, n_points=f.n_points, n_max=cfg.N_max)
    if f.E_min_kV_cm > 0:
        keep = ts.grid >= f.E_min_kV_cm
        ts.grid, ts.energies, ts.eigvecs = ts.grid[keep], ts.energies[keep], ts.eigvecs[keep]
    files = [write_csv(out / "spectrum.csv", SPECTRUM_HEADER, spectrum_rows(ts))]
    names = {i: n for n, i in ts.labels.items()}
    series = {names.get(k, f"state_{k}"): ts.energies[:, k] for k in range(ts.energies.shape[1])}
    table = LineTable("E_kV_cm", ts.grid, series, "energy_Hz", f"{mol.name} levels at {f.B_mT:g} mT", [E_x])
    files += _figure(table, out / "spectrum")
    files.append(write_csv(out / "crossing.csv", ("B_mT", "E_x_kV_cm"), [(f.B_mT, E_x)]))
    return _finish(cfg, out, files, extra)


# ---------------------------------------------------------------- couplings


def write_couplings(cfg: RunConfig, out: Path, **extra) -> list[Path]:
    c = cfg.couplings
    files, summary = [], []
    for case in c.cases:
        mol = MOLECULES[case["molecule"]]
        B = float(case.get("B_mT", 600.0))
        E_x, _ = X.find_avoided_crossing(mol, B, n_max=cfg.N_max)
        lo = case.get("E_min_kV_cm", (1 - c.span) * E_x)
        hi = case.get("E_max_kV_cm", (1 + c.span) * E_x)
        scan = X.coupling_scan(mol, B, np.linspace(lo, hi, c.n_points), c.R_nm, c.theta_rad, cfg.N_max)
        E_perp, E_z = X.working_fields(mol, B, cfg.N_max)
        stem = f"couplings_{mol.name}_{B:g}mT"
        files.append(write_csv(out / f"{stem}.csv", COUPLING_HEADER, scan.rows))
        table = LineTable(
            "E_kV_cm", scan.column(0), {"J_perp_Hz": scan.column(4), "J_z_Hz": scan.column(5)}, "coupling_Hz",
            f"{mol.name}, B = {B:g} mT, R = {c.R_nm:g} nm", [E_perp, E_z],
        )
        files += _figure(table, out / stem)
        summary.append((mol.name, B, E_x, E_perp, E_z))
    files.append(write_csv(out / "working_fields.csv",
                           ("molecule", "B_mT", "E_x_kV_cm", "E_perp_kV_cm", "E_z_kV_cm"), summary))
    return _finish(cfg, out, files, extra)


# --------------------------------------------------------------------- scan


def write_scan(cfg: RunConfig, out: Path, **extra) -> list[Path]:
    sc = cfg.scan
    values = tuple(sc.values) if sc.values else tuple(X.default_scan_values(sc.constant, sc.per_decade))
    scan = X.ScanSpec(sc.constant, values, cfg.fields.B_mT, cfg.molecule.constants(), sc.R_nm, sc.theta_rad, cfg.N_max)
    rows = X.scan_constant(scan)
    name = {"d": "d_D", "B_e": "B_e_cm_inv", "gamma_SR": "gamma_SR_cm_inv"}[sc.constant]
    header = (name, "E_perp_kV_cm", "E_z_kV_cm", "J_perp_Hz", "J_z_Hz", "status")
    stem = f"scan_{sc.constant}"
    files = [write_csv(out / f"{stem}.csv", header,
                       [(r.value, r.E_perp, r.E_z, r.J_perp, r.J_z, r.status) for r in rows])]
    v = np.array([r.value for r in rows])
    fields_t = LineTable(name, v, {"E_perp_kV_cm": [r.E_perp for r in rows], "E_z_kV_cm": [r.E_z for r in rows]},
                         "E_kV_cm", f"working fields vs {sc.constant}")
    coup_t = LineTable(name, v, {"J_perp_Hz": [r.J_perp for r in rows], "J_z_Hz": [r.J_z for r in rows]},
                       "coupling_Hz", f"couplings vs {sc.constant}")
    files += _figure(fields_t, out / f"{stem}_fields", logx=True)
    files += _figure(coup_t, out / f"{stem}_couplings", logx=True)
    return _finish(cfg, out, files, extra)


# ------------------------------------------------------------------- anneal


def _traces_table(traces: X.Traces, qubits) -> tuple[list[str], list]:
    nq = len(qubits)
    pairs = [(a, b) for a in range(nq) for b in range(a + 1, nq)]
    header = (["s", "E_kV_cm"] + [f"Delta_q{a}_Hz" for a in range(nq)] + [f"h_q{a}_Hz" for a in range(nq)]
              + [f"Jz_intra_q{a}_Hz" for a in range(nq)] + [f"J_q{a}_q{b}_Hz" for a, b in pairs])
    rows = []
    for k in range(len(traces.s)):
        rows.append([traces.s[k], traces.E[k], *traces.Delta[k], *traces.h[k], *traces.Jz_intra[k],
                     *(traces.J[k, a, b] for a, b in pairs)])
    return header, rows


def write_anneal(cfg: RunConfig, out: Path, allow_large: bool = False, **extra) -> list[Path]:
    config = build_lattice(cfg)
    X.check_size(config, allow_large)
    f, s = cfg.fields, cfg.schedule
    fields = (f.E_start_kV_cm, f.E_end_kV_cm)
    files = []
    model = effective_ising(config, fields[1])
    files += write_ising(out, model)
    base = Schedule(fields[0], fields[1], float(s.times_ms[0]), s.n_steps, s.stop_s)
    traces = X.parameter_traces(config, base, n_points=min(s.n_steps + 1, 101))
    header, rows = _traces_table(traces, config.qubits)
    files.append(write_csv(out / "traces.csv", header, rows))
    series = {"Delta_q0_Hz": traces.Delta[:, 0], "Jz_intra_q0_Hz": traces.Jz_intra[:, 0]}
    if config.n_qubits > 1:
        series["J_q0_q1_Hz"] = traces.J[:, 0, 1]
    files += _figure(LineTable("s", traces.s, series, "Hz", f"{config.name} parameters"), out / "traces")
    results = X.run_times(config, [float(t) for t in s.times_ms], s.n_steps, s.stop_s, fields, allow_large)
    summary = []
    for T, r in results.items():
        tag = _tag(T)
        files.append(write_csv(out / f"trajectory_{tag}.csv", TRAJECTORY_HEADER, trajectory_rows(r)))
        files.append(write_csv(out / f"distribution_{tag}.csv", DISTRIBUTION_HEADER, distribution_rows(r)))
        lines = LineTable("s", r.s, {"p_solution": r.p_solution, "p_invalid": r.p_invalid,
                                     "p_valid_other": r.p_valid_other}, "probability", f"{config.name}, T = {T:g} ms")
        files += _figure(lines, out / f"trajectory_{tag}")
        files += _figure(distribution_bars(r, f"{config.name}, T = {T:g} ms"), out / f"distribution_{tag}")
        summary.append((T, r.p_solution[-1], r.p_invalid[-1], r.p_valid_other[-1]))
    files.append(write_csv(out / "anneal_summary.csv", ("T_ms", "p_solution", "p_invalid", "p_valid_other"), summary))
    ground = next(iter(results.values())).ground_set
    files.append(write_csv(out / "ground_set.csv", ("qubit_bitstring",), [(g,) for g in ground]))
    return _finish(cfg, out, files, extra)


def distribution_bars(result, title: str = "", max_split: int = 16) -> BarTable:
    """Valid outcomes, then each invalid sector state (when few), then the invalid total."""
    labels, values = [], []
    for config, p in result.final.histogram.items():
        labels.append(config)
        values.append(p)
    cls = result.classification
    invalid = sorted(result.final.invalid.items())
    n_invalid = int((~cls.valid).sum())
    if n_invalid <= max_split:
        for idx in np.flatnonzero(~cls.valid):
            labels.append(cls.basis.label(cls.basis.unrank(int(idx))))
            values.append(result.final.invalid.get(int(idx), 0.0))
    labels.append("INVALID")
    values.append(sum(p for _, p in invalid))
    return BarTable(labels, np.array(values), "probability", title)


# -------------------------------------------------------------------- scale


def _sizes(cfg: RunConfig, family: str, opt_in_3x3: bool):
    sizes = (cfg.scale.sizes or {}).get(family)
    if sizes is None:
        sizes = list(X.DEFAULT_SIZES[family])
        if family == "2D-AF" and opt_in_3x3:
            sizes.append((3, 3))
    return [tuple(s) if isinstance(s, (list, tuple)) else int(s) for s in sizes]


def write_scale(cfg: RunConfig, out: Path, allow_large: bool = False, **extra) -> list[Path]:
    times = [float(t) for t in cfg.scale.times_ms]
    files, best_rows, detail = [], [], []
    series = {}
    for family in cfg.scale.families:
        rows = X.scaling_study(family, _sizes(cfg, family, allow_large), times, allow_large=allow_large)
        for r in rows:
            best_rows.append((family, r.size, r.n_qubits, r.dim, r.best_T, r.p_solution, r.p_invalid))
            for T, (ps, pi) in sorted(r.per_time.items()):
                detail.append((family, r.size, r.n_qubits, T, ps, pi))
        n = np.array([r.n_qubits for r in rows], float)
        series[family] = (n, [r.p_solution for r in rows], [r.p_invalid for r in rows])
    files.append(write_csv(out / "scaling.csv", ("family", "size", "n_qubits", "dim", "best_T_ms", "p_solution",
                                                  "p_invalid"), best_rows))
    files.append(write_csv(out / "scaling_detail.csv", ("family", "size", "n_qubits", "T_ms", "p_solution",
                                                         "p_invalid"), detail))
    grid = np.unique(np.concatenate([v[0] for v in series.values()]))
    table = {}
    for family, (n, ps, pi) in series.items():
        table[f"{family} p_solution"] = np.interp(grid, n, ps, left=np.nan, right=np.nan)
        table[f"{family} p_invalid"] = np.interp(grid, n, pi, left=np.nan, right=np.nan)
        # interpolation only fills sizes a family did not run
        missing = ~np.isin(grid, n)
        table[f"{family} p_solution"][missing] = np.nan
        table[f"{family} p_invalid"][missing] = np.nan
    files += _figure(LineTable("n_qubits", grid, table, "probability", "best-time probabilities"), out / "scaling")
    return _finish(cfg, out, files, extra)


# ------------------------------------------------------------------ stack3d


def write_stack3d(cfg: RunConfig, out: Path, **extra) -> list[Path]:
    lat, f = cfg.lattice, cfg.fields
    params = X.stack_3d_parameters(lat.layers, lat.rows, lat.cols, fields=(f.E_start_kV_cm, f.E_end_kV_cm))
    tr = params.traces
    intra, inter = params.layer_pairs(True), params.layer_pairs(False)
    nq = params.config.n_qubits
    header = ["s", "E_kV_cm", "J_intra_mean_Hz", "J_inter_mean_Hz", "Delta_mean_Hz"] + [f"h_q{a}_Hz" for a in range(nq)]

    def mean_nonzero(J, pairs):
        vals = np.array([J[a, b] for a, b in pairs])
        vals = vals[np.abs(vals) > 1e-9 * (np.abs(vals).max() + 1e-300)]
        return float(vals.mean()) if vals.size else 0.0

    rows, s_intra, s_inter = [], [], []
    for k in range(len(tr.s)):
        ji, je = mean_nonzero(tr.J[k], intra), mean_nonzero(tr.J[k], inter)
        s_intra.append(ji)
        s_inter.append(je)
        rows.append([tr.s[k], tr.E[k], ji, je, float(tr.Delta[k].mean()), *tr.h[k]])
    files = [write_csv(out / "stack3d_traces.csv", header, rows)]
    files += write_ising(out, effective_ising(params.config, float(tr.E[-1])), stem="stack3d_ising")
    layers = np.array(params.layer)
    bottom, top = layers == 0, layers == layers.max()
    table = LineTable("s", tr.s, {"J_intra_mean_Hz": s_intra, "J_inter_mean_Hz": s_inter,
                                  "h_bottom_mean_Hz": tr.h[:, bottom].mean(axis=1),
                                  "h_top_mean_Hz": tr.h[:, top].mean(axis=1)},
                      "Hz", f"{params.config.name} parameters")
    files += _figure(table, out / "stack3d_traces")
    return _finish(cfg, out, files, extra)


WRITERS = {
    "spectrum": write_spectrum,
    "couplings": write_couplings,
    "scan": write_scan,
    "anneal": write_anneal,
    "scale": write_scale,
    "stack3d": write_stack3d,
}
