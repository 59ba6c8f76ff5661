"""Run configuration files.

JSON documents whose keys carry their units (``B_mT``, ``R_nm``, ``E_start_kV_cm``).
Unknown keys are rejected; a key that differs from a known one only in its
unit suffix gets a dedicated diagnostic.

Minimal example::

    {"experiment": "two_qubit", "fields": {"B_mT": 600, "E_mode": "auto"}}
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from molanneal.lattice import (
    LatticeConfig,
    chain_1d,
    cross_stack,
    grid_2d,
    head_to_head,
    stack_3d,
    two_qubit_rectangle,
)
from molanneal.molecule import MOLECULES, MoleculeConstants

EXPERIMENTS = ("spectrum", "couplings", "scan", "two_qubit", "anneal", "scale", "stack3d")
FAMILIES = ("rectangle", "chain_1d", "chain_1d_fm", "grid_2d", "stack_3d", "head_to_head", "cross", "explicit")
UNIT_SUFFIXES = ("_cm_inv", "_kV_cm", "_V_m", "_mT", "_nm", "_ms", "_rad", "_D")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` and ``line`` locate the problem when known."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        super().__init__(message)
        self.key = key
        self.line = line

    def record(self) -> dict:
        return {"error": "config", "message": str(self), "key": self.key, "line": self.line}


@dataclass
class MoleculeBlock:
    name: str = "SrF"
    B_e_cm_inv: float | None = None
    gamma_SR_cm_inv: float | None = None
    d_D: float | None = None

    def constants(self) -> MoleculeConstants:
        return MoleculeConstants(self.B_e_cm_inv, self.gamma_SR_cm_inv, self.d_D, self.name)


@dataclass
class FieldsBlock:
    B_mT: float | None = None
    E_mode: str = "auto"  # auto: E_start = E_perp, E_end = E_z
    E_start_kV_cm: float | None = None
    E_end_kV_cm: float | None = None
    ratio: float = 100.0
    E_min_kV_cm: float = 0.0  # spectrum window
    E_max_kV_cm: float | None = None
    n_points: int = 201


@dataclass
class LatticeBlock:
    family: str = "rectangle"
    n_qubits: int = 2
    rows: int = 2
    cols: int = 3
    layers: int = 3
    r1_nm: float = 500.0
    r2_nm: float = 1000.0
    positions_nm: list | None = None
    qubits: list | None = None
    spectators: list = field(default_factory=list)
    delta_E_V_m: list | None = None
    field_axis: list = field(default_factory=lambda: [0.0, 0.0, 1.0])


@dataclass
class ScheduleBlock:
    times_ms: list = field(default_factory=lambda: [15.0])
    n_steps: int | None = None
    stop_s: float = 1.0


@dataclass
class ScanBlock:
    constant: str = "d"
    values: list | None = None
    R_nm: float = 500.0
    theta_rad: float = math.pi / 2
    per_decade: int = 25


@dataclass
class CouplingsBlock:
    cases: list = field(default_factory=lambda: [{"molecule": "SrF", "B_mT": 600.0}, {"molecule": "SrI", "B_mT": 100.0}])
    R_nm: float = 500.0
    theta_rad: float = math.pi / 2
    n_points: int = 201
    span: float = 0.2  # relative half-width around the crossing


@dataclass
class ScaleBlock:
    families: list = field(default_factory=lambda: ["1D-AF", "1D-FM", "2D-AF"])
    sizes: dict | None = None
    times_ms: list = field(default_factory=lambda: [5.0, 10.0, 15.0, 20.0, 25.0])


@dataclass
class RunConfig:
    experiment: str = "two_qubit"
    N_max: int = 5
    molecule: MoleculeBlock = field(default_factory=MoleculeBlock)
    fields: FieldsBlock = field(default_factory=FieldsBlock)
    lattice: LatticeBlock = field(default_factory=LatticeBlock)
    schedule: ScheduleBlock = field(default_factory=ScheduleBlock)
    scan: ScanBlock = field(default_factory=ScanBlock)
    couplings: CouplingsBlock = field(default_factory=CouplingsBlock)
    scale: ScaleBlock = field(default_factory=ScaleBlock)
    output_dir: str = "out"

    def lattice_config(self) -> LatticeConfig:
        return build_lattice(self)


BLOCKS = {
    "molecule": MoleculeBlock,
    "fields": FieldsBlock,
    "lattice": LatticeBlock,
    "schedule": ScheduleBlock,
    "scan": ScanBlock,
    "couplings": CouplingsBlock,
    "scale": ScaleBlock,
}


def _line_of(text: str | None, key: str) -> int | None:
    if not text:
        return None
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def _unit_hint(key: str, known) -> str | None:
    for k in known:
        for suffix in UNIT_SUFFIXES:
            if k.endswith(suffix):
                stem = k[: -len(suffix)]
                if key != k and key.startswith(stem + "_") and any(key.endswith(u) for u in UNIT_SUFFIXES + ("_T", "_G", "_um", "_s", "_deg", "_V_cm")):
                    return k
    return None


def _check_keys(data: dict, cls, where: str, text: str | None):
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object", where, _line_of(text, where.split(".")[-1]))
    known = [f.name for f in fields(cls)]
    for key in data:
        if key in known:
            continue
        hint = _unit_hint(key, known)
        path = f"{where}.{key}" if where else key
        if hint:
            raise ConfigError(f"unit-suffix mismatch for '{path}': expected '{hint}'", path, _line_of(text, key))
        raise ConfigError(f"unknown key '{path}'", path, _line_of(text, key))


def _number(v, key, text, positive=False, nonneg=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"'{key}' must be a finite number", key, _line_of(text, key.split(".")[-1]))
    if integer and int(v) != v:
        raise ConfigError(f"'{key}' must be an integer", key, _line_of(text, key.split(".")[-1]))
    if positive and not v > 0:
        raise ConfigError(f"'{key}' must be positive, got {v}", key, _line_of(text, key.split(".")[-1]))
    if nonneg and v < 0:
        raise ConfigError(f"'{key}' must be non-negative, got {v}", key, _line_of(text, key.split(".")[-1]))
    return int(v) if integer else float(v)


def from_dict(data: dict, text: str | None = None, default_experiment: str = "two_qubit") -> RunConfig:
    """Validate a parsed document and apply defaults (no field resolution)."""
    _check_keys(data, RunConfig, "", text)
    kw = {}
    for name, cls in BLOCKS.items():
        block = data.get(name, {})
        _check_keys(block, cls, name, text)
        kw[name] = cls(**block)
    cfg = RunConfig(
        experiment=data.get("experiment", default_experiment),
        N_max=data.get("N_max", 5),
        output_dir=data.get("output_dir", "out"),
        **kw,
    )
    _apply_defaults(cfg)
    validate(cfg, text)
    return cfg


def _apply_defaults(cfg: RunConfig):
    m = cfg.molecule
    base = MOLECULES.get(m.name)
    if base is not None:
        m.B_e_cm_inv = base.B_e if m.B_e_cm_inv is None else m.B_e_cm_inv
        m.gamma_SR_cm_inv = base.gamma_SR if m.gamma_SR_cm_inv is None else m.gamma_SR_cm_inv
        m.d_D = base.d if m.d_D is None else m.d_D
    f = cfg.fields
    if f.B_mT is None:
        f.B_mT = 538.0 if cfg.experiment == "spectrum" else 600.0
    if f.E_max_kV_cm is None and cfg.experiment == "spectrum":
        f.E_max_kV_cm = 2.0
    lat = cfg.lattice
    if cfg.experiment == "stack3d" and lat.family == "rectangle":
        lat.family = "stack_3d"
    s = cfg.schedule
    if s.n_steps is None:
        s.n_steps = 100 if lat.family in ("grid_2d", "stack_3d") else 200


def validate(cfg: RunConfig, text: str | None = None):
    def fail(msg, key):
        raise ConfigError(msg, key, _line_of(text, key.split(".")[-1]))

    if cfg.experiment not in EXPERIMENTS:
        fail(f"experiment must be one of {EXPERIMENTS}, got {cfg.experiment!r}", "experiment")
    _number(cfg.N_max, "N_max", text, positive=True, integer=True)
    m = cfg.molecule
    if None in (m.B_e_cm_inv, m.gamma_SR_cm_inv, m.d_D):
        fail(f"molecule {m.name!r} is not built in; give B_e_cm_inv, gamma_SR_cm_inv and d_D", "molecule")
    _number(m.B_e_cm_inv, "molecule.B_e_cm_inv", text, positive=True)
    _number(m.gamma_SR_cm_inv, "molecule.gamma_SR_cm_inv", text)
    _number(m.d_D, "molecule.d_D", text, positive=True)
    f = cfg.fields
    _number(f.B_mT, "fields.B_mT", text, nonneg=True)
    if f.E_mode not in ("auto", "explicit"):
        fail("fields.E_mode must be 'auto' or 'explicit'", "fields.E_mode")
    for key in ("E_start_kV_cm", "E_end_kV_cm", "E_max_kV_cm"):
        if getattr(f, key) is not None:
            _number(getattr(f, key), f"fields.{key}", text, nonneg=True)
    if f.E_mode == "explicit" and (f.E_start_kV_cm is None or f.E_end_kV_cm is None):
        fail("explicit E_mode needs E_start_kV_cm and E_end_kV_cm", "fields.E_mode")
    _number(f.E_min_kV_cm, "fields.E_min_kV_cm", text, nonneg=True)
    _number(f.ratio, "fields.ratio", text, positive=True)
    _number(f.n_points, "fields.n_points", text, positive=True, integer=True)
    lat = cfg.lattice
    if lat.family not in FAMILIES:
        fail(f"lattice.family must be one of {FAMILIES}", "lattice.family")
    _number(lat.r1_nm, "lattice.r1_nm", text, positive=True)
    _number(lat.r2_nm, "lattice.r2_nm", text, positive=True)
    for key in ("n_qubits", "rows", "cols", "layers"):
        _number(getattr(lat, key), f"lattice.{key}", text, positive=True, integer=True)
    if lat.family == "explicit" and (lat.positions_nm is None or lat.qubits is None):
        fail("explicit lattice needs positions_nm and qubits", "lattice.family")
    s = cfg.schedule
    if not isinstance(s.times_ms, list) or not s.times_ms:
        fail("schedule.times_ms must be a non-empty list", "schedule.times_ms")
    for t in s.times_ms:
        _number(t, "schedule.times_ms", text, positive=True)
    _number(s.n_steps, "schedule.n_steps", text, positive=True, integer=True)
    if not 0 < _number(s.stop_s, "schedule.stop_s", text) <= 1:
        fail("schedule.stop_s must lie in (0, 1]", "schedule.stop_s")
    sc = cfg.scan
    if sc.constant not in ("d", "B_e", "gamma_SR"):
        fail("scan.constant must be 'd', 'B_e' or 'gamma_SR'", "scan.constant")
    _number(sc.R_nm, "scan.R_nm", text, positive=True)
    _number(sc.theta_rad, "scan.theta_rad", text, nonneg=True)
    for v in sc.values or []:
        _number(v, "scan.values", text, positive=True)
    c = cfg.couplings
    _number(c.R_nm, "couplings.R_nm", text, positive=True)
    for case in c.cases:
        if not isinstance(case, dict) or set(case) - {"molecule", "B_mT", "E_min_kV_cm", "E_max_kV_cm"}:
            fail("couplings.cases entries take molecule, B_mT, E_min_kV_cm, E_max_kV_cm", "couplings.cases")
        if case.get("molecule") not in MOLECULES:
            fail(f"unknown molecule in couplings.cases: {case.get('molecule')!r}", "couplings.cases")
        _number(case.get("B_mT", 600.0), "couplings.cases.B_mT", text, nonneg=True)
    for t in cfg.scale.times_ms:
        _number(t, "scale.times_ms", text, positive=True)
    for fam in cfg.scale.families:
        if fam not in ("1D-AF", "1D-FM", "2D-AF"):
            fail(f"unknown scaling family {fam!r}", "scale.families")
    if cfg.scale.sizes is not None:
        if not isinstance(cfg.scale.sizes, dict):
            fail('scale.sizes must map a family to a list of sizes, e.g. {"2D-AF": [[2, 2]]}', "scale.sizes")
        for fam, sizes in cfg.scale.sizes.items():
            want = 2 if fam == "2D-AF" else 1
            if fam not in ("1D-AF", "1D-FM", "2D-AF") or not isinstance(sizes, list):
                fail(f"scale.sizes entry {fam!r} is invalid", "scale.sizes")
            for s in sizes:
                dims = s if isinstance(s, list) else [s]
                if len(dims) != want:
                    fail(f"scale.sizes entry {fam!r} needs {'[rows, cols]' if want == 2 else 'qubit counts'}",
                         "scale.sizes")
                for d in dims:
                    _number(d, "scale.sizes", text, positive=True, integer=True)
    try:
        if cfg.experiment in ("two_qubit", "anneal", "stack3d"):
            build_lattice(cfg)
    except (ValueError, TypeError) as exc:
        fail(f"lattice: {exc}", "lattice")


def build_lattice(cfg: RunConfig) -> LatticeConfig:
    lat = cfg.lattice
    kw = dict(B=cfg.fields.B_mT, molecule=cfg.molecule.constants(), n_max=cfg.N_max, field_axis=tuple(lat.field_axis))
    r = dict(r1=lat.r1_nm, r2=lat.r2_nm)
    if lat.family == "rectangle":
        config = two_qubit_rectangle(**r, **kw)
    elif lat.family == "chain_1d":
        config = chain_1d(lat.n_qubits, **r, **kw)
    elif lat.family == "chain_1d_fm":
        config = chain_1d(lat.n_qubits, ferro=True, **r, **kw)
    elif lat.family == "grid_2d":
        config = grid_2d(lat.rows, lat.cols, **r, **kw)
    elif lat.family == "stack_3d":
        config = stack_3d(lat.layers, lat.rows, lat.cols, **r, **kw)
    elif lat.family == "head_to_head":
        config = head_to_head(**r, **kw)
    elif lat.family == "cross":
        config = cross_stack(**r, **kw)
    else:
        config = LatticeConfig(lat.positions_nm, [tuple(q) for q in lat.qubits],
                               [tuple(s) for s in lat.spectators], name="explicit", **kw)
    if lat.spectators and lat.family != "explicit":
        raise ValueError("spectators need an explicit lattice")
    if lat.delta_E_V_m is not None:
        config.delta_E = [float(v) for v in lat.delta_E_V_m]
        config.__post_init__()
    return config


def resolve_fields(cfg: RunConfig) -> RunConfig:
    """Fill E_start/E_end from the working fields when E_mode is auto."""
    from molanneal.coupling import find_E_perp, find_E_z

    f = cfg.fields
    if f.E_mode == "auto" and (f.E_start_kV_cm is None or f.E_end_kV_cm is None):
        mol = cfg.molecule.constants()
        E_perp = find_E_perp(mol, f.B_mT, n_max=cfg.N_max)
        f.E_start_kV_cm = E_perp
        f.E_end_kV_cm = find_E_z(mol, f.B_mT, ratio=f.ratio, E_perp=E_perp, n_max=cfg.N_max)
    return cfg


def parse_text(text: str, resolve: bool = False, default_experiment: str = "two_qubit") -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc.msg}", None, exc.lineno) from None
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object", None, 1)
    cfg = from_dict(data, text, default_experiment)
    return resolve_fields(cfg) if resolve else cfg


def parse_config(path, resolve: bool = True, default_experiment: str = "two_qubit") -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_text(text, resolve=resolve, default_experiment=default_experiment)


def to_dict(cfg: RunConfig) -> dict:
    return asdict(cfg)


def emit_config(cfg: RunConfig) -> str:
    return json.dumps(to_dict(cfg), indent=2, sort_keys=True) + "\n"
