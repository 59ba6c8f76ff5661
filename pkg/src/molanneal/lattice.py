"""Molecule and qubit geometries, coupling tables and the effective Ising model.

A qubit is an ordered molecule pair ``(first, second)`` with
``|0> = |up_first down_second>`` and ``|1> = |down_first up_second>``.
Swapping the order flips the encoding. Spectators are single molecules held
in a fixed state that bias the qubits they couple to.

Spin values follow the S_z convention: qubit bit 0 carries s = +1/2 and bit 1
carries s = -1/2, so the Ising energy is sum_a h_a s_a + sum_{a<b} J_ab s_a s_b.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from molanneal.coupling import PairGeometry, couple, two_level
from molanneal.molecule import SRF, FieldPoint, MoleculeConstants
from molanneal.sector import SectorBasis

MAX_BRUTE_FORCE_QUBITS = 24


@dataclass
class LatticeConfig:
    positions: np.ndarray  # (n, 3), nm
    qubits: list[tuple[int, int]]
    spectators: list[tuple[int, str]] = field(default_factory=list)
    delta_E: np.ndarray | None = None  # V/m per molecule
    field_axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    B: float = 600.0  # mT
    molecule: MoleculeConstants = SRF
    n_max: int = 5
    name: str = ""

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        n = len(self.positions)
        self.qubits = [tuple(int(i) for i in q) for q in self.qubits]
        self.spectators = [(int(i), str(s)) for i, s in self.spectators]
        self.delta_E = np.zeros(n) if self.delta_E is None else np.asarray(self.delta_E, dtype=float)
        if self.delta_E.shape != (n,):
            raise ValueError(f"delta_E needs one entry per molecule ({n})")
        members = [i for q in self.qubits for i in q] + [i for i, _ in self.spectators]
        if any(len(q) != 2 or q[0] == q[1] for q in self.qubits):
            raise ValueError("each qubit is a pair of two distinct molecules")
        if sorted(members) != list(range(n)):
            raise ValueError("every molecule must belong to exactly one qubit or be a spectator")
        for _, state in self.spectators:
            if state not in ("up", "down"):
                raise ValueError(f"spectator state must be 'up' or 'down', got {state!r}")
        for i in range(n):
            for j in range(i + 1, n):
                if np.allclose(self.positions[i], self.positions[j]):
                    raise ValueError(f"molecules {i} and {j} coincide")
        if self.B < 0:
            raise ValueError("B must be non-negative")

    @property
    def n_molecules(self) -> int:
        return len(self.positions)

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def dynamic(self) -> list[int]:
        """Molecules belonging to qubits, in increasing index order."""
        return sorted(i for q in self.qubits for i in q)

    def field_at(self, i: int, E: float) -> FieldPoint:
        return FieldPoint(E, self.B, float(self.delta_E[i]))

    def flipped(self, qubit: int) -> "LatticeConfig":
        """Copy with one qubit's encoding inverted."""
        qubits = list(self.qubits)
        a, b = qubits[qubit]
        qubits[qubit] = (b, a)
        return replace(self, qubits=qubits)


@dataclass
class CouplingTables:
    """Pairwise couplings (Hz) over molecules.

    ``h = gap + shift`` where ``gap`` is eps_up - eps_down of each molecule at
    its local field and ``shift`` collects the K/W terms from all partners.
    """

    Jperp: np.ndarray
    Jz: np.ndarray
    gap: np.ndarray
    shift: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return self.gap + self.shift


@dataclass
class IsingModel:
    h: np.ndarray  # per qubit, Hz
    J: np.ndarray  # symmetric, zero diagonal, Hz
    qubits: list[tuple[int, int]]
    Delta: np.ndarray | None = None  # intraqubit J_perp, Hz

    @property
    def n_qubits(self) -> int:
        return len(self.h)

    def energy(self, config: str) -> float:
        s = 0.5 - np.array([int(c) for c in config], dtype=float)
        return float(self.h @ s + 0.5 * s @ self.J @ s)

    def edges(self):
        n = self.n_qubits
        return [(a, b, float(self.J[a, b])) for a in range(n) for b in range(a + 1, n)]


def build_coupling_tables(config: LatticeConfig, E: float) -> CouplingTables:
    n = config.n_molecules
    tls = [two_level(config.molecule, config.field_at(i, E), config.n_max) for i in range(n)]
    Jperp = np.zeros((n, n))
    Jz = np.zeros((n, n))
    shift = np.zeros(n)
    for i in range(n):
        for j in range(i + 1, n):
            geom = PairGeometry.between(config.positions[i], config.positions[j], config.field_axis)
            pc = couple(tls[i], tls[j], geom)
            Jperp[i, j] = Jperp[j, i] = pc.J_perp
            Jz[i, j] = Jz[j, i] = pc.J_z
            shift[i] += pc.K
            shift[j] += pc.W
    gap = np.array([tl.eps_up - tl.eps_down for tl in tls])
    return CouplingTables(Jperp, Jz, gap, shift)


def spin_of(state: str) -> float:
    return 0.5 if state == "up" else -0.5


def effective_ising(config: LatticeConfig, E: float, tables: CouplingTables | None = None) -> IsingModel:
    """Two-level reduction of the molecular model onto the qubit encoding."""
    t = build_coupling_tables(config, E) if tables is None else tables
    nq = config.n_qubits
    h = np.zeros(nq)
    J = np.zeros((nq, nq))
    Delta = np.zeros(nq)
    for a, (f, s) in enumerate(config.qubits):
        # subtract like terms separately; gap is ~GHz and cancels for equal fields
        h[a] = (t.gap[f] - t.gap[s]) + (t.shift[f] - t.shift[s])
        for m, state in config.spectators:
            h[a] += spin_of(state) * (t.Jz[m, f] - t.Jz[m, s])
        Delta[a] = t.Jperp[f, s]
    for a, (a1, a2) in enumerate(config.qubits):
        for b in range(a + 1, nq):
            b1, b2 = config.qubits[b]
            J[a, b] = J[b, a] = t.Jz[a1, b1] + t.Jz[a2, b2] - t.Jz[a1, b2] - t.Jz[a2, b1]
    return IsingModel(h, J, list(config.qubits), Delta)


def brute_force_ground(model: IsingModel, rtol: float = 1e-9) -> tuple[float, list[str]]:
    """Exhaustive minimum of the Ising energy; every degenerate minimizer is returned."""
    n = model.n_qubits
    if n > MAX_BRUTE_FORCE_QUBITS:
        raise ValueError(f"brute force limited to {MAX_BRUTE_FORCE_QUBITS} qubits, got {n}")
    if n == 0:
        return 0.0, [""]
    scale = np.abs(model.h).sum() + np.abs(model.J).sum() + 1e-300
    tol = rtol * scale
    best = np.inf
    candidates = []
    chunk = 1 << min(n, 16)
    shifts = np.arange(n)
    for start in range(0, 1 << n, chunk):
        idx = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        # qubit a is character a of the bitstring, i.e. bit n-1-a of idx
        bits = (idx[:, None] >> (n - 1 - shifts)) & 1
        s = 0.5 - bits
        e = s @ model.h + 0.5 * np.einsum("ia,ab,ib->i", s, model.J, s)
        best = min(best, e.min())
        candidates.extend(zip(e[e <= e.min() + tol], idx[e <= e.min() + tol]))
    final = sorted(int(i) for e, i in candidates if e <= best + tol)
    return float(best), [format(w, f"0{n}b") for w in final]


@dataclass
class Classification:
    basis: SectorBasis
    dynamic: list[int]  # molecule index of each sector bit
    valid: np.ndarray  # bool per sector state
    qubit_config: np.ndarray  # int per sector state, -1 if invalid; qubit 0 is the most significant bit
    n_qubits: int

    def config_string(self, index: int) -> str:
        c = self.qubit_config[index]
        return "INVALID" if c < 0 else format(int(c), f"0{self.n_qubits}b")

    def state_index(self, config: str) -> int:
        hits = np.flatnonzero(self.qubit_config == int(config, 2))
        return int(hits[0])


def sector_basis(config: LatticeConfig) -> SectorBasis:
    n = len(config.dynamic)
    return SectorBasis(n, config.n_qubits)


def classify_states(config: LatticeConfig, basis: SectorBasis | None = None) -> Classification:
    """Split the sector into valid (one up per qubit) and invalid states."""
    dyn = config.dynamic
    if len(dyn) != 2 * config.n_qubits or len(dyn) % 2:
        raise ValueError("qubit molecules must come in pairs")
    basis = sector_basis(config) if basis is None else basis
    if basis.n != len(dyn) or basis.k != config.n_qubits:
        raise ValueError("sector basis does not match the lattice")
    pos = {m: p for p, m in enumerate(dyn)}
    bits = basis.bits()
    nq = config.n_qubits
    valid = np.ones(len(basis), dtype=bool)
    code = np.zeros(len(basis), dtype=np.int64)
    for a, (f, s) in enumerate(config.qubits):
        bf, bs = bits[:, pos[f]], bits[:, pos[s]]
        valid &= bf != bs
        # up on the first molecule is qubit value 0
        code |= (bs.astype(np.int64)) << (nq - 1 - a)
    code[~valid] = -1
    return Classification(basis, dyn, valid, code, nq)


# ---------------------------------------------------------------- geometries


def two_qubit_rectangle(r1: float = 500.0, r2: float = 1000.0, **kw) -> LatticeConfig:
    """Two side-by-side qubits; qubit axes along the field, qubits r2 apart."""
    pos = [(0, 0, 0), (0, 0, r1), (r2, 0, 0), (r2, 0, r1)]
    return LatticeConfig(pos, [(0, 1), (2, 3)], name="two_qubit", **kw)


def chain_1d(n_qubits: int, r1: float = 500.0, r2: float = 1000.0, ferro: bool = False, **kw) -> LatticeConfig:
    """Chain of qubits.

    Default: qubit axes along the field, chain perpendicular to it (AF between
    qubits). ``ferro=True`` rotates the picture by pi/2: qubit axes
    perpendicular to the field, chain along it (FM between qubits).
    """
    pos = []
    for a in range(n_qubits):
        if ferro:
            pos += [(0, 0, a * r2), (r1, 0, a * r2)]
        else:
            pos += [(a * r2, 0, 0), (a * r2, 0, r1)]
    qubits = [(2 * a, 2 * a + 1) for a in range(n_qubits)]
    return LatticeConfig(pos, qubits, name=f"chain_1d_{'fm' if ferro else 'af'}_{n_qubits}", **kw)


def grid_2d(rows: int, cols: int, r1: float = 500.0, r2: float = 1000.0, **kw) -> LatticeConfig:
    """1D AF chains (along x) stacked along y, perpendicular to the field."""
    pos = []
    for r in range(rows):
        for c in range(cols):
            pos += [(c * r2, r * r2, 0), (c * r2, r * r2, r1)]
    qubits = [(2 * a, 2 * a + 1) for a in range(rows * cols)]
    return LatticeConfig(pos, qubits, name=f"grid_2d_{rows}x{cols}", **kw)


def stack_3d(layers: int = 3, rows: int = 2, cols: int = 2, r1: float = 500.0, r2: float = 1000.0, **kw) -> LatticeConfig:
    """2D layers stacked along the field with a gap r2 between layers.

    Odd layers use the inverted encoding (first molecule on top), which makes
    the Ising couplings between layers ferromagnetic.
    """
    pos, qubits = [], []
    pitch = r1 + r2
    for layer in range(layers):
        for r in range(rows):
            for c in range(cols):
                base = len(pos)
                z = layer * pitch
                pos += [(c * r2, r * r2, z), (c * r2, r * r2, z + r1)]
                qubits.append((base + 1, base) if layer % 2 else (base, base + 1))
    return LatticeConfig(pos, qubits, name=f"stack_3d_{layers}x{rows}x{cols}", **kw)


def head_to_head(r1: float = 500.0, r2: float = 1000.0, **kw) -> LatticeConfig:
    """Two qubits collinear along the field, nearest molecules r2 apart."""
    pos = [(0, 0, 0), (0, 0, r1), (0, 0, r1 + r2), (0, 0, 2 * r1 + r2)]
    return LatticeConfig(pos, [(0, 1), (2, 3)], name="head_to_head", **kw)


def cross_stack(r1: float = 500.0, r2: float = 1000.0, **kw) -> LatticeConfig:
    """Qubit b perpendicular to qubit a and centred on a's symmetry plane."""
    pos = [(0, 0, -r1 / 2), (0, 0, r1 / 2), (r2, -r1 / 2, 0), (r2, r1 / 2, 0)]
    return LatticeConfig(pos, [(0, 1), (2, 3)], name="cross", **kw)
