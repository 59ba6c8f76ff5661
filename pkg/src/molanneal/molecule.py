"""Single 2-Sigma molecule in co-aligned dc electric and magnetic fields.

The Hamiltonian is

    H = B_e N^2 + gamma_SR N.S - E d_z + g_S mu_B B S_z

in the uncoupled basis |N M_N M_S>, with both fields along z. All energies are
linear frequencies in Hz.

With co-aligned fields the projection M_N + M_S is conserved, so H is block
diagonal. Eigenstates inside one block never cross as the field is varied, so
an eigenstate is followed adiabatically by its (block, energy rank) key. The
states alpha, beta, gamma are defined by their zero-field character:

    alpha  ~ |0, 0, -1/2>
    beta   ~ |1, 1, -1/2>
    gamma  ~ |0, 0, +1/2>
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from molanneal import constants as C
from molanneal.wigner import wigner_3j


class TrackingError(RuntimeError):
    """A tracked state lost continuity between neighbouring grid points."""

    def __init__(self, message: str, index: int, E: float):
        super().__init__(message)
        self.index = index
        self.E = E


class LabelingError(ValueError):
    pass


class NoMinimumError(ValueError):
    pass


@dataclass(frozen=True)
class MoleculeConstants:
    """Rotational constant and spin-rotation constant in cm^-1, dipole in Debye."""

    B_e: float
    gamma_SR: float
    d: float
    name: str = ""

    def __post_init__(self):
        if not self.B_e > 0:
            raise ValueError(f"B_e must be positive, got {self.B_e}")
        if not self.d > 0:
            raise ValueError(f"d must be positive, got {self.d}")
        if not np.isfinite(self.gamma_SR):
            raise ValueError("gamma_SR must be finite")


SRF = MoleculeConstants(B_e=0.251, gamma_SR=2.49e-3, d=3.47, name="SrF")
SRI = MoleculeConstants(B_e=0.0367, gamma_SR=3.29e-3, d=6.00, name="SrI")

MOLECULES = {"SrF": SRF, "SrI": SRI}


@dataclass(frozen=True)
class FieldPoint:
    """Electric field in kV/cm, magnetic field in mT, per-molecule offset in V/m."""

    E: float
    B: float
    deltaE: float = 0.0

    def __post_init__(self):
        if self.E < 0 or self.B < 0:
            raise ValueError(f"field magnitudes must be non-negative: E={self.E}, B={self.B}")

    @property
    def E_total(self) -> float:
        """Electric field seen by the molecule, kV/cm."""
        return self.E + self.deltaE * C.V_PER_M_TO_KV_PER_CM


@dataclass(frozen=True, order=True)
class BasisState:
    N: int
    M_N: int
    M_S: float

    def __post_init__(self):
        if self.N < 0 or abs(self.M_N) > self.N:
            raise ValueError(f"invalid rotational state N={self.N}, M_N={self.M_N}")
        if self.M_S not in (-0.5, 0.5):
            raise ValueError(f"M_S must be +-1/2, got {self.M_S}")

    @property
    def m_total2(self) -> int:
        """Twice the conserved projection M_N + M_S."""
        return 2 * self.M_N + int(2 * self.M_S)


LABEL_KETS = {
    "alpha": BasisState(0, 0, -0.5),
    "beta": BasisState(1, 1, -0.5),
    "gamma": BasisState(0, 0, 0.5),
}


@lru_cache(maxsize=None)
def basis(n_max: int) -> tuple[BasisState, ...]:
    """Basis |N M_N M_S> ordered by N, then M_N, then M_S; 2(n_max+1)^2 states."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    return tuple(
        BasisState(N, M, ms) for N in range(n_max + 1) for M in range(-N, N + 1) for ms in (-0.5, 0.5)
    )


def dipole_element(bra: BasisState, ket: BasisState, q: int) -> float:
    """<N M_N M_S| d_q |N' M_N' M_S'> in units of the permanent dipole moment."""
    if q not in (-1, 0, 1):
        raise ValueError(f"spherical component must be -1, 0 or 1, got {q}")
    if bra.M_S != ket.M_S or abs(bra.N - ket.N) != 1 or bra.M_N != q + ket.M_N:
        return 0.0
    N, Np = bra.N, ket.N
    return (
        (-1) ** bra.M_N
        * np.sqrt((2 * N + 1) * (2 * Np + 1))
        * wigner_3j(N, 1, Np, 0, 0, 0)
        * wigner_3j(N, 1, Np, -bra.M_N, q, ket.M_N)
    )


@lru_cache(maxsize=None)
def dipole_matrix(n_max: int, q: int) -> np.ndarray:
    states = basis(n_max)
    n = len(states)
    out = np.zeros((n, n))
    for i, bra in enumerate(states):
        for j, ket in enumerate(states):
            if abs(bra.N - ket.N) == 1:
                out[i, j] = dipole_element(bra, ket, q)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _structure(n_max: int):
    states = basis(n_max)
    n = len(states)
    index = {s: i for i, s in enumerate(states)}
    rot = np.array([s.N * (s.N + 1) for s in states], dtype=float)
    sz = np.array([s.M_S for s in states])
    # N.S = N_z S_z + (N+ S- + N- S+)/2
    ns = np.diag([s.M_N * s.M_S for s in states])
    for i, s in enumerate(states):
        if s.M_S == 0.5 and s.M_N < s.N:
            j = index[BasisState(s.N, s.M_N + 1, -0.5)]
            v = 0.5 * np.sqrt(s.N * (s.N + 1) - s.M_N * (s.M_N + 1))
            ns[i, j] = ns[j, i] = v
    m2 = np.array([s.m_total2 for s in states])
    blocks = {int(m): np.flatnonzero(m2 == m) for m in np.unique(m2)}
    for arr in (rot, sz, ns, m2):
        arr.setflags(write=False)
    return rot, sz, ns, m2, blocks


def build_hamiltonian(mol: MoleculeConstants, f: FieldPoint, n_max: int = 5) -> np.ndarray:
    """Hamiltonian matrix in Hz over basis(n_max)."""
    rot, sz, ns, _, _ = _structure(n_max)
    stark = C.STARK_HZ_PER_D_KV_CM * mol.d * f.E_total
    H = mol.gamma_SR * C.CM_INV_TO_HZ * ns - stark * dipole_matrix(n_max, 0)
    H[np.diag_indices_from(H)] += mol.B_e * C.CM_INV_TO_HZ * rot + C.ZEEMAN_HZ_PER_T * f.B * 1e-3 * sz
    return H


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude coefficient of every column made positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


@dataclass
class DressedStates:
    """Eigenstates at one field point, sorted by energy.

    ``keys[k]`` is ``(m_total2, rank)``: twice the conserved projection and the
    energy rank inside that symmetry block.
    """

    energies: np.ndarray
    vectors: np.ndarray
    keys: list[tuple[int, int]]

    def index(self, key: tuple[int, int]) -> int:
        try:
            return self.keys.index(key)
        except ValueError:
            raise LabelingError(f"no dressed state with key {key}") from None


def block_eigh(mol: MoleculeConstants, f: FieldPoint, n_max: int, m_total2: int):
    """Eigenvalues and full-basis eigenvectors of one M_N + M_S block."""
    H = build_hamiltonian(mol, f, n_max)
    idx = _structure(n_max)[4][m_total2]
    w, v = np.linalg.eigh(H[np.ix_(idx, idx)])
    vecs = np.zeros((H.shape[0], len(w)))
    vecs[idx] = _fix_phase(v)
    return w, vecs


def diagonalize(mol: MoleculeConstants, f: FieldPoint, n_max: int = 5) -> DressedStates:
    H = build_hamiltonian(mol, f, n_max)
    blocks = _structure(n_max)[4]
    energies, cols, keys = [], [], []
    for m2, idx in blocks.items():
        w, v = np.linalg.eigh(H[np.ix_(idx, idx)])
        full = np.zeros((H.shape[0], len(w)))
        full[idx] = _fix_phase(v)
        energies.append(w)
        cols.append(full)
        keys.extend((m2, r) for r in range(len(w)))
    energies = np.concatenate(energies)
    vectors = np.hstack(cols)
    order = np.argsort(energies, kind="stable")
    return DressedStates(energies[order], vectors[:, order], [keys[k] for k in order])


@lru_cache(maxsize=256)
def reference_labels(mol: MoleculeConstants, B: float, n_max: int = 5) -> dict[str, tuple[int, int]]:
    """Map alpha/beta/gamma to adiabatic keys, from their zero-electric-field character."""
    if B <= 0:
        raise LabelingError("beta/gamma are undefined without a Zeeman splitting (B = 0)")
    ds = diagonalize(mol, FieldPoint(0.0, B), n_max)
    states = basis(n_max)
    out = {}
    for label, ket in LABEL_KETS.items():
        weights = ds.vectors[states.index(ket)] ** 2
        k = int(np.argmax(weights))
        if weights[k] <= 0.5:
            raise LabelingError(f"state {label} has no dominant zero-field character at B={B} mT")
        out[label] = ds.keys[k]
    if len(set(out.values())) != len(out):
        raise LabelingError(f"labels collide at B={B} mT: {out}")
    return out


def resolve_label(mol: MoleculeConstants, B: float, n_max: int, label) -> tuple[int, int]:
    """Accept a label name or an explicit (m_total2, rank) key."""
    if isinstance(label, str):
        try:
            return reference_labels(mol, B, n_max)[label]
        except KeyError:
            raise LabelingError(f"unknown state label {label!r}") from None
    return tuple(label)


@dataclass
class TrackedSpectrum:
    grid: np.ndarray
    energies: np.ndarray  # (n_grid, n_states), Hz
    eigvecs: np.ndarray  # (n_grid, n_states, dim)
    keys: list[tuple[int, int]]
    labels: dict[str, int] = field(default_factory=dict)

    def label_of(self, index: int) -> str:
        for name, k in self.labels.items():
            if k == index:
                return name
        return ""


def track_spectrum(
    mol: MoleculeConstants,
    B: float,
    E_grid: Sequence[float],
    n_max: int = 5,
    n_states: int = 5,
    max_refine: int = 0,
) -> TrackedSpectrum:
    """Follow the ``n_states`` lowest levels (plus alpha, beta, gamma) across E_grid.

    Raises TrackingError when a tracked state overlaps its predecessor by
    0.5 or less. With ``max_refine > 0`` failing intervals are bisected up to
    that many times instead, and the returned grid contains the extra points.
    """
    grid = np.asarray(E_grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValueError("E_grid must be a non-empty 1D sequence")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("E_grid must be strictly increasing")
    labels = reference_labels(mol, B, n_max)

    def solve(E):
        return diagonalize(mol, FieldPoint(E, B), n_max)

    first = solve(grid[0])
    keys = list(first.keys[:n_states])
    for key in labels.values():
        if key not in keys:
            keys.append(key)

    points = [(grid[0], first)]
    for E in grid[1:]:
        _extend(points, E, solve, keys, max_refine)

    energies = np.array([[ds.energies[ds.index(k)] for k in keys] for _, ds in points])
    vecs = np.array([[ds.vectors[:, ds.index(k)] for k in keys] for _, ds in points])
    return TrackedSpectrum(
        grid=np.array([E for E, _ in points]),
        energies=energies,
        eigvecs=vecs,
        keys=keys,
        labels={name: keys.index(k) for name, k in labels.items()},
    )


def _extend(points, E, solve, keys, depth):
    E0, prev = points[-1]
    cur = solve(E)
    worst = min(abs(prev.vectors[:, prev.index(k)] @ cur.vectors[:, cur.index(k)]) for k in keys)
    if worst > 0.5:
        points.append((E, cur))
        return
    if depth <= 0:
        raise TrackingError(
            f"tracking failed between E={E0:.6g} and E={E:.6g} kV/cm (overlap {worst:.3f}); refine the grid",
            index=len(points),
            E=E,
        )
    mid = 0.5 * (E0 + E)
    _extend(points, mid, solve, keys, depth - 1)
    _extend(points, E, solve, keys, depth - 1)


def golden_section(fun: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Minimize a unimodal function on [a, b] to an interval shorter than tol."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def scan_then_golden(fun, lo: float, hi: float, n_grid: int = 201, tol: float = 1e-3):
    """Grid scan followed by golden-section refinement around the best point.

    Returns ``(x, fun(x))``; raises NoMinimumError when the grid minimum sits
    on the bracket boundary.
    """
    xs = np.linspace(lo, hi, n_grid)
    ys = np.array([fun(x) for x in xs])
    k = int(np.argmin(ys))
    if k == 0 or k == n_grid - 1:
        raise NoMinimumError(f"objective is monotone over [{lo}, {hi}]; no interior minimum")
    x = golden_section(fun, xs[k - 1], xs[k + 1], tol)
    return x, fun(x)


def level_gap(mol: MoleculeConstants, B: float, E: float, n_max: int = 5, pair=("beta", "gamma")) -> float:
    """|energy(pair[1]) - energy(pair[0])| in Hz at field (E, B)."""
    ka, kb = (resolve_label(mol, B, n_max, p) for p in pair)
    f = FieldPoint(E, B)
    if ka[0] == kb[0]:
        w, _ = block_eigh(mol, f, n_max, ka[0])
        return abs(w[kb[1]] - w[ka[1]])
    wa, _ = block_eigh(mol, f, n_max, ka[0])
    wb, _ = block_eigh(mol, f, n_max, kb[0])
    return abs(wb[kb[1]] - wa[ka[1]])


def default_window(mol: MoleculeConstants) -> tuple[float, float]:
    """Field window (kV/cm) up to a Stark energy d E of ten rotational constants."""
    return 0.0, 10.0 * mol.B_e * C.CM_INV_TO_HZ / (mol.d * C.STARK_HZ_PER_D_KV_CM)


def find_avoided_crossing(
    mol: MoleculeConstants, B: float, bracket=None, n_max: int = 5
) -> tuple[float, float]:
    """Electric field (kV/cm) of the beta-gamma gap minimum and the gap (Hz)."""
    lo, hi = default_window(mol) if bracket is None else bracket
    if not hi > lo:
        raise ValueError(f"bad bracket {bracket}")
    return scan_then_golden(lambda E: level_gap(mol, B, E, n_max), lo, hi)
