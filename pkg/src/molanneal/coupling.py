"""Field-dressed dipole-dipole couplings between two molecules.

Each molecule carries a two-level system {up, down} spanned by two dressed
eigenstates (beta and gamma by default). Only the excitation-conserving part
of the dipole-dipole operator is kept,

    V = -(3 cos^2 theta - 1) / (2 R^3) (d_1 d_-1 + 2 d_0 d_0 + d_-1 d_1),

and its number-conserving 4x4 block is written as

    V = J_z Sz Sz + J_perp/2 (S+ S- + S- S+) + W 1 Sz + K Sz 1 + V 1 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from molanneal import constants as C
from molanneal.molecule import (
    FieldPoint,
    MoleculeConstants,
    block_eigh,
    dipole_matrix,
    find_avoided_crossing,
    resolve_label,
    scan_then_golden,
)

MAGIC_ANGLE = float(np.arccos(1.0 / np.sqrt(3.0)))

# |up up>, |up down>, |down up>, |down down>
_CONSERVING = np.zeros((4, 4), dtype=bool)
_CONSERVING[np.diag_indices(4)] = True
_CONSERVING[1, 2] = _CONSERVING[2, 1] = True


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class PairGeometry:
    """Distance in nm and angle (rad) between the field axis and the pair axis."""

    R: float
    theta: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R}")
        if not 0 <= self.theta <= np.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")

    @classmethod
    def between(cls, p1, p2, axis=(0.0, 0.0, 1.0)) -> "PairGeometry":
        r = np.asarray(p2, float) - np.asarray(p1, float)
        R = float(np.linalg.norm(r))
        if R == 0:
            raise ValueError("coincident molecules")
        axis = np.asarray(axis, float) / np.linalg.norm(axis)
        cos = float(np.clip(r @ axis / R, -1.0, 1.0))
        return cls(R, float(np.arccos(cos)))

    @property
    def angular_factor(self) -> float:
        c = np.cos(self.theta)
        v = 0.5 * (3.0 * c * c - 1.0)
        # exact zero at the magic angle
        return 0.0 if abs(v) < 1e-13 else v

    def prefactor(self) -> float:
        """Hz per Debye^2: -(3cos^2 - 1) / (2 R^3) in frequency units."""
        return -self.angular_factor * C.DIPOLE_HZ_NM3_PER_D2 / self.R**3


@dataclass(frozen=True)
class PairCouplings:
    J_perp: float
    J_z: float
    W: float
    K: float
    V: float


@dataclass(frozen=True)
class QubitParams:
    h_q: float
    Delta_q: float


@dataclass(frozen=True)
class TwoLevel:
    """One molecule's {up, down} pair: energies (Hz) and dipole blocks (Debye)."""

    eps_up: float
    eps_down: float
    dip: dict  # q -> 2x2 array, rows/cols ordered (up, down)


def dressed_dipole(eigvecs: np.ndarray, q: int, d: float = 1.0) -> np.ndarray:
    """U^dagger d_q U for eigenvectors stored as the columns of ``eigvecs``."""
    eigvecs = np.asarray(eigvecs)
    dim = eigvecs.shape[0]
    n_max = int(round(np.sqrt(dim / 2))) - 1
    if n_max < 1 or 2 * (n_max + 1) ** 2 != dim:
        raise ValueError(f"eigenvector length {dim} does not match any basis size 2(N_max+1)^2")
    return d * (eigvecs.conj().T @ dipole_matrix(n_max, q) @ eigvecs)


@lru_cache(maxsize=4096)
def two_level(mol: MoleculeConstants, f: FieldPoint, n_max: int = 5, up="beta", down="gamma") -> TwoLevel:
    keys = [resolve_label(mol, f.B, n_max, lab) for lab in (up, down)]
    eps, cols = [], []
    for m2, rank in keys:
        w, v = block_eigh(mol, f, n_max, m2)
        if rank >= len(w):
            raise ValueError(f"block {m2} has no rank {rank}")
        eps.append(w[rank])
        cols.append(v[:, rank])
    U = np.column_stack(cols)
    dip = {q: dressed_dipole(U, q, mol.d) for q in (-1, 0, 1)}
    for m in dip.values():
        m.setflags(write=False)
    return TwoLevel(eps[0], eps[1], dip)


def interaction_block(a: TwoLevel, b: TwoLevel, geom: PairGeometry) -> np.ndarray:
    """Number-conserving 4x4 block of the truncated dipole-dipole operator, Hz."""
    V = geom.prefactor() * (
        np.kron(a.dip[1], b.dip[-1]) + 2.0 * np.kron(a.dip[0], b.dip[0]) + np.kron(a.dip[-1], b.dip[1])
    )
    return np.where(_CONSERVING, V, 0.0)


def couplings_from_block(block: np.ndarray) -> PairCouplings:
    e_uu, e_ud, e_du, e_dd = np.real(np.diag(block))
    return PairCouplings(
        J_perp=2.0 * float(np.real(block[1, 2])),
        J_z=float(e_uu + e_dd - e_ud - e_du),
        W=float(0.5 * (e_uu + e_du - e_ud - e_dd)),
        K=float(0.5 * (e_uu + e_ud - e_du - e_dd)),
        V=float(0.25 * (e_uu + e_ud + e_du + e_dd)),
    )


def reconstruct_block(pc: PairCouplings) -> np.ndarray:
    """Rebuild the 4x4 block from (J_z, J_perp, W, K, V)."""
    sz = np.diag([0.5, -0.5])
    sp = np.array([[0.0, 1.0], [0.0, 0.0]])
    one = np.eye(2)
    return (
        pc.J_z * np.kron(sz, sz)
        + 0.5 * pc.J_perp * (np.kron(sp, sp.T) + np.kron(sp.T, sp))
        + pc.W * np.kron(one, sz)
        + pc.K * np.kron(sz, one)
        + pc.V * np.kron(one, one)
    )


def couple(a: TwoLevel, b: TwoLevel, geom: PairGeometry) -> PairCouplings:
    return couplings_from_block(interaction_block(a, b, geom))


def pair_couplings(
    mol: MoleculeConstants,
    f: FieldPoint,
    geom: PairGeometry,
    up="beta",
    down="gamma",
    n_max: int = 5,
    f_partner: FieldPoint | None = None,
) -> PairCouplings:
    """Couplings between a molecule at ``f`` and a partner at ``f_partner`` (default ``f``)."""
    a = two_level(mol, f, n_max, up, down)
    b = a if f_partner is None else two_level(mol, f_partner, n_max, up, down)
    return couple(a, b, geom)


_UNIT = PairGeometry(1.0, 0.0)


def find_E_perp(
    mol: MoleculeConstants,
    B: float,
    bracket=None,
    n_max: int = 5,
    geom: PairGeometry | None = None,
) -> float:
    """Electric field (kV/cm) maximizing |J_perp|; independent of R and theta."""
    if geom is not None and abs(geom.angular_factor) < 1e-12:
        raise ValueError("magic-angle geometry: J_perp vanishes identically")
    if bracket is None:
        E_x, _ = find_avoided_crossing(mol, B, n_max=n_max)
        half = max(0.25 * E_x, 0.2)
        bracket = (max(E_x - half, 0.0), E_x + half)
    E, _ = scan_then_golden(
        lambda E: -abs(pair_couplings(mol, FieldPoint(E, B), _UNIT, n_max=n_max).J_perp), *bracket
    )
    return E


def coupling_ratio(mol: MoleculeConstants, B: float, E: float, n_max: int = 5) -> float:
    pc = pair_couplings(mol, FieldPoint(E, B), _UNIT, n_max=n_max)
    return abs(pc.J_z) / abs(pc.J_perp) if pc.J_perp != 0 else np.inf


def find_E_z(
    mol: MoleculeConstants,
    B: float,
    ratio: float = 100.0,
    E_perp: float | None = None,
    n_max: int = 5,
    window: float | None = None,
) -> float:
    """Smallest E above E_perp with |J_z| / |J_perp| >= ratio, to 1 V/cm."""
    if E_perp is None:
        E_perp = find_E_perp(mol, B, n_max=n_max)
    if window is None:
        window = 2.0 * E_perp + 5.0
    step = 2e-3 * max(E_perp, 0.5)
    lo = E_perp
    E = E_perp + step
    while E <= E_perp + window:
        if coupling_ratio(mol, B, E, n_max) >= ratio:
            hi = E
            while hi - lo > 1e-3:
                mid = 0.5 * (lo + hi)
                if coupling_ratio(mol, B, mid, n_max) >= ratio:
                    hi = mid
                else:
                    lo = mid
            return hi
        lo = E
        E += step
    raise WindowError(
        f"|J_z|/|J_perp| never reaches {ratio} in [{E_perp:.4g}, {E_perp + window:.4g}] kV/cm"
    )


def qubit_params(
    mol: MoleculeConstants, f1: FieldPoint, f2: FieldPoint, geom: PairGeometry, n_max: int = 5
) -> QubitParams:
    """Bias and transverse field of a two-molecule qubit |0> = |up down>."""
    a = two_level(mol, f1, n_max)
    b = two_level(mol, f2, n_max)
    pc = couple(a, b, geom)
    h1 = a.eps_up - a.eps_down + pc.K
    h2 = b.eps_up - b.eps_down + pc.W
    mean = FieldPoint(0.5 * (f1.E + f2.E), f1.B, 0.5 * (f1.deltaE + f2.deltaE))
    return QubitParams(h_q=h1 - h2, Delta_q=pair_couplings(mol, mean, geom, n_max=n_max).J_perp)


def interqubit_coupling(mol: MoleculeConstants, f: FieldPoint, positions, axis=(0.0, 0.0, 1.0), n_max: int = 5) -> float:
    """J_ab = Jz13 + Jz24 - Jz14 - Jz23 for qubits (1, 2) and (3, 4), positions in nm."""
    p = np.asarray(positions, float)
    if p.shape != (4, 3):
        raise ValueError("need four 3D positions")
    tl = two_level(mol, f, n_max)

    def jz(i, j):
        return couple(tl, tl, PairGeometry.between(p[i], p[j], axis)).J_z

    for i in range(4):
        for j in range(i + 1, 4):
            if np.allclose(p[i], p[j]):
                raise ValueError(f"molecules {i + 1} and {j + 1} coincide")
    return jz(0, 2) + jz(1, 3) - jz(0, 3) - jz(1, 2)

