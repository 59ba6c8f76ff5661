"""Annealing dynamics of the many-molecule XXZ model in its fixed-excitation sector.

    H = sum_i h_i Sz_i + sum_{i<j} [ J_perp_ij/2 (S+_i S-_j + h.c.) + J_z_ij Sz_i Sz_j ]

H is kept in Hz and each step applies exp(-2 pi i H dt) with the couplings
evaluated at the step-midpoint field. Small sectors use dense
diagonalization, larger ones a Lanczos propagator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse

from molanneal.krylov import expm_multiply_lanczos
from molanneal.lattice import (
    Classification,
    CouplingTables,
    LatticeConfig,
    brute_force_ground,
    build_coupling_tables,
    classify_states,
    effective_ising,
    spin_of,
)
from molanneal.sector import SectorBasis

log = logging.getLogger(__name__)

DENSE_LIMIT = 2000


class NormDriftError(RuntimeError):
    pass


class AmbiguousSignError(ValueError):
    pass


@dataclass(frozen=True)
class Schedule:
    """Linear ramp E(s) = E_start + s (E_end - E_start), s = t / T, T in ms."""

    E_start: float
    E_end: float
    T: float
    n_steps: int = 200
    stop_s: float = 1.0

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if not 0 < self.stop_s <= 1:
            raise ValueError("stop_s must lie in (0, 1]")
        if not self.T > 0:
            raise ValueError("annealing time must be positive")

    def field(self, s):
        return self.E_start + np.asarray(s) * (self.E_end - self.E_start)

    @property
    def s_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.stop_s, self.n_steps + 1)

    @property
    def dt(self) -> float:
        """Step length in seconds."""
        return self.stop_s * self.T * 1e-3 / self.n_steps


class SectorHamiltonian:
    """Precomputed sparsity structure of the XXZ model on one sector."""

    def __init__(self, basis: SectorBasis):
        self.basis = basis
        n = basis.n
        bits = basis.bits().astype(float)
        self.sz = bits - 0.5
        self.pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        pi = np.array([p[0] for p in self.pairs], dtype=np.int64)
        pj = np.array([p[1] for p in self.pairs], dtype=np.int64)
        self._pi, self._pj = pi, pj
        self.szsz = self.sz[:, pi] * self.sz[:, pj] if len(self.pairs) else np.zeros((len(basis), 0))
        rows, cols, which = [], [], []
        states = basis.states
        for p, (i, j) in enumerate(self.pairs):
            differ = ((states >> i) ^ (states >> j)) & 1
            src = np.flatnonzero(differ)
            dst = basis.ranks(states[src] ^ ((1 << i) | (1 << j)))
            rows.append(src)
            cols.append(dst)
            which.append(np.full(len(src), p))
        self._rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        self._cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
        self._which = np.concatenate(which) if which else np.zeros(0, dtype=np.int64)

    def assemble(self, Jperp: np.ndarray, Jz: np.ndarray, h: np.ndarray) -> scipy.sparse.csr_matrix:
        dim = len(self.basis)
        if Jperp.shape != (self.basis.n, self.basis.n) or len(h) != self.basis.n:
            raise ValueError("coupling tables and sector basis disagree on the molecule count")
        diag = self.sz @ h + self.szsz @ Jz[self._pi, self._pj]
        off = 0.5 * Jperp[self._pi, self._pj][self._which]
        idx = np.arange(dim)
        return scipy.sparse.csr_matrix(
            (np.concatenate([diag, off]), (np.concatenate([idx, self._rows]), np.concatenate([idx, self._cols]))),
            shape=(dim, dim),
        )


def build_sector_hamiltonian(tables: CouplingTables, basis: SectorBasis) -> scipy.sparse.csr_matrix:
    """Sector Hamiltonian (Hz) of the molecules covered by ``tables``; V terms omitted."""
    if tables.Jperp.shape[0] != basis.n:
        raise ValueError(f"tables cover {tables.Jperp.shape[0]} molecules, basis {basis.n}")
    return SectorHamiltonian(basis).assemble(tables.Jperp, tables.Jz, tables.h)


def dynamic_tables(config: LatticeConfig, tables: CouplingTables) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Restrict tables to qubit molecules; spectators become static fields.

    The common part of the single-molecule gap is removed: inside a sector
    sum_i Sz_i is fixed, so a uniform field only adds a global phase.
    """
    dyn = config.dynamic
    h = tables.h.copy()
    for m, state in config.spectators:
        h += spin_of(state) * tables.Jz[m]
    gap = tables.gap[dyn]
    h_dyn = (gap - gap.mean()) + (h[dyn] - tables.gap[dyn])
    ix = np.ix_(dyn, dyn)
    return tables.Jperp[ix], tables.Jz[ix], h_dyn


def initial_state(config: LatticeConfig, tables: CouplingTables, classification: Classification) -> np.ndarray:
    """Product of (|0> + sign |1>)/sqrt(2) over qubits.

    sign is +1 for ferromagnetic intraqubit J_z (< 0) and -1 for
    antiferromagnetic J_z (> 0): the ground state of the intraqubit exchange.
    """
    signs = []
    for a, (f, s) in enumerate(config.qubits):
        jz = tables.Jz[f, s]
        if jz == 0:
            raise AmbiguousSignError(f"intraqubit J_z of qubit {a} is zero; initial sign undefined")
        signs.append(1.0 if jz < 0 else -1.0)
    nq = config.n_qubits
    psi = np.zeros(len(classification.basis), dtype=complex)
    for idx in np.flatnonzero(classification.valid):
        code = int(classification.qubit_config[idx])
        amp = 1.0
        for a in range(nq):
            if (code >> (nq - 1 - a)) & 1:
                amp *= signs[a]
        psi[idx] = amp
    return psi / np.sqrt(2.0**nq)


@dataclass
class Measurement:
    p_solution: float
    p_invalid: float
    p_valid_other: float
    histogram: dict[str, float]  # qubit bitstring -> probability
    invalid: dict[int, float]  # sector index -> probability


def measure(state: np.ndarray, classification: Classification, ground_set) -> Measurement:
    prob = np.abs(state) ** 2
    nq = classification.n_qubits
    valid = classification.valid
    hist_arr = np.zeros(2**nq)
    np.add.at(hist_arr, classification.qubit_config[valid], prob[valid])
    solution = sum(hist_arr[int(c, 2)] for c in set(ground_set))
    p_invalid = float(prob[~valid].sum())
    histogram = {format(c, f"0{nq}b"): float(hist_arr[c]) for c in range(2**nq)}
    invalid = {int(i): float(prob[i]) for i in np.flatnonzero(~valid) if prob[i] > 0}
    return Measurement(float(solution), p_invalid, float(hist_arr.sum() - solution), histogram, invalid)


@dataclass
class AnnealResult:
    schedule: Schedule
    s: np.ndarray
    t_ms: np.ndarray
    p_solution: np.ndarray
    p_invalid: np.ndarray
    p_valid_other: np.ndarray
    ground_set: list[str]
    final: Measurement
    final_state: np.ndarray = field(repr=False)
    classification: Classification = field(repr=False)

    @property
    def p_valid(self) -> np.ndarray:
        return self.p_solution + self.p_valid_other


class Annealer:
    """Reusable propagator for one lattice configuration."""

    def __init__(
        self,
        config: LatticeConfig,
        dense_limit: int = DENSE_LIMIT,
        tol: float = 1e-9,
        tables_hook: Callable[[CouplingTables], CouplingTables] | None = None,
    ):
        self.config = config
        self.classification = classify_states(config)
        self.basis = self.classification.basis
        self.structure = SectorHamiltonian(self.basis)
        self.dense = len(self.basis) <= dense_limit
        self.tol = tol
        self.tables_hook = tables_hook

    def tables(self, E: float) -> CouplingTables:
        t = build_coupling_tables(self.config, E)
        return self.tables_hook(t) if self.tables_hook else t

    def hamiltonian(self, E: float) -> scipy.sparse.csr_matrix:
        return self.structure.assemble(*dynamic_tables(self.config, self.tables(E)))

    def step(self, psi: np.ndarray, E: float, dt: float) -> np.ndarray:
        """Apply exp(-2 pi i H(E) dt); dt in seconds, may be negative."""
        H = self.hamiltonian(E)
        tau = 2.0 * np.pi * dt
        if self.dense:
            w, V = np.linalg.eigh(H.toarray())
            return V @ (np.exp(-1j * tau * w) * (V.conj().T @ psi))
        return expm_multiply_lanczos(H, psi, tau, tol=self.tol)

    def initial_state(self, E: float) -> np.ndarray:
        return initial_state(self.config, self.tables(E), self.classification)

    def ground_set(self, E: float) -> list[str]:
        return brute_force_ground(effective_ising(self.config, E, self.tables(E)))[1]

    def evolve(self, psi: np.ndarray, schedule: Schedule, backward: bool = False, callback=None) -> np.ndarray:
        mids = schedule.field((np.arange(schedule.n_steps) + 0.5) * schedule.stop_s / schedule.n_steps)
        dt = schedule.dt
        if backward:
            mids, dt = mids[::-1], -dt
        for k, E in enumerate(mids):
            psi = self.step(psi, float(E), dt)
            drift = abs(np.linalg.norm(psi) - 1.0)
            if drift > 1e-6:
                raise NormDriftError(f"norm drift {drift:.3e} after step {k + 1} at E={E:.6g} kV/cm")
            if callback is not None:
                callback(k, psi)
        return psi

    def run(self, schedule: Schedule, ground_set=None) -> AnnealResult:
        if ground_set is None:
            ground_set = self.ground_set(schedule.E_end)
        psi = self.initial_state(schedule.E_start)
        records = [measure(psi, self.classification, ground_set)]

        def record(k, state):
            records.append(measure(state, self.classification, ground_set))

        log.info("anneal %s: dim=%d, T=%g ms, %d steps", self.config.name, len(self.basis), schedule.T, schedule.n_steps)
        psi = self.evolve(psi, schedule, callback=record)
        s = schedule.s_grid
        return AnnealResult(
            schedule=schedule,
            s=s,
            t_ms=s * schedule.T,
            p_solution=np.array([r.p_solution for r in records]),
            p_invalid=np.array([r.p_invalid for r in records]),
            p_valid_other=np.array([r.p_valid_other for r in records]),
            ground_set=list(ground_set),
            final=records[-1],
            final_state=psi,
            classification=self.classification,
        )


def propagate(config: LatticeConfig, schedule: Schedule, **kw) -> AnnealResult:
    return Annealer(config, **kw).run(schedule)
