"""Quantum annealing with pairs of open-shell (2-Sigma) molecules as qubits.

Submodules
----------
constants    pinned physical constants and unit conversions
wigner       Wigner 3j symbols
molecule     single-molecule Hamiltonian in co-aligned dc fields, state tracking
coupling     field-dressed dipole-dipole couplings and working fields
lattice      molecule/qubit geometries, coupling tables, effective Ising model
dynamics     fixed-excitation sector time evolution and measurement
experiments  figure-level reproductions
cli          command-line entry point
"""

from molanneal.molecule import SRF, SRI, FieldPoint, MoleculeConstants

__version__ = "0.1.0"

__all__ = ["SRF", "SRI", "FieldPoint", "MoleculeConstants", "__version__"]
