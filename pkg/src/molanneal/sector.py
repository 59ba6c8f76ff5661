"""Fixed-excitation sector of n two-level molecules.

A basis state is an integer whose bit i is set when molecule i is up.
"""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np


class SectorBasis:
    """All n-bit integers with exactly k set bits, in increasing order."""

    def __init__(self, n: int, k: int):
        if not 0 <= k <= n:
            raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
        if n > 62:
            raise ValueError("at most 62 molecules")
        self.n, self.k = n, k
        states = np.zeros(comb(n, k), dtype=np.int64)
        for idx, bits in enumerate(sorted(sum(1 << b for b in c) for c in combinations(range(n), k))):
            states[idx] = bits
        self.states = states
        # direct-address rank table while it stays small; binary search beyond
        self._rank = None
        if n <= 20:
            self._rank = np.full(1 << n, -1, dtype=np.int64)
            self._rank[states] = np.arange(len(states))

    def __len__(self) -> int:
        return len(self.states)

    def rank(self, state: int) -> int:
        r = int(self.ranks(np.array([state]))[0])
        if r < 0:
            raise KeyError(f"{state:#b} is not in the {self.k}-excitation sector")
        return r

    def ranks(self, states: np.ndarray) -> np.ndarray:
        """Indices of ``states``; -1 where a state lies outside the sector."""
        states = np.asarray(states, dtype=np.int64)
        if self._rank is not None:
            inside = (states >= 0) & (states < len(self._rank))
            out = np.full(states.shape, -1, dtype=np.int64)
            out[inside] = self._rank[states[inside]]
            return out
        pos = np.searchsorted(self.states, states)
        pos = np.minimum(pos, len(self.states) - 1)
        return np.where(self.states[pos] == states, pos, -1)

    def unrank(self, index: int) -> int:
        return int(self.states[index])

    def bits(self) -> np.ndarray:
        """(dim, n) 0/1 occupation matrix."""
        return ((self.states[:, None] >> np.arange(self.n)) & 1).astype(np.int8)

    def label(self, state: int) -> str:
        """Arrow string, molecule 0 first."""
        return "".join("u" if (state >> i) & 1 else "d" for i in range(self.n))
