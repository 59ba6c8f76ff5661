"""Lanczos approximation of exp(-i tau H) v for sparse Hermitian H."""

from __future__ import annotations

import numpy as np
import scipy.linalg


def _lanczos(H, v, m):
    n = v.shape[0]
    V = np.zeros((m + 1, n), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    V[0] = v
    for j in range(m):
        w = H @ V[j]
        alpha[j] = np.real(np.vdot(V[j], w))
        w = w - alpha[j] * V[j] - (beta[j - 1] * V[j - 1] if j else 0.0)
        # full reorthogonalization keeps the small basis clean
        w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        if beta[j] < 1e-12 * (abs(alpha[j]) + 1.0):
            return V[: j + 1], alpha[: j + 1], beta[: j + 1], True
        V[j + 1] = w / beta[j]
    return V, alpha, beta, False


def expm_multiply_lanczos(H, v: np.ndarray, tau: float, tol: float = 1e-9, m: int = 30) -> np.ndarray:
    """exp(-1j * tau * H) @ v with adaptive substepping.

    Each substep is accepted when the a-posteriori estimate
    beta_m |e_m^T exp(-i t T_m) e_1| stays below tol times the substep fraction.
    """
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0 or tau == 0:
        return v.copy()
    w = v / norm
    sign, span = np.sign(tau), abs(tau)
    done = 0.0
    step = span
    while done < span:
        step = min(step, span - done)
        V, alpha, beta, breakdown = _lanczos(H, w, m)
        k = len(alpha)
        T = np.diag(alpha) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
        while True:
            small = scipy.linalg.expm(-1j * sign * step * T)[:, 0]
            err = 0.0 if breakdown else beta[k - 1] * abs(small[k - 1])
            if err <= tol * step / span or step < span * 1e-9:
                break
            step *= 0.5
        w = V[:k].T @ small
        done += step
        if err < 0.1 * tol * step / span:
            step *= 1.5
    return norm * w
