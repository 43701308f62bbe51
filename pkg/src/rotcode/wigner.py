"""Wigner functions of truncated Fock-space states.

Convention: hbar = 1, phase-space point alpha = (x + i p) / sqrt(2), and the
Wigner function is normalized so that the integral over dx dp equals 1 — the
vacuum is a Gaussian of peak 1/pi and Fock |1> dips to −1/pi at the origin.

Evaluation uses the displaced-parity form W ∝ Tr[rho D(2 alpha) Pi] expanded
in Fock matrix elements of the displacement operator,

    <n| D(beta) |m> = sqrt(m!/n!) beta^{n-m} e^{-|beta|^2/2} L_m^{(n-m)}(|beta|^2)

(for n >= m; the conjugate-transpose relation covers n < m), which is exact
for truncated states — the only approximation anywhere is the state's own
Fock cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

__all__ = ["PhaseGrid", "wigner", "wigner_points"]


@dataclass
class PhaseGrid:
    """Rectangular phase-space grid with strictly increasing finite axes."""

    x_values: np.ndarray
    p_values: np.ndarray

    def __post_init__(self) -> None:
        self.x_values = np.asarray(self.x_values, dtype=float)
        self.p_values = np.asarray(self.p_values, dtype=float)
        for name, axis in (("x_values", self.x_values), ("p_values", self.p_values)):
            if axis.ndim != 1 or axis.size == 0:
                raise ValueError(f"{name} must be a non-empty 1-D array")
            if not np.all(np.isfinite(axis)):
                raise ValueError(f"{name} contains non-finite entries")
            if axis.size > 1 and not np.all(np.diff(axis) > 0):
                raise ValueError(f"{name} must be strictly increasing")


def _validate_state(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > 1e-8:
        raise ValueError(f"density matrix hermiticity residual {herm:.2e} exceeds 1e-8")
    trace = np.trace(rho).real
    if abs(trace - 1.0) > 1e-8:
        raise ValueError(f"density matrix trace {trace} deviates from 1 beyond 1e-8")
    return rho


def _wigner_alpha(rho: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """W at complex points alpha, per unit dx dp (already includes the 1/2
    Jacobian from d^2alpha to dx dp)."""
    dim = rho.shape[0]
    b = 4.0 * np.abs(alpha) ** 2
    total = np.zeros(alpha.shape, dtype=complex)
    log_fact = gammaln(np.arange(dim) + 1.0)
    for m in range(dim):
        for n in range(dim):
            entry = rho[m, n]
            if entry == 0:
                continue
            if n >= m:
                k = n - m
                coef = np.exp(0.5 * (log_fact[m] - log_fact[n]))
                term = entry * (-1) ** m * (2 * alpha) ** k * coef
                term = term * eval_genlaguerre(m, k, b)
            else:
                k = m - n
                coef = np.exp(0.5 * (log_fact[n] - log_fact[m]))
                term = entry * (-1) ** m * (-2 * np.conj(alpha)) ** k * coef
                term = term * eval_genlaguerre(n, k, b)
            total += term
    return np.real(total) * np.exp(-b / 2.0) / np.pi


def wigner_points(rho: np.ndarray, x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Wigner function at arbitrary matched (x, p) points."""
    rho = _validate_state(rho)
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if x.shape != p.shape:
        raise ValueError("x and p must have matching shapes")
    alpha = (x + 1j * p) / np.sqrt(2.0)
    return _wigner_alpha(rho, alpha)


def wigner(rho: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """Wigner function on a rectangular grid.

    Returns a real array of shape ``(len(x_values), len(p_values))`` with
    ``W[i, j] = W(x_i, p_j)``; its Riemann sum approaches 1 for grids that
    cover the state's support.
    """
    rho = _validate_state(rho)
    x_mesh, p_mesh = np.meshgrid(grid.x_values, grid.p_values, indexing="ij")
    alpha = (x_mesh + 1j * p_mesh) / np.sqrt(2.0)
    return _wigner_alpha(rho, alpha)
