"""The simultaneous photon-loss / dephasing channel as a superoperator.

The Lindblad master equation with jump operators ``sqrt(kappa_l) a`` and
``sqrt(kappa_phi) n`` integrates to the one-parameter family

    N(rho) = exp( t [ kappa_l D[a] + kappa_phi D[n] ] ) rho,

which only depends on the dimensionless strengths ``kappa_l t`` and
``kappa_phi t``.  With column-stacking vectorization the dissipator of a jump
operator ``L`` is the matrix

    D[L] = conj(L) (x) L − (1/2) I (x) L†L − (1/2) (L†L)^T (x) I,

and the channel is a single dense matrix exponential of the weighted sum.
Exponentials are cached per ``(NoisePoint, D)`` because sweeps reuse the same
channel across many codes at a fixed cutoff.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from rotcode.fock_linalg import (
    DENSE_EXPM_MAX_DIM,
    annihilation_op,
    expm,
    expm_action,
    number_op,
)

__all__ = [
    "NoisePoint",
    "dissipator_superop",
    "loss_dephasing_channel",
    "apply_loss_dephasing",
    "clear_channel_cache",
]


@dataclass(frozen=True, order=True)
class NoisePoint:
    """Dimensionless noise strengths: kappa_l_t (loss) and kappa_phi_t (dephasing)."""

    kappa_l_t: float
    kappa_phi_t: float

    def __post_init__(self) -> None:
        for name in ("kappa_l_t", "kappa_phi_t"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")


def dissipator_superop(jump_op: np.ndarray) -> np.ndarray:
    """Superoperator of the Lindblad dissipator D[L]rho = L rho L† − (1/2){L†L, rho}."""
    jump_op = np.asarray(jump_op, dtype=complex)
    if jump_op.ndim != 2 or jump_op.shape[0] != jump_op.shape[1]:
        raise ValueError(f"jump operator must be square, got shape {jump_op.shape}")
    dim = jump_op.shape[0]
    identity = np.eye(dim, dtype=complex)
    ldl = jump_op.conj().T @ jump_op
    return (
        np.kron(jump_op.conj(), jump_op)
        - 0.5 * np.kron(identity, ldl)
        - 0.5 * np.kron(ldl.T, identity)
    )


def _lindblad_generator(noise: NoisePoint, dim: int) -> np.ndarray:
    return noise.kappa_l_t * dissipator_superop(
        annihilation_op(dim)
    ) + noise.kappa_phi_t * dissipator_superop(number_op(dim))


_channel_cache: dict[tuple[float, float, int], np.ndarray] = {}
_cache_lock = threading.Lock()


def loss_dephasing_channel(noise: NoisePoint, D: int) -> np.ndarray:
    """The loss-dephasing channel at strength ``noise`` on a cutoff-``D`` Fock space.

    Returns the D² x D² superoperator ``exp(kappa_l_t D[a] + kappa_phi_t D[n])``
    acting on column-stacked density matrices.  Results are cached per
    ``(noise, D)`` and returned as read-only arrays; zero noise short-circuits
    to the exact identity.
    """
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    if D * D > DENSE_EXPM_MAX_DIM:
        raise ValueError(
            f"dense channel construction capped at D = {int(np.sqrt(DENSE_EXPM_MAX_DIM))}; "
            "use apply_loss_dephasing for larger cutoffs"
        )
    key = (noise.kappa_l_t, noise.kappa_phi_t, D)
    with _cache_lock:
        cached = _channel_cache.get(key)
    if cached is not None:
        return cached
    if noise.kappa_l_t == 0.0 and noise.kappa_phi_t == 0.0:
        channel = np.eye(D * D, dtype=complex)
    else:
        channel = expm(_lindblad_generator(noise, D))
    channel.setflags(write=False)
    with _cache_lock:
        _channel_cache.setdefault(key, channel)
    return channel


def apply_loss_dephasing(noise: NoisePoint, D: int, columns: np.ndarray) -> np.ndarray:
    """Apply the channel to a block of column-stacked operators without
    materializing the full superoperator exponential.

    The generator is assembled sparse and ``e^G`` is applied column-wise; this
    is the path for cutoffs beyond the dense-expm ceiling, where only the
    channel's action on a few inputs (e.g. the four encoder basis matrices)
    is ever needed.
    """
    if noise.kappa_l_t == 0.0 and noise.kappa_phi_t == 0.0:
        return np.asarray(columns, dtype=complex).copy()
    a = scipy.sparse.csr_matrix(annihilation_op(D))
    n = scipy.sparse.csr_matrix(number_op(D))
    eye = scipy.sparse.identity(D, dtype=complex, format="csr")

    def sparse_dissipator(L):
        ldl = (L.conj().T @ L).tocsr()
        return (
            scipy.sparse.kron(L.conj(), L)
            - 0.5 * scipy.sparse.kron(eye, ldl)
            - 0.5 * scipy.sparse.kron(ldl.T, eye)
        )

    generator = (
        noise.kappa_l_t * sparse_dissipator(a) + noise.kappa_phi_t * sparse_dissipator(n)
    ).tocsr()
    return expm_action(generator, columns)


def clear_channel_cache() -> None:
    """Drop all cached channel exponentials (used by tests and worker setup)."""
    with _cache_lock:
        _channel_cache.clear()
