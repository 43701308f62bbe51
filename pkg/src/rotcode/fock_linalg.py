"""Dense linear algebra on truncated Fock spaces.

Conventions used throughout the package:

- Fock space is truncated to dimension ``D`` (levels ``0..D-1``).
- Vectorization is column-stacking: ``vec(M)`` stacks the columns of ``M``,
  so ``vec(A @ rho @ B) == kron(B.T, A) @ vec(rho)``.  In numpy terms
  ``vec(M) = M.T.reshape(-1)``.
- Superoperators act on column-stacked density matrices; a map
  ``rho -> M rho M†`` has superoperator ``kron(M.conj(), M)``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

__all__ = [
    "annihilation_op",
    "number_op",
    "kron",
    "vec",
    "unvec",
    "partial_trace",
    "expm",
    "expm_action",
    "DENSE_EXPM_MAX_DIM",
]

# Dense scaling-and-squaring is used for matrices up to this side length
# (superoperators of Fock cutoff D have side D**2); beyond it, callers should
# use expm_action, which never materializes the exponential.
DENSE_EXPM_MAX_DIM = 140 ** 2


def annihilation_op(dim: int) -> np.ndarray:
    """Bosonic annihilation operator on a Fock space truncated to ``dim`` levels.

    ``a |n> = sqrt(n) |n-1>``; the matrix has ``sqrt(n)`` on the first
    superdiagonal.  The product ``a† a`` equals ``number_op(dim)`` exactly;
    the canonical commutator ``[a, a†] = I`` holds on all but the last level,
    where truncation necessarily breaks it.
    """
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def number_op(dim: int) -> np.ndarray:
    """Photon number operator ``diag(0, 1, ..., dim-1)`` (complex dtype)."""
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor on the left (slow index).

    Thin wrapper over ``np.kron`` so the subsystem-ordering convention used by
    ``partial_trace`` has a single named home.
    """
    return np.kron(a, b)


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a 1-D vector.

    For a ``d_out x d_in`` matrix the entry ``M[i, j]`` lands at flat index
    ``j * d_out + i``.  ``vec(I_2) = (1, 0, 0, 1)``.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"vec expects a 2-D array, got shape {matrix.shape}")
    return matrix.T.reshape(-1)


def unvec(vector: np.ndarray, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Inverse of :func:`vec`.

    ``shape`` is ``(d_out, d_in)``; when omitted the vector length must be a
    perfect square and a square matrix is returned.
    """
    vector = np.asarray(vector).reshape(-1)
    if shape is None:
        side = int(round(np.sqrt(vector.size)))
        if side * side != vector.size:
            raise ValueError(
                f"cannot unvec a length-{vector.size} vector without an explicit shape"
            )
        shape = (side, side)
    d_out, d_in = shape
    if d_out * d_in != vector.size:
        raise ValueError(f"shape {shape} incompatible with vector of length {vector.size}")
    return vector.reshape(d_in, d_out).T


def partial_trace(matrix: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator on ``C^d1 (x) C^d2``.

    Subsystems are numbered 1 (left kron factor) and 2 (right kron factor);
    ``keep`` names the subsystem that survives.  For example
    ``partial_trace(kron(rho, sigma), (d1, d2), keep=1) == rho * trace(sigma)``.
    """
    d1, d2 = dims
    matrix = np.asarray(matrix)
    if matrix.shape != (d1 * d2, d1 * d2):
        raise ValueError(
            f"operator shape {matrix.shape} does not match dims {dims}"
        )
    if keep not in (1, 2):
        raise ValueError(f"keep must be 1 or 2, got {keep}")
    four = matrix.reshape(d1, d2, d1, d2)
    if keep == 1:
        return np.einsum("aibi->ab", four)
    return np.einsum("aiaj->ij", four)


def expm(matrix: np.ndarray) -> np.ndarray:
    """Matrix exponential via scaling-and-squaring with Pade approximants.

    Delegates to ``scipy.linalg.expm`` after validating the input is a square
    matrix with finite entries.  Intended for dense superoperators up to side
    ``DENSE_EXPM_MAX_DIM``; larger generators should go through
    :func:`expm_action` instead of materializing ``e^M``.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"expm expects a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("expm input contains non-finite entries")
    if matrix.shape[0] > DENSE_EXPM_MAX_DIM:
        raise ValueError(
            f"dense expm capped at side {DENSE_EXPM_MAX_DIM}; "
            "use expm_action for larger generators"
        )
    return scipy.linalg.expm(matrix)


def expm_action(generator, columns: np.ndarray) -> np.ndarray:
    """Apply ``e^G`` to a block of column vectors without forming ``e^G``.

    ``generator`` may be dense or ``scipy.sparse``; the Krylov-free algorithm
    of ``scipy.sparse.linalg.expm_multiply`` is used.  This is the escape
    hatch for Fock cutoffs where the dense superoperator exponential would
    not fit in memory: the noisy encoding only ever needs ``e^G`` acting on
    the four column-stacked encoder basis matrices.
    """
    columns = np.asarray(columns, dtype=complex)
    if not scipy.sparse.issparse(generator):
        generator = np.asarray(generator)
        if generator.ndim != 2 or generator.shape[0] != generator.shape[1]:
            raise ValueError(f"generator must be square, got shape {generator.shape}")
        generator = scipy.sparse.csr_matrix(generator)
    if columns.shape[0] != generator.shape[0]:
        raise ValueError(
            f"column block height {columns.shape[0]} does not match generator side "
            f"{generator.shape[0]}"
        )
    return scipy.sparse.linalg.expm_multiply(generator, columns)
