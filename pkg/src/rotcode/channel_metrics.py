"""Choi representations, channel composition, and channel fidelity.

The Choi matrix convention is unnormalized and input-first:

    C = sum_{a,b} |a><b|_in  (x)  E(|a><b|)_out,

so ``C`` is ``(d_in d_out) x (d_in d_out)`` with row index ``a * d_out + i``.
Complete positivity is ``C >= 0`` and trace preservation is
``Tr_out C = I_in``.  The Choi of the qubit identity has ones at the four
corners of the |00>,|11> block.

Channel fidelity of a qubit channel with Kraus operators {M_k} is

    F = ( Tr[sum_k M_k† M_k] + sum_k |Tr M_k|^2 ) / (d (d + 1)),  d = 2,

computed here directly from the Choi matrix: the first term is ``Tr C`` and
the second is ``<Omega| C |Omega>`` with ``|Omega> = vec(I_d)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rotcode.fock_linalg import partial_trace, vec
from rotcode.rotation_codes import Code, encoder_isometry

__all__ = [
    "ChoiMatrix",
    "superop_to_choi",
    "choi_to_superop",
    "compose_choi",
    "noisy_encoding_choi",
    "restrict_choi_output",
    "compose_logical_channel",
    "channel_fidelity",
    "floored_infidelity",
    "INFIDELITY_FLOOR",
]

# Reported infidelities are floored here; raw fidelities are kept alongside.
INFIDELITY_FLOOR = 1e-7


@dataclass
class ChoiMatrix:
    """Choi matrix of a d_in -> d_out map (unnormalized, input-first ordering)."""

    d_in: int
    d_out: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        side = self.d_in * self.d_out
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.shape != (side, side):
            raise ValueError(
                f"Choi of a {self.d_in}->{self.d_out} map must be {side}x{side}, "
                f"got {self.entries.shape}"
            )

    def hermiticity_residual(self) -> float:
        return float(np.abs(self.entries - self.entries.conj().T).max())

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.entries + self.entries.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def tp_residual(self) -> float:
        """Max-entry deviation of Tr_out(C) from the input-space identity."""
        marginal = partial_trace(self.entries, (self.d_in, self.d_out), keep=1)
        return float(np.abs(marginal - np.eye(self.d_in)).max())

    def output_marginal(self) -> np.ndarray:
        """Tr_in(C) = image of the identity, i.e. sum_a E(|a><a|)."""
        return partial_trace(self.entries, (self.d_in, self.d_out), keep=2)


def superop_to_choi(superop: np.ndarray, d_in: int, d_out: int) -> ChoiMatrix:
    """Convert a column-stacking superoperator to its Choi matrix."""
    superop = np.asarray(superop, dtype=complex)
    if superop.shape != (d_out * d_out, d_in * d_in):
        raise ValueError(
            f"superoperator for {d_in}->{d_out} must be {d_out**2}x{d_in**2}, "
            f"got {superop.shape}"
        )
    four = superop.reshape(d_out, d_out, d_in, d_in)
    choi = four.transpose(3, 1, 2, 0).reshape(d_in * d_out, d_in * d_out)
    return ChoiMatrix(d_in=d_in, d_out=d_out, entries=choi)


def choi_to_superop(choi: ChoiMatrix) -> np.ndarray:
    """Inverse of :func:`superop_to_choi` (the same index shuffle)."""
    four = choi.entries.reshape(choi.d_in, choi.d_out, choi.d_in, choi.d_out)
    return four.transpose(3, 1, 2, 0).reshape(choi.d_out**2, choi.d_in**2)


def compose_choi(first: ChoiMatrix, then: ChoiMatrix) -> ChoiMatrix:
    """Choi matrix of ``then ∘ first`` (apply ``first``, then ``then``)."""
    if first.d_out != then.d_in:
        raise ValueError(
            f"cannot compose: first map outputs dim {first.d_out}, "
            f"second consumes dim {then.d_in}"
        )
    da, db = first.d_in, first.d_out
    dc = then.d_out
    w4 = first.entries.reshape(da, db, da, db)
    r4 = then.entries.reshape(db, dc, db, dc)
    composed = np.einsum("abcd,bedf->aecf", w4, r4).reshape(da * dc, da * dc)
    return ChoiMatrix(d_in=da, d_out=dc, entries=composed)


def noisy_encoding_choi(code: Code, noise_superop: np.ndarray) -> ChoiMatrix:
    """Choi matrix of noise ∘ encoder, a 2 -> D map.

    The encoder sends |a><b| to ``S|a><b|S†`` with S the codeword isometry;
    each of the four input basis matrices is pushed through the noise
    superoperator as a column-stacked vector.
    """
    noise_superop = np.asarray(noise_superop)
    side = noise_superop.shape[0]
    dim = int(round(np.sqrt(side)))
    if noise_superop.shape != (side, side) or dim * dim != side:
        raise ValueError(f"noise superoperator has invalid shape {noise_superop.shape}")
    if code.dim > dim:
        raise ValueError(
            f"code needs cutoff >= {code.dim} but noise acts on dimension {dim}"
        )
    enc = encoder_isometry(code, dim)
    choi = np.zeros((2 * dim, 2 * dim), dtype=complex)
    for a in range(2):
        for b in range(2):
            column = np.kron(enc[:, b].conj(), enc[:, a])
            out = noise_superop @ column
            choi[a * dim : (a + 1) * dim, b * dim : (b + 1) * dim] = out.reshape(
                dim, dim
            ).T
    return ChoiMatrix(d_in=2, d_out=dim, entries=choi)


def restrict_choi_output(choi: ChoiMatrix, basis: np.ndarray) -> ChoiMatrix:
    """Conjugate the output factor of a Choi matrix into a smaller basis.

    ``basis`` is a D x D_s isometry (orthonormal columns) spanning the
    relevant output subspace; the restricted map is ``sigma -> V† E(sigma) V``.
    """
    dim, d_small = basis.shape
    if dim != choi.d_out:
        raise ValueError(
            f"basis rows {dim} do not match Choi output dimension {choi.d_out}"
        )
    ortho = np.abs(basis.conj().T @ basis - np.eye(d_small)).max()
    if ortho > 1e-8:
        raise ValueError(f"support basis is not an isometry (residual {ortho:.2e})")
    four = choi.entries.reshape(choi.d_in, dim, choi.d_in, dim)
    restricted = np.einsum("jb,ajck,kd->abcd", basis.conj(), four, basis).reshape(
        choi.d_in * d_small, choi.d_in * d_small
    )
    restricted = 0.5 * (restricted + restricted.conj().T)
    return ChoiMatrix(d_in=choi.d_in, d_out=d_small, entries=restricted)


def compose_logical_channel(
    code: Code,
    noise_superop: np.ndarray,
    recovery: ChoiMatrix,
    support_basis: np.ndarray | None = None,
) -> ChoiMatrix:
    """Choi matrix of the logical qubit channel: recovery ∘ noise ∘ encoder.

    ``recovery`` maps the noisy output space (or the ``support_basis``
    subspace of it) back to the qubit; the decoder is folded into it.  The
    recovery must be completely positive to within −1e−7 on the smallest
    eigenvalue; trace preservation is not demanded (an ideal decoder S† is a
    valid recovery even though it is only TP on the code space).
    """
    if recovery.d_out != 2:
        raise ValueError(f"recovery must output a qubit, got d_out={recovery.d_out}")
    if recovery.hermiticity_residual() > 1e-8:
        raise ValueError("invalid recovery: Choi is not Hermitian")
    if recovery.min_eigenvalue() < -1e-7:
        raise ValueError(
            f"invalid recovery: Choi eigenvalue {recovery.min_eigenvalue():.2e} < -1e-7"
        )
    encoding = noisy_encoding_choi(code, noise_superop)
    if support_basis is not None:
        encoding = restrict_choi_output(encoding, support_basis)
    if recovery.d_in != encoding.d_out:
        raise ValueError(
            f"recovery input dim {recovery.d_in} does not match noisy encoding "
            f"output dim {encoding.d_out}"
        )
    return compose_choi(encoding, recovery)


def channel_fidelity(
    channel: ChoiMatrix, psd_tol: float = 1e-7, herm_tol: float = 1e-8
) -> float:
    """Channel fidelity of a qubit-to-qubit map from its Choi matrix.

    ``F = (Tr C + <Omega|C|Omega>) / (d(d+1))`` with ``|Omega> = vec(I_d)``.
    The input must be Hermitian to ``herm_tol`` and PSD to ``-psd_tol``
    (complete positivity); trace preservation is not assumed — the ``Tr C``
    term is computed, not replaced by ``d``.
    """
    if channel.d_in != channel.d_out:
        raise ValueError("channel fidelity requires d_in == d_out")
    if channel.hermiticity_residual() > herm_tol:
        raise ValueError(
            f"Choi hermiticity residual {channel.hermiticity_residual():.2e} "
            f"exceeds {herm_tol}"
        )
    if channel.min_eigenvalue() < -psd_tol:
        raise ValueError(
            f"Choi eigenvalue {channel.min_eigenvalue():.2e} below -{psd_tol}"
        )
    d = channel.d_in
    omega = vec(np.eye(d, dtype=complex))
    value = np.real(np.trace(channel.entries) + omega.conj() @ channel.entries @ omega)
    return float(value / (d * (d + 1)))


def floored_infidelity(fidelity: float) -> float:
    """Reported infidelity: ``max(1 - fidelity, INFIDELITY_FLOOR)``."""
    return max(1.0 - fidelity, INFIDELITY_FLOOR)
