"""Choi representations and the average-fidelity functional.

Fidelity oracle used throughout: for a channel with Kraus operators {K_k} on
dimension d, the average fidelity to the identity is

    F = (sum_k Tr(K_k^+ K_k) + sum_k |Tr K_k|^2) / (d (d + 1)),

computed here straight from Kraus operators and compared against the
Choi-based functional.
"""

import numpy as np
import pytest

from rotcode.channel_metrics import (
    INFIDELITY_FLOOR,
    ChoiMatrix,
    channel_fidelity,
    choi_to_superop,
    compose_choi,
    compose_logical_channel,
    floored_infidelity,
    noisy_encoding_choi,
    restrict_choi_output,
    superop_to_choi,
)
from rotcode.fock_linalg import kron, unvec, vec
from rotcode.haar_sampling import SeededRng, haar_unitary
from rotcode.noise_channel import NoisePoint, loss_dephasing_channel
from rotcode.rotation_codes import binomial_code, encoder_isometry, trivial_code


def _random_kraus_set(rng, dim, count):
    """A trace-preserving Kraus set: random matrices whitened so sum K^+K = I."""
    blocks = [
        rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        for _ in range(count)
    ]
    gram = sum(b.conj().T @ b for b in blocks)
    vals, vecs = np.linalg.eigh(gram)
    inv_sqrt = vecs @ np.diag(1 / np.sqrt(vals)) @ vecs.conj().T
    return [b @ inv_sqrt for b in blocks]


def _superop_from_kraus(kraus):
    dim = kraus[0].shape[0]
    total = np.zeros((dim * dim, dim * dim), dtype=complex)
    for k in kraus:
        total += kron(k.conj(), k)
    return total


def _kraus_fidelity(kraus):
    dim = kraus[0].shape[0]
    trace_part = sum(np.trace(k.conj().T @ k) for k in kraus).real
    overlap_part = sum(abs(np.trace(k)) ** 2 for k in kraus)
    return (trace_part + overlap_part) / (dim * (dim + 1))


def _ideal_decoder_choi(code):
    """Choi of rho -> S^+ rho S (single Kraus S^+; completely positive,
    trace-nonincreasing outside the code space)."""
    s_dag = encoder_isometry(code).conj().T
    return superop_to_choi(kron(s_dag.conj(), s_dag), d_in=code.dim, d_out=2)


class TestChoiRepresentation:
    def test_identity_choi_is_maximally_entangled_outer(self):
        # Identity channel: C = |Omega><Omega| with Omega = vec(I).
        choi = superop_to_choi(np.eye(4), d_in=2, d_out=2)
        omega = np.array([1, 0, 0, 1], dtype=complex)
        np.testing.assert_allclose(choi.entries, np.outer(omega, omega), atol=1e-14)
        assert choi.tp_residual() < 1e-14

    def test_round_trip_square(self):
        rng = np.random.default_rng(0)
        superop = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        choi = superop_to_choi(superop, d_in=4, d_out=4)
        np.testing.assert_array_equal(choi_to_superop(choi), superop)

    def test_round_trip_rectangular(self):
        rng = np.random.default_rng(1)
        superop = rng.standard_normal((9, 4)) + 1j * rng.standard_normal((9, 4))
        choi = superop_to_choi(superop, d_in=2, d_out=3)
        assert choi.entries.shape == (6, 6)
        np.testing.assert_array_equal(choi_to_superop(choi), superop)

    def test_choi_blocks_are_channel_outputs(self):
        # Block (a, b) of the Choi matrix is E(|a><b|).
        rng = np.random.default_rng(2)
        kraus = _random_kraus_set(rng, 3, 2)
        superop = _superop_from_kraus(kraus)
        choi = superop_to_choi(superop, d_in=3, d_out=3)
        for a in range(3):
            for b in range(3):
                unit = np.zeros((3, 3), dtype=complex)
                unit[a, b] = 1.0
                expected = unvec(superop @ vec(unit))
                block = choi.entries[a * 3 : (a + 1) * 3, b * 3 : (b + 1) * 3]
                np.testing.assert_allclose(block, expected, atol=1e-12)

    def test_amplitude_damping_choi_eigenvalues(self):
        gamma = 0.3
        a0 = np.diag([1.0, np.sqrt(1 - gamma)]).astype(complex)
        a1 = np.zeros((2, 2), dtype=complex)
        a1[0, 1] = np.sqrt(gamma)
        choi = superop_to_choi(_superop_from_kraus([a0, a1]), 2, 2)
        eigenvalues = np.sort(np.linalg.eigvalsh(choi.entries))
        np.testing.assert_allclose(eigenvalues, [0, 0, gamma, 2 - gamma], atol=1e-12)
        assert choi.tp_residual() < 1e-12
        assert choi.min_eigenvalue() > -1e-12

    def test_trace_preservation_residual_detects_leakage(self):
        # Drop one Kraus operator: the map becomes trace-decreasing.
        rng = np.random.default_rng(3)
        kraus = _random_kraus_set(rng, 2, 3)
        choi = superop_to_choi(_superop_from_kraus(kraus[:-1]), 2, 2)
        assert choi.tp_residual() > 1e-3

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            ChoiMatrix(d_in=2, d_out=2, entries=np.eye(3))
        with pytest.raises(ValueError):
            superop_to_choi(np.eye(5), d_in=2, d_out=2)


class TestComposition:
    def test_unitary_composition(self):
        rng = SeededRng(42, 0)
        u = haar_unitary(3, rng.child("u"))
        v = haar_unitary(3, rng.child("v"))
        choi_u = superop_to_choi(kron(u.conj(), u), 3, 3)
        choi_v = superop_to_choi(kron(v.conj(), v), 3, 3)
        vu = v @ u
        expected = superop_to_choi(kron(vu.conj(), vu), 3, 3)
        composed = compose_choi(choi_u, choi_v)
        np.testing.assert_allclose(composed.entries, expected.entries, atol=1e-12)

    def test_composition_matches_superop_product(self):
        rng = np.random.default_rng(4)
        s1 = _superop_from_kraus(_random_kraus_set(rng, 2, 2))  # 2 -> 2
        rect = [rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))]
        s2 = kron(rect[0].conj(), rect[0])  # 2 -> 3
        first = superop_to_choi(s1, 2, 2)
        then = superop_to_choi(s2, 2, 3)
        composed = compose_choi(first, then)
        np.testing.assert_allclose(
            choi_to_superop(composed), s2 @ s1, atol=1e-12
        )

    def test_dimension_mismatch_rejected(self):
        a = superop_to_choi(np.eye(4), 2, 2)
        b = superop_to_choi(np.eye(9), 3, 3)
        with pytest.raises(ValueError):
            compose_choi(a, b)


class TestChannelFidelity:
    def test_identity_channel(self):
        choi = superop_to_choi(np.eye(4), 2, 2)
        assert abs(channel_fidelity(choi) - 1.0) < 1e-14

    def test_completely_depolarizing(self):
        superop = np.outer(vec(np.eye(2) / 2), vec(np.eye(2)).conj())
        choi = superop_to_choi(superop, 2, 2)
        assert abs(channel_fidelity(choi) - 0.5) < 1e-14

    def test_phase_flip_unitary(self):
        z = np.diag([1.0, -1.0]).astype(complex)
        choi = superop_to_choi(kron(z.conj(), z), 2, 2)
        assert abs(channel_fidelity(choi) - 1.0 / 3.0) < 1e-14

    def test_matches_kraus_oracle_on_random_channels(self):
        rng = np.random.default_rng(5)
        for trial in range(50):
            dim = 2 + trial % 3
            kraus = _random_kraus_set(rng, dim, 1 + trial % 4)
            choi = superop_to_choi(_superop_from_kraus(kraus), dim, dim)
            assert abs(channel_fidelity(choi) - _kraus_fidelity(kraus)) < 1e-9

    def test_linearity_in_the_choi(self):
        rng = np.random.default_rng(6)
        k1 = _random_kraus_set(rng, 2, 2)
        k2 = _random_kraus_set(rng, 2, 3)
        c1 = superop_to_choi(_superop_from_kraus(k1), 2, 2)
        c2 = superop_to_choi(_superop_from_kraus(k2), 2, 2)
        for lam in (0.0, 0.25, 0.7, 1.0):
            mixed = ChoiMatrix(2, 2, lam * c1.entries + (1 - lam) * c2.entries)
            expected = lam * channel_fidelity(c1) + (1 - lam) * channel_fidelity(c2)
            assert abs(channel_fidelity(mixed) - expected) < 1e-12

    def test_rejects_rectangular_channels(self):
        choi = superop_to_choi(np.zeros((9, 4)), 2, 3)
        with pytest.raises(ValueError):
            channel_fidelity(choi)

    def test_rejects_non_positive_choi(self):
        bad = ChoiMatrix(2, 2, -np.eye(4, dtype=complex))
        with pytest.raises(ValueError):
            channel_fidelity(bad)

    def test_floored_infidelity(self):
        assert floored_infidelity(1.0) == INFIDELITY_FLOOR
        assert floored_infidelity(1.0 - 1e-9) == INFIDELITY_FLOOR
        assert abs(floored_infidelity(0.9) - 0.1) < 1e-15


class TestEncodingAndLogicalChannel:
    def test_noisy_encoding_is_a_channel(self):
        code = binomial_code(2, 1)
        superop = loss_dephasing_channel(NoisePoint(0.05, 0.02), code.dim)
        choi = noisy_encoding_choi(code, superop)
        assert (choi.d_in, choi.d_out) == (2, code.dim)
        assert choi.tp_residual() < 1e-10
        assert choi.min_eigenvalue() > -1e-10
        assert abs(np.trace(choi.output_marginal()) - 2) < 1e-10

    def test_encoding_blocks_match_direct_evolution(self):
        code = binomial_code(2, 1)
        superop = loss_dephasing_channel(NoisePoint(0.05, 0.02), code.dim)
        choi = noisy_encoding_choi(code, superop)
        enc = encoder_isometry(code)
        d = code.dim
        for a in range(2):
            for b in range(2):
                block = choi.entries[a * d : (a + 1) * d, b * d : (b + 1) * d]
                expected = unvec(
                    superop @ vec(np.outer(enc[:, a], enc[:, b].conj()))
                )
                np.testing.assert_allclose(block, expected, atol=1e-12)

    def test_support_restriction_recomposes(self):
        code = binomial_code(2, 1)
        superop = loss_dephasing_channel(NoisePoint(0.08, 0.0), code.dim)
        choi = noisy_encoding_choi(code, superop)
        vals, vecs = np.linalg.eigh(choi.output_marginal())
        basis = vecs[:, vals > 1e-12]
        restricted = restrict_choi_output(choi, basis)
        ds = basis.shape[1]
        four = restricted.entries.reshape(2, ds, 2, ds)
        lifted = np.einsum("jb,abcd,kd->ajck", basis, four, basis.conj()).reshape(
            2 * code.dim, 2 * code.dim
        )
        np.testing.assert_allclose(lifted, choi.entries, atol=1e-10)

    def test_restriction_rejects_non_isometry(self):
        code = binomial_code(2, 1)
        choi = noisy_encoding_choi(code, np.eye(code.dim**2))
        with pytest.raises(ValueError):
            restrict_choi_output(choi, 2 * np.eye(code.dim))

    def test_ideal_decoder_at_zero_noise_gives_identity(self):
        for code in (trivial_code(), binomial_code(2, 1), binomial_code(3, 2)):
            identity = np.eye(code.dim**2)
            logical = compose_logical_channel(code, identity, _ideal_decoder_choi(code))
            assert abs(channel_fidelity(logical) - 1.0) < 1e-9
            np.testing.assert_allclose(
                logical.entries,
                superop_to_choi(np.eye(4), 2, 2).entries,
                atol=1e-10,
            )

    def test_unencoded_qubit_under_loss_is_amplitude_damping(self):
        kl = 0.23
        code = trivial_code()
        superop = loss_dephasing_channel(NoisePoint(kl, 0.0), 2)
        logical = compose_logical_channel(code, superop, _ideal_decoder_choi(code))
        gamma = 1 - np.exp(-kl)
        a0 = np.diag([1.0, np.sqrt(1 - gamma)]).astype(complex)
        a1 = np.zeros((2, 2), dtype=complex)
        a1[0, 1] = np.sqrt(gamma)
        expected = superop_to_choi(_superop_from_kraus([a0, a1]), 2, 2)
        np.testing.assert_allclose(logical.entries, expected.entries, atol=1e-10)

    def test_invalid_recovery_rejected(self):
        code = binomial_code(2, 1)
        identity = np.eye(code.dim**2)
        bad = ChoiMatrix(code.dim, 2, -np.eye(2 * code.dim, dtype=complex))
        with pytest.raises(ValueError):
            compose_logical_channel(code, identity, bad)
