"""Loss/dephasing channel against an independent closed-form oracle.

The oracle: simultaneous photon loss (rate kappa_l) and dephasing (rate
kappa_phi) act on a Fock matrix unit as

    E(|m><n|) = exp(-kappa_phi*t (m-n)^2 / 2)
                * sum_k sqrt(C(m,k) C(n,k)) gamma^k
                  * exp(-kappa_l*t ((m+n)/2 - k)) |m-k><n-k|

with gamma = 1 - exp(-kappa_l*t).  Loss shifts both indices equally, so the
coherence distance m-n is conserved and the dephasing factor multiplies
through — the two processes commute and the combined map factorizes.
"""

import numpy as np
import pytest

from rotcode.fock_linalg import annihilation_op, number_op, unvec, vec
from rotcode.noise_channel import (
    NoisePoint,
    apply_loss_dephasing,
    clear_channel_cache,
    dissipator_superop,
    loss_dephasing_channel,
)


@pytest.fixture(autouse=True)
def _fresh_cache():
    clear_channel_cache()
    yield
    clear_channel_cache()


def closed_form_channel(noise: NoisePoint, dim: int) -> np.ndarray:
    """Independent combined-channel superoperator built element by element."""
    from math import comb

    gamma = 1.0 - np.exp(-noise.kappa_l_t)
    superop = np.zeros((dim * dim, dim * dim), dtype=complex)
    for m in range(dim):
        for n in range(dim):
            dephase = np.exp(-noise.kappa_phi_t * (m - n) ** 2 / 2.0)
            column = np.zeros((dim, dim), dtype=complex)
            for k in range(min(m, n) + 1):
                weight = (
                    np.sqrt(comb(m, k) * comb(n, k))
                    * gamma**k
                    * np.exp(-noise.kappa_l_t * ((m + n) / 2.0 - k))
                )
                column[m - k, n - k] += weight
            superop[:, n * dim + m] = vec(dephase * column)
    return superop


def _random_density(rng, dim):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


class TestDissipator:
    def test_matches_direct_formula(self):
        # unvec(D[L] vec(rho)) == L rho L^+ - (1/2){L^+L, rho} for random rho.
        rng = np.random.default_rng(0)
        dim = 6
        jump = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        superop = dissipator_superop(jump)
        lt_l = jump.conj().T @ jump
        for _ in range(20):
            rho = _random_density(rng, dim)
            direct = jump @ rho @ jump.conj().T - 0.5 * (lt_l @ rho + rho @ lt_l)
            np.testing.assert_allclose(unvec(superop @ vec(rho)), direct, atol=1e-12)

    def test_trace_annihilating(self):
        # Dissipators generate trace-preserving flows: Tr(D[L] rho) = 0.
        rng = np.random.default_rng(1)
        superop = dissipator_superop(annihilation_op(5))
        for _ in range(5):
            rho = _random_density(rng, 5)
            assert abs(np.trace(unvec(superop @ vec(rho)))) < 1e-12


class TestCombinedChannel:
    @pytest.mark.parametrize(
        "kl,kphi",
        [(0.01, 0.0), (0.0, 0.02), (0.05, 0.03), (0.3, 0.1), (1.0, 1.0)],
    )
    def test_matches_closed_form(self, kl, kphi):
        noise = NoisePoint(kl, kphi)
        for dim in (2, 5, 10):
            computed = loss_dephasing_channel(noise, dim)
            np.testing.assert_allclose(
                computed, closed_form_channel(noise, dim), atol=1e-9
            )

    def test_zero_noise_is_exact_identity(self):
        channel = loss_dephasing_channel(NoisePoint(0.0, 0.0), 7)
        np.testing.assert_array_equal(channel, np.eye(49))

    def test_single_photon_half_life(self):
        # Pure loss on a two-level Fock space is amplitude damping: at
        # kappa_l*t = ln 2 the excited population has decayed to exactly 1/2.
        channel = loss_dephasing_channel(NoisePoint(np.log(2), 0.0), 2)
        rho = np.zeros((2, 2), dtype=complex)
        rho[1, 1] = 1.0
        out = unvec(channel @ vec(rho))
        np.testing.assert_allclose(np.diag(out).real, [0.5, 0.5], atol=1e-12)

    def test_semigroup_composition(self):
        # E(t1) E(t2) = E(t1 + t2) for fixed rates: evolution is Markovian.
        dim = 8
        a = loss_dephasing_channel(NoisePoint(0.02, 0.05), dim)
        b = loss_dephasing_channel(NoisePoint(0.07, 0.01), dim)
        combined = loss_dephasing_channel(NoisePoint(0.09, 0.06), dim)
        np.testing.assert_allclose(a @ b, combined, atol=1e-8)
        np.testing.assert_allclose(b @ a, combined, atol=1e-8)

    def test_no_upward_population_flow(self):
        # Loss only removes photons: |n><n| cannot gain weight at m > n.
        dim = 6
        channel = loss_dephasing_channel(NoisePoint(0.2, 0.1), dim)
        for n in range(dim):
            rho = np.zeros((dim, dim), dtype=complex)
            rho[n, n] = 1.0
            out = unvec(channel @ vec(rho))
            assert np.all(np.abs(np.diag(out)[n + 1 :]) < 1e-12)

    def test_dephasing_only_damps_coherences(self):
        dim = 6
        kphi = 0.13
        channel = loss_dephasing_channel(NoisePoint(0.0, kphi), dim)
        rng = np.random.default_rng(2)
        rho = _random_density(rng, dim)
        out = unvec(channel @ vec(rho))
        m, n = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
        expected = rho * np.exp(-kphi * (m - n) ** 2 / 2.0)
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_trace_and_positivity_preserved(self):
        dim = 9
        channel = loss_dephasing_channel(NoisePoint(0.15, 0.08), dim)
        rng = np.random.default_rng(3)
        for _ in range(5):
            rho = _random_density(rng, dim)
            out = unvec(channel @ vec(rho))
            assert abs(np.trace(out) - 1) < 1e-10
            assert np.linalg.eigvalsh((out + out.conj().T) / 2).min() > -1e-10

    def test_apply_matches_dense_channel(self):
        dim = 7
        noise = NoisePoint(0.04, 0.09)
        channel = loss_dephasing_channel(noise, dim)
        rng = np.random.default_rng(4)
        cols = rng.standard_normal((dim * dim, 3)) + 1j * rng.standard_normal(
            (dim * dim, 3)
        )
        np.testing.assert_allclose(
            apply_loss_dephasing(noise, dim, cols), channel @ cols, atol=1e-9
        )


class TestCacheAndValidation:
    def test_cache_returns_same_readonly_array(self):
        noise = NoisePoint(0.01, 0.02)
        first = loss_dephasing_channel(noise, 4)
        second = loss_dephasing_channel(noise, 4)
        assert first is second
        with pytest.raises(ValueError):
            first[0, 0] = 0.0

    def test_clear_cache(self):
        noise = NoisePoint(0.01, 0.02)
        first = loss_dephasing_channel(noise, 4)
        clear_channel_cache()
        second = loss_dephasing_channel(noise, 4)
        assert first is not second
        np.testing.assert_array_equal(first, second)

    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            loss_dephasing_channel(NoisePoint(0.1, 0.1), 141)
        with pytest.raises(ValueError):
            loss_dephasing_channel(NoisePoint(0.1, 0.1), 0)

    @pytest.mark.parametrize("kl,kphi", [(-0.1, 0.0), (0.0, -0.1), (np.nan, 0.0), (0.0, np.inf)])
    def test_noise_point_validation(self, kl, kphi):
        with pytest.raises(ValueError):
            NoisePoint(kl, kphi)

    def test_noise_point_ordering(self):
        assert NoisePoint(0.1, 0.2) < NoisePoint(0.2, 0.1)
        assert NoisePoint(0.1, 0.1) < NoisePoint(0.1, 0.2)

    def test_number_operator_backs_dephasing_generator(self):
        # Dephasing dissipator on the number operator leaves diagonals alone.
        superop = dissipator_superop(number_op(4))
        rho = np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex)
        np.testing.assert_allclose(superop @ vec(rho), np.zeros(16), atol=1e-14)
