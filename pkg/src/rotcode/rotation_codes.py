"""Construction of bosonic rotation codes.

An order-``N`` rotation code encodes a qubit into an oscillator with the
Fock-grid structure

    |0_N> = sum_k f_{2kN}     |2kN>,
    |1_N> = sum_k f_{(2k+1)N} |(2k+1)N>,

so the codewords live on interleaved Fock grids of spacing ``2N`` and are
exactly orthogonal by disjoint support.  All families here share that
structure and differ only in the amplitude profile ``f``:

- ``TRIV``  : Fock |0> and |1> (order-1 "code" with no protection),
- ``BIN``   : binomial amplitudes (square roots of a binomial row),
- ``CAT``   : Poisson amplitudes of a coherent state of amplitude alpha,
- ``RAND1`` : a single Haar-random primitive expanded onto both grids,
- ``RAND2`` : two independent Haar-random primitives, one per codeword.

Every code satisfies: unit-norm words, ``R_N = exp(i 2 pi n/N)`` fixes both
words, and the logical-Z rotation ``R_2N = exp(i pi n/N)`` has the zero/one
words as +1/−1 eigenvectors (equivalently it swaps the dual words
``|±> = (|0_N> ± |1_N>)/sqrt(2)``).  Number and phase distances are
``d_n = N`` and ``d_phi = pi/N`` with product exactly pi.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from rotcode.haar_sampling import SeededRng, haar_state

__all__ = [
    "Code",
    "CodeDistance",
    "FAMILIES",
    "trivial_code",
    "binomial_code",
    "cat_code",
    "one_rand_code",
    "two_rand_code",
    "rand_code_from_streams",
    "encoder_isometry",
    "code_projector",
    "avg_photon",
    "stabilizer_residual",
    "default_cutoff",
    "CAT_TAIL_BOUND",
]

FAMILIES = ("TRIV", "BIN", "CAT", "RAND1", "RAND2")

# Poisson mass allowed above the cutoff when sizing a cat code's Fock space.
CAT_TAIL_BOUND = 1e-12

_NORM_TOL = 1e-10


@dataclass(frozen=True)
class CodeDistance:
    """Number/rotation error distances of an order-N code: d_n = N, d_phi = pi/N."""

    d_n: int
    d_phi: float

    @classmethod
    def for_order(cls, N: int) -> "CodeDistance":
        return cls(d_n=N, d_phi=np.pi / N)


@dataclass
class Code:
    """A rotation code: two orthonormal codewords on interleaved Fock grids.

    ``zero_word``/``one_word`` are dense complex vectors of equal length
    (the simulation cutoff ``D``); ``params`` records the family parameters
    (``K`` or ``alpha``); ``seeds`` records the random stream ids used for the
    random families (empty for deterministic families).
    """

    family: str
    N: int
    zero_word: np.ndarray
    one_word: np.ndarray
    params: dict = field(default_factory=dict)
    seeds: tuple = ()

    @property
    def dim(self) -> int:
        return self.zero_word.shape[0]

    def distance(self) -> CodeDistance:
        return CodeDistance.for_order(self.N)

    def plus_word(self) -> np.ndarray:
        return (self.zero_word + self.one_word) / np.sqrt(2)

    def minus_word(self) -> np.ndarray:
        return (self.zero_word - self.one_word) / np.sqrt(2)


def _validated(code: Code) -> Code:
    """Check the structural invariants shared by every family."""
    zero, one = code.zero_word, code.one_word
    if zero.shape != one.shape or zero.ndim != 1:
        raise ValueError("codewords must be 1-D vectors of equal length")
    for name, word in (("zero", zero), ("one", one)):
        norm = np.linalg.norm(word)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"{name} word norm {norm} deviates from 1 beyond {_NORM_TOL}")
    overlap = np.vdot(zero, one)
    if overlap != 0:
        raise ValueError(f"codewords overlap ({overlap}); Fock supports must be disjoint")
    indices = np.arange(code.dim)
    grid = 2 * code.N
    if np.any(zero[indices % grid != 0] != 0):
        raise ValueError("zero word has support off the 2N-spaced Fock grid")
    if np.any(one[indices % grid != code.N % grid] != 0):
        raise ValueError("one word has support off the (2k+1)N Fock grid")
    return code


def default_cutoff(family: str, N: int, K: int | None = None, alpha: float | None = None) -> int:
    """Smallest Fock dimension used for each family.

    Loss and dephasing never raise the photon number, so the cutoff only needs
    to cover the codewords' own support: the exact top occupied index plus one
    for BIN/RAND, and a Poisson tail bound of ``CAT_TAIL_BOUND`` for CAT.
    """
    family = family.upper()
    if family == "TRIV":
        return 2
    if family == "BIN":
        if K is None:
            raise ValueError("BIN requires K")
        return (K + 1) * N + 1
    if family in ("RAND1", "RAND2"):
        if K is None:
            raise ValueError(f"{family} requires K")
        return (2 * K + 1) * N + 1
    if family == "CAT":
        if alpha is None or alpha <= 0:
            raise ValueError("CAT requires alpha > 0")
        dim = int(poisson.isf(CAT_TAIL_BOUND, alpha**2)) + 1
        while poisson.sf(dim - 1, alpha**2) >= CAT_TAIL_BOUND:
            dim += 1
        return max(dim, N + 2)
    raise ValueError(f"unknown family {family!r}")


def trivial_code(D: int = 2) -> Code:
    """The unencoded qubit: |0_L> = |0>, |1_L> = |1>, recorded as order N = 1."""
    if D < 2:
        raise ValueError(f"trivial code needs D >= 2, got {D}")
    zero = np.zeros(D, dtype=complex)
    one = np.zeros(D, dtype=complex)
    zero[0] = 1.0
    one[1] = 1.0
    return _validated(Code(family="TRIV", N=1, zero_word=zero, one_word=one))


def binomial_code(N: int, K: int, D: int | None = None) -> Code:
    """Binomial rotation code of order N.

    Amplitudes ``sqrt(C(K+1, k))`` sit on Fock levels ``kN`` for
    ``k = 0..K+1``; even ``k`` builds the zero word, odd ``k`` the one word,
    and each word is normalized separately.  ``K = 1, N = 2`` is the "kitten"
    code {(|0> + |4>)/sqrt(2), |2>}; ``K = 0`` degenerates to the Fock pair
    {|0>, |N>}.  Mean photon number is ``N (K+1) / 2``.
    """
    if N < 1 or K < 0:
        raise ValueError(f"need N >= 1 and K >= 0, got N={N}, K={K}")
    top = (K + 1) * N
    if D is None:
        D = top + 1
    if D <= top:
        raise ValueError(
            f"cutoff D={D} too small: binomial (N={N}, K={K}) occupies Fock level {top}"
        )
    zero = np.zeros(D, dtype=complex)
    one = np.zeros(D, dtype=complex)
    for k in range(K + 2):
        amp = np.sqrt(comb(K + 1, k))
        if k % 2 == 0:
            zero[k * N] = amp
        else:
            one[k * N] = amp
    zero /= np.linalg.norm(zero)
    one /= np.linalg.norm(one)
    return _validated(
        Code(family="BIN", N=N, zero_word=zero, one_word=one, params={"K": K})
    )


def cat_code(N: int, alpha: float, D: int | None = None) -> Code:
    """Two-component-per-word cat code: Poisson amplitudes of |alpha| on the grid.

    Unnormalized amplitudes ``alpha^{kN} / sqrt((kN)!)`` are placed on Fock
    levels ``kN``; the even-k and odd-k sectors are normalized separately
    (the two sector normalizations play the role of N_0 and N_1).  The cutoff
    must leave less than ``CAT_TAIL_BOUND`` Poisson(alpha^2) mass above it.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    needed = default_cutoff("CAT", N, alpha=alpha)
    if D is None:
        D = needed
    elif poisson.sf(D - 1, alpha**2) >= CAT_TAIL_BOUND or D < N + 1:
        raise ValueError(
            f"cutoff D={D} leaves more than {CAT_TAIL_BOUND} tail mass for alpha={alpha}"
            f" (need D >= {needed})"
        )
    zero = np.zeros(D, dtype=complex)
    one = np.zeros(D, dtype=complex)
    ks = np.arange((D - 1) // N + 1)
    # log amplitudes avoid overflow of (kN)! well before the tail bound bites
    log_amp = ks * N * np.log(alpha) - 0.5 * gammaln(ks * N + 1)
    amps = np.exp(log_amp - log_amp.max())
    for k, amp in zip(ks, amps):
        if k % 2 == 0:
            zero[k * N] = amp
        else:
            one[k * N] = amp
    zero /= np.linalg.norm(zero)
    one /= np.linalg.norm(one)
    return _validated(
        Code(family="CAT", N=N, zero_word=zero, one_word=one, params={"alpha": alpha})
    )


def _expand_primitive(psi: np.ndarray, N: int, D: int, which: str) -> np.ndarray:
    """Place primitive amplitudes psi_k on Fock 2kN (zero word) or (2k+1)N (one word)."""
    word = np.zeros(D, dtype=complex)
    for k, amp in enumerate(psi):
        index = 2 * k * N if which == "zero" else (2 * k + 1) * N
        word[index] = amp
    return word


def rand_code_from_streams(
    family: str,
    N: int,
    K: int,
    D: int | None,
    stream_zero: SeededRng,
    stream_one: SeededRng | None = None,
) -> Code:
    """Build a random-family code directly from its recorded random streams.

    This is the reconstruction path for records that store stream ids: RAND1
    uses one stream for its single primitive, RAND2 one stream per word.
    """
    family = family.upper()
    if family not in ("RAND1", "RAND2"):
        raise ValueError(f"not a random family: {family!r}")
    if family == "RAND2" and stream_one is None:
        raise ValueError("RAND2 needs two streams")
    if N < 1 or K < 0:
        raise ValueError(f"need N >= 1 and K >= 0, got N={N}, K={K}")
    top = (2 * K + 1) * N
    if D is None:
        D = top + 1
    if D <= top:
        raise ValueError(
            f"cutoff D={D} too small: {family} (N={N}, K={K}) occupies level {top}"
        )
    psi = haar_state(K + 1, stream_zero)
    if family == "RAND1":
        phi = psi
        seeds = (stream_zero.stream_id,)
    else:
        phi = haar_state(K + 1, stream_one)
        seeds = (stream_zero.stream_id, stream_one.stream_id)
    return _validated(
        Code(
            family=family,
            N=N,
            zero_word=_expand_primitive(psi, N, D, "zero"),
            one_word=_expand_primitive(phi, N, D, "one"),
            params={"K": K},
            seeds=seeds,
        )
    )


def one_rand_code(N: int, K: int, D: int | None = None, rng: SeededRng | None = None) -> Code:
    """Random rotation code from a single Haar primitive of dimension K+1.

    The same amplitude vector ``psi`` is expanded onto both grids:
    |0_N> = sum_k psi_k |2kN>, |1_N> = sum_k psi_k |(2k+1)N>.
    """
    if rng is None:
        raise ValueError("one_rand_code requires an rng")
    return rand_code_from_streams("RAND1", N, K, D, rng)


def two_rand_code(N: int, K: int, D: int | None = None, rng: SeededRng | None = None) -> Code:
    """Random rotation code from two independent Haar primitives (one per word)."""
    if rng is None:
        raise ValueError("two_rand_code requires an rng")
    return rand_code_from_streams("RAND2", N, K, D, rng.child(0), rng.child(1))


def encoder_isometry(code: Code, D: int | None = None) -> np.ndarray:
    """The encoder S = |0_N><0| + |1_N><1| as a D x 2 matrix with S†S = I."""
    if D is None:
        D = code.dim
    if D < code.dim:
        raise ValueError(f"target dimension {D} smaller than codeword dimension {code.dim}")
    S = np.zeros((D, 2), dtype=complex)
    S[: code.dim, 0] = code.zero_word
    S[: code.dim, 1] = code.one_word
    return S


def code_projector(code: Code) -> np.ndarray:
    """Projector onto the code space, P = |0_N><0_N| + |1_N><1_N|."""
    return np.outer(code.zero_word, code.zero_word.conj()) + np.outer(
        code.one_word, code.one_word.conj()
    )


def avg_photon(code: Code) -> float:
    """Mean photon number over the code space, (1/2) Tr(n P_code)."""
    n = np.arange(code.dim)
    return float(
        0.5 * (np.abs(code.zero_word) ** 2 @ n + np.abs(code.one_word) ** 2 @ n)
    )


def stabilizer_residual(code: Code) -> float:
    """Largest violation of the code's rotation-symmetry identities.

    Checks, in 2-norm:
    - the stabilizer ``R_N = exp(i 2 pi n/N)`` fixes both codewords,
    - the logical-Z rotation ``R_2N = exp(i pi n/N)`` has eigenvalue +1 on the
      zero word and −1 on the one word,
    - equivalently ``R_2N`` exchanges the dual words |+> and |->.
    Any constructed code sits at float-epsilon scale; an amplitude moved off
    its Fock grid produces an O(1) residual.
    """
    n_diag = np.arange(code.dim)
    stab = np.exp(2j * np.pi * n_diag / code.N)
    logical_z = np.exp(1j * np.pi * n_diag / code.N)
    plus, minus = code.plus_word(), code.minus_word()
    residuals = (
        np.linalg.norm(stab * code.zero_word - code.zero_word),
        np.linalg.norm(stab * code.one_word - code.one_word),
        np.linalg.norm(logical_z * code.zero_word - code.zero_word),
        np.linalg.norm(logical_z * code.one_word + code.one_word),
        np.linalg.norm(logical_z * plus - minus),
        np.linalg.norm(logical_z * minus - plus),
    )
    return float(max(residuals))
