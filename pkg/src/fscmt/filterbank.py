"""Square-root Nyquist prototype filter and the spreading / phase-adjustment matrices.

The prototype is synthesized in the frequency domain from 2K-1 real
coefficients on bins spaced 2*pi/N apart (N = K*L).  The same coefficient set
populates the N x L spreading matrix used by the transmitter and, transposed,
by the receiver despreader.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Frequency-sampling coefficients (c_1 .. c_{K-1}); c_0 = 1 by convention.
# These satisfy the root-Nyquist pairing c_k^2 + c_{K-k}^2 = 1.
_COEFF_TABLE = {
    2: (np.sqrt(2.0) / 2.0,),
    3: (0.911438, 0.411438),
    4: (0.971960, np.sqrt(2.0) / 2.0, 0.235147),
}


class FilterDesignError(ValueError):
    """Raised for unsupported or inconsistent filter-bank parameters."""


@dataclass(frozen=True)
class FreqCoeffs:
    """Frequency-domain gains of the prototype filter.

    ``c`` holds the one-sided coefficients c_0 .. c_{K-1}; the two-sided set
    is symmetric (c_{-k} = c_k).
    """

    K: int
    c: np.ndarray

    @property
    def two_sided(self) -> np.ndarray:
        """Coefficients indexed k = -K+1 .. K-1 as a length 2K-1 vector."""
        return np.concatenate([self.c[:0:-1], self.c])

    @property
    def offsets(self) -> np.ndarray:
        """Bin offsets k = -K+1 .. K-1 matching :meth:`two_sided`."""
        return np.arange(-self.K + 1, self.K)

    def power_sum(self) -> float:
        """Sum of squared two-sided coefficients (equals K for these designs)."""
        return float(np.sum(self.two_sided ** 2))


@dataclass(frozen=True)
class PrototypeFilter:
    """Time-domain prototype filter of length N = K*L."""

    coeffs: FreqCoeffs
    L: int
    N: int
    taps: np.ndarray = field(repr=False)

    @property
    def taps_centered(self) -> np.ndarray:
        """Taps circularly shifted by N/2 so the pulse peaks mid-window.

        This is the envelope each transmitted symbol actually carries; the
        half-window shift is what makes the linear autocorrelation hit its
        nulls at multiples of L.
        """
        return np.roll(self.taps, self.N // 2)


def design_coeffs(K: int) -> FreqCoeffs:
    """Return the frequency-sampling coefficient set for overlapping factor K.

    Supported K values are hard-coded tables verified at construction against
    the root-Nyquist pairing c_k^2 + c_{K-k}^2 = 1.
    """
    if K not in _COEFF_TABLE:
        raise FilterDesignError(
            f"unsupported overlapping factor K={K}; supported: {sorted(_COEFF_TABLE)}"
        )
    c = np.concatenate([[1.0], _COEFF_TABLE[K]])
    for k in range(1, K):
        pair = c[k] ** 2 + c[K - k] ** 2
        if abs(pair - 1.0) > 1e-6:
            raise FilterDesignError(
                f"coefficient table for K={K} violates c_{k}^2 + c_{K - k}^2 = 1"
            )
    return FreqCoeffs(K=K, c=c)


def synth_time_filter(coeffs: FreqCoeffs, L: int) -> PrototypeFilter:
    """Synthesize the length-N prototype from its frequency coefficients.

    taps(n) = sum_k c_k * exp(j*2*pi*k*n/N), real by coefficient symmetry.
    L must be even so the half-symbol advance L/2 is an integer.
    """
    if L < 2 or L % 2 != 0:
        raise FilterDesignError(f"L must be a positive even integer, got {L}")
    N = coeffs.K * L
    n = np.arange(N)
    taps_c = np.zeros(N, dtype=complex)
    for k, ck in zip(coeffs.offsets, coeffs.two_sided):
        taps_c += ck * np.exp(2j * np.pi * k * n / N)
    residue = np.max(np.abs(taps_c.imag)) / np.max(np.abs(taps_c.real))
    if residue > 1e-10:
        raise FilterDesignError(f"synthesized taps not real (residue {residue:.2e})")
    return PrototypeFilter(coeffs=coeffs, L=L, N=N, taps=taps_c.real)


def nyquist_residual(proto: PrototypeFilter) -> float:
    """max |q(mL)| / q(0) over m != 0, with q the pulse autocorrelation.

    Evaluated on the centered taps, i.e. on the envelope the transmit chain
    uses; the edge-peaked raw taps only satisfy the property circularly.
    """
    p = proto.taps_centered
    q = np.correlate(p, p, mode="full")
    zero = len(p) - 1
    lags = [zero + m * proto.L for m in range(-(proto.coeffs.K - 1), proto.coeffs.K)
            if m != 0]
    return float(max(abs(q[lag]) for lag in lags) / q[zero])


def build_spreading(coeffs: FreqCoeffs, L: int) -> np.ndarray:
    """N x L spreading matrix: column m carries c_k at rows (m*K + k) mod N."""
    if L < 1:
        raise FilterDesignError(f"L must be positive, got {L}")
    K = coeffs.K
    N = K * L
    A = np.zeros((N, L))
    rows = (np.arange(L)[:, None] * K + coeffs.offsets[None, :]) % N
    A[rows, np.arange(L)[:, None]] = coeffs.two_sided[None, :]
    return A


def build_phase(L: int) -> np.ndarray:
    """Diagonal of the L x L phase-adjustment matrix: exp(j*pi*l/2)."""
    if L < 1:
        raise FilterDesignError(f"L must be positive, got {L}")
    return np.exp(1j * np.pi / 2 * np.arange(L))
