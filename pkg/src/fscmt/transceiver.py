"""FS-CMT transmit chain and ideal-channel recovery.

Each symbol vector is spread across 2K-1 bins per subcarrier, phase adjusted,
and brought to the time domain by one N-point IDFT; symbols are then
overlap-added at a spacing of L/2 samples.  The receiver slides an N-sample
window at the same spacing, takes the DFT and despreads.

Two conventions beyond the bare matrix products are fixed here:

* centering: every symbol's bins are multiplied by (-1)^i, a circular shift
  of the prototype by N/2 samples, so the pulse envelope peaks mid-window.
  Without it the overlapping symbols do not cancel and reconstruction fails.
* time phase: symbol n is rotated by j^n (in addition to the per-subcarrier
  phase), selected by the reconstruction oracle; it can be disabled via
  ``time_phase=False`` for inspection, at the cost of orthogonality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .filterbank import (
    FreqCoeffs,
    PrototypeFilter,
    build_phase,
    build_spreading,
    design_coeffs,
    synth_time_filter,
)


class DimensionError(ValueError):
    """Raised when array dimensions do not match the configured filter bank."""


@dataclass(frozen=True)
class FilterBankAssets:
    """Immutable per-(K, L) assets shared by transmitter and receiver."""

    K: int
    L: int
    N: int
    coeffs: FreqCoeffs
    proto: PrototypeFilter
    A: np.ndarray = field(repr=False)          # (N, L) spreading matrix
    phase: np.ndarray = field(repr=False)      # (L,) diag of the phase matrix
    center_signs: np.ndarray = field(repr=False)  # (N,) (-1)^i bin factors
    time_phase: bool = True

    @property
    def step(self) -> int:
        """Symbol advance in samples (L/2)."""
        return self.L // 2

    @property
    def despread_gain(self) -> float:
        """Round-trip gain of spread -> despread (sum of squared c_k = K)."""
        return self.coeffs.power_sum()

    @property
    def tx_power_scale(self) -> float:
        """Amplitude scale giving unit average transmit sample power."""
        return np.sqrt(self.L / 2.0)

    def symbol_phases(self, n_symbols: int) -> np.ndarray:
        """Per-time-index phase factors j^n (ones when time_phase is off)."""
        if self.time_phase:
            return 1j ** np.arange(n_symbols)
        return np.ones(n_symbols, dtype=complex)


def make_assets(K: int, L: int, time_phase: bool = True) -> FilterBankAssets:
    coeffs = design_coeffs(K)
    proto = synth_time_filter(coeffs, L)
    return FilterBankAssets(
        K=K,
        L=L,
        N=K * L,
        coeffs=coeffs,
        proto=proto,
        A=build_spreading(coeffs, L),
        phase=build_phase(L),
        center_signs=(-1.0) ** np.arange(K * L),
        time_phase=time_phase,
    )


def signal_length(assets: FilterBankAssets, n_symbols: int) -> int:
    """Length of the overlap-added signal: (Ns-1)*L/2 + N."""
    return (n_symbols - 1) * assets.step + assets.N


def modulate_symbol(s: np.ndarray, assets: FilterBankAssets) -> np.ndarray:
    """Map one real length-L symbol vector to its N-sample time waveform."""
    s = np.asarray(s)
    if s.shape != (assets.L,):
        raise DimensionError(f"symbol vector must have shape ({assets.L},), got {s.shape}")
    bins = assets.center_signs * (assets.A @ (assets.phase * s))
    return np.fft.ifft(bins)


def overlap_add(symbols: np.ndarray, assets: FilterBankAssets) -> np.ndarray:
    """Overlap-add a (Ns, N) stack of symbol waveforms at spacing L/2."""
    symbols = np.asarray(symbols, dtype=complex)
    if symbols.ndim != 2 or symbols.shape[0] == 0:
        raise DimensionError("need a nonempty (Ns, N) stack of symbol waveforms")
    if symbols.shape[1] != assets.N:
        raise DimensionError(f"symbol waveforms must be length {assets.N}")
    n_symbols = symbols.shape[0]
    x = np.zeros(signal_length(assets, n_symbols), dtype=complex)
    for n in range(n_symbols):
        start = n * assets.step
        x[start:start + assets.N] += symbols[n]
    return x


def transmit_frame(S: np.ndarray, assets: FilterBankAssets) -> np.ndarray:
    """Modulate a full (L, Ns) frame of real symbols, without power scaling.

    Multiply by ``assets.tx_power_scale`` to obtain unit average sample power.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != assets.L:
        raise DimensionError(f"frame must have shape ({assets.L}, Ns), got {S.shape}")
    n_symbols = S.shape[1]
    theta = assets.symbol_phases(n_symbols)
    # (N, Ns) bins for all symbols in one shot
    bins = assets.center_signs[:, None] * (assets.A @ (assets.phase[:, None] * S * theta[None, :]))
    waves = np.fft.ifft(bins, axis=0).T  # (Ns, N)
    return overlap_add(waves, assets)


def analyze_windows(x: np.ndarray, assets: FilterBankAssets, n_symbols: int,
                    first_offset: int = 0) -> np.ndarray:
    """DFT of N-sample windows at spacing L/2; returns (N, Ns) bin matrix.

    ``x`` may be (T,) for one antenna or (Nr, T) for a stack, producing
    (N, Ns) or (N, Nr, Ns) respectively.  The tail is zero-padded when the
    channel extended the signal.
    """
    if first_offset < 0:
        raise DimensionError(f"first_offset must be nonnegative, got {first_offset}")
    x = np.asarray(x, dtype=complex)
    was_1d = x.ndim == 1
    x = np.atleast_2d(x)
    n_rx = x.shape[0]
    need = first_offset + (n_symbols - 1) * assets.step + assets.N
    if x.shape[1] < need:
        x = np.pad(x, ((0, 0), (0, need - x.shape[1])))
    windows = np.empty((n_rx, n_symbols, assets.N), dtype=complex)
    for n in range(n_symbols):
        start = first_offset + n * assets.step
        windows[:, n, :] = x[:, start:start + assets.N]
    Y = np.fft.fft(windows, axis=2)          # (Nr, Ns, N)
    Y = np.transpose(Y, (2, 0, 1))           # (N, Nr, Ns)
    if was_1d:
        return Y[:, 0, :]
    return Y


def despread_frame(Y: np.ndarray, assets: FilterBankAssets,
                   symbol_index0: int = 0) -> np.ndarray:
    """Despread a (N, ...) bin stack to (L, ...) complex symbol estimates.

    Applies the transpose spreading matrix, the centering signs, the inverse
    phase adjustment and the conjugate time phase (the last axis is symbol
    time).  The real part and the 1/K gain are left to the caller so the
    imaginary component remains available for combining-style receivers.
    """
    Y = np.asarray(Y, dtype=complex)
    if Y.shape[0] != assets.N:
        raise DimensionError(f"bin axis must have length {assets.N}, got {Y.shape[0]}")
    z = np.tensordot(assets.A.T * assets.center_signs[None, :], Y, axes=(1, 0))
    phase = np.conj(assets.phase)
    z = z * phase.reshape((assets.L,) + (1,) * (z.ndim - 1))
    n_symbols = z.shape[-1]
    if assets.time_phase:
        theta = np.conj(1j ** (symbol_index0 + np.arange(n_symbols)))
        z = z * theta.reshape((1,) * (z.ndim - 1) + (n_symbols,))
    return z


def demodulate_ideal(Y_col: np.ndarray, assets: FilterBankAssets,
                     symbol_index: int = 0) -> np.ndarray:
    """Recover one real length-L symbol vector from an N-bin DFT column."""
    Y_col = np.asarray(Y_col, dtype=complex)
    if Y_col.shape != (assets.N,):
        raise DimensionError(f"bin vector must have shape ({assets.N},), got {Y_col.shape}")
    z = despread_frame(Y_col[:, None], assets, symbol_index0=symbol_index)[:, 0]
    return z.real / assets.despread_gain
