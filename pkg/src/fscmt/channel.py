"""Tapped-delay-line fading channels, AWGN, and exact per-bin responses.

Channels are sample-spaced: tap delays are rounded to the nearest sample at
the configured rate.  Every (user, antenna) pair gets an independent Rayleigh
realization whose taps have unit total average power, so perfect power
control holds in expectation.  The per-bin response handed to the equalizer
is the exact DFT of the impulse response.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ChannelError(ValueError):
    """Raised for invalid channel profiles or mismatched signal dimensions."""


@dataclass(frozen=True)
class ChannelProfile:
    """Power-delay profile: tap delays in seconds, relative powers in dB."""

    name: str
    tap_delays_s: np.ndarray
    tap_powers_db: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.tap_delays_s, dtype=float)
        p = np.asarray(self.tap_powers_db, dtype=float)
        if d.ndim != 1 or d.size == 0 or d.size != p.size:
            raise ChannelError("tap delays and powers must be equal-length nonempty lists")
        if d[0] != 0.0:
            raise ChannelError("first tap delay must be 0")
        object.__setattr__(self, "tap_delays_s", d)
        object.__setattr__(self, "tap_powers_db", p)

    def normalized_powers(self) -> np.ndarray:
        """Linear tap powers normalized to sum to 1."""
        p = 10.0 ** (self.tap_powers_db / 10.0)
        return p / p.sum()

    def sample_delays(self, sample_rate: float) -> np.ndarray:
        """Tap positions in samples (nearest-integer rounding)."""
        return np.rint(self.tap_delays_s * sample_rate).astype(int)


def sui4_profile() -> ChannelProfile:
    """Three-tap SUI-4 profile: delays {0, 1.5, 4.0} us, powers {0, -4, -8} dB."""
    return ChannelProfile(
        name="sui4",
        tap_delays_s=np.array([0.0, 1.5e-6, 4.0e-6]),
        tap_powers_db=np.array([0.0, -4.0, -8.0]),
    )


def flat_profile() -> ChannelProfile:
    """Single-tap (frequency-flat) Rayleigh profile, mostly for baselines."""
    return ChannelProfile(name="flat", tap_delays_s=np.array([0.0]),
                          tap_powers_db=np.array([0.0]))


_BUILTIN_PROFILES = {"sui4": sui4_profile, "flat": flat_profile}


def profile_by_name(name: str) -> ChannelProfile:
    try:
        return _BUILTIN_PROFILES[name]()
    except KeyError:
        raise ChannelError(
            f"unknown channel profile {name!r}; built-ins: {sorted(_BUILTIN_PROFILES)}"
        ) from None


@dataclass(frozen=True)
class ChannelRealization:
    """One static draw of all user-to-antenna channels.

    h: (M, Nr, Lc) sample-spaced impulse responses.
    H: (N, Nr, M) per-bin frequency responses, the exact length-N DFT of h.
    """

    h: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)

    @property
    def n_users(self) -> int:
        return self.h.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.h.shape[1]

    def subset_antennas(self, n_antennas: int) -> "ChannelRealization":
        """View of the first ``n_antennas`` antennas (for paired Nr sweeps)."""
        return ChannelRealization(h=self.h[:, :n_antennas, :],
                                  H=self.H[:, :n_antennas, :])


def draw_channels(profile: ChannelProfile, n_users: int, n_antennas: int,
                  sample_rate: float, n_bins: int,
                  rng: np.random.Generator) -> ChannelRealization:
    """Draw independent Rayleigh taps for every (user, antenna) pair.

    Each tap is zero-mean circular complex Gaussian with variance equal to
    its normalized profile power, placed at the quantized sample delay.
    ``n_bins`` sets the DFT length N of the per-bin responses.
    """
    if n_users < 1 or n_antennas < 1:
        raise ChannelError("need at least one user and one antenna")
    delays = profile.sample_delays(sample_rate)
    powers = profile.normalized_powers()
    length = int(delays[-1]) + 1
    h = np.zeros((n_users, n_antennas, length), dtype=complex)
    for d, p in zip(delays, powers):
        g = rng.standard_normal((n_users, n_antennas)) + 1j * rng.standard_normal(
            (n_users, n_antennas))
        h[:, :, d] += np.sqrt(p / 2.0) * g
    H = np.transpose(np.fft.fft(h, n=n_bins, axis=2), (2, 1, 0))
    return ChannelRealization(h=h, H=H)


def apply_channel(signals: np.ndarray, realization: ChannelRealization,
                  noise_var: float, rng: np.random.Generator) -> np.ndarray:
    """Convolve per-user signals with the channels, superpose, add AWGN.

    signals: (M, T) complex user waveforms (same length and rate).
    Returns (Nr, T + Lc - 1) antenna waveforms; the linear convolution tail
    is kept.  ``noise_var`` is the per-complex-sample variance at each
    antenna.
    """
    signals = np.atleast_2d(np.asarray(signals, dtype=complex))
    if signals.shape[0] != realization.n_users:
        raise ChannelError(
            f"got {signals.shape[0]} user signals for {realization.n_users} users")
    if noise_var < 0:
        raise ChannelError("noise variance must be nonnegative")
    n_users, T = signals.shape
    Lc = realization.h.shape[2]
    n_out = T + Lc - 1
    nfft = n_out
    Hf = np.fft.fft(realization.h, n=nfft, axis=2)          # (M, Nr, nfft)
    Xf = np.fft.fft(signals, n=nfft, axis=1)                # (M, nfft)
    rx = np.fft.ifft(np.einsum("mf,maf->af", Xf, Hf), axis=1)
    if noise_var > 0:
        shape = rx.shape
        rx = rx + np.sqrt(noise_var / 2.0) * (
            rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return rx
