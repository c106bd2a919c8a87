"""Channel model tests: profile, tap statistics, convolution, noise."""

import numpy as np
import pytest

from fscmt.channel import (
    ChannelError,
    ChannelProfile,
    apply_channel,
    draw_channels,
    flat_profile,
    sui4_profile,
)

FS = 2.8e6


class TestProfile:
    def test_sui4_taps(self):
        p = sui4_profile()
        assert p.tap_delays_s.size == 3
        assert np.allclose(p.tap_delays_s, [0, 1.5e-6, 4.0e-6])
        assert np.allclose(p.tap_powers_db, [0, -4, -8])

    def test_sample_delays_at_2p8mhz(self):
        assert sui4_profile().sample_delays(FS).tolist() == [0, 4, 11]

    def test_powers_normalized(self):
        assert sui4_profile().normalized_powers().sum() == pytest.approx(1.0)

    def test_first_delay_must_be_zero(self):
        with pytest.raises(ChannelError):
            ChannelProfile("bad", np.array([1e-6, 2e-6]), np.array([0.0, -3.0]))


class TestDrawChannels:
    def test_shapes(self):
        rng = np.random.default_rng(0)
        r = draw_channels(sui4_profile(), 2, 4, FS, 64, rng)
        assert r.h.shape == (2, 4, 12)
        assert r.H.shape == (64, 4, 2)

    def test_flat_profile_is_frequency_flat(self):
        rng = np.random.default_rng(1)
        r = draw_channels(flat_profile(), 1, 3, FS, 64, rng)
        assert np.allclose(np.abs(r.H[:, :, 0]), np.abs(r.h[0, :, 0])[None, :])

    def test_tap_power_moments(self):
        # Monte Carlo moment oracle: E[|h_tap|^2] matches the normalized powers
        rng = np.random.default_rng(2)
        prof = sui4_profile()
        r = draw_channels(prof, 40, 600, FS, 64, rng)
        delays = prof.sample_delays(FS)
        powers = prof.normalized_powers()
        for d, p in zip(delays, powers):
            est = np.mean(np.abs(r.h[:, :, d]) ** 2)
            assert est == pytest.approx(p, rel=0.02)

    def test_unit_total_power(self):
        rng = np.random.default_rng(3)
        r = draw_channels(sui4_profile(), 20, 600, FS, 64, rng)
        total = np.mean(np.sum(np.abs(r.h) ** 2, axis=2))
        assert total == pytest.approx(1.0, rel=0.02)

    def test_h_dft_exactness(self):
        # circular-convolution oracle: per-bin division by H recovers input
        rng = np.random.default_rng(4)
        r = draw_channels(sui4_profile(), 1, 1, FS, 64, rng)
        x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        h = np.zeros(64, dtype=complex)
        h[:r.h.shape[2]] = r.h[0, 0]
        y = np.fft.ifft(np.fft.fft(x) * np.fft.fft(h))
        rec = np.fft.ifft(np.fft.fft(y) / r.H[:, 0, 0])
        assert np.allclose(rec, x, atol=1e-9)


class TestApplyChannel:
    def _identity_realization(self, n_users, n_antennas):
        h = np.zeros((n_users, n_antennas, 1), dtype=complex)
        h[:, :, 0] = 1.0
        from fscmt.channel import ChannelRealization
        return ChannelRealization(h=h, H=np.transpose(np.fft.fft(h, n=8, axis=2), (2, 1, 0)))

    def test_identity_channel_sums_users(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((2, 50)) + 1j * rng.standard_normal((2, 50))
        rx = apply_channel(x, self._identity_realization(2, 3), 0.0, rng)
        assert np.allclose(rx, np.broadcast_to(x.sum(axis=0), (3, 50)))

    def test_pure_delay(self):
        rng = np.random.default_rng(6)
        from fscmt.channel import ChannelRealization
        h = np.zeros((1, 1, 4), dtype=complex)
        h[0, 0, 3] = 1.0
        real = ChannelRealization(h=h, H=np.transpose(np.fft.fft(h, n=8, axis=2), (2, 1, 0)))
        x = rng.standard_normal((1, 20)) + 1j * rng.standard_normal((1, 20))
        rx = apply_channel(x, real, 0.0, rng)
        assert rx.shape == (1, 23)
        assert np.allclose(rx[0, 3:], x[0], atol=1e-12)
        assert np.allclose(rx[0, :3], 0, atol=1e-12)

    def test_noise_variance(self):
        rng = np.random.default_rng(7)
        x = np.zeros((1, 100_000), dtype=complex)
        rx = apply_channel(x, self._identity_realization(1, 1), 1.0, rng)
        assert np.mean(np.abs(rx) ** 2) == pytest.approx(1.0, rel=0.02)

    def test_snr_in_roundtrip(self):
        # setting noise_var from a target SNR_in and measuring back recovers it
        rng = np.random.default_rng(8)
        target_db = -1.0
        noise_var = 10 ** (-target_db / 10)
        n = 200_000
        x = (rng.standard_normal((1, n)) + 1j * rng.standard_normal((1, n))) / np.sqrt(2)
        clean = apply_channel(x, self._identity_realization(1, 1), 0.0, rng)
        noisy = apply_channel(x, self._identity_realization(1, 1), noise_var, rng)
        p_sig = np.mean(np.abs(clean) ** 2)
        p_noise = np.mean(np.abs(noisy - clean) ** 2)
        measured_db = 10 * np.log10(p_sig / p_noise)
        assert measured_db == pytest.approx(target_db, abs=0.1)

    def test_length_mismatch_rejected(self):
        rng = np.random.default_rng(9)
        with pytest.raises(ChannelError):
            apply_channel(np.zeros((3, 10)), self._identity_realization(2, 2), 0.0, rng)
