"""MMSE frequency-spreading equalizer and single-tap baseline tests."""

import numpy as np
import pytest

from fscmt.channel import apply_channel, draw_channels, flat_profile, sui4_profile
from fscmt.equalizer import (
    EqualizerError,
    despread_users,
    equalize_bins,
    mmse_weights,
    ppn_single_tap_receive,
)
from fscmt.metrics import measure_sir
from fscmt.transceiver import (
    DimensionError,
    analyze_windows,
    demodulate_ideal,
    despread_frame,
    make_assets,
    transmit_frame,
)

FS = 2.8e6


def _random_H(rng, n_bins, nr, m):
    return rng.standard_normal((n_bins, nr, m)) + 1j * rng.standard_normal((n_bins, nr, m))


class TestMmseWeights:
    def test_single_user_zero_noise(self):
        rng = np.random.default_rng(0)
        H = _random_H(rng, 10, 8, 1)
        W = mmse_weights(H, 0.0)
        for i in range(10):
            h = H[i, :, 0]
            assert np.allclose(W[i, :, 0], h / np.linalg.norm(h) ** 2)
            assert np.vdot(W[i, :, 0], h) == pytest.approx(1.0)

    def test_large_noise_matched_filter_limit(self):
        rng = np.random.default_rng(1)
        H = _random_H(rng, 4, 8, 1)
        big = 1e9
        W = mmse_weights(H, big)
        assert np.allclose(W[:, :, 0], H[:, :, 0] / big, rtol=1e-6)

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(2)
        H = _random_H(rng, 64, 8, 3)
        sigma2 = 0.5
        W = mmse_weights(H, sigma2)
        for i in range(64):
            X, *_ = np.linalg.lstsq(H[i].conj().T @ H[i] + sigma2 * np.eye(3),
                                    H[i].conj().T, rcond=None)
            assert np.linalg.norm(W[i] - X.conj().T) / np.linalg.norm(X) < 1e-10

    def test_singular_bin_named(self):
        H = np.zeros((5, 4, 2), dtype=complex)
        with pytest.raises(EqualizerError, match="bin 0"):
            mmse_weights(H, 0.0)


class TestEqualizeBins:
    def test_unit_recovery(self):
        rng = np.random.default_rng(3)
        H = _random_H(rng, 6, 8, 1)
        W = mmse_weights(H, 0.0)
        Y = H[:, :, :1]  # one symbol with sent value 1
        R = equalize_bins(Y, W)
        assert np.allclose(R, 1.0)

    def test_zero_in_zero_out(self):
        rng = np.random.default_rng(4)
        H = _random_H(rng, 6, 4, 2)
        R = equalize_bins(np.zeros((6, 4, 3)), mmse_weights(H, 0.1))
        assert np.allclose(R, 0.0)

    def test_synthetic_zero_forcing(self):
        # r_tilde built exactly from the per-bin model with no noise
        rng = np.random.default_rng(5)
        H = _random_H(rng, 16, 6, 3)
        r = rng.standard_normal((16, 3, 5)) + 1j * rng.standard_normal((16, 3, 5))
        Y = np.einsum("iam,ims->ias", H, r)
        R = equalize_bins(Y, mmse_weights(H, 0.0))
        assert np.allclose(R, r, atol=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            equalize_bins(np.zeros((6, 4, 2)), np.zeros((6, 5, 2)))


class TestDespreadUsers:
    def test_single_user_matches_ideal_demodulator(self):
        rng = np.random.default_rng(6)
        assets = make_assets(4, 16)
        Y = rng.standard_normal((64, 1, 3)) + 1j * rng.standard_normal((64, 1, 3))
        est = despread_users(Y, assets)
        for n in range(3):
            ref = demodulate_ideal(Y[:, 0, n], assets, symbol_index=n)
            assert np.allclose(est[:, 0, n], ref, atol=1e-12)

    def test_user_columns_swap(self):
        rng = np.random.default_rng(7)
        assets = make_assets(4, 8)
        R = rng.standard_normal((32, 2, 4)) + 1j * rng.standard_normal((32, 2, 4))
        est = despread_users(R, assets)
        est_sw = despread_users(R[:, ::-1, :], assets)
        assert np.allclose(est_sw, est[:, ::-1, :])

    def test_end_to_end_multiuser(self):
        # two users over SUI-4, Nr=64, noise free: estimates track the symbols
        rng = np.random.default_rng(8)
        assets = make_assets(4, 16)
        M, Nr, Ns = 2, 64, 32
        S = rng.choice([-1.0, 1.0], size=(M, 16, Ns))
        scale = assets.tx_power_scale
        x = np.stack([transmit_frame(S[u], assets) for u in range(M)]) * scale
        real = draw_channels(sui4_profile(), M, Nr, FS, assets.N, rng)
        rx = apply_channel(x, real, 0.0, rng)
        Y = analyze_windows(rx, assets, Ns)
        est = despread_users(equalize_bins(Y, mmse_weights(real.H, 0.0)), assets) / scale
        rep = measure_sir(S, np.transpose(est, (1, 0, 2)), edge_symbols=3)
        assert rep.values_db("power").min() > 25.0


class TestPpnBaseline:
    def test_flat_channel_matches_fse(self):
        rng = np.random.default_rng(9)
        assets = make_assets(4, 16)
        S = rng.choice([-1.0, 1.0], size=(1, 16, 16))
        x = transmit_frame(S[0], assets)[None, :]
        real = draw_channels(flat_profile(), 1, 4, FS, assets.N, rng)
        rx = apply_channel(x, real, 0.0, rng)
        Y = analyze_windows(rx, assets, 16)
        est_f = despread_users(equalize_bins(Y, mmse_weights(real.H, 0.0)), assets)
        est_p = ppn_single_tap_receive(Y, real.H, 0.0, assets)
        assert np.max(np.abs(est_f - est_p)) < 1e-9

    def test_zero_in_zero_out(self):
        rng = np.random.default_rng(10)
        assets = make_assets(4, 8)
        H = _random_H(rng, 32, 4, 1)
        est = ppn_single_tap_receive(np.zeros((32, 4, 3)), H, 0.1, assets)
        assert np.allclose(est, 0.0)

    def test_fse_beats_ppn_on_selective_channel(self):
        rng = np.random.default_rng(11)
        assets = make_assets(4, 16)
        S = rng.choice([-1.0, 1.0], size=(1, 16, 32))
        x = transmit_frame(S[0], assets)[None, :] * assets.tx_power_scale
        sirs = {"fse": [], "ppn": []}
        for _ in range(10):
            real = draw_channels(sui4_profile(), 1, 64, FS, assets.N, rng)
            rx = apply_channel(x, real, 0.0, rng)
            Y = analyze_windows(rx, assets, 32)
            W = mmse_weights(real.H, 0.0)
            for name, est in (
                ("fse", despread_users(equalize_bins(Y, W), assets)),
                ("ppn", ppn_single_tap_receive(Y, real.H, 0.0, assets)),
            ):
                rep = measure_sir(S, np.transpose(est, (1, 0, 2)), edge_symbols=3)
                sirs[name].append(rep.values_db("power").mean())
        assert np.mean(sirs["fse"]) > np.mean(sirs["ppn"]) + 10.0
