"""Prototype filter and spreading/phase matrix tests."""

import numpy as np
import pytest

from fscmt.filterbank import (
    FilterDesignError,
    build_phase,
    build_spreading,
    design_coeffs,
    nyquist_residual,
    synth_time_filter,
)


class TestDesignCoeffs:
    def test_k4_values(self):
        c = design_coeffs(4).c
        assert c[0] == 1.0
        assert c[1] == pytest.approx(0.971960, abs=1e-6)
        assert c[2] == pytest.approx(np.sqrt(2) / 2, abs=1e-9)
        assert c[3] == pytest.approx(0.235147, abs=1e-6)

    def test_k2_forced_value(self):
        c = design_coeffs(2).c
        assert c[1] == pytest.approx(1 / np.sqrt(2), abs=1e-12)

    @pytest.mark.parametrize("K", [2, 3, 4])
    def test_root_nyquist_pairing(self, K):
        c = design_coeffs(K).c
        for k in range(1, K):
            assert c[k] ** 2 + c[K - k] ** 2 == pytest.approx(1.0, abs=1e-6)

    def test_k4_pairing_arithmetic(self):
        assert 0.971960 ** 2 + 0.235147 ** 2 == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("K", [2, 3, 4])
    def test_symmetry_and_peak(self, K):
        fc = design_coeffs(K)
        two = fc.two_sided
        assert np.allclose(two, two[::-1])
        assert two.max() == two[K - 1] == 1.0

    def test_unsupported_k(self):
        with pytest.raises(FilterDesignError, match=r"\[2, 3, 4\]"):
            design_coeffs(5)


class TestSynthTimeFilter:
    def test_taps_at_zero(self):
        proto = synth_time_filter(design_coeffs(4), 16)
        c = proto.coeffs.c
        assert proto.taps[0] == pytest.approx(c[0] + 2 * (c[1] + c[2] + c[3]), abs=1e-9)
        assert proto.taps[0] == pytest.approx(4.828428, abs=1e-5)

    def test_even_symmetry(self):
        proto = synth_time_filter(design_coeffs(4), 16)
        assert np.allclose(proto.taps[1:], proto.taps[1:][::-1], atol=1e-12)

    def test_length(self):
        proto = synth_time_filter(design_coeffs(3), 8)
        assert proto.N == 24 and len(proto.taps) == 24

    def test_odd_L_rejected(self):
        with pytest.raises(FilterDesignError, match="even"):
            synth_time_filter(design_coeffs(4), 15)

    @pytest.mark.parametrize("L", [8, 16, 32, 64])
    def test_nyquist_residual(self, L):
        proto = synth_time_filter(design_coeffs(4), L)
        assert nyquist_residual(proto) < 1e-3


class TestSpreadingMatrix:
    def test_column0_placement(self):
        A = build_spreading(design_coeffs(4), 16)
        c = design_coeffs(4).c
        rows = [61, 62, 63, 0, 1, 2, 3]
        vals = [c[3], c[2], c[1], c[0], c[1], c[2], c[3]]
        for r, v in zip(rows, vals):
            assert A[r, 0] == pytest.approx(v)
        nz = np.flatnonzero(A[:, 0])
        assert sorted(nz) == sorted(rows)

    def test_nonzero_count_per_column(self):
        A = build_spreading(design_coeffs(4), 16)
        assert all(np.count_nonzero(A[:, m]) == 7 for m in range(16))

    def test_equal_column_norms(self):
        A = build_spreading(design_coeffs(4), 8)
        norms = np.linalg.norm(A, axis=0)
        assert np.allclose(norms, norms[0])

    def test_gram_diagonal(self):
        fc = design_coeffs(4)
        A = build_spreading(fc, 16)
        G = A.T @ A
        assert np.allclose(np.diag(G), fc.power_sum())

    def test_columns_are_circular_shifts(self):
        A = build_spreading(design_coeffs(4), 8)
        for m in range(1, 8):
            assert np.allclose(A[:, m], np.roll(A[:, 0], 4 * m))


class TestPhaseMatrix:
    def test_L4_diagonal(self):
        assert np.allclose(build_phase(4), [1, 1j, -1, -1j])

    def test_unit_modulus_and_inverse(self):
        phi = build_phase(16)
        assert np.allclose(np.abs(phi), 1.0)
        assert np.allclose(phi * np.conj(phi), 1.0)

    def test_adjacent_quarter_turn(self):
        phi = build_phase(8)
        assert np.allclose(phi[1:] / phi[:-1], 1j)

    def test_L1(self):
        assert np.allclose(build_phase(1), [1.0])
