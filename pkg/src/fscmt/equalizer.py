"""Per-bin MMSE frequency-spreading equalizer and the single-tap baseline.

The FSE receiver combines all antennas independently at every DFT bin with
W_i = H_i (H_i^H H_i + sigma_v^2 I)^{-1}, then despreads each user's bins.
The polyphase-style baseline despreads each antenna first and combines the
per-antenna subcarrier outputs with the weight vector taken at the subcarrier
center bin only, i.e. one complex tap per subcarrier.
"""

from __future__ import annotations

import numpy as np

from .transceiver import DimensionError, FilterBankAssets, despread_frame


class EqualizerError(ValueError):
    """Raised when weight computation is ill-posed (e.g. singular bins)."""


def mmse_weights(H: np.ndarray, noise_var: float) -> np.ndarray:
    """MMSE combining weights for every bin.

    H: (N, Nr, M) per-bin channel matrices.  Returns W with the same shape;
    column m of W[i] is user m's combining vector at bin i.  ``noise_var``
    is the noise-to-signal power ratio (time-domain noise variance for
    unit-power received signals).  Solved as a Hermitian M x M system per
    bin instead of an explicit inverse.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 3:
        raise DimensionError(f"H must be (N, Nr, M), got shape {H.shape}")
    if noise_var < 0:
        raise EqualizerError("noise variance must be nonnegative")
    n_bins, n_rx, n_users = H.shape
    G = np.einsum("iam,iak->imk", H.conj(), H)
    G += noise_var * np.eye(n_users)[None, :, :]
    try:
        # X = (H^H H + s I)^{-1} H^H  =>  W = X^H
        X = np.linalg.solve(G, np.transpose(H.conj(), (0, 2, 1)))
    except np.linalg.LinAlgError:
        for i in range(n_bins):
            try:
                np.linalg.solve(G[i], H[i].conj().T)
            except np.linalg.LinAlgError:
                raise EqualizerError(
                    f"singular MMSE system at bin {i} (noise_var={noise_var}); "
                    "need Nr >= M with generic channels when noise_var = 0"
                ) from None
        raise
    return np.transpose(X.conj(), (0, 2, 1))


def equalize_bins(Y: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Apply r_hat_i = W_i^H r_tilde_i at every bin and symbol.

    Y: (N, Nr, Ns) per-bin antenna stacks; W: (N, Nr, M).
    Returns (N, M, Ns) equalized per-user bin values.
    """
    Y = np.asarray(Y, dtype=complex)
    W = np.asarray(W, dtype=complex)
    if Y.ndim != 3 or W.ndim != 3 or Y.shape[0] != W.shape[0] or Y.shape[1] != W.shape[1]:
        raise DimensionError(
            f"shape mismatch: Y {Y.shape} vs W {W.shape} (want (N,Nr,Ns) and (N,Nr,M))")
    return np.einsum("iam,ias->ims", W.conj(), Y)


def despread_users(R_hat: np.ndarray, assets: FilterBankAssets) -> np.ndarray:
    """Despread equalized bins to real symbol estimates.

    R_hat: (N, M, Ns) from :func:`equalize_bins`.  Returns (L, M, Ns) real
    estimates, scaled by the same 1/K round-trip gain as the ideal
    demodulator.
    """
    z = despread_frame(R_hat, assets)
    return z.real / assets.despread_gain


def ppn_single_tap_receive(Y: np.ndarray, H: np.ndarray, noise_var: float,
                           assets: FilterBankAssets) -> np.ndarray:
    """Single-tap-per-subcarrier baseline receiver.

    Each antenna's bin vector is despread without equalization (real part
    deferred), then the Nr per-antenna outputs of subcarrier m are combined
    with the MMSE vector computed from H at the center bin m*K.
    Returns (L, M, Ns) real estimates.
    """
    Y = np.asarray(Y, dtype=complex)
    if Y.ndim != 3 or Y.shape[0] != assets.N:
        raise DimensionError(f"Y must be ({assets.N}, Nr, Ns), got {Y.shape}")
    W = mmse_weights(H, noise_var)
    centers = (np.arange(assets.L) * assets.K) % assets.N
    Wc = W[centers]                              # (L, Nr, M)
    z = despread_frame(Y, assets)                # (L, Nr, Ns) complex
    est = np.einsum("lam,las->lms", Wc.conj(), z)
    return est.real / assets.despread_gain
