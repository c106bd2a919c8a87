"""Empirical SIR/SINR measurement and the closed-form SINR benchmark.

Measurement removes a per-subcarrier real scalar gain (least squares over
the block) before computing error power, so pure scaling is not counted as
interference.  Reports carry raw power sums and are mergeable across
Monte Carlo realizations with order-independent results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .equalizer import mmse_weights
from .transceiver import DimensionError, FilterBankAssets

SIR_CEILING_DB = 120.0


@dataclass
class SirReport:
    """Per-(user, subcarrier) SIR/SINR statistics, mergeable across trials.

    ``sig_pow`` and ``err_pow`` are linear power sums over realizations;
    ``db_sum`` accumulates per-realization dB values for the alternate
    aggregation mode.
    """

    sig_pow: np.ndarray          # (M, L)
    err_pow: np.ndarray          # (M, L)
    db_sum: np.ndarray           # (M, L)
    n_trials: int
    n_symbols: int
    ceiling_db: float = SIR_CEILING_DB

    def merge(self, other: "SirReport") -> "SirReport":
        if self.sig_pow.shape != other.sig_pow.shape:
            raise DimensionError("cannot merge reports of different shapes")
        return SirReport(
            sig_pow=self.sig_pow + other.sig_pow,
            err_pow=self.err_pow + other.err_pow,
            db_sum=self.db_sum + other.db_sum,
            n_trials=self.n_trials + other.n_trials,
            n_symbols=self.n_symbols + other.n_symbols,
            ceiling_db=self.ceiling_db,
        )

    def values_db(self, mode: str = "power") -> np.ndarray:
        """(M, L) SIR in dB; ``mode`` is 'power' or 'db' averaging."""
        if mode == "power":
            with np.errstate(divide="ignore"):
                vals = 10.0 * np.log10(self.sig_pow / self.err_pow)
            return np.minimum(np.nan_to_num(vals, posinf=self.ceiling_db),
                              self.ceiling_db)
        if mode == "db":
            return self.db_sum / max(self.n_trials, 1)
        raise ValueError(f"unknown aggregation mode {mode!r}")

    def ceiling_hit(self) -> np.ndarray:
        """Boolean (M, L) mask of entries with zero measured error power."""
        return self.err_pow == 0


def measure_sir(sent: np.ndarray, estimated: np.ndarray, edge_symbols: int = 0,
                ceiling_db: float = SIR_CEILING_DB) -> SirReport:
    """SIR of one realization.

    sent, estimated: (M, L, Ns) real arrays (or (L, Ns) for one user).  The
    first and last ``edge_symbols`` symbols are excluded.  Per subcarrier,
    SIR = E[s^2] / E[(s_hat - a*s)^2] with ``a`` the scalar LS gain fit.
    """
    sent = np.asarray(sent, dtype=float)
    estimated = np.asarray(estimated, dtype=float)
    if sent.ndim == 2:
        sent = sent[None]
        estimated = estimated[None]
    if sent.shape != estimated.shape or sent.ndim != 3:
        raise DimensionError(
            f"sent/estimated shapes disagree: {sent.shape} vs {estimated.shape}")
    n_symbols = sent.shape[2]
    sl = slice(edge_symbols, n_symbols - edge_symbols)
    s = sent[:, :, sl]
    e = estimated[:, :, sl]
    denom = np.sum(s * s, axis=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(denom > 0, np.sum(e * s, axis=2) / np.where(denom > 0, denom, 1.0), 0.0)
    resid = e - a[:, :, None] * s
    sig = a ** 2 * np.mean(s * s, axis=2)
    err = np.mean(resid * resid, axis=2)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(np.where(err > 0, sig / np.where(err > 0, err, 1.0), np.inf))
    db = np.minimum(np.nan_to_num(db, posinf=ceiling_db), ceiling_db)
    return SirReport(sig_pow=sig, err_pow=err, db_sum=db,
                     n_trials=1, n_symbols=s.shape[2], ceiling_db=ceiling_db)


def aggregate(reports, mode: str = "power") -> SirReport:
    """Merge reports across realizations; ``mode`` only checks validity here.

    The returned report still exposes both modes via :meth:`SirReport.values_db`.
    """
    if mode not in ("power", "db"):
        raise ValueError(f"unknown aggregation mode {mode!r}")
    reports = list(reports)
    if not reports:
        raise ValueError("need at least one report to aggregate")
    out = reports[0]
    for r in reports[1:]:
        out = out.merge(r)
    return out


@dataclass(frozen=True)
class TheorySinr:
    """Closed-form MMSE output SINR with its signal / interference parts."""

    sinr: np.ndarray             # (M, L) linear
    p_signal: np.ndarray = field(repr=False)
    p_interference: np.ndarray = field(repr=False)

    def values_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.sinr)


def theoretical_sinr(H: np.ndarray, noise_var: float, assets: FilterBankAssets,
                     W: np.ndarray | None = None) -> TheorySinr:
    """Analytical per-(user, subcarrier) SINR of the MMSE-FSE receiver.

    H: (N, Nr, M) per-bin responses; W defaults to the MMSE weights computed
    from the same H and ``noise_var``.  Subcarrier m owns bins
    (m*K + k) mod N for k = -K+1 .. K-1; the per-bin terms are weighted by
    c_k^2 and summed incoherently:

      P_s = sum_k c_k^2 Re{w^H h_self}^2
      P_I = sum_k c_k^2 [ sum_{other users} Re{w^H h}^2
                          + sum_{all users} Im{w^H h}^2
                          + noise_var * ||w||^2 ]
    """
    H = np.asarray(H, dtype=complex)
    if W is None:
        W = mmse_weights(H, noise_var)
    n_bins, n_rx, n_users = H.shape
    if n_bins != assets.N:
        raise DimensionError(f"H has {n_bins} bins, assets expect {assets.N}")
    offsets = assets.coeffs.offsets
    c2 = assets.coeffs.two_sided ** 2
    idx = (np.arange(assets.L)[:, None] * assets.K + offsets[None, :]) % assets.N
    Hb = H[idx]                                  # (L, B, Nr, M)
    Wb = W[idx]
    cross = np.einsum("lbau,lbam->lbum", Wb.conj(), Hb)  # [sc, bin, user_w, user_h]
    re2 = cross.real ** 2
    im2 = cross.imag ** 2
    diag = np.arange(n_users)
    p_sig = np.einsum("b,lbu->ul", c2, re2[:, :, diag, diag])
    mui_re = np.einsum("b,lbum->ul", c2, re2) - p_sig
    mui_im = np.einsum("b,lbum->ul", c2, im2)
    w_norm2 = np.einsum("lbau,lbau->lbu", Wb.conj(), Wb).real
    p_noise = noise_var * np.einsum("b,lbu->ul", c2, w_norm2)
    p_int = mui_re + mui_im + p_noise
    with np.errstate(divide="ignore", invalid="ignore"):
        sinr = np.where(p_int > 0, p_sig / np.where(p_int > 0, p_int, 1.0), np.inf)
    return TheorySinr(sinr=sinr, p_signal=p_sig, p_interference=p_int)
