"""Command-line entry point: run scenarios, validate configs, selftest, plot."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fscmt",
        description="Frequency-spread CMT massive MIMO link-level simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--scenario", help="override the scenario named in the config")
    p_run.add_argument("--seed", type=int, help="override the master seed")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--trials", type=int, help="override n_realizations")
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument("--figures", action="store_true",
                       help="also render the scenario figure next to the CSV")

    p_val = sub.add_parser("validate", help="check a config file")
    p_val.add_argument("--config", required=True)

    sub.add_parser("selftest", help="run the built-in oracle checks")

    p_plot = sub.add_parser("plot", help="render a scenario CSV to a figure")
    p_plot.add_argument("--csv", required=True)
    p_plot.add_argument("--scenario", default="")
    p_plot.add_argument("--out", required=True)
    p_plot.add_argument("--raster", action="store_true",
                        help="write a raster (PNG) image instead of vector")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "selftest":
            return selftest()
        if args.command == "plot":
            return _cmd_plot(args)
    except Exception as exc:  # surface a one-line diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def _cmd_run(args) -> int:
    from . import plotkit
    from .runner import load_config, resolve_threads, run_scenario

    cfg = load_config(args.config)
    if args.scenario:
        cfg = replace(cfg, scenario=args.scenario)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.trials is not None:
        cfg = replace(cfg, n_realizations=args.trials)
    cfg.validate()
    threads = resolve_threads(args.threads)
    csv_path = run_scenario(cfg, args.out, threads=threads)
    print(csv_path)
    print(Path(args.out) / f"{cfg.scenario}_meta.txt")
    if args.figures:
        fig_path = plotkit.plot_scenario(
            csv_path, scenario=cfg.scenario,
            out_path=Path(args.out) / f"{cfg.scenario}.svg")
        print(fig_path)
    return 0


def _cmd_validate(args) -> int:
    from .runner import load_config

    load_config(args.config)
    print("config ok")
    return 0


def _cmd_plot(args) -> int:
    from . import plotkit

    out = plotkit.plot_scenario(args.csv, scenario=args.scenario,
                                out_path=args.out, raster=args.raster)
    print(out)
    return 0


def selftest() -> int:
    """Fast oracle checks of the core chain; prints one line per check."""
    from .channel import apply_channel, draw_channels, flat_profile, sui4_profile
    from .equalizer import (despread_users, equalize_bins, mmse_weights,
                            ppn_single_tap_receive)
    from .filterbank import design_coeffs, nyquist_residual, synth_time_filter
    from .metrics import measure_sir
    from .transceiver import analyze_windows, make_assets, transmit_frame

    failures = 0

    def check(name, ok, detail=""):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
        if not ok:
            failures += 1

    # coefficient pairing
    for K in (2, 3, 4):
        c = design_coeffs(K).c
        worst = max(abs(c[k] ** 2 + c[K - k] ** 2 - 1.0) for k in range(1, K))
        check(f"coeff pairing K={K}", worst < 1e-6, f"max dev {worst:.2e}")

    # Nyquist residual of the prototype
    proto = synth_time_filter(design_coeffs(4), 16)
    res = nyquist_residual(proto)
    check("nyquist residual K=4 L=16", res < 1e-3, f"{res:.2e}")

    # back-to-back reconstruction
    rng = np.random.default_rng(0)
    assets = make_assets(4, 16)
    S = rng.choice([-1.0, 1.0], size=(16, 64))
    x = transmit_frame(S, assets)
    Y = analyze_windows(x, assets, 64)
    from .transceiver import despread_frame
    est = despread_frame(Y, assets).real / assets.despread_gain
    rep = measure_sir(S, est, edge_symbols=3)
    sir = rep.values_db("power").min()
    check("reconstruction SIR >= 55 dB", sir >= 55.0, f"min {sir:.1f} dB")

    # MMSE weight identity vs brute-force solve
    H = (rng.standard_normal((64, 8, 3)) + 1j * rng.standard_normal((64, 8, 3)))
    W = mmse_weights(H, 0.5)
    worst = 0.0
    for i in range(64):
        ref = H[i] @ np.linalg.inv(H[i].conj().T @ H[i] + 0.5 * np.eye(3))
        worst = max(worst, np.linalg.norm(W[i] - ref) / np.linalg.norm(ref))
    check("mmse weight oracle", worst < 1e-9, f"max rel residual {worst:.2e}")

    # flat channel: FSE and PPN agree
    real = draw_channels(flat_profile(), 1, 4, 2.8e6, assets.N, rng)
    rx = apply_channel(x[None, :], real, 0.0, rng)
    Yr = analyze_windows(rx, assets, 64)
    Wr = mmse_weights(real.H, 0.0)
    est_f = despread_users(equalize_bins(Yr, Wr), assets)
    est_p = ppn_single_tap_receive(Yr, real.H, 0.0, assets)
    gap = np.max(np.abs(est_f - est_p))
    check("flat-channel FSE == PPN", gap < 1e-9, f"max abs diff {gap:.2e}")

    # SUI-4 profile sanity
    prof = sui4_profile()
    check("sui4 profile", prof.tap_delays_s.size == 3
          and abs(prof.normalized_powers().sum() - 1.0) < 1e-12)

    print("selftest:", "ok" if failures == 0 else f"{failures} failure(s)")
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
