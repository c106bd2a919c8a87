"""Scenario orchestration: config parsing, seeded Monte Carlo, CSV output.

Each realization owns an RNG derived from the master seed and its trial
index, and trial results are reduced in trial order, so output is identical
for any worker count.  Results go to one CSV per scenario plus a plain-text
key-value metadata sidecar.
"""

from __future__ import annotations

import configparser
import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .channel import ChannelProfile, apply_channel, draw_channels, profile_by_name
from .equalizer import equalize_bins, despread_users, mmse_weights, ppn_single_tap_receive
from .metrics import measure_sir, theoretical_sinr
from .transceiver import analyze_windows, make_assets, transmit_frame

SCENARIOS = ("self_eq_sir", "fse_vs_ppn", "multiuser_theory_vs_sim", "custom")
CSV_FIELDS = ("scenario", "user", "subcarrier", "Nr", "L", "K", "SNR_in_db",
              "metric", "value_db", "n_trials", "seed")
DEFAULT_NR_LIST = (1, 2, 4, 8, 16, 32, 64, 128)


class ConfigError(ValueError):
    """Raised when a scenario configuration is missing or inconsistent."""


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    L_list: tuple = (16,)
    K: int = 4
    bandwidth_hz: float = 2.8e6
    n_symbols: int = 64
    n_users: int = 1
    Nr_list: tuple = DEFAULT_NR_LIST
    snr_in_db: float | None = None       # None means noise free
    n_realizations: int = 200
    master_seed: int = 1
    pam_order: int = 2
    profile: ChannelProfile = None
    aggregation_mode: str = "power"
    time_phase: bool = True

    @property
    def noise_free(self) -> bool:
        return self.snr_in_db is None

    @property
    def noise_var(self) -> float:
        """Time-domain noise variance for unit average received power."""
        if self.noise_free:
            return 0.0
        return 10.0 ** (-self.snr_in_db / 10.0)

    @property
    def sample_rate(self) -> float:
        return self.bandwidth_hz

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario.name: unknown scenario {self.scenario!r}")
        for L in self.L_list:
            if L < 2 or L % 2 != 0:
                raise ConfigError(f"waveform.L: L must be even and >= 2, got {L}")
        if self.K not in (2, 3, 4):
            raise ConfigError(f"waveform.K: supported K are 2, 3, 4; got {self.K}")
        if self.n_symbols <= 2 * (self.K - 1):
            raise ConfigError("waveform.n_symbols: frame too short to exclude edge symbols")
        if self.bandwidth_hz <= 0:
            raise ConfigError("waveform.bandwidth_hz: must be positive")
        if self.pam_order not in (2, 4):
            raise ConfigError(f"waveform.pam: supported orders are 2 and 4, got {self.pam_order}")
        if self.n_users < 1:
            raise ConfigError("run.users: must be positive")
        if not self.Nr_list or any(nr < 1 for nr in self.Nr_list):
            raise ConfigError("run.nr_list: all antenna counts must be positive")
        if self.n_realizations < 1:
            raise ConfigError("run.n_realizations: must be positive")
        if self.aggregation_mode not in ("power", "db"):
            raise ConfigError(f"run.aggregation_mode: unknown mode {self.aggregation_mode!r}")
        if self.profile is None:
            raise ConfigError("channel: missing profile")
        if self.scenario == "self_eq_sir":
            if self.n_users != 1:
                raise ConfigError("run.users: self_eq_sir requires a single user")
            if not self.noise_free:
                raise ConfigError("noise: self_eq_sir requires noise_free = true")
        if self.scenario == "fse_vs_ppn":
            if self.n_users != 1:
                raise ConfigError("run.users: fse_vs_ppn requires a single user")
            if len(self.L_list) != 1:
                raise ConfigError("waveform.L: fse_vs_ppn uses a single L")
        if self.scenario == "multiuser_theory_vs_sim":
            if self.noise_free:
                raise ConfigError("noise.snr_in_db: multiuser scenario needs a finite SNR")
            if len(self.L_list) != 1:
                raise ConfigError("waveform.L: multiuser scenario uses a single L")


def _parse_list(raw: str, cast):
    return tuple(cast(tok) for tok in raw.replace(",", " ").split())


def load_config(path) -> ScenarioConfig:
    """Read a ScenarioConfig from an INI-style key-value file."""
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    try:
        scenario = cp.get("scenario", "name")
    except (configparser.NoSectionError, configparser.NoOptionError):
        raise ConfigError("scenario.name: missing") from None

    wf = cp["waveform"] if cp.has_section("waveform") else {}
    if "l_list" in wf:
        L_list = _parse_list(wf["l_list"], int)
    elif "l" in wf:
        L_list = (int(wf["l"]),)
    else:
        L_list = (16,)

    ch = cp["channel"] if cp.has_section("channel") else {}
    if "delays_us" in ch or "powers_db" in ch:
        if "delays_us" not in ch or "powers_db" not in ch:
            raise ConfigError("channel: delays_us and powers_db must both be given")
        profile = ChannelProfile(
            name=ch.get("name", "custom"),
            tap_delays_s=np.array(_parse_list(ch["delays_us"], float)) * 1e-6,
            tap_powers_db=np.array(_parse_list(ch["powers_db"], float)),
        )
    else:
        profile = profile_by_name(ch.get("profile", "sui4"))

    nz = cp["noise"] if cp.has_section("noise") else {}
    noise_free = nz.get("noise_free", "false").strip().lower() in ("1", "true", "yes", "on")
    snr = None if noise_free else (float(nz["snr_in_db"]) if "snr_in_db" in nz else None)

    run = cp["run"] if cp.has_section("run") else {}
    cfg = ScenarioConfig(
        scenario=scenario,
        L_list=L_list,
        K=int(wf.get("k", 4)),
        bandwidth_hz=float(wf.get("bandwidth_hz", 2.8e6)),
        n_symbols=int(wf.get("n_symbols", 64)),
        n_users=int(run.get("users", 1)),
        Nr_list=_parse_list(run["nr_list"], int) if "nr_list" in run else DEFAULT_NR_LIST,
        snr_in_db=snr,
        n_realizations=int(run.get("n_realizations", 200)),
        master_seed=int(run.get("master_seed", 1)),
        pam_order=int(wf.get("pam", 2)),
        profile=profile,
        aggregation_mode=run.get("aggregation_mode", "power"),
        time_phase=run.get("time_phase", "on").strip().lower() not in ("0", "false", "off"),
    )
    cfg.validate()
    return cfg


def resolve_threads(requested: int | None) -> int:
    """FSE_SIM_THREADS overrides the requested worker count."""
    env = os.environ.get("FSE_SIM_THREADS")
    if env:
        return max(1, int(env))
    return max(1, requested or 1)


# ---------------------------------------------------------------------------
# per-trial simulation
# ---------------------------------------------------------------------------

def _pam_symbols(order: int, shape, rng: np.random.Generator) -> np.ndarray:
    """Unit-power PAM symbols (order 2 or 4)."""
    levels = np.arange(-(order - 1), order, 2, dtype=float)
    levels /= np.sqrt(np.mean(levels ** 2))
    return rng.choice(levels, size=shape)

def _simulate_once(cfg: ScenarioConfig, L: int, seed_seq, want_ppn: bool,
                   want_theory: bool):
    """One channel realization: returns per-Nr metric components.

    Channels and noise are drawn once at max(Nr_list) and antenna-subset for
    smaller Nr, so all receivers and antenna counts see paired realizations.
    """
    rng = np.random.default_rng(seed_seq)
    assets = make_assets(cfg.K, L, time_phase=cfg.time_phase)
    M = cfg.n_users
    nr_max = max(cfg.Nr_list)
    S = _pam_symbols(cfg.pam_order, (M, L, cfg.n_symbols), rng)
    scale = assets.tx_power_scale
    signals = np.stack([transmit_frame(S[u], assets) for u in range(M)]) * scale
    real = draw_channels(cfg.profile, M, nr_max, cfg.sample_rate, assets.N, rng)
    rx = apply_channel(signals, real, cfg.noise_var, rng)
    Y_all = analyze_windows(rx, assets, cfg.n_symbols)       # (N, nr_max, Ns)
    edge = cfg.K - 1
    out = {}
    for nr in cfg.Nr_list:
        sub = real.subset_antennas(nr)
        Y = Y_all[:, :nr, :]
        W = mmse_weights(sub.H, cfg.noise_var)
        est = despread_users(equalize_bins(Y, W), assets) / scale   # (L, M, Ns)
        rep = measure_sir(S, np.transpose(est, (1, 0, 2)), edge_symbols=edge)
        entry = {"fse": rep}
        if want_ppn:
            est_p = ppn_single_tap_receive(Y, sub.H, cfg.noise_var, assets) / scale
            entry["ppn"] = measure_sir(S, np.transpose(est_p, (1, 0, 2)),
                                       edge_symbols=edge)
        if want_theory:
            entry["theory"] = theoretical_sinr(sub.H, cfg.noise_var, assets, W=W).sinr
        out[nr] = entry
    return out


def _trial_worker(cfg: ScenarioConfig, want_ppn: bool, want_theory: bool, job):
    L, seed_seq = job
    return _simulate_once(cfg, L, seed_seq, want_ppn, want_theory)


def _run_trials(cfg: ScenarioConfig, threads: int, want_ppn: bool = False,
                want_theory: bool = False):
    """Run all (L, realization) jobs; reduce in deterministic job order.

    Returns {(L, Nr): {"fse": SirReport, "ppn": SirReport, "theory": (sum, n)}}.
    """
    ss = np.random.SeedSequence(cfg.master_seed)
    children = ss.spawn(len(cfg.L_list) * cfg.n_realizations)
    jobs = []
    i = 0
    for L in cfg.L_list:
        for _ in range(cfg.n_realizations):
            jobs.append((L, children[i]))
            i += 1
    worker = partial(_trial_worker, cfg, want_ppn, want_theory)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        results = [worker(job) for job in jobs]
    acc = {}
    for (L, _), res in zip(jobs, results):
        for nr, entry in res.items():
            key = (L, nr)
            slot = acc.setdefault(key, {})
            for name, val in entry.items():
                if name == "theory":
                    prev = slot.get(name)
                    slot[name] = (val, 1) if prev is None else (prev[0] + val, prev[1] + 1)
                else:
                    slot[name] = val if name not in slot else slot[name].merge(val)
    return acc


# ---------------------------------------------------------------------------
# scenario drivers and output
# ---------------------------------------------------------------------------

@dataclass
class RunRecord:
    """Everything needed to rerun a scenario bit-for-bit."""

    config: ScenarioConfig
    csv_path: Path
    wall_time_s: float
    round_trip_gain: float
    phase_convention: str

    def write(self, path: Path) -> None:
        cfg = self.config
        lines = [
            f"code_version = {__version__}",
            f"scenario = {cfg.scenario}",
            f"L_list = {' '.join(str(v) for v in cfg.L_list)}",
            f"K = {cfg.K}",
            f"bandwidth_hz = {cfg.bandwidth_hz}",
            f"n_symbols = {cfg.n_symbols}",
            f"pam = {cfg.pam_order}",
            f"users = {cfg.n_users}",
            f"nr_list = {' '.join(str(v) for v in cfg.Nr_list)}",
            f"snr_in_db = {'noise_free' if cfg.noise_free else cfg.snr_in_db}",
            f"n_realizations = {cfg.n_realizations}",
            f"master_seed = {cfg.master_seed}",
            f"channel_profile = {cfg.profile.name}",
            f"channel_delays_us = {' '.join(str(d * 1e6) for d in cfg.profile.tap_delays_s)}",
            f"channel_powers_db = {' '.join(str(p) for p in cfg.profile.tap_powers_db)}",
            f"aggregation_mode = {cfg.aggregation_mode}",
            f"phase_convention = {self.phase_convention}",
            f"round_trip_gain = {self.round_trip_gain}",
            f"csv = {self.csv_path}",
            f"wall_time_s = {self.wall_time_s:.3f}",
        ]
        path.write_text("\n".join(lines) + "\n")


def _write_csv(path: Path, cfg: ScenarioConfig, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for row in rows:
            writer.writerow(row)


def _metric_rows(cfg: ScenarioConfig, acc, metrics_by_name) -> list:
    """Flatten accumulated results into deterministic CSV rows."""
    rows = []
    snr_str = "inf" if cfg.noise_free else f"{cfg.snr_in_db:g}"
    for (L, nr) in sorted(acc):
        slot = acc[(L, nr)]
        for metric_name, csv_name in metrics_by_name:
            if metric_name == "theory":
                total, count = slot["theory"]
                vals = 10.0 * np.log10(total / count)   # (M, L)
                n_trials = count
            else:
                rep = slot[metric_name]
                vals = rep.values_db(cfg.aggregation_mode)
                n_trials = rep.n_trials
            for user in range(vals.shape[0]):
                for sc in range(vals.shape[1]):
                    rows.append((cfg.scenario, user, sc, nr, L, cfg.K, snr_str,
                                 csv_name, f"{vals[user, sc]:.6f}", n_trials,
                                 cfg.master_seed))
    return rows


def run_scenario(cfg: ScenarioConfig, out_dir, threads: int = 1) -> Path:
    """Run one scenario end to end; returns the CSV path."""
    cfg.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    want_ppn = cfg.scenario == "fse_vs_ppn"
    want_theory = cfg.scenario == "multiuser_theory_vs_sim"
    acc = _run_trials(cfg, threads, want_ppn=want_ppn, want_theory=want_theory)
    if cfg.scenario == "fse_vs_ppn":
        metrics = [("fse", "sir_fse"), ("ppn", "sir_ppn")]
    elif cfg.scenario == "multiuser_theory_vs_sim":
        metrics = [("fse", "sinr_sim"), ("theory", "sinr_theory")]
    else:
        metrics = [("fse", "sir_fse")]
    rows = _metric_rows(cfg, acc, metrics)
    csv_path = out_dir / f"{cfg.scenario}.csv"
    _write_csv(csv_path, cfg, rows)
    assets = make_assets(cfg.K, cfg.L_list[0], time_phase=cfg.time_phase)
    record = RunRecord(
        config=cfg,
        csv_path=csv_path,
        wall_time_s=time.perf_counter() - t0,
        round_trip_gain=1.0 / assets.despread_gain,
        phase_convention="j^n" if cfg.time_phase else "none",
    )
    record.write(out_dir / f"{cfg.scenario}_meta.txt")
    return csv_path


def run_self_eq(cfg: ScenarioConfig, out_dir, threads: int = 1) -> Path:
    if cfg.scenario != "self_eq_sir":
        cfg = replace(cfg, scenario="self_eq_sir")
    return run_scenario(cfg, out_dir, threads)


def run_fse_vs_ppn(cfg: ScenarioConfig, out_dir, threads: int = 1) -> Path:
    if cfg.scenario != "fse_vs_ppn":
        cfg = replace(cfg, scenario="fse_vs_ppn")
    return run_scenario(cfg, out_dir, threads)


def run_multiuser(cfg: ScenarioConfig, out_dir, threads: int = 1) -> Path:
    if cfg.scenario != "multiuser_theory_vs_sim":
        cfg = replace(cfg, scenario="multiuser_theory_vs_sim")
    return run_scenario(cfg, out_dir, threads)
