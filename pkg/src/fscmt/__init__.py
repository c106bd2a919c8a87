"""Frequency-spread CMT link-level simulator for massive MIMO uplinks."""

__version__ = "0.1.0"

from .filterbank import (
    FilterDesignError,
    FreqCoeffs,
    PrototypeFilter,
    build_phase,
    build_spreading,
    design_coeffs,
    nyquist_residual,
    synth_time_filter,
)
from .transceiver import (
    DimensionError,
    FilterBankAssets,
    analyze_windows,
    demodulate_ideal,
    despread_frame,
    make_assets,
    modulate_symbol,
    overlap_add,
    signal_length,
    transmit_frame,
)
from .channel import (
    ChannelError,
    ChannelProfile,
    ChannelRealization,
    apply_channel,
    draw_channels,
    flat_profile,
    profile_by_name,
    sui4_profile,
)
from .equalizer import (
    EqualizerError,
    despread_users,
    equalize_bins,
    mmse_weights,
    ppn_single_tap_receive,
)
from .metrics import (
    SirReport,
    TheorySinr,
    aggregate,
    measure_sir,
    theoretical_sinr,
)
from .runner import (
    ConfigError,
    ScenarioConfig,
    load_config,
    run_fse_vs_ppn,
    run_multiuser,
    run_scenario,
    run_self_eq,
)
