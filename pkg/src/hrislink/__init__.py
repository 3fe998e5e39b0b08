"""Link-level simulator for semi-blind joint channel and symbol estimation
with a hybrid reflecting/sensing reconfigurable surface."""

from .bs_rx import ControlLinkPayload, bs_bals, bs_channel_only, bs_kronf, remove_ambiguity_bs
from .coding import CodingSet, build_coding, design_krstc, design_phase_shifts, design_tstc, gen_symbols, qam_constellation
from .harness import (
    MetricsRecord,
    TrialOutcome,
    combined_channel,
    nmse,
    parse_pair,
    records_to_csv,
    run_sweep,
    run_trial,
    ser,
)
from .hris_rx import hris_bals, hris_kronf, hris_krf, remove_ambiguity_hris
from .identifiability import (
    IdentReport,
    RankReport,
    check_identifiability,
    feasible_subframes,
    feedback_bits,
    flops_estimate,
    min_subframes,
    rank_bounds,
)
from .rx_common import (
    AmbiguityError,
    BalsOptions,
    EstimateReport,
    IdentifiabilityError,
    RankDeficiencyError,
)
from .scenario import ChannelRealization, ScenarioConfig, add_noise, draw_channels, link_gains, path_loss

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError",
    "BalsOptions",
    "ChannelRealization",
    "CodingSet",
    "ControlLinkPayload",
    "EstimateReport",
    "IdentReport",
    "IdentifiabilityError",
    "MetricsRecord",
    "RankDeficiencyError",
    "RankReport",
    "ScenarioConfig",
    "TrialOutcome",
    "add_noise",
    "bs_bals",
    "bs_channel_only",
    "bs_kronf",
    "build_coding",
    "check_identifiability",
    "combined_channel",
    "design_krstc",
    "design_phase_shifts",
    "design_tstc",
    "draw_channels",
    "feasible_subframes",
    "feedback_bits",
    "flops_estimate",
    "gen_symbols",
    "hris_bals",
    "hris_kronf",
    "hris_krf",
    "link_gains",
    "min_subframes",
    "nmse",
    "parse_pair",
    "path_loss",
    "qam_constellation",
    "rank_bounds",
    "records_to_csv",
    "remove_ambiguity_bs",
    "remove_ambiguity_hris",
    "run_sweep",
    "run_trial",
    "ser",
]
