"""Relay-selection security game: solver, channel/throughput models, simulator."""

__version__ = "0.1.0"

from .errors import (
    DegenerateGameError,
    DimensionError,
    InfeasibleEquilibriumError,
    NoFeasibleMessageCountError,
    RelayGameError,
    ValidationError,
)
from .game import (
    EquilibriumSolution,
    GameParams,
    MixedStrategy,
    RelayProfile,
    TargetPartition,
    VerificationReport,
    attacker_total_utility,
    cell_utilities,
    combined_asset,
    diagnostic_attack_strategy,
    partition_targets,
    per_relay_utility,
    solve_equilibrium,
    source_total_utility,
    verify_equilibrium,
)
from .channel import (
    ChannelDraw,
    LinkModel,
    OutageEstimate,
    ber_direct,
    ber_diversity,
    ber_end_to_end,
    cooperative_outage_event,
    mutual_info_direct,
    mutual_info_mrc,
    mutual_info_source_relay,
    outage_closed_form,
    outage_monte_carlo,
    outage_sr_link,
    packet_success,
)
from .throughput import (
    ArqMode,
    SecurityRequirement,
    ThroughputConfig,
    compromising_probability,
    min_auth_probability,
    optimize_messages,
    payload_auth,
    payload_noauth,
    throughput_gbn,
    throughput_general,
    throughput_sr,
    window_size,
)
from .sim import (
    AttackerMode,
    CompromisePoint,
    SimConfig,
    SimReport,
    SourceMode,
    draw_attacker_target,
    estimate_compromise_curve,
    policy_auth_probs,
    run_simulation,
)
from .scenario import Scenario, load_scenario, presets, save_scenario, scenario_hash

__all__ = [name for name in dir() if not name.startswith("_")]
