"""Integrated sub-6 GHz / mmW WLAN MAC: Markov-chain analysis and slotted simulation."""

from .chain import (
    MMW,
    ChainState,
    StationaryDistribution,
    build_transition_matrix,
    dcf_transmission_probability,
    h00,
    solve_stationary_numeric,
    stationary_distribution,
    theta_mmw,
    theta_uw,
)
from .equilibrium import Equilibrium, collision_closure, solve_fixed_point
from .errors import ConfigError, DomainError, NumericalError, SolverError, StateSpaceError
from .experiments import SweepRow, SweepSpec, ValidationReport, run_sweep, validate
from .params import DerivedTimings, ProtocolConfig, derive_timings, frame_time, load_config
from .simulator import SimConfig, SimMetrics, StaState, run, simulate
from .throughput import (
    ThroughputReport,
    expected_mmw_transmitters,
    expected_slot_time,
    max_mmw_stas,
    p_success,
    p_transmit,
    saturation_throughput,
)

__all__ = [
    "MMW",
    "ChainState",
    "ConfigError",
    "DerivedTimings",
    "DomainError",
    "Equilibrium",
    "NumericalError",
    "ProtocolConfig",
    "SimConfig",
    "SimMetrics",
    "SolverError",
    "StaState",
    "StateSpaceError",
    "StationaryDistribution",
    "SweepRow",
    "SweepSpec",
    "ThroughputReport",
    "ValidationReport",
    "build_transition_matrix",
    "collision_closure",
    "dcf_transmission_probability",
    "derive_timings",
    "expected_mmw_transmitters",
    "expected_slot_time",
    "frame_time",
    "h00",
    "load_config",
    "max_mmw_stas",
    "p_success",
    "p_transmit",
    "run",
    "run_sweep",
    "saturation_throughput",
    "simulate",
    "solve_fixed_point",
    "solve_stationary_numeric",
    "stationary_distribution",
    "theta_mmw",
    "theta_uw",
    "validate",
]
