"""RSSI-feedback energy beamforming: channel model, training, optimization,
scheduling, and oracle-validated Monte Carlo experiments."""

from .angles import TAU, circular_distance, normalize_angle
from .channel import (
    ChannelVector,
    CombinedParams,
    RssiParams,
    combine_pair,
    derive_params,
    rssi_quadratic_form,
    rssi_single_beam,
    rssi_two_beam,
    sample_channel,
)
from .harness import (
    ExperimentConfig,
    Fig1Result,
    Fig2Result,
    GridOptimum,
    TrialRecord,
    grid_oracle,
    grid_tolerance,
    run_fig1_experiment,
    run_fig2_experiment,
)
from .optimize import (
    ArcKind,
    ArcSet,
    CircularArc,
    DecisionLevel,
    EnergyConstraints,
    TransmitDecision,
    acute_condition,
    constrained_optimum,
    feasible_arc,
    intersect_arcs,
    single_constraint_optimum,
    transmit_decision,
    unconstrained_optimum,
)
from .scheduler import ErEntry, ErPool, ScheduleRound, run_schedule, select_pair
from .training import (
    Codebook,
    EstimateSet,
    PhaseUnobservableError,
    RssiTrace,
    estimate_all,
    estimate_alpha_prime,
    estimate_gamma_prime,
    estimate_phi,
    make_codebook,
    simulate_training,
)

__version__ = "0.1.0"

__all__ = [
    "TAU",
    "circular_distance",
    "normalize_angle",
    "ChannelVector",
    "RssiParams",
    "CombinedParams",
    "derive_params",
    "rssi_two_beam",
    "rssi_single_beam",
    "rssi_quadratic_form",
    "combine_pair",
    "sample_channel",
    "Codebook",
    "RssiTrace",
    "EstimateSet",
    "PhaseUnobservableError",
    "make_codebook",
    "simulate_training",
    "estimate_phi",
    "estimate_alpha_prime",
    "estimate_gamma_prime",
    "estimate_all",
    "ArcKind",
    "CircularArc",
    "ArcSet",
    "EnergyConstraints",
    "DecisionLevel",
    "TransmitDecision",
    "unconstrained_optimum",
    "acute_condition",
    "feasible_arc",
    "intersect_arcs",
    "constrained_optimum",
    "single_constraint_optimum",
    "transmit_decision",
    "ErEntry",
    "ErPool",
    "ScheduleRound",
    "select_pair",
    "run_schedule",
    "ExperimentConfig",
    "TrialRecord",
    "GridOptimum",
    "Fig1Result",
    "Fig2Result",
    "grid_oracle",
    "grid_tolerance",
    "run_fig1_experiment",
    "run_fig2_experiment",
    "__version__",
]
