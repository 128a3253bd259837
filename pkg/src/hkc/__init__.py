"""Event-driven simulator and Monte Carlo verification harness for
bounded-confidence opinion averaging on finite connected graphs."""

from .analysis import (
    BoundInputs,
    LimitGraph,
    check_event_a,
    classify_consensus,
    generator_drift,
    limit_graph,
    theoretical_bound,
    total_disagreement,
)
from .dynamics import (
    CompatibilityView,
    Configuration,
    ModelParams,
    StoppingSpec,
    TrialEngine,
    TrialOutcome,
    apply_update,
    compatibility,
    default_stopping,
    gillespie_step,
    local_average,
    run_trial,
    stop_reached,
)
from .graph import SocialGraph, generate, graph_distance, parse_edge_list, to_edge_list_text
from .montecarlo import (
    ExperimentSpec,
    MonteCarloReport,
    run_estimate,
    run_single_trial,
    trial_outcomes,
    wilson_interval,
)
from .space import (
    Ball,
    Box,
    Norm,
    OpinionSpace,
    PointMasses,
    UniformShape,
    center_and_radius,
    distance,
    expected_center_distance,
    sample_initial,
)

__version__ = "0.1.0"
