"""Streaming Bayesian threat monitoring over dynamic communication networks.

Per-entity semi-Markov threat-state filters, conjugate Gamma-Poisson edge
filters over an open weighted network, and composite attack indicators that
rank analyst-designated cells, plus a deterministic scenario simulator, a
replay CLI, and a JSON-over-HTTP service for the analyst console.
"""

__version__ = "0.1.0"

from .edges import (
    ChannelSpec,
    EdgeBelief,
    ObservationVector,
    UnmonitoredTick,
    adaptive_discount,
    evolve_prior,
    posterior_density_curve,
    posterior_update,
    predictive_log_likelihood,
    scale_raw,
    tail_probability,
)
from .indicators import (
    IndicatorReport,
    attack_indicators,
    cell_size_integrity,
    collective_progress,
    individual_threat,
    pairwise_cohesion,
    rank_cells,
)
from .network import (
    Cell,
    PopulationGraph,
    add_edge,
    apply_population_delta,
    cell_density,
    connected,
)
from .scenario import ScenarioConfig, SchemaError, load_scenario
from .states import (
    BetaDensity,
    GeometricHolding,
    SignalVector,
    StateBelief,
    TableHolding,
    TaskEmission,
    TaskModel,
    ThreatStateSpace,
    TotalEvidenceZero,
    TransitionModel,
    WeibullHolding,
    build_transition_operator,
    filter_tick,
    marginal_threat,
    predict_step,
    signal_likelihood,
    update_step,
)

__all__ = [name for name in dir() if not name.startswith("_")]
