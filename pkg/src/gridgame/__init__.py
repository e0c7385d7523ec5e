"""Sell/hold decision models for prosumers in a simulated daily energy
market, plus trace fitting, synthetic populations, a CLI and a playable
grid-game session service."""

from .errors import SessionConflict, SessionNotFound, UndefinedFitError, ValidationError
from .fitting import (
    COUNTERFACTUAL_DAILY,
    MD,
    PD,
    SELF_CONSISTENT,
    FitResult,
    ParticipantTrace,
    WindowFitter,
    candidate_windows,
    cohort_report,
    fit_cohort,
    fit_window,
    mean_deviation,
    parse_traces_csv,
    proportional_deviation,
    read_traces_csv,
    traces_to_csv,
    write_traces_csv,
)
from .market import (
    GenerationDistribution,
    PriceDistribution,
    Scenario,
    at_least_once_probabilities,
    default_generation,
    generate_scenario,
    default_price_distribution,
)
from .models import (
    UNBOUNDED,
    CutoffSchedule,
    DecisionContext,
    PredictedPlay,
    cutoff_schedule,
    decide_series,
    expected_utility,
    hold_value,
    optimal_action,
)
from .simulate import AgentSpec, SimulationOutcome, run_population, sweep_windows

__all__ = [
    "AgentSpec",
    "COUNTERFACTUAL_DAILY",
    "CutoffSchedule",
    "DecisionContext",
    "FitResult",
    "GenerationDistribution",
    "MD",
    "PD",
    "ParticipantTrace",
    "PredictedPlay",
    "PriceDistribution",
    "Scenario",
    "SELF_CONSISTENT",
    "SessionConflict",
    "SessionNotFound",
    "SimulationOutcome",
    "UNBOUNDED",
    "UndefinedFitError",
    "ValidationError",
    "WindowFitter",
    "at_least_once_probabilities",
    "candidate_windows",
    "cohort_report",
    "cutoff_schedule",
    "decide_series",
    "default_generation",
    "expected_utility",
    "fit_cohort",
    "fit_window",
    "generate_scenario",
    "hold_value",
    "mean_deviation",
    "optimal_action",
    "parse_traces_csv",
    "proportional_deviation",
    "read_traces_csv",
    "run_population",
    "sweep_windows",
    "default_price_distribution",
    "traces_to_csv",
    "write_traces_csv",
]

__version__ = "0.1.0"
