"""Synthetic prosumer populations for model experiments at cohort scale.

Agents play a scenario with the threshold policy for their window
(unbounded = full remaining horizon); a noisy wrapper flips the binary
sell/hold decision with a per-day probability, selling everything when
flipped to sell. Per-agent random streams are derived from (seed, agent id)
so runs are reproducible regardless of agent order or parallel fan-out.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .fitting import ParticipantTrace, window_key
from .market import (
    GenerationDistribution,
    PriceDistribution,
    Scenario,
    default_generation,
    generate_scenario,
    default_price_distribution,
)
from .models import UNBOUNDED, CutoffSchedule, cutoff_schedule


@dataclass(frozen=True)
class AgentSpec:
    """Policy for one synthetic agent: window (None = unbounded) plus an
    optional per-day decision-flip probability."""

    agent_id: str
    window: int | None = UNBOUNDED
    noise: float = 0.0

    def __post_init__(self) -> None:
        if not self.agent_id:
            raise ValidationError("agent_id must be non-empty")
        if self.window is not UNBOUNDED and self.window < 1:
            raise ValidationError(f"agent {self.agent_id!r}: window must be >= 1")
        if not 0.0 <= self.noise < 0.5:
            raise ValidationError(f"agent {self.agent_id!r}: noise must lie in [0, 0.5)")


@dataclass(frozen=True)
class SimulationOutcome:
    traces: tuple[ParticipantTrace, ...]
    profits: dict[str, int]
    sell_day_counts: dict[str, int]

    def trace(self, agent_id: str) -> ParticipantTrace:
        for t in self.traces:
            if t.participant_id == agent_id:
                return t
        raise KeyError(agent_id)

    def summary_json(self) -> dict:
        return {
            "agents": [
                {
                    "agent_id": t.participant_id,
                    "profit_index": self.profits[t.participant_id],
                    "profit_dollars": self.profits[t.participant_id] / 10,
                    "sell_days": self.sell_day_counts[t.participant_id],
                }
                for t in self.traces
            ]
        }


def _agent_rng(seed: int, agent_id: str) -> np.random.Generator:
    digest = hashlib.sha256(agent_id.encode("utf-8")).digest()
    return np.random.default_rng(
        np.random.SeedSequence([seed, int.from_bytes(digest[:8], "big")])
    )


def _walk(
    agent: AgentSpec, scenario: Scenario, schedule: CutoffSchedule, seed: int
) -> ParticipantTrace:
    rng = _agent_rng(seed, agent.agent_id) if agent.noise > 0 else None
    horizon = scenario.horizon
    inventory = scenario.initial_units
    available: list[int] = []
    sold: list[int] = []
    for day in range(1, horizon + 1):
        inventory += scenario.generated(day)
        available.append(inventory)
        d_rem = horizon - day
        w = d_rem if agent.window is UNBOUNDED else min(d_rem, agent.window)
        sell = scenario.price(day) >= schedule.cutoffs[w]
        if rng is not None and rng.random() < agent.noise:
            sell = not sell
        if sell and inventory > 0:
            sold.append(inventory)
            inventory = 0
        else:
            sold.append(0)
    return ParticipantTrace(
        participant_id=agent.agent_id,
        offered_prices=scenario.offered_prices,
        units_available=tuple(available),
        units_sold=tuple(sold),
    )


def run_population(
    agents: Sequence[AgentSpec],
    scenario: Scenario,
    seed: int = 0,
    dist: PriceDistribution | None = None,
    schedule: CutoffSchedule | None = None,
) -> SimulationOutcome:
    """Walk every agent through the scenario with its own inventory."""
    if not agents:
        raise ValidationError("run_population needs at least one agent")
    ids = [a.agent_id for a in agents]
    if len(set(ids)) != len(ids):
        raise ValidationError("agent ids must be unique")
    if schedule is None:
        schedule = cutoff_schedule(dist or default_price_distribution(), max(scenario.horizon - 1, 0))
    traces = tuple(_walk(agent, scenario, schedule, seed) for agent in agents)
    profits = {
        t.participant_id: sum(n * p for n, p in zip(t.units_sold, t.offered_prices))
        for t in traces
    }
    sell_days = {t.participant_id: t.sell_days for t in traces}
    return SimulationOutcome(traces=traces, profits=profits, sell_day_counts=sell_days)


@dataclass
class SweepResult:
    windows: list[int | None]
    per_scenario_profits: dict[int | None, list[int]] = field(default_factory=dict)
    per_scenario_sell_days: dict[int | None, list[int]] = field(default_factory=dict)

    def rows(self) -> list[dict]:
        out = []
        for w in self.windows:
            profits = self.per_scenario_profits[w]
            sells = self.per_scenario_sell_days[w]
            out.append(
                {
                    "window": window_key(w),
                    "mean_profit_index": sum(profits) / len(profits),
                    "mean_sell_days": sum(sells) / len(sells),
                }
            )
        return out


def sweep_windows(
    windows: Sequence[int | None],
    n_scenarios: int,
    seed: int = 0,
    dist: PriceDistribution | None = None,
    gen: GenerationDistribution | None = None,
    horizon: int = 68,
    initial_units: int = 5,
) -> SweepResult:
    """Mean profit and sell-day count per window over freshly sampled
    scenarios (noiseless agents, shared scenarios across windows)."""
    if not windows:
        raise ValidationError("sweep_windows needs at least one window")
    dist = dist or default_price_distribution()
    gen = gen or default_generation()
    master = np.random.default_rng(seed)
    scenario_seeds = [int(s) for s in master.integers(0, 2**62, size=n_scenarios)]
    schedule = cutoff_schedule(dist, max(horizon - 1, 0))
    agents = [
        AgentSpec(agent_id=f"sweep-{i}-{window_key(w)}", window=w)
        for i, w in enumerate(windows)
    ]
    result = SweepResult(windows=list(windows))
    for w in windows:
        result.per_scenario_profits[w] = []
        result.per_scenario_sell_days[w] = []
    for s in scenario_seeds:
        scenario = generate_scenario(
            dist, gen, horizon=horizon, seed=s, initial_units=initial_units
        )
        outcome = run_population(agents, scenario, seed=seed, schedule=schedule)
        for agent, w in zip(agents, windows):
            result.per_scenario_profits[w].append(outcome.profits[agent.agent_id])
            result.per_scenario_sell_days[w].append(outcome.sell_day_counts[agent.agent_id])
    return result
