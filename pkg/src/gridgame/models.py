"""Sell/hold decision models over the daily price distribution.

Both models compare today's offered price against the expected gain from
holding a unit. The hold value with k future opportunity days, fh[k], obeys

    fh[0] = 0
    fh[k] = sum_{j >= c[k-1]} p_j * j  +  fh[k-1] * sum_{j < c[k-1]} p_j

where c[k] is the cutoff price: the smallest integer price strictly greater
than fh[k] (c[0] = 1, the forced sale when no days remain). The unbounded
model indexes the schedule by days remaining; the bounded variant caps the
index at the decision maker's time window t, i.e. w = min(days_remaining, t).
Both sell everything when the offered price reaches the cutoff and nothing
otherwise (the optimum is never an interior quantity).

Hold values are computed in exact rational arithmetic so that a cutoff can
never flip on a floating-point whisker at an integer boundary; schedules
deeper than `_EXACT_MAX_INDEX` fall back to floats with a 1e-9 guard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError
from .market import PriceDistribution, Scenario

DAYS_REMAINING = "days-remaining"
WINDOW = "window"

_EXACT_MAX_INDEX = 4096
_FLOAT_GUARD = 1e-9

UNBOUNDED = None  # window value meaning "use the full remaining horizon"


@dataclass(frozen=True)
class CutoffSchedule:
    """Cutoff prices and hold values, indexed by days remaining (unbounded
    model) or by window size (bounded model); the recursion is the same."""

    kind: str
    cutoffs: tuple[int, ...]
    hold_values: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.kind not in (DAYS_REMAINING, WINDOW):
            raise ValidationError(f"unknown schedule kind {self.kind!r}")
        if not self.cutoffs or self.cutoffs[0] != 1 or self.hold_values[0] != 0.0:
            raise ValidationError("schedule must start with cutoff 1 / hold value 0 at index 0")
        if len(self.cutoffs) != len(self.hold_values):
            raise ValidationError("cutoffs and hold_values must have equal length")
        if any(b < a for a, b in zip(self.cutoffs, self.cutoffs[1:])):
            raise ValidationError("cutoffs must be non-decreasing in the index")

    @property
    def max_index(self) -> int:
        return len(self.cutoffs) - 1

    def to_csv(self) -> str:
        lines = ["index,cutoff,hold_value"]
        for k, (c, f) in enumerate(zip(self.cutoffs, self.hold_values)):
            lines.append(f"{k},{c},{f!r}")
        return "\n".join(lines) + "\n"


def _schedule_exact(probs: tuple[Fraction, ...], max_index: int) -> tuple[list[int], list[Fraction]]:
    levels = range(1, len(probs) + 1)
    cutoffs = [1]
    holds = [Fraction(0)]
    for _ in range(max_index):
        c = cutoffs[-1]
        gain = sum((p * j for j, p in zip(levels, probs) if j >= c), Fraction(0))
        stay = sum((p for j, p in zip(levels, probs) if j < c), Fraction(0))
        fh = gain + holds[-1] * stay
        holds.append(fh)
        cutoffs.append(math.floor(fh) + 1)
    return cutoffs, holds


def _schedule_float(probs: tuple[float, ...], max_index: int) -> tuple[list[int], list[float]]:
    levels = range(1, len(probs) + 1)
    cutoffs = [1]
    holds = [0.0]
    for _ in range(max_index):
        c = cutoffs[-1]
        gain = sum(p * j for j, p in zip(levels, probs) if j >= c)
        stay = sum(p for j, p in zip(levels, probs) if j < c)
        fh = gain + holds[-1] * stay
        holds.append(fh)
        # strictly-greater with a tolerance: a hold value within the guard of
        # an integer counts as equal to it, and equality means hold
        nearest = round(fh)
        if abs(fh - nearest) <= _FLOAT_GUARD:
            cutoffs.append(int(nearest) + 1)
        else:
            cutoffs.append(math.floor(fh) + 1)
    return cutoffs, holds


def cutoff_schedule(
    dist: PriceDistribution, max_index: int, kind: str = DAYS_REMAINING
) -> CutoffSchedule:
    """Cutoff prices and hold values for indices 0..max_index.

    Index k is "k future opportunity days": k days remaining for the
    unbounded model, or a window of k days for the bounded one.
    """
    if max_index < 0:
        raise ValidationError("max_index must be >= 0")
    if max_index <= _EXACT_MAX_INDEX:
        cutoffs, holds = _schedule_exact(dist.exact_probs, max_index)
        return CutoffSchedule(kind, tuple(cutoffs), tuple(float(f) for f in holds))
    cutoffs, holds = _schedule_float(dist.probs, max_index)
    return CutoffSchedule(kind, tuple(cutoffs), tuple(holds))


def hold_value(dist: PriceDistribution, steps: int) -> float:
    """Expected gain from holding a unit with `steps` future opportunity days."""
    if steps < 0:
        raise ValidationError("steps must be >= 0")
    return cutoff_schedule(dist, steps).hold_values[steps]


@dataclass(frozen=True)
class DecisionContext:
    """One sell/hold decision point.

    `window` is the decision maker's time window t (None means unbounded);
    the effective index into the schedule is w = min(horizon - day, window).
    """

    day: int
    horizon: int
    units_available: int
    offered_price: int
    window: int | None = UNBOUNDED

    def __post_init__(self) -> None:
        if not 1 <= self.day <= self.horizon:
            raise ValidationError("day must lie in 1..horizon")
        if self.units_available < 0:
            raise ValidationError("units_available must be >= 0")
        if self.offered_price < 1:
            raise ValidationError("offered_price must be >= 1")
        if self.window is not UNBOUNDED and self.window < 1:
            raise ValidationError("window must be >= 1 (or None for unbounded)")

    @property
    def days_remaining(self) -> int:
        return self.horizon - self.day

    @property
    def effective_window(self) -> int:
        if self.window is UNBOUNDED:
            return self.days_remaining
        return min(self.days_remaining, self.window)


def expected_utility(ctx: DecisionContext, n: int, schedule: CutoffSchedule) -> float:
    """Expected utility of selling n of the available units today: the sale
    proceeds plus the expected hold gain on the units kept."""
    if n < 0 or n > ctx.units_available:
        raise ValidationError(f"cannot sell {n} of {ctx.units_available} units")
    w = ctx.effective_window
    if w > schedule.max_index:
        raise ValidationError(f"schedule covers indices 0..{schedule.max_index}, need {w}")
    return n * ctx.offered_price + (ctx.units_available - n) * schedule.hold_values[w]


def optimal_action(ctx: DecisionContext, schedule: CutoffSchedule) -> int:
    """Utility-maximizing sale: all available units when today's price is at
    least the cutoff for the effective window, otherwise none."""
    w = ctx.effective_window
    if w > schedule.max_index:
        raise ValidationError(f"schedule covers indices 0..{schedule.max_index}, need {w}")
    if ctx.offered_price >= schedule.cutoffs[w]:
        return ctx.units_available
    return 0


@dataclass(frozen=True)
class PredictedPlay:
    """decide_series output: the full predicted series and its profit."""

    window: int | None
    units_available: tuple[int, ...]
    units_sold: tuple[int, ...]
    profit: int

    @property
    def sell_days(self) -> int:
        return sum(1 for n in self.units_sold if n > 0)


def decide_series(
    scenario: Scenario,
    window: int | None,
    schedule: CutoffSchedule | None = None,
    dist: PriceDistribution | None = None,
) -> "PredictedPlay":
    """Walk the scenario applying the optimal action with a running inventory.

    Units generated on a day are sellable the same day. Provide either a
    precomputed `schedule` (deep enough for the horizon) or the `dist` to
    build one from.
    """
    if window is not UNBOUNDED and window < 1:
        raise ValidationError("window must be >= 1 (or None for unbounded)")
    if schedule is None:
        if dist is None:
            raise ValidationError("decide_series needs a schedule or a distribution")
        schedule = cutoff_schedule(dist, max(scenario.horizon - 1, 0))
    horizon = scenario.horizon
    inventory = scenario.initial_units
    available: list[int] = []
    sold: list[int] = []
    for day in range(1, horizon + 1):
        inventory += scenario.generated(day)
        available.append(inventory)
        d_rem = horizon - day
        w = d_rem if window is UNBOUNDED else min(d_rem, window)
        if inventory > 0 and scenario.price(day) >= schedule.cutoffs[w]:
            sold.append(inventory)
            inventory = 0
        else:
            sold.append(0)
    return PredictedPlay(
        window=window,
        units_available=tuple(available),
        units_sold=tuple(sold),
        profit=sum(n * p for n, p in zip(sold, scenario.offered_prices)),
    )
