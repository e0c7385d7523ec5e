"""Daily wholesale price distribution and market scenario generation.

Prices are integer levels 1..I; the display value in dollars is the level
divided by 10 (level 5 = $0.50). Surplus generation is 0, 1 or 2 units per
day. A scenario bundles the sampled price path, the generation schedule,
the starting inventory and the weekday/weekend tagging for one game.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError

PROB_TOL = 1e-9

# Single-day probabilities for the 15 price levels ($0.10 .. $1.50).
_DEFAULT_PRICE_PROBS = (
    "0.03", "0.06", "0.09", "0.12", "0.14", "0.11", "0.09", "0.08",
    "0.07", "0.06", "0.05", "0.04", "0.03", "0.02", "0.01",
)

# Daily surplus generation: 0 units on 15% of days, 1 on 50%, 2 on 35%.
_DEFAULT_GEN_PROBS = ("0.15", "0.50", "0.35")

WEEKDAY = "weekday"
WEEKEND = "weekend"


def _to_fraction(p) -> Fraction:
    """Exact rational view of a probability.

    Floats are read through their shortest decimal repr, so 0.03 means
    3/100 rather than its binary expansion.
    """
    if isinstance(p, float):
        return Fraction(str(p))
    return Fraction(p)


@dataclass(frozen=True)
class PriceDistribution:
    """Single-day probabilities for integer price levels 1..I."""

    probs: tuple[float, ...]
    exact_probs: tuple[Fraction, ...] = field(repr=False, compare=False, default=())

    def __init__(self, probs: Sequence) -> None:
        exact = tuple(_to_fraction(p) for p in probs)
        if len(exact) < 1:
            raise ValidationError("price distribution needs at least one level")
        if any(p < 0 or p > 1 for p in exact):
            raise ValidationError("price probabilities must lie in [0, 1]")
        if abs(float(sum(exact)) - 1.0) > PROB_TOL:
            raise ValidationError(f"price probabilities sum to {float(sum(exact))}, expected 1")
        object.__setattr__(self, "probs", tuple(float(p) for p in exact))
        object.__setattr__(self, "exact_probs", exact)

    @property
    def n_levels(self) -> int:
        return len(self.probs)

    @property
    def levels(self) -> range:
        return range(1, len(self.probs) + 1)

    def prob(self, level: int) -> float:
        """Probability that `level` is the price offered on a single day."""
        if not 1 <= level <= self.n_levels:
            raise ValidationError(f"price level {level} outside 1..{self.n_levels}")
        return self.probs[level - 1]

    def mean(self) -> float:
        """Expected price level on a single day."""
        return float(sum(p * j for j, p in zip(self.levels, self.exact_probs)))


@dataclass(frozen=True)
class GenerationDistribution:
    """Probabilities of generating 0, 1 or 2 surplus units on a day."""

    probs: tuple[float, ...]

    def __init__(self, probs: Sequence) -> None:
        exact = tuple(_to_fraction(p) for p in probs)
        if len(exact) != 3:
            raise ValidationError("generation distribution needs exactly 3 probabilities (0, 1, 2 units)")
        if any(p < 0 or p > 1 for p in exact):
            raise ValidationError("generation probabilities must lie in [0, 1]")
        if abs(float(sum(exact)) - 1.0) > PROB_TOL:
            raise ValidationError(f"generation probabilities sum to {float(sum(exact))}, expected 1")
        object.__setattr__(self, "probs", tuple(float(p) for p in exact))


def default_price_distribution() -> PriceDistribution:
    """The 15-level positively skewed price distribution used by the game."""
    return PriceDistribution(_DEFAULT_PRICE_PROBS)


def default_generation() -> GenerationDistribution:
    """The 0/1/2-unit daily surplus distribution used by the game."""
    return GenerationDistribution(_DEFAULT_GEN_PROBS)


@dataclass(frozen=True)
class Scenario:
    """One concrete game: a price path, a generation schedule and a start."""

    horizon: int
    offered_prices: tuple[int, ...]
    generated_units: tuple[int, ...]
    initial_units: int = 5
    day_kinds: tuple[str, ...] = ()
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValidationError("horizon must be >= 1")
        if len(self.offered_prices) != self.horizon:
            raise ValidationError("offered_prices must have exactly `horizon` entries")
        if len(self.generated_units) != self.horizon:
            raise ValidationError("generated_units must have exactly `horizon` entries")
        if not self.day_kinds:
            object.__setattr__(self, "day_kinds", tuple(default_day_kinds(self.horizon)))
        if len(self.day_kinds) != self.horizon:
            raise ValidationError("day_kinds must have exactly `horizon` entries")
        if any(p < 1 for p in self.offered_prices):
            raise ValidationError("offered prices must be >= 1")
        if any(g < 0 or g > 2 for g in self.generated_units):
            raise ValidationError("generated units must be 0, 1 or 2")
        if self.initial_units < 0:
            raise ValidationError("initial_units must be >= 0")
        if any(k not in (WEEKDAY, WEEKEND) for k in self.day_kinds):
            raise ValidationError(f"day kinds must be '{WEEKDAY}' or '{WEEKEND}'")

    def price(self, day: int) -> int:
        """Offered price on `day` (1-based)."""
        return self.offered_prices[day - 1]

    def generated(self, day: int) -> int:
        """Units that become available on `day` (1-based)."""
        return self.generated_units[day - 1]

    @property
    def total_units(self) -> int:
        return self.initial_units + sum(self.generated_units)

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "offered_prices": list(self.offered_prices),
            "generated_units": list(self.generated_units),
            "initial_units": self.initial_units,
            "day_kinds": list(self.day_kinds),
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Scenario":
        try:
            return cls(
                horizon=int(doc["horizon"]),
                offered_prices=tuple(int(p) for p in doc["offered_prices"]),
                generated_units=tuple(int(g) for g in doc["generated_units"]),
                initial_units=int(doc.get("initial_units", 5)),
                day_kinds=tuple(doc.get("day_kinds") or ()),
                seed=doc.get("seed"),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed scenario document: {exc}") from exc


def default_day_kinds(horizon: int, start_weekday: int = 0) -> list[str]:
    """Weekly weekday/weekend tags; day 1 falls on `start_weekday` (0=Monday)."""
    return [
        WEEKEND if (start_weekday + d) % 7 >= 5 else WEEKDAY
        for d in range(horizon)
    ]


def _apply_offset(level: int, kind: str, offset: float, n_levels: int) -> int:
    """Shift weekend draws down and weekday draws up, preserving the overall
    mean under the 5:2 weekday:weekend split, clamped to the level range."""
    if kind == WEEKEND:
        shifted = level - round(offset * level)
    else:
        shifted = level + round(0.4 * offset * level)
    return min(max(shifted, 1), n_levels)


def generate_scenario(
    dist: PriceDistribution,
    gen: GenerationDistribution,
    horizon: int = 68,
    seed: int | None = None,
    weekend_offset: float = 0.0,
    initial_units: int = 5,
    start_weekday: int = 0,
) -> Scenario:
    """Sample a scenario: i.i.d. daily prices and generation, optional
    weekday/weekend price offset. Bit-reproducible for a fixed seed."""
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    if weekend_offset < 0:
        raise ValidationError("weekend_offset must be >= 0")
    rng = np.random.default_rng(seed)
    price_p = np.asarray(dist.probs, dtype=float)
    price_p = price_p / price_p.sum()
    prices = rng.choice(np.arange(1, dist.n_levels + 1), size=horizon, p=price_p)
    gen_p = np.asarray(gen.probs, dtype=float)
    gen_p = gen_p / gen_p.sum()
    units = rng.choice(np.arange(3), size=horizon, p=gen_p)
    kinds = default_day_kinds(horizon, start_weekday)
    if weekend_offset > 0:
        prices = [
            _apply_offset(int(p), k, weekend_offset, dist.n_levels)
            for p, k in zip(prices, kinds)
        ]
    return Scenario(
        horizon=horizon,
        offered_prices=tuple(int(p) for p in prices),
        generated_units=tuple(int(u) for u in units),
        initial_units=initial_units,
        day_kinds=tuple(kinds),
        seed=seed,
    )


def at_least_once_probabilities(dist: PriceDistribution, days_remaining: int) -> list[float]:
    """Per level, the chance it is offered at least once in the next
    `days_remaining` independent days: 1 - (1 - p)^n."""
    if days_remaining < 0:
        raise ValidationError("days_remaining must be >= 0")
    return [1.0 - (1.0 - p) ** days_remaining for p in dist.probs]


def load_distribution(path: str | Path) -> PriceDistribution:
    """Read a price distribution from a JSON array of probabilities."""
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    if not isinstance(doc, list):
        raise ValidationError("distribution file must be a JSON array of probabilities")
    return PriceDistribution(doc)


def load_scenario(path: str | Path) -> Scenario:
    with open(path, encoding="utf-8") as f:
        return Scenario.from_json(json.load(f))
