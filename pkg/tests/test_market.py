import json

import numpy as np
import pytest
from scipy import stats

from gridgame import (
    GenerationDistribution,
    PriceDistribution,
    Scenario,
    ValidationError,
    at_least_once_probabilities,
    generate_scenario,
)
from gridgame.market import WEEKDAY, WEEKEND, default_day_kinds

from conftest import PRICE_PROBS


class TestPriceDistribution:
    def test_default_levels_and_probs(self, price_dist):
        assert price_dist.n_levels == 15
        assert list(price_dist.levels) == list(range(1, 16))
        assert list(price_dist.probs) == PRICE_PROBS
        assert price_dist.prob(5) == 0.14  # the modal price, $0.50

    def test_probs_sum_to_one(self, price_dist):
        assert sum(price_dist.exact_probs) == 1
        assert abs(sum(price_dist.probs) - 1.0) < 1e-12

    def test_distribution_mean(self, price_dist):
        # independent dot product over the literal table
        expected = sum(p * j for j, p in enumerate(PRICE_PROBS, start=1))
        assert price_dist.mean() == pytest.approx(expected, abs=1e-12)
        assert price_dist.mean() == pytest.approx(6.61, abs=1e-12)

    @pytest.mark.parametrize(
        "probs",
        [
            [],
            [0.5, 0.6],  # sums past 1
            [0.5, 0.4],  # sums short of 1
            [1.5, -0.5],  # out of [0, 1]
        ],
    )
    def test_invalid_distributions_rejected(self, probs):
        with pytest.raises(ValidationError):
            PriceDistribution(probs)

    def test_generation_distribution_needs_three_probs(self):
        with pytest.raises(ValidationError):
            GenerationDistribution([0.5, 0.5])
        with pytest.raises(ValidationError):
            GenerationDistribution([0.5, 0.4, 0.2])


class TestGenerateScenario:
    def test_prices_within_levels(self, price_dist, gen_dist):
        sc = generate_scenario(price_dist, gen_dist, horizon=68, seed=11)
        assert len(sc.offered_prices) == 68
        assert all(1 <= p <= 15 for p in sc.offered_prices)
        assert all(g in (0, 1, 2) for g in sc.generated_units)

    def test_empirical_mean_matches_table(self, price_dist, gen_dist):
        sc = generate_scenario(price_dist, gen_dist, horizon=10_000, seed=3)
        expected = sum(p * j for j, p in enumerate(PRICE_PROBS, start=1))
        assert abs(np.mean(sc.offered_prices) - expected) < 0.1

    def test_zero_generation_fraction(self, price_dist, gen_dist):
        sc = generate_scenario(price_dist, gen_dist, horizon=10_000, seed=3)
        frac0 = sum(1 for g in sc.generated_units if g == 0) / sc.horizon
        assert abs(frac0 - 0.15) < 0.02

    def test_bit_reproducible(self, price_dist, gen_dist):
        a = generate_scenario(price_dist, gen_dist, horizon=68, seed=42)
        b = generate_scenario(price_dist, gen_dist, horizon=68, seed=42)
        assert a == b
        assert json.dumps(a.to_json()) == json.dumps(b.to_json())

    def test_chi_square_goodness_of_fit(self, price_dist, gen_dist):
        sc = generate_scenario(price_dist, gen_dist, horizon=10_000, seed=5)
        counts = np.bincount(sc.offered_prices, minlength=16)[1:]
        expected = np.array(PRICE_PROBS) * sc.horizon
        res = stats.chisquare(counts, expected)
        assert res.pvalue > 0.001

    def test_weekend_offset_shifts_means(self, price_dist, gen_dist):
        sc = generate_scenario(price_dist, gen_dist, horizon=7000, seed=9, weekend_offset=0.4)
        prices = np.array(sc.offered_prices)
        kinds = np.array(sc.day_kinds)
        assert all(1 <= p <= 15 for p in sc.offered_prices)
        assert prices[kinds == WEEKDAY].mean() > prices[kinds == WEEKEND].mean()

    def test_day_kinds_follow_week(self):
        kinds = default_day_kinds(14)
        assert kinds[:7] == [WEEKDAY] * 5 + [WEEKEND] * 2
        assert kinds[7:] == kinds[:7]

    def test_invalid_params(self, price_dist, gen_dist):
        with pytest.raises(ValidationError):
            generate_scenario(price_dist, gen_dist, horizon=0, seed=1)
        with pytest.raises(ValidationError):
            generate_scenario(price_dist, gen_dist, horizon=5, seed=1, weekend_offset=-0.1)


class TestScenario:
    def test_json_round_trip(self, default_scenario):
        doc = default_scenario.to_json()
        assert Scenario.from_json(doc) == default_scenario

    def test_malformed_document(self):
        with pytest.raises(ValidationError):
            Scenario.from_json({"horizon": 3})

    def test_series_lengths_enforced(self):
        with pytest.raises(ValidationError):
            Scenario(horizon=3, offered_prices=(1, 2), generated_units=(0, 0, 0))
        with pytest.raises(ValidationError):
            Scenario(horizon=2, offered_prices=(1, 0), generated_units=(0, 0))
        with pytest.raises(ValidationError):
            Scenario(horizon=2, offered_prices=(1, 2), generated_units=(0, 3))
        with pytest.raises(ValidationError):
            Scenario(horizon=2, offered_prices=(1, 2), generated_units=(0, 1), initial_units=-1)

    def test_total_units(self):
        sc = Scenario(horizon=3, offered_prices=(1, 2, 3), generated_units=(1, 0, 2), initial_units=5)
        assert sc.total_units == 8


class TestAtLeastOnce:
    def test_zero_days_remaining(self, price_dist):
        assert at_least_once_probabilities(price_dist, 0) == [0.0] * 15

    def test_single_day_equals_probs(self, price_dist):
        assert at_least_once_probabilities(price_dist, 1) == pytest.approx(PRICE_PROBS, abs=1e-15)

    def test_thirty_days_top_level(self, price_dist):
        chances = at_least_once_probabilities(price_dist, 30)
        assert chances[14] == pytest.approx(1 - 0.99**30, abs=1e-12)
        assert round(chances[14], 3) == 0.260

    def test_monotone_in_days_remaining(self, price_dist):
        prev = at_least_once_probabilities(price_dist, 0)
        for n in range(1, 80):
            cur = at_least_once_probabilities(price_dist, n)
            assert all(c >= p for c, p in zip(cur, prev))
            prev = cur

    def test_negative_days_rejected(self, price_dist):
        with pytest.raises(ValidationError):
            at_least_once_probabilities(price_dist, -1)
