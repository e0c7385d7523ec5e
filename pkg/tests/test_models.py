from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridgame import (
    DecisionContext,
    PriceDistribution,
    Scenario,
    ValidationError,
    cutoff_schedule,
    decide_series,
    expected_utility,
    hold_value,
    optimal_action,
)
from gridgame.models import _schedule_exact, _schedule_float

from conftest import PRICE_PROBS

UNIFORM5 = PriceDistribution([0.2] * 5)


def hold_value_oracle(steps: int) -> float:
    """Hold value recursion evaluated independently with exact rationals."""
    probs = [Fraction(str(p)) for p in PRICE_PROBS]
    fh = Fraction(0)
    cutoff = 1
    for _ in range(steps):
        fh = sum(p * j for j, p in enumerate(probs, 1) if j >= cutoff) + fh * sum(
            p for j, p in enumerate(probs, 1) if j < cutoff
        )
        k = int(fh)
        cutoff = k + 1 if fh >= k else k  # smallest integer strictly above fh
    return float(fh)


class TestHoldValue:
    def test_zero_steps(self, price_dist):
        assert hold_value(price_dist, 0) == 0.0

    def test_one_step_is_full_expectation(self, price_dist):
        expected = sum(p * j for j, p in enumerate(PRICE_PROBS, start=1))
        assert hold_value(price_dist, 1) == pytest.approx(expected, abs=1e-12)
        assert hold_value(price_dist, 1) == pytest.approx(6.61, abs=1e-9)

    def test_two_steps(self, price_dist):
        # 4.35 = sum of p_j * j over levels 7..15, 0.55 = mass below level 7
        assert hold_value(price_dist, 2) == pytest.approx(4.35 + 0.55 * 6.61, abs=1e-9)
        assert hold_value(price_dist, 2) == pytest.approx(7.9855, abs=1e-9)

    @pytest.mark.parametrize("steps", [0, 1, 2, 3, 7, 20, 45])
    def test_matches_independent_recursion(self, price_dist, steps):
        assert hold_value(price_dist, steps) == pytest.approx(hold_value_oracle(steps), abs=1e-12)

    def test_negative_steps_rejected(self, price_dist):
        with pytest.raises(ValidationError):
            hold_value(price_dist, -1)


class TestCutoffSchedule:
    def test_index_zero_forces_sale(self, price_dist):
        sched = cutoff_schedule(price_dist, 5)
        assert sched.cutoffs[0] == 1
        assert sched.hold_values[0] == 0.0

    def test_known_cutoffs(self, price_dist):
        sched = cutoff_schedule(price_dist, 40)
        assert sched.cutoffs[1] == 7
        assert sched.cutoffs[4] == 10
        assert sched.cutoffs[5] == 10
        assert all(c == 14 for c in sched.cutoffs[31:41])

    def test_monotone_cutoffs_and_hold_values(self, price_dist):
        sched = cutoff_schedule(price_dist, 67)
        assert all(a <= b for a, b in zip(sched.cutoffs, sched.cutoffs[1:]))
        assert all(a < b for a, b in zip(sched.hold_values, sched.hold_values[1:]))

    def test_uniform_five_levels(self):
        # mean is exactly 3.0; strictly-greater semantics give cutoff 4
        sched = cutoff_schedule(UNIFORM5, 1)
        assert sched.hold_values[1] == pytest.approx(3.0, abs=1e-15)
        assert sched.cutoffs[1] == 4

    def test_float_fallback_agrees_with_exact(self, price_dist):
        for dist in (price_dist, UNIFORM5, PriceDistribution([0.5, 0.25, 0.25])):
            exact_c, _ = _schedule_exact(dist.exact_probs, 30)
            float_c, _ = _schedule_float(dist.probs, 30)
            assert exact_c == float_c

    def test_cutoffs_stay_within_levels(self, price_dist):
        sched = cutoff_schedule(price_dist, 67)
        assert all(1 <= c <= 15 for c in sched.cutoffs)


def _ctx(days_remaining, price, units, window=None, horizon=70):
    return DecisionContext(
        day=horizon - days_remaining,
        horizon=horizon,
        units_available=units,
        offered_price=price,
        window=window,
    )


class TestExpectedUtility:
    def test_terminal_day_utility_is_sale_proceeds(self, price_dist):
        sched = cutoff_schedule(price_dist, 10)
        ctx = _ctx(days_remaining=0, price=1, units=3)
        assert expected_utility(ctx, 3, sched) == pytest.approx(3.0)

    def test_one_day_window(self, price_dist):
        sched = cutoff_schedule(price_dist, 10)
        ctx = _ctx(days_remaining=30, price=7, units=1, window=1)
        assert expected_utility(ctx, 1, sched) == pytest.approx(7.0)
        assert expected_utility(ctx, 0, sched) == pytest.approx(6.61, abs=1e-9)

    def test_no_units_no_utility(self, price_dist):
        sched = cutoff_schedule(price_dist, 10)
        ctx = _ctx(days_remaining=4, price=9, units=0)
        assert expected_utility(ctx, 0, sched) == 0.0

    def test_overselling_rejected(self, price_dist):
        sched = cutoff_schedule(price_dist, 10)
        ctx = _ctx(days_remaining=4, price=9, units=2)
        with pytest.raises(ValidationError):
            expected_utility(ctx, 3, sched)

    def test_shallow_schedule_rejected(self, price_dist):
        sched = cutoff_schedule(price_dist, 3)
        with pytest.raises(ValidationError):
            expected_utility(_ctx(days_remaining=10, price=5, units=1), 0, sched)


class TestOptimalAction:
    def test_sells_above_hold_value(self, price_dist):
        sched = cutoff_schedule(price_dist, 10)
        assert optimal_action(_ctx(days_remaining=1, price=7, units=4), sched) == 4

    def test_holds_below_hold_value(self, price_dist):
        sched = cutoff_schedule(price_dist, 10)
        assert optimal_action(_ctx(days_remaining=1, price=6, units=4), sched) == 0

    def test_final_day_sells_at_any_price(self, price_dist):
        sched = cutoff_schedule(price_dist, 10)
        assert optimal_action(_ctx(days_remaining=0, price=1, units=2), sched) == 2

    def test_agrees_with_argmax(self, price_dist):
        sched = cutoff_schedule(price_dist, 40)
        for days_remaining in (0, 1, 3, 12, 39):
            for price in (1, 6, 7, 10, 14, 15):
                for window in (None, 1, 5, 13):
                    ctx = _ctx(days_remaining, price, 6, window)
                    utilities = [expected_utility(ctx, n, sched) for n in range(7)]
                    best = max(utilities)
                    action = optimal_action(ctx, sched)
                    assert utilities[action] == best
                    assert action in (0, 6)


class TestAllOrNothing:
    @settings(max_examples=150, deadline=None)
    @given(
        weights=st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=12),
        units=st.integers(min_value=1, max_value=10),
        window=st.integers(min_value=1, max_value=8),
        price_pick=st.integers(min_value=0, max_value=10**6),
    )
    def test_argmax_is_never_interior(self, weights, units, window, price_pick):
        total = sum(weights)
        dist = PriceDistribution([w / total for w in weights])
        sched = cutoff_schedule(dist, window)
        price = 1 + price_pick % dist.n_levels
        ctx = DecisionContext(
            day=1, horizon=50, units_available=units, offered_price=price, window=window
        )
        utilities = [expected_utility(ctx, n, sched) for n in range(units + 1)]
        best = max(utilities)
        assert best in (utilities[0], utilities[-1])
        assert utilities[optimal_action(ctx, sched)] == best


def flat_scenario(price, horizon=10, initial=3, gen=0):
    return Scenario(
        horizon=horizon,
        offered_prices=(price,) * horizon,
        generated_units=(gen,) * horizon,
        initial_units=initial,
    )


class TestDecideSeries:
    def test_final_day_sells_remaining(self, price_dist, default_scenario):
        for window in (1, 5, None):
            play = decide_series(default_scenario, window, dist=price_dist)
            last_day_holdings = play.units_available[-1]
            assert play.units_sold[-1] == last_day_holdings
            assert last_day_holdings > 0

    def test_top_price_every_day_sells_everything(self, price_dist):
        sc = flat_scenario(price=15, gen=1, initial=2)
        for window in (1, 4, None):
            play = decide_series(sc, window, dist=price_dist)
            assert all(n == a for n, a in zip(play.units_sold, play.units_available))

    def test_bottom_price_sells_only_on_last_day(self, price_dist, gen_dist):
        from gridgame import generate_scenario

        base = generate_scenario(price_dist, gen_dist, horizon=68, seed=2)
        sc = Scenario(
            horizon=68,
            offered_prices=(1,) * 68,
            generated_units=base.generated_units,
            initial_units=5,
        )
        play = decide_series(sc, None, dist=price_dist)
        assert all(n == 0 for n in play.units_sold[:-1])
        assert play.units_sold[-1] == sc.total_units
        assert play.profit == sc.total_units

    def test_unbounded_is_the_large_window_limit(self, price_dist, gen_dist):
        from gridgame import generate_scenario

        for seed in range(5):
            sc = generate_scenario(price_dist, gen_dist, horizon=40, seed=seed)
            unbounded = decide_series(sc, None, dist=price_dist)
            for window in (39, 60, 1000):
                assert decide_series(sc, window, dist=price_dist).units_sold == unbounded.units_sold

    def test_same_day_generation_is_sellable(self, price_dist):
        sc = flat_scenario(price=15, horizon=3, initial=0, gen=1)
        play = decide_series(sc, None, dist=price_dist)
        assert play.units_available == (1, 1, 1)
        assert play.units_sold == (1, 1, 1)

    def test_inventory_conservation(self, price_dist, default_scenario):
        play = decide_series(default_scenario, 3, dist=price_dist)
        leftover = default_scenario.total_units - sum(play.units_sold)
        assert leftover == 0  # final day always clears holdings
