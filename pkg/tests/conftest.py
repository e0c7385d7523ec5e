import pytest

from gridgame import default_generation, generate_scenario, default_price_distribution

# The 15 single-day price probabilities, literal and independent of the
# package's own constants.
PRICE_PROBS = [0.03, 0.06, 0.09, 0.12, 0.14, 0.11, 0.09, 0.08, 0.07, 0.06, 0.05, 0.04, 0.03, 0.02, 0.01]


@pytest.fixture(scope="session")
def price_dist():
    return default_price_distribution()


@pytest.fixture(scope="session")
def gen_dist():
    return default_generation()


@pytest.fixture(scope="session")
def default_scenario(price_dist, gen_dist):
    """A fixed 68-day scenario sampled from the unmodified default mix."""
    return generate_scenario(price_dist, gen_dist, horizon=68, seed=0)
