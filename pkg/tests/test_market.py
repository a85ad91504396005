import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entities.errors import ArbitrageDetected, CompleteMarket, ConfigError
from entities.market import (
    Claim,
    FiniteMarket,
    arbitrage_bounds,
    interior_martingale_measure,
    is_replicable,
    martingale_vertices,
    x_zero
)

TRINOMIAL = FiniteMarket([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], [[1.0, 0.0, -1.0]])
payoffs = st.lists(st.floats(-5.0, 5.0, allow_nan=False), min_size=3, max_size=3)


def test_trinomial_polytope_is_one_dimensional(trinomial):
    assert trinomial.polytope_dimension == 1
    q, smallest = interior_martingale_measure(trinomial)
    assert smallest > 0.0
    assert trinomial.increments @ q == pytest.approx([0.0], abs=1e-12)


def test_arbitrage_market_is_rejected():
    with pytest.raises(ArbitrageDetected):
        FiniteMarket([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], [[1.0, 2.0, 3.0]])


def test_binomial_market_is_complete():
    with pytest.raises(CompleteMarket):
        FiniteMarket([0.5, 0.5], [[1.0, -1.0]])


@pytest.mark.parametrize("probs", [[0.5, 0.6, -0.1], [0.2, 0.2, 0.2], [0.5, 0.5, 0.0]])
def test_bad_probabilities_are_rejected(probs):
    with pytest.raises(ConfigError):
        FiniteMarket(probs, [[1.0, 0.0, -1.0]])


def test_claim_length_must_match_states(trinomial):
    with pytest.raises(ConfigError):
        arbitrage_bounds(trinomial, Claim([0.0, 1.0]))


def test_middle_claim_bounds(trinomial, middle_claim):
    bounds = arbitrage_bounds(trinomial, middle_claim)
    assert bounds.lower == pytest.approx(0.0, abs=1e-9)
    assert bounds.upper == pytest.approx(1.0, abs=1e-9)
    assert not bounds.attained_lower and not bounds.attained_upper
    assert bounds.contains(0.5) and not bounds.contains(1.0)


def test_replicable_claim_has_degenerate_bounds(trinomial):
    claim = Claim([5.0, 2.0, -1.0])
    bounds = arbitrage_bounds(trinomial, claim)
    assert bounds.lower == pytest.approx(2.0, abs=1e-9)
    assert bounds.is_degenerate and bounds.attained_lower and bounds.attained_upper

    replication = is_replicable(trinomial, claim)
    assert replication
    assert replication.price == pytest.approx(2.0)
    assert replication.theta == pytest.approx([3.0])


def test_middle_claim_is_not_replicable(trinomial, middle_claim):
    assert not is_replicable(trinomial, middle_claim)


def test_superhedging_capital(trinomial, middle_claim):
    assert x_zero(trinomial, middle_claim) == pytest.approx(1.0, abs=1e-9)
    assert x_zero(trinomial, -middle_claim) == pytest.approx(0.0, abs=1e-9)


def test_vertices_agree_with_lp(quadrinomial):
    claim = Claim([1.0, 0.0, 0.0, 1.0])
    by_lp = arbitrage_bounds(quadrinomial, claim)
    by_vertices = arbitrage_bounds(quadrinomial, claim, method="vertices")
    assert by_vertices.lower == pytest.approx(by_lp.lower, abs=1e-9)
    assert by_vertices.upper == pytest.approx(by_lp.upper, abs=1e-9)

    vertices = martingale_vertices(quadrinomial)
    assert vertices.sum(axis=1) == pytest.approx(np.ones(len(vertices)))
    assert np.all(vertices >= 0.0)


@settings(max_examples=40, deadline=None)
@given(payoffs, st.floats(-3.0, 3.0, allow_nan=False))
def test_bounds_shift_with_cash(values, cash):
    claim = Claim(values)
    shifted = arbitrage_bounds(TRINOMIAL, claim + cash)
    bounds = arbitrage_bounds(TRINOMIAL, claim)
    assert shifted.lower == pytest.approx(bounds.lower + cash, abs=1e-7)
    assert shifted.upper == pytest.approx(bounds.upper + cash, abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(payoffs, st.lists(st.floats(0.0, 2.0, allow_nan=False), min_size=3, max_size=3))
def test_bounds_are_monotone(values, bumps):
    lower_claim = Claim(values)
    higher_claim = Claim(np.add(values, bumps))
    low = arbitrage_bounds(TRINOMIAL, lower_claim)
    high = arbitrage_bounds(TRINOMIAL, higher_claim)
    assert low.lower <= high.lower + 1e-7
    assert low.upper <= high.upper + 1e-7


def test_market_round_trips_through_dict(quadrinomial):
    again = FiniteMarket(**quadrinomial.to_dict())
    assert np.array_equal(again.probs, quadrinomial.probs)
    assert np.array_equal(again.increments, quadrinomial.increments)


def random_market(seed: int) -> FiniteMarket:
    """Arbitrage-free by construction: increments are centred under a random interior measure."""
    rng = np.random.default_rng(seed)
    n_states = int(rng.integers(4, 9))
    n_assets = int(rng.integers(1, 3))
    q = rng.dirichlet(np.ones(n_states)) * 0.9 + 0.1 / n_states
    raw = rng.normal(size=(n_assets, n_states))
    probs = rng.dirichlet(np.ones(n_states)) * 0.9 + 0.1 / n_states
    return FiniteMarket(probs / probs.sum(), raw - (raw @ q)[:, None])


@pytest.mark.parametrize("seed", range(12))
def test_vertices_agree_with_lp_on_random_markets(seed):
    market = random_market(seed)
    claim = Claim(np.random.default_rng(100 + seed).uniform(-1.0, 2.0, market.n_states))
    by_lp = arbitrage_bounds(market, claim)
    by_vertices = arbitrage_bounds(market, claim, method="vertices")
    assert by_vertices.lower == pytest.approx(by_lp.lower, abs=1e-7)
    assert by_vertices.upper == pytest.approx(by_lp.upper, abs=1e-7)
    vertices = martingale_vertices(market)
    assert np.abs(vertices @ market.increments.T).max() <= 1e-9
    assert vertices.sum(axis=1) == pytest.approx(np.ones(len(vertices)))
