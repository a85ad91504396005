import math
import warnings

import numpy as np
import pytest

from entities.errors import ConfigError, Infeasible, NonMonotonePsi, WrongUtilityKind
from entities.market import Claim, FiniteMarket, PriceInterval, arbitrage_bounds
from entities.utility import Agent, ExponentialUtility, LogUtility, PowerUtility, Role
from pricing.expected_utility import value_function
from pricing.risk_sharing import (
    Penalty,
    RiskSharingProblem,
    lambda_bounds,
    lambda_sweep,
    residual_risk_objective,
    solve,
    solve_exponential,
    solve_generalized
)
from tests.conftest import BUYER_INDIFFERENCE, SELLER_INDIFFERENCE

LAMBDAS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


@pytest.mark.parametrize("lam", LAMBDAS)
def test_generic_solve_matches_closed_form(exponential_problem, lam):
    problem = exponential_problem.with_lambda(lam)
    numeric = solve(problem)
    closed = solve_exponential(problem)
    assert numeric.price == pytest.approx(closed.price, abs=1e-8)
    assert numeric.eps_s == pytest.approx(closed.eps_s, abs=1e-8)
    assert numeric.eps_b == pytest.approx(closed.eps_b, abs=1e-8)
    assert numeric.multiplier == pytest.approx(closed.multiplier, rel=1e-7)


def test_symmetric_price_is_the_midpoint(exponential_problem):
    solution = solve(exponential_problem)
    assert solution.price == pytest.approx(0.5 * (SELLER_INDIFFERENCE + BUYER_INDIFFERENCE), abs=1e-9)
    assert solution.eps_s == pytest.approx(solution.eps_b, abs=1e-9)
    assert solution.residual <= 1e-8


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_loss_difference_of_identical_agents(exponential_problem, lam):
    solution = solve(exponential_problem.with_lambda(lam))
    product = ((2.0 + math.e) / 3.0) * ((2.0 + math.exp(-1.0)) / 3.0)
    expected = math.sqrt(product) * (1.0 - 2.0 * lam) / math.sqrt(lam * (1.0 - lam))
    assert solution.eps_s - solution.eps_b == pytest.approx(expected, abs=1e-8)
    assert np.sign(solution.eps_s - solution.eps_b) == np.sign(round(1.0 - 2.0 * lam, 12))


@pytest.mark.parametrize("fixture", ["exponential_problem", "log_problem"])
def test_price_increases_with_weight(request, fixture):
    problem = request.getfixturevalue(fixture)
    solutions = lambda_sweep(problem, np.linspace(0.01, 0.99, 99))
    prices = np.array([solution.price for solution in solutions])
    assert np.all(np.diff(prices) > 0.0)
    assert [solution.lam for solution in solutions] == sorted(solution.lam for solution in solutions)


def test_extreme_weights(exponential_problem):
    middle = solve(exponential_problem).price
    assert solve(exponential_problem.with_lambda(1.0 - 1e-6)).price > middle + 5.0
    assert solve(exponential_problem.with_lambda(1e-6)).price < middle - 5.0


def test_small_risk_aversion_limit(trinomial, middle_claim):
    seller = Agent(ExponentialUtility(1e-3), 0.0, Role.seller)
    buyer = Agent(ExponentialUtility(1e-3), 0.0, Role.buyer)
    solution = solve(RiskSharingProblem(trinomial, seller, buyer, middle_claim, 0.5))
    assert abs(solution.price - 1.0 / 3.0) <= 1e-2


def test_log_agents_satisfy_optimality(log_problem):
    solution = solve(log_problem)
    seller, buyer = log_problem.seller_curve, log_problem.buyer_curve
    assert abs(seller.price(solution.eps_s) - buyer.price(solution.eps_b)) <= 1e-6
    lam, m = log_problem.lam, solution.multiplier
    assert seller.derivative(solution.eps_s) == pytest.approx(-lam / m, rel=1e-6)
    assert buyer.derivative(solution.eps_b) == pytest.approx((1.0 - lam) / m, rel=1e-6)
    assert arbitrage_bounds(log_problem.market, log_problem.claim).contains(solution.price)


@pytest.mark.parametrize("seller_wealth", [0.5, 1.0])
def test_poor_log_seller_is_infeasible(log_problem, seller_wealth):
    poor = Agent(LogUtility(), seller_wealth, Role.seller)
    problem = RiskSharingProblem(log_problem.market, poor, log_problem.buyer, log_problem.claim, 0.5)
    with pytest.raises(Infeasible):
        solve(problem)


def test_weight_must_be_inside_unit_interval(exponential_problem):
    for lam in (0.0, 1.0, 1.2):
        with pytest.raises(ConfigError):
            exponential_problem.with_lambda(lam)


def test_closed_form_needs_exponential(log_problem):
    with pytest.raises(WrongUtilityKind):
        solve_exponential(log_problem)


def test_weight_bounds_on_symmetric_trinomial(exponential_problem):
    interval = arbitrage_bounds(exponential_problem.market, exponential_problem.claim)
    numeric = lambda_bounds(exponential_problem, interval)
    closed = lambda_bounds(exponential_problem, interval, method="exponential")
    midpoint = 0.5 * (SELLER_INDIFFERENCE + BUYER_INDIFFERENCE)
    assert closed.low == pytest.approx(1.0 / (1.0 + math.exp(2.0 * midpoint)), abs=1e-12)
    assert closed.high == pytest.approx(1.0 / (1.0 + math.exp(-2.0 * (1.0 - midpoint))), abs=1e-12)
    assert numeric.low == pytest.approx(closed.low, abs=1e-6)
    assert numeric.high == pytest.approx(closed.high, abs=1e-6)


@pytest.mark.parametrize("fixture", ["exponential_problem", "log_problem"])
def test_weight_bounds_characterize_inside_prices(request, fixture):
    problem = request.getfixturevalue(fixture)
    interval = arbitrage_bounds(problem.market, problem.claim)
    bounds = lambda_bounds(problem, interval)
    for lam in np.linspace(0.02, 0.98, 20):
        if min(abs(lam - bounds.low), abs(lam - bounds.high)) < 1e-6:
            continue
        price = solve(problem.with_lambda(float(lam))).price
        assert interval.contains(price) == bounds.contains(lam)


def test_weight_bounds_cross_check_is_quiet(exponential_problem):
    interval = arbitrage_bounds(exponential_problem.market, exponential_problem.claim)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lambda_bounds(exponential_problem, interval, cross_check=True)


def test_high_weight_bound_tends_to_one_for_tolerant_seller(trinomial, middle_claim, exponential_buyer):
    seller = Agent(ExponentialUtility(1e-3), 0.0, Role.seller)
    problem = RiskSharingProblem(trinomial, seller, exponential_buyer, middle_claim, 0.5)
    bounds = lambda_bounds(problem, PriceInterval(0.0, 1.0), method="exponential")
    assert bounds.high > 0.99


def test_unknown_bounds_method(exponential_problem):
    with pytest.raises(ConfigError):
        lambda_bounds(exponential_problem, PriceInterval(0.0, 1.0), method="bisection")


def test_identity_penalty_reduces_to_solve(log_problem):
    plain = solve(log_problem)
    penalized = solve_generalized(log_problem, Penalty.identity(), Penalty.identity())
    assert penalized.price == pytest.approx(plain.price, abs=1e-8)
    assert penalized.objective == pytest.approx(plain.objective, abs=1e-8)


def test_exponential_penalty_stationarity(exponential_problem):
    problem = exponential_problem.with_lambda(0.3)
    solution = solve_generalized(problem, Penalty.exponential(), Penalty.exponential())
    seller, buyer = problem.seller_curve, problem.buyer_curve
    m = solution.multiplier
    assert seller.price(solution.eps_s) == pytest.approx(buyer.price(solution.eps_b), abs=1e-8)
    assert 0.3 * math.exp(solution.eps_s) == pytest.approx(-m * seller.derivative(solution.eps_s), rel=1e-6)
    assert 0.7 * math.exp(solution.eps_b) == pytest.approx(m * buyer.derivative(solution.eps_b), rel=1e-6)


def test_decreasing_penalty_is_rejected(exponential_problem):
    with pytest.raises(NonMonotonePsi):
        solve_generalized(exponential_problem, Penalty(lambda eps: -eps, lambda eps: -1.0), Penalty.identity())


def test_price_maximizes_residual_risk_objective(exponential_problem):
    solution = solve(exponential_problem)
    step = 1e-4
    for shift in (-step, step):
        assert residual_risk_objective(exponential_problem, solution.price + shift) \
            < residual_risk_objective(exponential_problem, solution.price)


def test_quadrinomial_with_different_agents(quadrinomial):
    claim = Claim([1.0, 0.0, 0.0, 1.0])
    seller = Agent(ExponentialUtility(1.0), 0.5, Role.seller)
    buyer = Agent(ExponentialUtility(2.0), 0.0, Role.buyer)
    problem = RiskSharingProblem(quadrinomial, seller, buyer, claim, 0.4)
    assert solve(problem).price == pytest.approx(solve_exponential(problem).price, abs=1e-8)


def test_market_with_two_assets():
    market = FiniteMarket([0.2, 0.2, 0.2, 0.2, 0.2], [[1.0, -1.0, 0.0, 0.5, -0.5], [0.0, 0.5, 1.0, -1.0, -0.5]])
    claim = Claim([0.0, 1.0, 0.5, 0.0, 1.0])
    seller = Agent(ExponentialUtility(1.0), 0.0, Role.seller)
    buyer = Agent(ExponentialUtility(1.0), 0.0, Role.buyer)
    problem = RiskSharingProblem(market, seller, buyer, claim, 0.5)
    assert solve(problem).price == pytest.approx(solve_exponential(problem).price, abs=1e-8)


@pytest.mark.parametrize("lam", [0.001, 0.01, 0.999])
def test_log_agents_at_lopsided_weights(log_problem, lam):
    problem = log_problem.with_lambda(lam)
    solution = solve(problem)
    seller_low, _ = problem.seller_curve.price_range
    _, buyer_high = problem.buyer_curve.price_range
    assert seller_low == pytest.approx(-1.0, abs=1e-9)
    assert buyer_high == pytest.approx(2.0, abs=1e-9)
    assert seller_low < solution.price < buyer_high
    assert solution.residual <= 1e-7 * max(1.0, abs(solution.price))


def test_lopsided_weights_keep_prices_ordered(log_problem):
    prices = [solve(log_problem.with_lambda(lam)).price for lam in (0.001, 0.01, 0.5, 0.999)]
    assert np.all(np.diff(prices) > 0.0)


def scaled_log_problem(scale: float) -> RiskSharingProblem:
    market = FiniteMarket([0.25, 0.5, 0.25], [[1.0, 0.0, -1.0]])
    claim = Claim([0.0, scale, 0.0])
    seller = Agent(LogUtility(), 2.0 * scale, Role.seller)
    buyer = Agent(LogUtility(), 2.0 * scale, Role.buyer)
    return RiskSharingProblem(market, seller, buyer, claim, 0.5)


@pytest.mark.parametrize("scale", [10.0, 100.0])
def test_log_price_scales_with_claim_and_wealth(scale):
    base = solve(scaled_log_problem(1.0))
    scaled = solve(scaled_log_problem(scale))
    assert scaled.price == pytest.approx(scale * base.price, rel=1e-7)
    assert scaled.eps_s == pytest.approx(base.eps_s, abs=1e-8)
    assert scaled.eps_b == pytest.approx(base.eps_b, abs=1e-8)


@pytest.mark.parametrize("lam", [0.3, 0.5, 0.7])
def test_square_root_agents_satisfy_optimality(log_problem, lam):
    seller = Agent(PowerUtility(0.5), 2.0, Role.seller)
    buyer = Agent(PowerUtility(0.5), 2.0, Role.buyer)
    problem = RiskSharingProblem(log_problem.market, seller, buyer, log_problem.claim, lam)
    solution = solve(problem)
    seller_curve, buyer_curve = problem.seller_curve, problem.buyer_curve
    m = solution.multiplier
    assert seller_curve.price(solution.eps_s) == pytest.approx(buyer_curve.price(solution.eps_b), abs=1e-6)
    assert seller_curve.derivative(solution.eps_s) == pytest.approx(-lam / m, rel=1e-6)
    assert buyer_curve.derivative(solution.eps_b) == pytest.approx((1.0 - lam) / m, rel=1e-6)


@pytest.mark.parametrize("gamma_b", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("gamma_s", [0.5, 1.0, 2.0])
def test_closed_form_across_risk_aversions(trinomial, middle_claim, gamma_s, gamma_b):
    seller = Agent(ExponentialUtility(gamma_s), 0.0, Role.seller)
    buyer = Agent(ExponentialUtility(gamma_b), 0.0, Role.buyer)
    problem = RiskSharingProblem(trinomial, seller, buyer, middle_claim, 0.5)
    for lam in LAMBDAS:
        numeric = solve(problem.with_lambda(lam))
        closed = solve_exponential(problem.with_lambda(lam))
        assert numeric.price == pytest.approx(closed.price, abs=1e-8)
        assert numeric.objective == pytest.approx(closed.objective, abs=1e-8)


@pytest.mark.parametrize("fixture", ["exponential_problem", "log_problem"])
def test_multiplier_does_not_depend_on_the_starting_bracket(request, fixture):
    problem = request.getfixturevalue(fixture)
    reference = solve(problem)
    rng = np.random.default_rng(2024)
    for _ in range(20):
        low, high = np.sort(np.exp(rng.uniform(-8.0, 8.0, 2)))
        solution = solve(problem, bracket=(float(low), float(high)))
        assert solution.multiplier == pytest.approx(reference.multiplier, rel=1e-8)
        assert solution.price == pytest.approx(reference.price, abs=1e-8)


@pytest.mark.parametrize("fixture", ["exponential_problem", "log_problem"])
def test_constraint_binds_and_no_feasible_pair_does_better(request, fixture):
    problem = request.getfixturevalue(fixture).with_lambda(0.35)
    solution = solve(problem)
    seller, buyer = problem.seller_curve, problem.buyer_curve
    assert seller.price(solution.eps_s) == pytest.approx(buyer.price(solution.eps_b), abs=1e-7)

    h = 1e-3
    assert seller.price(solution.eps_s - h) > buyer.price(solution.eps_b - h)
    for shift in np.linspace(-0.1, 0.1, 21):
        eps_s = solution.eps_s + shift
        eps_b = buyer.loss(seller.price(eps_s))
        assert problem.lam * eps_s + (1.0 - problem.lam) * eps_b >= solution.objective - 1e-9


@pytest.mark.parametrize("fixture", ["exponential_problem", "log_problem"])
@pytest.mark.parametrize("price", [0.1, 0.35, 0.6])
def test_residual_risk_objective_is_the_weighted_value(request, fixture, price):
    problem = request.getfixturevalue(fixture)
    seller, buyer = problem.seller, problem.buyer
    expected = problem.lam * value_function(problem.market, seller.utility, seller.wealth + price, -problem.claim).value \
        + (1.0 - problem.lam) * value_function(problem.market, buyer.utility, buyer.wealth - price, problem.claim).value
    assert residual_risk_objective(problem, price) == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_sweep_reports_each_solution_in_order(exponential_problem):
    seen = []
    solutions = lambda_sweep(exponential_problem, [0.7, 0.2, 0.5], on_solved=seen.append)
    assert [solution.lam for solution in solutions] == [0.2, 0.5, 0.7]
    assert seen == solutions
