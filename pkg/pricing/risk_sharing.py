import warnings
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.special import expit

from entities.errors import (
    BoundsDisagreementWarning,
    ConfigError,
    InfeasibleWealth,
    NoOverlap,
    NonConvergence,
    NonMonotonePsi,
    WrongUtilityKind
)
from entities.market import Claim, FiniteMarket, PriceInterval, x_zero
from entities.utility import Agent, Role, UtilityKind
from pricing.reservation import PriceCurve
from pricing.roots import bracket_monotone, find_root
from util.config import Config


@dataclass(frozen=True)
class RiskSharingProblem:
    market: FiniteMarket
    seller: Agent
    buyer: Agent
    claim: Claim
    lam: float

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ConfigError(f"sharing weight must lie strictly inside (0, 1), got {self.lam}")
        if self.seller.role != Role.seller or self.buyer.role != Role.buyer:
            raise ConfigError("seller and buyer agents carry the wrong roles")
        self.market.check_claim(self.claim)

    @cached_property
    def seller_curve(self) -> PriceCurve:
        return PriceCurve(self.market, self.seller, self.claim)

    @cached_property
    def buyer_curve(self) -> PriceCurve:
        return PriceCurve(self.market, self.buyer, self.claim)

    def with_lambda(self, lam: float) -> "RiskSharingProblem":
        problem = replace(self, lam=lam)
        for name in ("seller_curve", "buyer_curve"):
            if name in self.__dict__:
                problem.__dict__[name] = self.__dict__[name]
        return problem

    def check_feasibility(self):
        """Range overlap, then the wealth conditions for half-line utilities."""
        seller_low, _ = self.seller_curve.price_range
        _, buyer_high = self.buyer_curve.price_range
        if buyer_high <= seller_low:
            raise NoOverlap(
                f"buyer prices end at {buyer_high} but seller prices start at {seller_low}; "
                f"the wealth conditions for half-line utilities fail"
            )
        if self.seller.utility.is_type_two:
            floor = max(x_zero(self.market, self.claim), 0.0)
            if not self.seller.wealth > floor:
                raise InfeasibleWealth(f"seller wealth {self.seller.wealth} must exceed {floor}")
        if self.buyer.utility.is_type_two:
            floor = max(x_zero(self.market, -self.claim), 0.0)
            if not self.buyer.wealth > floor:
                raise InfeasibleWealth(f"buyer wealth {self.buyer.wealth} must exceed {floor}")


@dataclass(frozen=True)
class RiskSharingSolution:
    eps_s: float
    eps_b: float
    multiplier: float
    price: float
    objective: float
    lam: float
    iterations: int = 0
    residual: float = 0.0

    def to_dict(self) -> dict:
        return {
            "price": self.price,
            "eps_s": self.eps_s,
            "eps_b": self.eps_b,
            "multiplier": self.multiplier,
            "objective": self.objective,
            "lambda": self.lam
        }


@dataclass(frozen=True)
class LambdaBounds:
    low: float
    high: float
    method: str

    @property
    def is_empty(self) -> bool:
        return not self.low < self.high

    def contains(self, lam: float) -> bool:
        return self.low < lam < self.high


@dataclass(frozen=True)
class Penalty:
    """Increasing convex weighting of a loss of indirect utility."""

    value: Callable[[float], float]
    derivative: Callable[[float], float]

    @staticmethod
    def identity() -> "Penalty":
        return Penalty(lambda eps: eps, lambda eps: 1.0)

    @staticmethod
    def exponential() -> "Penalty":
        return Penalty(np.exp, np.exp)


def _solve_multiplier(
        problem: RiskSharingProblem,
        seller_wealth: Callable[[float], float],
        buyer_wealth: Callable[[float], float],
        bracket: Optional[tuple[float, float]]
) -> RiskSharingSolution:
    seller, buyer = problem.seller_curve, problem.buyer_curve

    def gap(log_m: float) -> float:
        return seller.price_at(seller_wealth(log_m)) - buyer.price_at(buyer_wealth(log_m))

    if bracket:
        low, high = np.log(bracket)
    else:
        # multiplier that prices both sides at their own wealth, i.e. a trade at price zero
        low = high = 0.5 * (
            np.log(problem.lam * seller.position.value(seller.wealth).marginal)
            + np.log((1.0 - problem.lam) * buyer.position.value(buyer.wealth).marginal)
        )
    limit = Config.multiplier_log_limit
    step = 1.0
    while not gap(low) > 0.0:
        low -= step
        step *= 2.0
        if low < -limit:
            raise NonConvergence("could not bracket the Lagrange multiplier from below")
    step = 1.0
    while not gap(high) < 0.0:
        high += step
        step *= 2.0
        if high > limit:
            raise NonConvergence("could not bracket the Lagrange multiplier from above")

    log_m, iterations = find_root(gap, low, high, "multiplier search")
    seller_w, buyer_w = seller_wealth(log_m), buyer_wealth(log_m)
    seller_price, buyer_price = seller.price_at(seller_w), buyer.price_at(buyer_w)
    price = 0.5 * (seller_price + buyer_price)
    residual = abs(seller_price - buyer_price)
    if residual > Config.constraint_tolerance * max(1.0, abs(price)):
        raise NonConvergence(f"seller and buyer prices still differ by {residual}")

    eps_s = seller.benchmark - seller.position.value(seller_w).value
    eps_b = buyer.benchmark - buyer.position.value(buyer_w).value
    return RiskSharingSolution(
        eps_s=eps_s,
        eps_b=eps_b,
        multiplier=float(np.exp(log_m)),
        price=price,
        objective=problem.lam * eps_s + (1.0 - problem.lam) * eps_b,
        lam=problem.lam,
        iterations=iterations,
        residual=residual
    )


def solve(problem: RiskSharingProblem, bracket: Optional[tuple[float, float]] = None) -> RiskSharingSolution:
    """Minimizes lam * eps_s + (1 - lam) * eps_b subject to P_s(eps_s) <= P_b(eps_b).

    For a trial multiplier m the seller's wealth solves u_s'(w; -B) = m / lam and the
    buyer's u_b'(w; B) = m / (1 - lam); m is then searched until both prices meet.
    """
    problem.check_feasibility()
    lam = problem.lam
    seller, buyer = problem.seller_curve.position, problem.buyer_curve.position
    return _solve_multiplier(
        problem,
        lambda log_m: seller.marginal_inverse(np.exp(log_m) / lam),
        lambda log_m: buyer.marginal_inverse(np.exp(log_m) / (1.0 - lam)),
        bracket
    )


def _exponential_inputs(problem: RiskSharingProblem) -> tuple[float, float, float, float, float, float]:
    if problem.seller.utility.kind != UtilityKind.exponential or problem.buyer.utility.kind != UtilityKind.exponential:
        raise WrongUtilityKind("the closed form needs exponential utility on both sides")
    seller, buyer = problem.seller_curve, problem.buyer_curve
    gamma_s, gamma_b = seller.agent.utility.gamma, buyer.agent.utility.gamma
    u_s, u_b = seller.benchmark, buyer.benchmark
    v_s = np.log(seller.position.value(seller.wealth).value / u_s) / gamma_s
    v_b = np.log(u_b / buyer.position.value(buyer.wealth).value) / gamma_b
    return gamma_s, gamma_b, u_s, u_b, v_s, v_b


def solve_exponential(problem: RiskSharingProblem) -> RiskSharingSolution:
    gamma_s, gamma_b, u_s, u_b, v_s, v_b = _exponential_inputs(problem)
    lam = problem.lam
    total = gamma_s + gamma_b
    price = (gamma_s * v_s + gamma_b * v_b) / total \
        + np.log(u_s * gamma_s * lam / (u_b * gamma_b * (1.0 - lam))) / total
    log_m = (gamma_b * np.log(-u_s * lam * gamma_s)
             + gamma_s * np.log(-u_b * (1.0 - lam) * gamma_b)
             + gamma_s * gamma_b * (v_s - v_b)) / total
    m = float(np.exp(log_m))
    eps_s = u_s + m / (lam * gamma_s)
    eps_b = u_b + m / ((1.0 - lam) * gamma_b)
    return RiskSharingSolution(
        eps_s=eps_s,
        eps_b=eps_b,
        multiplier=m,
        price=float(price),
        objective=lam * eps_s + (1.0 - lam) * eps_b,
        lam=lam
    )


def lambda_sweep(
        problem: RiskSharingProblem,
        lambdas: Iterable[float],
        on_solved: Optional[Callable[[RiskSharingSolution], None]] = None
) -> list[RiskSharingSolution]:
    """Solves at each weight in increasing order; `on_solved` sees every solution as it lands."""
    solutions = []
    for lam in sorted(float(lam) for lam in lambdas):
        solutions.append(solve(problem.with_lambda(lam)))
        if on_solved:
            on_solved(solutions[-1])
    return solutions


def _numeric_lambda(problem: RiskSharingProblem, price: float) -> float:
    if price == -np.inf:
        return 0.0
    if price == np.inf:
        return 1.0

    def gap(logit: float) -> float:
        return solve(problem.with_lambda(float(expit(logit)))).price - price

    # walk out from lam = 1/2 so extreme weights are only solved when needed
    cap = Config.lambda_logit_cap
    inner, inner_gap = 0.0, gap(0.0)
    if inner_gap == 0.0:
        return 0.5
    direction = -1.0 if inner_gap > 0.0 else 1.0
    step = 1.0
    while True:
        outer = direction * min(abs(inner) + step, cap)
        outer_gap = gap(outer)
        if np.sign(outer_gap) != np.sign(inner_gap):
            break
        if abs(outer) >= cap:
            return 0.0 if direction < 0.0 else 1.0
        inner, inner_gap = outer, outer_gap
        step *= 2.0
    logit, _ = find_root(gap, min(inner, outer), max(inner, outer), "sharing weight inversion")
    return float(expit(logit))


def _exponential_lambda(problem: RiskSharingProblem, price: float) -> float:
    """b(a) = K(a) / (K(a) + 1), evaluated through log K."""
    if price == -np.inf:
        return 0.0
    if price == np.inf:
        return 1.0
    gamma_s, gamma_b, _, _, v_s, v_b = _exponential_inputs(problem)
    seller, buyer = problem.seller_curve, problem.buyer_curve
    log_k = price * (gamma_s + gamma_b) \
        - gamma_s * (v_s - seller.wealth) \
        - gamma_b * (v_b + buyer.wealth) \
        + np.log(gamma_b * -buyer.base.value(0.0).value) \
        - np.log(gamma_s * -seller.base.value(0.0).value)
    return float(expit(log_k))


def lambda_bounds(
        problem: RiskSharingProblem,
        target: PriceInterval,
        method: str = "numeric",
        cross_check: bool = False
) -> LambdaBounds:
    """Sharing weights whose risk sharing price falls inside `target`.

    P*(lam) is strictly increasing, so the admissible weights form the interval
    (b(lower), b(upper)).
    """
    inversions = {"numeric": _numeric_lambda, "exponential": _exponential_lambda}
    if method not in inversions:
        raise ConfigError(f"unknown sharing weight method [{method}]")

    invert = inversions[method]
    low = invert(problem, target.lower)
    high = low if target.is_degenerate else invert(problem, target.upper)

    if cross_check:
        other = inversions["exponential" if method == "numeric" else "numeric"]
        other_low = other(problem, target.lower)
        other_high = other_low if target.is_degenerate else other(problem, target.upper)
        discrepancy = max(abs(low - other_low), abs(high - other_high))
        if discrepancy > Config.bounds_agreement_tolerance:
            warnings.warn(
                f"numeric and closed-form sharing weight bounds differ by {discrepancy:.3e}",
                BoundsDisagreementWarning
            )
    return LambdaBounds(low, high, method)


def _check_penalty(penalty: Penalty, a_lower: float, side: str):
    low, high, num = Config.penalty_check_grid
    grid = np.linspace(low, high, num)
    grid = grid[grid > a_lower]
    slopes = np.array([penalty.derivative(eps) for eps in grid], dtype=float)
    if not np.all(slopes > 0.0):
        raise NonMonotonePsi(f"{side} penalty must have a strictly positive derivative")
    if np.any(np.diff(slopes) < -1e-12 * np.maximum(1.0, np.abs(slopes[:-1]))):
        raise NonMonotonePsi(f"{side} penalty derivative must be non-decreasing")


def solve_generalized(
        problem: RiskSharingProblem,
        psi_s: Penalty,
        psi_b: Penalty,
        bracket: Optional[tuple[float, float]] = None
) -> RiskSharingSolution:
    """Minimizes lam * psi_s(eps_s) + (1 - lam) * psi_b(eps_b) under the same constraint.

    For trial m each side solves weight * psi'(eps(w)) * u'(w) = m for its wealth w,
    where eps(w) is the loss at that wealth. The left side falls strictly in w.
    """
    seller, buyer = problem.seller_curve, problem.buyer_curve
    _check_penalty(psi_s, seller.a_lower, "seller")
    _check_penalty(psi_b, buyer.a_lower, "buyer")
    problem.check_feasibility()
    lam = problem.lam

    def wealth_solver(curve: PriceCurve, penalty: Penalty, weight: float) -> Callable[[float], float]:
        position = curve.position

        def wealth(log_m: float) -> float:
            def gap(w: float) -> float:
                result = position.value(w)
                eps = curve.benchmark - result.value
                return np.log(weight * penalty.derivative(eps) * result.marginal) - log_m

            start = position.marginal_inverse(np.exp(log_m) / weight)
            lower, upper = bracket_monotone(gap, start, increasing=False, floor=position.wealth_floor)
            root, _ = find_root(gap, lower, upper, "penalized wealth search")
            return root

        return wealth

    solution = _solve_multiplier(
        problem,
        wealth_solver(seller, psi_s, lam),
        wealth_solver(buyer, psi_b, 1.0 - lam),
        bracket
    )
    return replace(
        solution,
        objective=lam * psi_s.value(solution.eps_s) + (1.0 - lam) * psi_b.value(solution.eps_b)
    )


def residual_risk_objective(problem: RiskSharingProblem, price: float) -> float:
    """lam * E[U_s(X_s - B)] + (1 - lam) * E[U_b(X_b + B)] with optimally hedged wealth at `price`."""
    seller, buyer = problem.seller_curve, problem.buyer_curve
    total = 0.0
    for curve, weight in ((seller, problem.lam), (buyer, 1.0 - problem.lam)):
        try:
            wealth = curve.position.terminal_wealth(curve.wealth_at(price))
        except InfeasibleWealth:
            return -np.inf
        total += weight * problem.market.expectation(curve.agent.utility.evaluate(wealth))
    return total
