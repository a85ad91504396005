import functools
from dataclasses import dataclass

import numpy as np

from entities.errors import DomainError, OutOfRange, WrongUtilityKind
from entities.market import Claim, FiniteMarket, arbitrage_bounds
from entities.utility import Agent, Role, UtilityKind
from pricing.expected_utility import IndirectUtility
from util.config import Config


@dataclass(frozen=True)
class EpsInterval:
    lower: float
    upper: float

    @property
    def is_empty(self) -> bool:
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            return self.lower >= self.upper
        return self.upper - self.lower <= 1e-12 * max(1.0, abs(self.lower), abs(self.upper))

    def contains(self, eps: float) -> bool:
        return not self.is_empty and self.lower < eps < self.upper


class PriceCurve:
    """Reservation price as a function of the agent's loss of indirect utility.

    The seller carries -B and the buyer +B. `benchmark` is u(x) without the claim
    and `a_lower` is the open left edge of the admissible losses, u(x) - U(+inf).
    """

    def __init__(self, market: FiniteMarket, agent: Agent, claim: Claim):
        market.check_claim(claim)
        self.market = market
        self.agent = agent
        self.claim = claim
        self.side = agent.role
        self.base = IndirectUtility(market, agent.utility, Claim.zero(market.n_states))
        self.position = IndirectUtility(market, agent.utility, -claim if self.is_seller else claim)
        self.benchmark = self.base.value(agent.wealth).value
        self.a_lower = self.benchmark - agent.utility.sup_value
        self.price = functools.lru_cache(maxsize=Config.cache_size)(self.__price)

    @property
    def is_seller(self) -> bool:
        return self.side == Role.seller

    @property
    def wealth(self) -> float:
        return self.agent.wealth

    @property
    def price_range(self) -> tuple[float, float]:
        if not self.agent.utility.is_type_two:
            return -np.inf, np.inf
        # the position floor is x0(B) for the seller and x0(-B) for the buyer
        floor = self.position.wealth_floor
        if self.is_seller:
            return floor - self.wealth, np.inf
        return -np.inf, self.wealth - floor

    def wealth_at(self, price: float) -> float:
        return self.wealth + price if self.is_seller else self.wealth - price

    def price_at(self, wealth: float) -> float:
        return wealth - self.wealth if self.is_seller else self.wealth - wealth

    def __price(self, eps: float) -> float:
        if eps <= self.a_lower:
            return np.inf if self.is_seller else -np.inf
        try:
            wealth = self.position.inverse(self.benchmark - eps)
        except OutOfRange:
            if not self.agent.utility.is_type_two:
                raise
            wealth = self.position.wealth_floor
        return self.price_at(wealth)

    def derivative(self, eps: float) -> float:
        if eps <= self.a_lower:
            raise DomainError(f"loss {eps} is outside the admissible set ({self.a_lower}, inf)")
        marginal = self.position.value(self.wealth_at(self.price(eps))).marginal
        return -1.0 / marginal if self.is_seller else 1.0 / marginal

    def loss(self, price: float) -> float:
        """Loss of indirect utility when trading at `price`."""
        return self.benchmark - self.position.value_or_minus_infinity(self.wealth_at(price))

    def wealth_sensitivity(self, eps: float) -> float:
        """d price / d initial wealth at fixed loss, closed form for exponential utility."""
        if self.agent.utility.kind != UtilityKind.exponential:
            raise WrongUtilityKind("wealth sensitivity has a closed form only for exponential utility")
        if self.is_seller:
            return eps / (self.benchmark - eps)
        return eps / (eps - self.benchmark)

    def exponential_price(self, eps: float) -> float:
        """v -/+ ln(1 - eps / u(x)) / gamma."""
        if self.agent.utility.kind != UtilityKind.exponential:
            raise WrongUtilityKind("closed-form reservation prices need exponential utility")
        gamma = self.agent.utility.gamma
        ratio = self.position.value(self.wealth).value / self.benchmark
        if self.is_seller:
            return np.log(ratio) / gamma - np.log1p(-eps / self.benchmark) / gamma
        return -np.log(ratio) / gamma + np.log1p(-eps / self.benchmark) / gamma

    def exponential_derivative(self, eps: float) -> float:
        if self.agent.utility.kind != UtilityKind.exponential:
            raise WrongUtilityKind("closed-form reservation slopes need exponential utility")
        slope = 1.0 / (self.agent.utility.gamma * (self.benchmark - eps))
        return slope if self.is_seller else -slope


def indifference_price(market: FiniteMarket, agent: Agent, claim: Claim) -> float:
    return PriceCurve(market, agent, claim).price(0.0)


def reservation_price(curve: PriceCurve, eps: float) -> float:
    return curve.price(eps)


def reservation_price_derivative(curve: PriceCurve, eps: float) -> float:
    return curve.derivative(eps)


def nonarbitrage_eps_interval(curve: PriceCurve) -> EpsInterval:
    """Losses whose reservation price lies inside the arbitrage-free interval."""
    bounds = arbitrage_bounds(curve.market, curve.claim)
    at_upper = curve.loss(bounds.upper)
    at_lower = curve.loss(bounds.lower)
    if curve.is_seller:
        return EpsInterval(at_upper, at_lower)
    return EpsInterval(at_lower, at_upper)
