import functools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linprog, minimize_scalar
from scipy.special import logsumexp

from entities.errors import InfeasibleWealth, NonConvergence, NonPositiveMarginal, OutOfRange
from entities.market import Claim, FiniteMarket
from entities.utility import Utility, UtilityKind
from pricing.roots import bracket_monotone, find_root
from util.config import Config


@dataclass(frozen=True, eq=False)
class ValueResult:
    value: float
    marginal: float
    theta: np.ndarray
    x: float
    claim: Claim


def _newton_minimize(
        objective: Callable[[np.ndarray], float],
        gradient: Callable[[np.ndarray], np.ndarray],
        hessian: Callable[[np.ndarray], np.ndarray],
        gradient_scale: Callable[[np.ndarray], float],
        theta: np.ndarray
) -> np.ndarray:
    value = objective(theta)
    for _ in range(Config.newton_max_iterations):
        grad = gradient(theta)
        scale = gradient_scale(theta)
        if np.max(np.abs(grad), initial=0.0) <= Config.newton_gradient_tolerance * scale:
            return theta

        direction = -np.linalg.lstsq(hessian(theta), grad, rcond=None)[0]
        slope = float(grad @ direction)
        if not slope < 0.0:
            direction = -grad
            slope = -float(grad @ grad)

        step = 1.0
        while step >= Config.min_step:
            candidate = theta + step * direction
            candidate_value = objective(candidate)
            if np.isfinite(candidate_value) and candidate_value <= value + Config.armijo_constant * step * slope:
                break
            step *= 0.5
        else:
            search = minimize_scalar(lambda t: objective(theta + t * direction), bounds=(0.0, 1.0), method="bounded")
            candidate = theta + search.x * direction
            candidate_value = objective(candidate)
            if not candidate_value < value:
                if np.max(np.abs(grad)) <= Config.newton_stall_tolerance * scale:
                    return theta
                raise NonConvergence("line search made no progress on the hedging problem")

        theta, value = candidate, candidate_value
    raise NonConvergence(f"hedging problem not solved within {Config.newton_max_iterations} Newton steps")


class IndirectUtility:
    """The value function x -> u(x; b) of one utility on one market, carrying claim b."""

    def __init__(self, market: FiniteMarket, utility: Utility, claim: Claim):
        market.check_claim(claim)
        self.market = market
        self.utility = utility
        self.claim = claim
        self.__gains = market.increments.T
        self.__gain_scale = max(1.0, float(np.abs(self.__gains).max()))
        self.__wealth_floor: Optional[float] = None
        self.__floor_strategy: Optional[np.ndarray] = None
        self.__exponential_solution: Optional[tuple[np.ndarray, float]] = None
        self.value = functools.lru_cache(maxsize=Config.cache_size)(self.__value)

    @property
    def is_exponential(self) -> bool:
        return self.utility.kind == UtilityKind.exponential

    @property
    def wealth_floor(self) -> float:
        """x0(-b): at or below it no strategy keeps terminal wealth in the utility's domain."""
        if self.__wealth_floor is None:
            if self.utility.is_type_two:
                self.__floor_strategy, self.__wealth_floor = self.__superhedge()
            else:
                self.__wealth_floor = -np.inf
        return self.__wealth_floor

    def terminal_wealth(self, x: float) -> np.ndarray:
        return self.__wealth(x, self.value(x).theta)

    def value_or_minus_infinity(self, x: float) -> float:
        try:
            return self.value(x).value
        except InfeasibleWealth:
            return -np.inf

    def inverse(self, y: float) -> float:
        """phi(y; b), the wealth at which u(x; b) = y."""
        if y >= self.utility.sup_value:
            raise OutOfRange(f"utility level {y} is not below U(+inf) = {self.utility.sup_value}")
        if self.is_exponential:
            theta, log_sum = self.__solve_exponential()
            return (log_sum - np.log(-y)) / self.utility.gamma

        def gap(x: float) -> float:
            return self.value(x).value - y

        lower, upper = bracket_monotone(gap, self.__start(), increasing=True, floor=self.wealth_floor)
        root, _ = find_root(gap, lower, upper, "value inversion")
        result = self.value(root)
        if result.marginal > 0.0 and np.isfinite(result.value):
            polished = root - (result.value - y) / result.marginal
            if polished > self.wealth_floor and abs(self.value(polished).value - y) < abs(result.value - y):
                root = polished
        return root

    def marginal_inverse(self, m: float) -> float:
        """The wealth at which u'(x; b) = m."""
        if not m > 0.0:
            raise NonPositiveMarginal(f"marginal level must be positive, got {m}")
        if self.is_exponential:
            theta, log_sum = self.__solve_exponential()
            return (log_sum - np.log(m / self.utility.gamma)) / self.utility.gamma

        log_target = np.log(m)

        def gap(x: float) -> float:
            return np.log(self.value(x).marginal) - log_target

        # targets steeper than the marginal just above the floor clamp to that edge
        edge = self.__near_floor()
        if np.isfinite(edge) and not gap(edge) > 0.0:
            return edge
        try:
            lower, upper = bracket_monotone(gap, self.__start(), increasing=False, floor=edge)
        except OutOfRange:
            if not np.isfinite(edge):
                raise
            return edge
        root, _ = find_root(gap, lower, upper, "marginal inversion")
        return root

    def __start(self) -> float:
        floor = self.wealth_floor
        return floor + max(1.0, abs(floor)) if np.isfinite(floor) else 0.0

    def __near_floor(self) -> float:
        floor = self.wealth_floor
        if not np.isfinite(floor):
            return floor
        return floor + Config.floor_clamp_gap * max(1.0, abs(floor))

    def __wealth(self, x: float, theta: np.ndarray) -> np.ndarray:
        return x + self.__gains @ theta + self.claim.payoffs

    def __value(self, x: float) -> ValueResult:
        x = float(x)
        if self.is_exponential:
            theta, log_sum = self.__solve_exponential()
            gamma = self.utility.gamma
            log_level = -gamma * x + log_sum
            with np.errstate(over="ignore"):
                return ValueResult(-np.exp(log_level), gamma * np.exp(log_level), theta, x, self.claim)

        if self.utility.is_type_two and not x > self.wealth_floor:
            raise InfeasibleWealth(f"initial wealth {x} is not above the wealth floor {self.wealth_floor}")

        theta0 = self.__floor_strategy if self.utility.is_type_two else np.zeros(self.market.n_assets)
        theta = _newton_minimize(
            lambda theta: -self.__expected(self.utility.evaluate(self.__wealth(x, theta))),
            lambda theta: -self.__gains.T @ (self.market.probs * self.utility.derivative(self.__wealth(x, theta))),
            lambda theta: -self.__curvature(self.utility.second_derivative(self.__wealth(x, theta))),
            lambda theta: self.__gain_scale * self.__expected(self.utility.derivative(self.__wealth(x, theta))),
            theta0
        )
        wealth = self.__wealth(x, theta)
        return ValueResult(
            self.__expected(self.utility.evaluate(wealth)),
            self.__expected(self.utility.derivative(wealth)),
            theta,
            x,
            self.claim
        )

    def __expected(self, values: np.ndarray) -> float:
        return float(self.market.probs @ values)

    def __curvature(self, weights: np.ndarray) -> np.ndarray:
        return self.__gains.T @ ((self.market.probs * weights)[:, None] * self.__gains)

    def __solve_exponential(self) -> tuple[np.ndarray, float]:
        """Minimizes log E[exp(-gamma (theta.dS + b))], which does not depend on x."""
        if self.__exponential_solution is None:
            gamma = self.utility.gamma
            log_probs = np.log(self.market.probs)

            def exponents(theta: np.ndarray) -> np.ndarray:
                return log_probs - gamma * (self.__gains @ theta + self.claim.payoffs)

            def weights(theta: np.ndarray) -> np.ndarray:
                z = exponents(theta)
                return np.exp(z - logsumexp(z))

            def hessian(theta: np.ndarray) -> np.ndarray:
                pi = weights(theta)
                mean = self.__gains.T @ pi
                return gamma ** 2 * (self.__gains.T @ (pi[:, None] * self.__gains) - np.outer(mean, mean))

            theta = _newton_minimize(
                lambda theta: float(logsumexp(exponents(theta))),
                lambda theta: -gamma * (self.__gains.T @ weights(theta)),
                hessian,
                lambda theta: gamma * self.__gain_scale,
                np.zeros(self.market.n_assets)
            )
            self.__exponential_solution = (theta, float(logsumexp(exponents(theta))))
        return self.__exponential_solution

    def __superhedge(self) -> tuple[np.ndarray, float]:
        """Cheapest capital c and strategy with c + theta.dS + b >= 0 in every state.

        The floor is re-read from the strategy itself, so any wealth above it keeps
        every terminal wealth positive under that strategy.
        """
        d = self.market.n_assets
        objective = np.zeros(d + 1)
        objective[-1] = 1.0
        result = linprog(
            objective,
            A_ub=np.hstack([-self.__gains, -np.ones((self.market.n_states, 1))]),
            b_ub=self.claim.payoffs,
            bounds=[(None, None)] * (d + 1),
            method="highs"
        )
        if result.status != 0:
            raise NonConvergence(f"superhedging LP failed: {result.message}")
        theta = result.x[:d]
        return theta, float(np.max(-self.claim.payoffs - self.__gains @ theta))


def value_function(market: FiniteMarket, utility: Utility, x: float, claim: Claim) -> ValueResult:
    return IndirectUtility(market, utility, claim).value(x)


def inverse_value(market: FiniteMarket, utility: Utility, y: float, claim: Claim) -> float:
    return IndirectUtility(market, utility, claim).inverse(y)
