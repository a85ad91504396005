"""Brute-force certificates for the finite-market solvers.

Everything here enumerates grids; ties go to the lowest index.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from entities.errors import ConfigError, EmptyFeasibleGrid, NonConvergence
from entities.market import Claim, FiniteMarket, interior_martingale_measure
from entities.utility import Agent, Role, Utility


def _points(bounds: tuple[float, float], step: float) -> np.ndarray:
    low, high = bounds
    return np.linspace(low, high, int(round((high - low) / step)) + 1)


@dataclass(frozen=True)
class GridSpec:
    eps_s: tuple[float, float] = (-0.5, 1.5)
    eps_b: tuple[float, float] = (-0.5, 1.5)
    eps_step: float = 1e-3
    price: tuple[float, float] = (-1.0, 2.0)
    price_step: float = 5e-4
    theta: tuple[float, float] = (-2.0, 2.0)
    theta_step: float = 1e-3

    def __post_init__(self):
        for name in ("eps_step", "price_step", "theta_step"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"grid resolution [{name}] must be positive")
        for name in ("eps_s", "eps_b", "price", "theta"):
            low, high = getattr(self, name)
            if not (np.isfinite(low) and np.isfinite(high) and low < high):
                raise ConfigError(f"grid range [{name}] must be finite and increasing")

    def eps_s_points(self) -> np.ndarray:
        return _points(self.eps_s, self.eps_step)

    def eps_b_points(self) -> np.ndarray:
        return _points(self.eps_b, self.eps_step)

    def price_points(self) -> np.ndarray:
        return _points(self.price, self.price_step)

    def theta_points(self) -> np.ndarray:
        return _points(self.theta, self.theta_step)


@dataclass(frozen=True)
class OracleSharing:
    eps_s: float
    eps_b: float
    objective: float
    price: float
    seller_price: float
    buyer_price: float


def brute_force_value(
        market: FiniteMarket,
        utility: Utility,
        x: float,
        claim: Claim,
        theta_grid: np.ndarray
) -> tuple[float, np.ndarray]:
    if market.n_assets > 2:
        raise ConfigError("grid maximization is limited to two assets")
    axes = np.meshgrid(*([np.asarray(theta_grid, dtype=float)] * market.n_assets), indexing="ij")
    strategies = np.stack(axes, axis=-1).reshape(-1, market.n_assets)
    wealth = x + strategies @ market.increments + claim.payoffs
    expected = utility.evaluate(wealth) @ market.probs
    best = int(np.argmax(expected))
    return float(expected[best]), strategies[best]


def _grid_losses(
        market: FiniteMarket,
        agent: Agent,
        claim: Claim,
        prices: np.ndarray,
        theta_grid: np.ndarray
) -> np.ndarray:
    """Loss of grid-maximized indirect utility when trading the claim at each price."""
    benchmark, _ = brute_force_value(market, agent.utility, agent.wealth, Claim.zero(market.n_states), theta_grid)
    if agent.role == Role.seller:
        position, wealth = -claim, agent.wealth + prices
    else:
        position, wealth = claim, agent.wealth - prices
    values = np.array([brute_force_value(market, agent.utility, float(w), position, theta_grid)[0] for w in wealth])
    return benchmark - values


def brute_force_risk_sharing(
        market: FiniteMarket,
        seller: Agent,
        buyer: Agent,
        claim: Claim,
        lam: float,
        grid: GridSpec
) -> OracleSharing:
    """Minimizes lam * eps_s + (1 - lam) * eps_b over the (eps_s, eps_b) grid.

    A pair is feasible when some grid price P has P_s(eps_s) <= P <= P_b(eps_b), which for
    decreasing seller and increasing buyer curves reads loss_s(P) <= eps_s and loss_b(P) <= eps_b.
    Losses at each price come from grid-maximized expected utility only.
    """
    prices = grid.price_points()
    theta_grid = grid.theta_points()
    seller_losses = _grid_losses(market, seller, claim, prices, theta_grid)
    buyer_losses = _grid_losses(market, buyer, claim, prices, theta_grid)

    eps_s = grid.eps_s_points()
    eps_b = grid.eps_b_points()
    # smallest buyer loss over the prices each seller loss can sustain
    order = np.argsort(seller_losses, kind="stable")
    cheapest_b = np.minimum.accumulate(buyer_losses[order])
    reach = np.searchsorted(seller_losses[order], eps_s, side="right") - 1
    needed_b = np.where(reach >= 0, cheapest_b[np.maximum(reach, 0)], np.inf)
    feasible = eps_b[None, :] >= needed_b[:, None]
    if not np.any(feasible):
        raise EmptyFeasibleGrid("no grid pair satisfies the price constraint")

    objective = np.where(feasible, lam * eps_s[:, None] + (1.0 - lam) * eps_b[None, :], np.inf)
    i, j = np.unravel_index(int(np.argmin(objective)), objective.shape)
    supported = prices[(seller_losses <= eps_s[i]) & (buyer_losses <= eps_b[j])]
    seller_price, buyer_price = float(supported.min()), float(supported.max())
    return OracleSharing(
        eps_s=float(eps_s[i]),
        eps_b=float(eps_b[j]),
        objective=float(objective[i, j]),
        price=0.5 * (seller_price + buyer_price),
        seller_price=seller_price,
        buyer_price=buyer_price
    )


def price_sweep_objective(
        market: FiniteMarket,
        seller: Agent,
        buyer: Agent,
        claim: Claim,
        lam: float,
        price_grid: np.ndarray,
        theta_grid: Optional[np.ndarray] = None
) -> tuple[float, float]:
    """Grid argmax of lam * E[U_s(X_s - B)] + (1 - lam) * E[U_b(X_b + B)] with grid-hedged wealth."""
    theta_grid = GridSpec().theta_points() if theta_grid is None else theta_grid
    values = np.array([
        lam * brute_force_value(market, seller.utility, seller.wealth + float(price), -claim, theta_grid)[0]
        + (1.0 - lam) * brute_force_value(market, buyer.utility, buyer.wealth - float(price), claim, theta_grid)[0]
        for price in price_grid
    ])
    best = int(np.argmax(values))
    return float(price_grid[best]), float(values[best])


def minimal_entropy_measure(market: FiniteMarket) -> tuple[np.ndarray, float]:
    """Martingale measure closest to the physical one in relative entropy."""
    probs = market.probs
    start, _ = interior_martingale_measure(market)
    floor = 1e-15

    def entropy(q: np.ndarray) -> float:
        q = np.maximum(q, floor)
        return float(q @ np.log(q / probs))

    def entropy_gradient(q: np.ndarray) -> np.ndarray:
        return np.log(np.maximum(q, floor) / probs) + 1.0

    result = minimize(
        entropy,
        start,
        jac=entropy_gradient,
        method="SLSQP",
        bounds=[(floor, 1.0)] * market.n_states,
        constraints=[
            {"type": "eq", "fun": lambda q: market.increments @ q, "jac": lambda q: market.increments},
            {"type": "eq", "fun": lambda q: q.sum() - 1.0, "jac": lambda q: np.ones_like(q)}
        ],
        options={"ftol": 1e-14, "maxiter": 500}
    )
    if not result.success:
        raise NonConvergence(f"entropy minimization failed: {result.message}")
    return result.x, float(result.fun)
