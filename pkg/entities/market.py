import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from entities.errors import ArbitrageDetected, CompleteMarket, ConfigError, NonConvergence
from util.config import Config


def _frozen_vector(values, name: str) -> np.ndarray:
    vector = np.array(values, dtype=float).reshape(-1)
    if vector.size == 0:
        raise ConfigError(f"{name} must not be empty")
    if not np.all(np.isfinite(vector)):
        raise ConfigError(f"{name} must be finite")
    vector.setflags(write=False)
    return vector


@dataclass(frozen=True, eq=False)
class Claim:
    payoffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "payoffs", _frozen_vector(self.payoffs, "claim payoffs"))

    @staticmethod
    def constant(value: float, n_states: int) -> "Claim":
        return Claim(np.full(n_states, float(value)))

    @staticmethod
    def zero(n_states: int) -> "Claim":
        return Claim.constant(0.0, n_states)

    def __len__(self):
        return self.payoffs.size

    def __neg__(self) -> "Claim":
        return Claim(-self.payoffs)

    def __add__(self, cash: float) -> "Claim":
        return Claim(self.payoffs + float(cash))

    def __eq__(self, other):
        return isinstance(other, Claim) and np.array_equal(self.payoffs, other.payoffs)

    def __hash__(self):
        return hash(self.payoffs.tobytes())

    def to_list(self) -> list[float]:
        return self.payoffs.tolist()


@dataclass(frozen=True)
class PriceInterval:
    lower: float
    upper: float
    attained_lower: bool = False
    attained_upper: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise ConfigError(f"price interval lower {self.lower} exceeds upper {self.upper}")

    @property
    def is_degenerate(self) -> bool:
        return self.upper - self.lower <= Config.lp_tolerance * max(1.0, abs(self.lower), abs(self.upper))

    def contains(self, price: float) -> bool:
        if self.is_degenerate:
            return False
        return self.lower < price < self.upper

    def shift(self, cash: float) -> "PriceInterval":
        return PriceInterval(self.lower + cash, self.upper + cash, self.attained_lower, self.attained_upper)


@dataclass(frozen=True)
class Replication:
    replicable: bool
    cash: float = float("nan")
    theta: Optional[np.ndarray] = None

    def __bool__(self):
        return self.replicable

    @property
    def price(self) -> float:
        return self.cash


@dataclass(frozen=True, eq=False)
class FiniteMarket:
    """One trading date, finitely many states.

    `increments[j, i]` is the discounted gain of asset j in state i.
    """

    probs: np.ndarray
    increments: np.ndarray
    polytope_dimension: int = field(init=False)

    def __post_init__(self):
        probs = _frozen_vector(self.probs, "probs")
        increments = np.atleast_2d(np.array(self.increments, dtype=float))
        if increments.ndim != 2 or increments.shape[1] != probs.size:
            raise ConfigError(f"increments must have shape (d, {probs.size}), got {increments.shape}")
        if not np.all(np.isfinite(increments)):
            raise ConfigError("increments must be finite")
        if np.any(probs < Config.probability_floor):
            raise ConfigError(f"every state probability must exceed {Config.probability_floor}")
        if abs(probs.sum() - 1.0) > Config.probability_sum_tolerance:
            raise ConfigError(f"state probabilities sum to {probs.sum()}, not 1")
        increments.setflags(write=False)

        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "increments", increments)
        object.__setattr__(self, "polytope_dimension", validate_market(self))

    @property
    def n_states(self) -> int:
        return self.probs.size

    @property
    def n_assets(self) -> int:
        return self.increments.shape[0]

    def check_claim(self, claim: Claim):
        if len(claim) != self.n_states:
            raise ConfigError(f"claim has {len(claim)} payoffs but the market has {self.n_states} states")

    def expectation(self, values) -> float:
        return float(np.asarray(values, dtype=float) @ self.probs)

    def to_dict(self) -> dict:
        return {"probs": self.probs.tolist(), "increments": self.increments.tolist()}


def _martingale_constraints(market: FiniteMarket) -> tuple[np.ndarray, np.ndarray]:
    matrix = np.vstack([market.increments, np.ones(market.n_states)])
    rhs = np.zeros(market.n_assets + 1)
    rhs[-1] = 1.0
    return matrix, rhs


def interior_martingale_measure(market: FiniteMarket) -> tuple[np.ndarray, float]:
    """Martingale measure maximizing its smallest state weight."""
    n = market.probs.size
    matrix, rhs = _martingale_constraints(market)
    objective = np.zeros(n + 1)
    objective[-1] = -1.0
    result = linprog(
        objective,
        A_ub=np.hstack([-np.eye(n), np.ones((n, 1))]),
        b_ub=np.zeros(n),
        A_eq=np.hstack([matrix, np.zeros((matrix.shape[0], 1))]),
        b_eq=rhs,
        bounds=[(0.0, None)] * n + [(None, 1.0)],
        method="highs"
    )
    if result.status != 0:
        return np.full(n, np.nan), -np.inf
    return result.x[:n], float(result.x[-1])


def validate_market(market: FiniteMarket) -> int:
    _, smallest_weight = interior_martingale_measure(market)
    if not smallest_weight > Config.lp_tolerance:
        raise ArbitrageDetected("no strictly positive martingale measure exists")

    matrix, _ = _martingale_constraints(market)
    rank = np.linalg.matrix_rank(matrix, tol=Config.rank_tolerance * max(1.0, np.abs(matrix).max()))
    dimension = market.n_states - rank
    if dimension == 0:
        raise CompleteMarket("the martingale measure is unique, every claim is replicable")
    return int(dimension)


def _extreme_expectation(market: FiniteMarket, payoffs: np.ndarray) -> float:
    matrix, rhs = _martingale_constraints(market)
    result = linprog(payoffs, A_eq=matrix, b_eq=rhs, bounds=(0.0, None), method="highs")
    if result.status != 0:
        raise NonConvergence(f"martingale bound LP failed: {result.message}")
    return float(result.fun)


def martingale_vertices(market: FiniteMarket) -> np.ndarray:
    """Vertices of the closed martingale polytope, one per row."""
    if market.n_states > Config.vertex_enumeration_max_states:
        raise ConfigError(f"vertex enumeration is limited to {Config.vertex_enumeration_max_states} states")

    matrix, rhs = _martingale_constraints(market)
    rank = np.linalg.matrix_rank(matrix)
    vertices: list[np.ndarray] = []
    for support in itertools.combinations(range(market.n_states), rank):
        columns = matrix[:, support]
        if np.linalg.matrix_rank(columns) < rank:
            continue
        weights = np.linalg.lstsq(columns, rhs, rcond=None)[0]
        if not np.allclose(columns @ weights, rhs, atol=1e-12) or np.any(weights < -1e-12):
            continue
        vertex = np.zeros(market.n_states)
        vertex[list(support)] = np.clip(weights, 0.0, None)
        if not any(np.allclose(vertex, known, atol=1e-12) for known in vertices):
            vertices.append(vertex)
    return np.array(vertices)


def arbitrage_bounds(market: FiniteMarket, claim: Claim, method: str = "lp") -> PriceInterval:
    market.check_claim(claim)
    payoffs = claim.payoffs
    if method == "vertices":
        expectations = martingale_vertices(market) @ payoffs
        lower, upper = float(expectations.min()), float(expectations.max())
    elif method == "lp":
        lower = _extreme_expectation(market, payoffs)
        upper = -_extreme_expectation(market, -payoffs)
    else:
        raise ConfigError(f"unknown bounds method [{method}]")

    upper = max(upper, lower)
    # a linear functional attains its extremum on the open polytope only when it is constant there
    degenerate = upper - lower <= Config.lp_tolerance * max(1.0, abs(lower), abs(upper))
    return PriceInterval(lower, upper, attained_lower=degenerate, attained_upper=degenerate)


def is_replicable(market: FiniteMarket, claim: Claim) -> Replication:
    market.check_claim(claim)
    basis = np.vstack([np.ones(market.n_states), market.increments]).T
    coefficients = np.linalg.lstsq(basis, claim.payoffs, rcond=None)[0]
    residual = np.linalg.norm(basis @ coefficients - claim.payoffs)
    if residual > Config.rank_tolerance * max(1.0, np.linalg.norm(claim.payoffs)):
        return Replication(False)
    return Replication(True, float(coefficients[0]), coefficients[1:])


def x_zero(market: FiniteMarket, claim: Claim) -> float:
    return arbitrage_bounds(market, claim).upper
