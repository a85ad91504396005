import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

from entities.errors import ConfigError, DomainError, ElasticityWarning, InvalidUtility, NonPositiveMarginal
from util.config import Config

Number = Union[float, np.ndarray]


class UtilityKind(str, Enum):
    exponential = "exponential"
    power = "power"
    log = "log"
    custom = "custom"


class Domain(str, Enum):
    whole_line = "whole_line"
    positive_half_line = "positive_half_line"


class Role(str, Enum):
    seller = "seller"
    buyer = "buyer"


def _as_output(values: np.ndarray, like) -> Number:
    return float(values) if np.ndim(like) == 0 else values


class Utility:
    kind: UtilityKind
    domain: Domain = Domain.whole_line

    __kind_to_builder = None

    @property
    def is_type_two(self) -> bool:
        return self.domain == Domain.positive_half_line

    @property
    def left_edge(self) -> float:
        return 0.0 if self.is_type_two else -np.inf

    @property
    def sup_value(self) -> float:
        """U(+inf)."""
        return np.inf

    @property
    def asymptotic_elasticity(self) -> float:
        return 0.0

    def evaluate(self, w: Number) -> Number:
        raise NotImplementedError

    def derivative(self, w: Number) -> Number:
        raise NotImplementedError

    def second_derivative(self, w: Number) -> Number:
        raise NotImplementedError

    def inverse_derivative(self, y: Number) -> Number:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"kind": self.kind.value}

    def _check_inside(self, w: np.ndarray):
        if self.is_type_two and np.any(w <= 0.0):
            raise DomainError(f"{self.kind.value} utility is undefined at non-positive wealth")

    @staticmethod
    def _check_marginal(y: np.ndarray):
        if np.any(~(y > 0.0)):
            raise NonPositiveMarginal("marginal utility must be strictly positive")

    @staticmethod
    def build(block: dict) -> "Utility":
        if not Utility.__kind_to_builder:
            Utility.__kind_to_builder = {
                UtilityKind.exponential.value: lambda params: ExponentialUtility(Utility.__parameter(params, "gamma")),
                UtilityKind.power.value: lambda params: PowerUtility.build(Utility.__parameter(params, "R")),
                UtilityKind.log.value: lambda params: LogUtility()
            }

        kind = block.get("kind")
        if kind not in Utility.__kind_to_builder:
            raise ConfigError(f"unknown utility kind [{kind}]")
        return Utility.__kind_to_builder[kind](block)

    @staticmethod
    def __parameter(params: dict, name: str) -> float:
        if name not in params:
            raise ConfigError(f"utility parameter [{name}] is missing")
        return float(params[name])


class ExponentialUtility(Utility):
    kind = UtilityKind.exponential

    def __init__(self, gamma: float):
        if not gamma > 0.0:
            raise ConfigError(f"risk aversion must be positive, got {gamma}")
        self.gamma = float(gamma)

    @property
    def sup_value(self) -> float:
        return 0.0

    def evaluate(self, w: Number) -> Number:
        values = np.asarray(w, dtype=float)
        with np.errstate(over="ignore"):
            return _as_output(-np.exp(-self.gamma * values), w)

    def derivative(self, w: Number) -> Number:
        values = np.asarray(w, dtype=float)
        with np.errstate(over="ignore"):
            return _as_output(self.gamma * np.exp(-self.gamma * values), w)

    def second_derivative(self, w: Number) -> Number:
        values = np.asarray(w, dtype=float)
        with np.errstate(over="ignore"):
            return _as_output(-self.gamma ** 2 * np.exp(-self.gamma * values), w)

    def inverse_derivative(self, y: Number) -> Number:
        values = np.asarray(y, dtype=float)
        Utility._check_marginal(values)
        return _as_output(-np.log(values / self.gamma) / self.gamma, y)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "gamma": self.gamma}


class LogUtility(Utility):
    kind = UtilityKind.log
    domain = Domain.positive_half_line

    def evaluate(self, w: Number) -> Number:
        values = np.asarray(w, dtype=float)
        inside = values > 0.0
        return _as_output(np.where(inside, np.log(np.where(inside, values, 1.0)), -np.inf), w)

    def derivative(self, w: Number) -> Number:
        values = np.asarray(w, dtype=float)
        self._check_inside(values)
        return _as_output(1.0 / values, w)

    def second_derivative(self, w: Number) -> Number:
        values = np.asarray(w, dtype=float)
        self._check_inside(values)
        return _as_output(-1.0 / values ** 2, w)

    def inverse_derivative(self, y: Number) -> Number:
        values = np.asarray(y, dtype=float)
        Utility._check_marginal(values)
        return _as_output(1.0 / values, y)


class PowerUtility(Utility):
    """w^(1-R) / (1-R) on the positive half-line."""

    kind = UtilityKind.power
    domain = Domain.positive_half_line

    def __init__(self, risk_aversion: float):
        if not risk_aversion > 0.0 or risk_aversion == 1.0:
            raise ConfigError(f"power utility needs R > 0 and R != 1, got {risk_aversion}")
        self.risk_aversion = float(risk_aversion)

    @staticmethod
    def build(risk_aversion: float) -> Utility:
        if risk_aversion == 1.0:
            return LogUtility()
        return PowerUtility(risk_aversion)

    @property
    def sup_value(self) -> float:
        return np.inf if self.risk_aversion < 1.0 else 0.0

    @property
    def asymptotic_elasticity(self) -> float:
        return max(0.0, 1.0 - self.risk_aversion)

    def evaluate(self, w: Number) -> Number:
        values = np.asarray(w, dtype=float)
        exponent = 1.0 - self.risk_aversion
        inside = values > 0.0
        safe = np.where(inside, values, 1.0)
        at_zero = 0.0 if exponent > 0.0 else -np.inf
        result = np.where(inside, safe ** exponent / exponent, np.where(values == 0.0, at_zero, -np.inf))
        return _as_output(result, w)

    def derivative(self, w: Number) -> Number:
        values = np.asarray(w, dtype=float)
        self._check_inside(values)
        return _as_output(values ** -self.risk_aversion, w)

    def second_derivative(self, w: Number) -> Number:
        values = np.asarray(w, dtype=float)
        self._check_inside(values)
        return _as_output(-self.risk_aversion * values ** (-self.risk_aversion - 1.0), w)

    def inverse_derivative(self, y: Number) -> Number:
        values = np.asarray(y, dtype=float)
        Utility._check_marginal(values)
        return _as_output(values ** (-1.0 / self.risk_aversion), y)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "R": self.risk_aversion}


class CustomUtility(Utility):
    """User-supplied utility; callables must accept numpy arrays."""

    kind = UtilityKind.custom

    def __init__(
            self,
            evaluate: Callable[[np.ndarray], np.ndarray],
            derivative: Callable[[np.ndarray], np.ndarray],
            inverse_derivative: Callable[[np.ndarray], np.ndarray],
            domain: Domain = Domain.whole_line,
            second_derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None,
            sup_value: float = np.inf
    ):
        self.__evaluate = evaluate
        self.__derivative = derivative
        self.__inverse_derivative = inverse_derivative
        self.__second_derivative = second_derivative
        self.domain = domain
        self.__sup_value = float(sup_value)
        self.__spot_check()

    @property
    def sup_value(self) -> float:
        return self.__sup_value

    def evaluate(self, w: Number) -> Number:
        values = np.asarray(w, dtype=float)
        if not self.is_type_two:
            return _as_output(np.asarray(self.__evaluate(values), dtype=float), w)
        inside = values > 0.0
        result = np.where(inside, self.__evaluate(np.where(inside, values, 1.0)), -np.inf)
        return _as_output(result, w)

    def derivative(self, w: Number) -> Number:
        values = np.asarray(w, dtype=float)
        self._check_inside(values)
        return _as_output(np.asarray(self.__derivative(values), dtype=float), w)

    def second_derivative(self, w: Number) -> Number:
        values = np.asarray(w, dtype=float)
        self._check_inside(values)
        if self.__second_derivative:
            return _as_output(np.asarray(self.__second_derivative(values), dtype=float), w)
        step = Config.finite_difference_step * np.maximum(1.0, np.abs(values))
        if self.is_type_two:
            step = np.minimum(step, 0.5 * values)
        upper = np.asarray(self.__derivative(values + step), dtype=float)
        lower = np.asarray(self.__derivative(values - step), dtype=float)
        return _as_output((upper - lower) / (2.0 * step), w)

    def inverse_derivative(self, y: Number) -> Number:
        values = np.asarray(y, dtype=float)
        Utility._check_marginal(values)
        return _as_output(np.asarray(self.__inverse_derivative(values), dtype=float), y)

    def __spot_check(self):
        grid = np.geomspace(1e-3, 1e3, 201) if self.is_type_two else np.linspace(-5.0, 5.0, 201)
        values = np.asarray(self.__evaluate(grid), dtype=float)
        marginals = np.asarray(self.__derivative(grid), dtype=float)
        if not np.all(np.diff(values) > 0.0) or not np.all(marginals > 0.0):
            raise InvalidUtility("custom utility is not strictly increasing on the check grid")
        if not np.all(np.diff(marginals) < 0.0):
            raise InvalidUtility("custom utility is not strictly concave on the check grid")

        far = np.geomspace(1e2, 1e6, 50)
        far_values = np.asarray(self.__evaluate(far), dtype=float)
        positive = far_values > 0.0
        if np.any(positive):
            elasticity = far[positive] * np.asarray(self.__derivative(far[positive]), dtype=float) / far_values[positive]
            if elasticity.max() >= 1.0 - 1e-3:
                warnings.warn(
                    f"custom utility may violate reasonable asymptotic elasticity (w U'/U reaches {elasticity.max():.4f})",
                    ElasticityWarning
                )


@dataclass(frozen=True)
class Agent:
    utility: Utility
    wealth: float
    role: Role

    def to_dict(self) -> dict:
        return {"utility": self.utility.to_dict(), "wealth": self.wealth}


def evaluate(utility: Utility, w: Number) -> Number:
    return utility.evaluate(w)


def derivative(utility: Utility, w: Number) -> Number:
    return utility.derivative(w)


def inverse_derivative(utility: Utility, y: Number) -> Number:
    return utility.inverse_derivative(y)
