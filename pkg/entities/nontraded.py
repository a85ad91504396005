from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from entities.errors import ConfigError
from entities.utility import Role
from util.config import Config

Number = Union[float, np.ndarray]


class FunctionKind(str, Enum):
    constant = "constant"
    mean_reverting = "mean_reverting"
    capped_call = "capped_call"
    capped_put = "capped_put"
    clipped = "clipped"


class ModelFunction:
    """A named coefficient or payoff with JSON parameters, vectorized over y."""

    kind: FunctionKind
    parameters: tuple[str, ...] = ()

    __kind_to_class = None

    def __init__(self, **params: float):
        missing = [name for name in self.parameters if name not in params]
        if missing:
            raise ConfigError(f"[{self.kind.value}] is missing parameter(s) {missing}")
        self.params = {name: float(params[name]) for name in self.parameters}

    def __call__(self, y: Number, t: float = 0.0) -> Number:
        raise NotImplementedError

    @property
    def bounds(self) -> tuple[float, float]:
        return -np.inf, np.inf

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, **self.params}

    @staticmethod
    def build(name: str, block) -> "ModelFunction":
        if not ModelFunction.__kind_to_class:
            ModelFunction.__kind_to_class = {
                cls.kind.value: cls for cls in (Constant, MeanReverting, CappedCall, CappedPut, Clipped)
            }

        if not isinstance(block, dict):
            raise ConfigError(f"model function [{name}] must be an object")
        kind = block.get("kind", block.get(name))
        if kind not in ModelFunction.__kind_to_class:
            raise ConfigError(f"unknown model function kind [{kind}] for [{name}]")
        params = {key: value for key, value in block.items() if key not in ("kind", name)}
        return ModelFunction.__kind_to_class[kind](**params)


class Constant(ModelFunction):
    kind = FunctionKind.constant
    parameters = ("value",)

    def __call__(self, y: Number, t: float = 0.0) -> Number:
        return np.full_like(np.asarray(y, dtype=float), self.params["value"]) if np.ndim(y) else self.params["value"]

    @property
    def bounds(self) -> tuple[float, float]:
        return self.params["value"], self.params["value"]


class MeanReverting(ModelFunction):
    """kappa * (mean - y)."""

    kind = FunctionKind.mean_reverting
    parameters = ("kappa", "mean")

    def __call__(self, y: Number, t: float = 0.0) -> Number:
        return self.params["kappa"] * (self.params["mean"] - np.asarray(y, dtype=float))


class CappedCall(ModelFunction):
    kind = FunctionKind.capped_call
    parameters = ("strike", "cap")

    def __call__(self, y: Number, t: float = 0.0) -> Number:
        return np.clip(np.asarray(y, dtype=float) - self.params["strike"], 0.0, self.params["cap"])

    @property
    def bounds(self) -> tuple[float, float]:
        return 0.0, self.params["cap"]


class CappedPut(ModelFunction):
    kind = FunctionKind.capped_put
    parameters = ("strike", "cap")

    def __call__(self, y: Number, t: float = 0.0) -> Number:
        return np.clip(self.params["strike"] - np.asarray(y, dtype=float), 0.0, self.params["cap"])

    @property
    def bounds(self) -> tuple[float, float]:
        return 0.0, self.params["cap"]


class Clipped(ModelFunction):
    kind = FunctionKind.clipped
    parameters = ("lower", "upper")

    def __call__(self, y: Number, t: float = 0.0) -> Number:
        return np.clip(np.asarray(y, dtype=float), self.params["lower"], self.params["upper"])

    @property
    def bounds(self) -> tuple[float, float]:
        return self.params["lower"], self.params["upper"]


@dataclass(frozen=True, eq=False)
class MzModel:
    """Traded asset dS = mu S dt + sigma S dW1 and non-traded
    dY = b(Y, t) dt + a(Y, t) (rho dW1 + sqrt(1 - rho^2) dW2); the claim pays g(Y_T)."""

    mu: float
    sigma: float
    rho: float
    T: float
    a: ModelFunction
    b: ModelFunction
    g: ModelFunction
    gamma_s: float
    gamma_b: float
    x_s: float
    x_b: float
    lam: float
    y0: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if not -1.0 < self.rho < 1.0:
            raise ConfigError(f"rho must lie in (-1, 1), got {self.rho}")
        if not self.T > 0.0:
            raise ConfigError(f"horizon must be positive, got {self.T}")
        if not (self.gamma_s > 0.0 and self.gamma_b > 0.0):
            raise ConfigError("risk aversions must be positive")
        if not 0.0 < self.lam < 1.0:
            raise ConfigError(f"sharing weight must lie strictly inside (0, 1), got {self.lam}")

        low, high = self.g.bounds
        if not (np.isfinite(low) and np.isfinite(high)):
            raise ConfigError(f"payoff [{self.g.kind.value}] must be bounded")
        domain = np.linspace(*self.y_domain(), 257)
        samples = self.g(domain)
        if np.any(samples < low - 1e-12) or np.any(samples > high + 1e-12):
            raise ConfigError("payoff leaves its declared bounds")
        for t in np.linspace(0.0, self.T, 5):
            if not np.all(np.asarray(self.a(domain, t)) > 0.0):
                raise ConfigError("diffusion coefficient must be positive on the computational domain")

    @property
    def rho_bar_sq(self) -> float:
        return 1.0 - self.rho ** 2

    @property
    def sharpe_sq(self) -> float:
        return (self.mu / self.sigma) ** 2

    def gamma(self, side: Role) -> float:
        return self.gamma_s if side == Role.seller else self.gamma_b

    def wealth(self, side: Role) -> float:
        return self.x_s if side == Role.seller else self.x_b

    def log_delta(self, side: Role, t: Number) -> Number:
        return self.gamma(side) * self.wealth(side) + 0.5 * self.sharpe_sq * (self.T - np.asarray(t, dtype=float))

    def delta(self, side: Role, t: Number) -> Number:
        return np.exp(self.log_delta(side, t))

    def stationary_deviation(self) -> float:
        scale = float(np.asarray(self.a(self.y0, 0.0)))
        if isinstance(self.b, MeanReverting) and self.b.params["kappa"] > 0.0:
            return scale / np.sqrt(2.0 * self.b.params["kappa"])
        return scale * np.sqrt(self.T)

    def y_domain(self) -> tuple[float, float]:
        width = Config.pde_stationary_deviations * self.stationary_deviation()
        return self.y0 - width, self.y0 + width

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "sigma": self.sigma,
            "rho": self.rho,
            "T": self.T,
            "y0": self.y0,
            "a": self.a.to_dict(),
            "b": self.b.to_dict(),
            "g": self.g.to_dict()
        }
