from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from entities.errors import ConfigError, LogDomain, StepUnderflow
from entities.nontraded import MzModel
from entities.utility import Role
from pricing.pde import PdeGrid, pde_phi_solver
from util.config import Config


class Engine(str, Enum):
    mc = "mc"
    pde = "pde"


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    stderr: float
    n_paths: int


@dataclass(frozen=True)
class MzPriceResult:
    t: float
    y: float
    v_s: float
    v_b: float
    delta_s: float
    delta_b: float
    p_star: float
    v_s_stderr: float = 0.0
    v_b_stderr: float = 0.0
    p_star_stderr: float = 0.0
    engine: str = Engine.mc.value

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "y": self.y,
            "v_s": self.v_s,
            "v_b": self.v_b,
            "delta_s": self.delta_s,
            "delta_b": self.delta_b,
            "p_star": self.p_star,
            "v_s_stderr": self.v_s_stderr,
            "v_b_stderr": self.v_b_stderr,
            "p_star_stderr": self.p_star_stderr,
            "engine": self.engine
        }


def q0_drift(model: MzModel, y, t: float):
    """Drift of Y under the minimal-entropy measure."""
    return np.asarray(model.b(y, t)) - model.rho * model.mu / model.sigma * np.asarray(model.a(y, t))


def _simulate_terminal(model: MzModel, t: float, y: float, shocks: np.ndarray, dt: float) -> np.ndarray:
    state = np.full(shocks.shape[0], float(y))
    root_dt = np.sqrt(dt)
    for step in range(shocks.shape[1]):
        s = t + step * dt
        state = state + q0_drift(model, state, s) * dt + np.asarray(model.a(state, s)) * root_dt * shocks[:, step]
    return state


def mc_conditional_expectation(
        model: MzModel,
        t: float,
        y: float,
        integrand: Callable[[np.ndarray], np.ndarray],
        n_paths: int = Config.mc_default_paths,
        seed: int = Config.mc_default_seed,
        antithetic: bool = True
) -> McEstimate:
    """Euler-Maruyama estimate of E[integrand(Y_T) | Y_t = y] under the minimal-entropy measure.

    Paths are drawn in fixed-size batches, each from its own child of the master seed.
    Antithetic pairs flip the whole Brownian increment and count as one sample.
    """
    if n_paths < 2:
        raise ConfigError("at least two paths are needed for a standard error")
    horizon = model.T - t
    n_steps = max(1, int(np.ceil(Config.mc_steps_per_year * horizon)))
    dt = horizon / n_steps
    if not dt >= Config.mc_min_step:
        raise StepUnderflow(f"time step {dt} collapsed; evaluation time {t} is at the horizon")

    per_batch = Config.mc_batch_size
    sizes = [per_batch] * (n_paths // per_batch) + ([n_paths % per_batch] if n_paths % per_batch else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    samples = []
    for child, size in zip(children, sizes):
        rng = np.random.default_rng(child)
        if antithetic:
            half = max(size // 2, 1)
            shocks = rng.standard_normal((half, n_steps))
            terminal = _simulate_terminal(model, t, y, np.concatenate([shocks, -shocks]), dt)
            values = np.broadcast_to(np.asarray(integrand(terminal), dtype=float), terminal.shape)
            samples.append(0.5 * (values[:half] + values[half:]))
        else:
            terminal = _simulate_terminal(model, t, y, rng.standard_normal((size, n_steps)), dt)
            samples.append(np.broadcast_to(np.asarray(integrand(terminal), dtype=float), terminal.shape))

    samples = np.concatenate(samples)
    stderr = float(np.std(samples, ddof=1) / np.sqrt(samples.size)) if samples.size > 1 else 0.0
    return McEstimate(float(np.mean(samples)), stderr, n_paths)


def dynamic_risk_sharing_price(model: MzModel, t: float, v_s: float, v_b: float) -> float:
    gamma_s, gamma_b = model.gamma_s, model.gamma_b
    log_ratio = np.log(gamma_s * model.lam) + model.log_delta(Role.buyer, t) \
        - np.log(gamma_b * (1.0 - model.lam)) - model.log_delta(Role.seller, t)
    return float((gamma_s * v_s + gamma_b * v_b) / (gamma_s + gamma_b) + log_ratio / (gamma_s + gamma_b))


def _pde_grid(model: MzModel, grid: Optional[tuple[int, int]]) -> PdeGrid:
    ny, nt = grid or Config.pde_default_grid
    return PdeGrid.for_model(model, ny, nt)


def indifference_prices_mz(
        model: MzModel,
        t: float,
        y: float,
        engine: Engine = Engine.mc,
        n_paths: int = Config.mc_default_paths,
        seed: int = Config.mc_default_seed,
        grid: Optional[tuple[int, int]] = None
) -> MzPriceResult:
    delta_s, delta_b = float(model.delta(Role.seller, t)), float(model.delta(Role.buyer, t))
    if t >= model.T:
        payoff = float(model.g(y))
        return MzPriceResult(t, y, payoff, payoff, delta_s, delta_b,
                             dynamic_risk_sharing_price(model, t, payoff, payoff), engine=Engine(engine).value)

    stderr_s = stderr_b = 0.0
    if Engine(engine) == Engine.mc:
        low, high = model.g.bounds
        c_s = model.gamma_s * model.rho_bar_sq
        c_b = model.gamma_b * model.rho_bar_sq
        # shifted by the payoff bounds so the exponentials stay below one
        seller = mc_conditional_expectation(model, t, y, lambda y_t: np.exp(c_s * (model.g(y_t) - high)), n_paths, seed)
        buyer = mc_conditional_expectation(model, t, y, lambda y_t: np.exp(-c_b * (model.g(y_t) - low)), n_paths, seed)
        v_s = high + np.log(seller.estimate) / c_s
        v_b = low - np.log(buyer.estimate) / c_b
        stderr_s = seller.stderr / (seller.estimate * c_s)
        stderr_b = buyer.stderr / (buyer.estimate * c_b)
    else:
        pde_grid = _pde_grid(model, grid)
        v_s = pde_phi_solver(model, Role.seller, 0.0, pde_grid).price_at(t, y)
        v_b = pde_phi_solver(model, Role.buyer, 0.0, pde_grid).price_at(t, y)

    gamma_s, gamma_b = model.gamma_s, model.gamma_b
    return MzPriceResult(
        t=t,
        y=y,
        v_s=float(v_s),
        v_b=float(v_b),
        delta_s=delta_s,
        delta_b=delta_b,
        p_star=dynamic_risk_sharing_price(model, t, v_s, v_b),
        v_s_stderr=stderr_s,
        v_b_stderr=stderr_b,
        p_star_stderr=(gamma_s * stderr_s + gamma_b * stderr_b) / (gamma_s + gamma_b),
        engine=Engine(engine).value
    )


def reservation_price_mz(
        model: MzModel,
        t: float,
        y: float,
        side: Role,
        eps: float,
        prices: Optional[MzPriceResult] = None,
        **engine_options
) -> float:
    """v_s - ln(1 + eps delta_s) / gamma_s for the seller, v_b + ln(1 + eps delta_b) / gamma_b for the buyer."""
    delta = float(model.delta(side, t))
    if not 1.0 + eps * delta > 0.0:
        raise LogDomain(f"1 + eps * delta = {1.0 + eps * delta} is not positive")
    prices = prices or indifference_prices_mz(model, t, y, **engine_options)
    shift = np.log1p(eps * delta) / model.gamma(side)
    if side == Role.seller:
        return float(prices.v_s - shift)
    return float(prices.v_b + shift)


def risk_sharing_price_mz(model: MzModel, t: float, y: float, **engine_options) -> float:
    return indifference_prices_mz(model, t, y, **engine_options).p_star
