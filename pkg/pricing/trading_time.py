from dataclasses import dataclass
from enum import Enum

import numpy as np

from entities.errors import GridTooCoarse
from entities.nontraded import MzModel
from entities.utility import Role
from pricing.pde import PdeGrid, pde_phi_solver
from util.config import Config


class StopRule(str, Enum):
    any = "any"
    maturity = "maturity"


@dataclass(frozen=True, eq=False)
class TradingTimeResult:
    times: np.ndarray
    y: np.ndarray
    total_risk: np.ndarray
    value: np.ndarray
    stop: np.ndarray
    value_at_start: float
    risk_at_start: float
    expected_terminal_risk: float
    rule: StopRule


def total_risk(model: MzModel, t, v_s, v_b):
    """lam eps_s + (1 - lam) eps_b at the time-t optimum of the exponential problem."""
    gamma_s, gamma_b, lam = model.gamma_s, model.gamma_b, model.lam
    log_delta_s = model.log_delta(Role.seller, t)
    log_delta_b = model.log_delta(Role.buyer, t)
    log_m = (gamma_b * (np.log(lam * gamma_s) - log_delta_s)
             + gamma_s * (np.log((1.0 - lam) * gamma_b) - log_delta_b)
             + gamma_s * gamma_b * (np.asarray(v_s) - np.asarray(v_b))) / (gamma_s + gamma_b)
    m = np.exp(log_m)
    eps_s = -np.exp(-log_delta_s) + m / (lam * gamma_s)
    eps_b = -np.exp(-log_delta_b) + m / ((1.0 - lam) * gamma_b)
    return lam * eps_s + (1.0 - lam) * eps_b


def _transition_probabilities(model: MzModel, y: np.ndarray, t: float, dt: float, dy: float) -> tuple[np.ndarray, ...]:
    drift = np.broadcast_to(np.asarray(model.b(y, t), dtype=float), y.shape) * dt
    variance = np.broadcast_to(np.asarray(model.a(y, t), dtype=float), y.shape) ** 2 * dt
    spread = (variance + drift ** 2) / dy ** 2
    up = 0.5 * (spread + drift / dy)
    down = 0.5 * (spread - drift / dy)
    middle = 1.0 - spread
    if min(up.min(), down.min(), middle.min()) < Config.lattice_probability_floor:
        raise GridTooCoarse(f"lattice probabilities turn negative at t = {t:.4f}; refine the time step")
    return np.clip(up, 0.0, None), np.clip(middle, 0.0, None), np.clip(down, 0.0, None)


def optimal_trading_time(
        model: MzModel,
        y0: float,
        n_steps: int = Config.lattice_default_steps,
        rule: StopRule = StopRule.any,
        pde_ny: int = Config.pde_default_grid[0]
) -> TradingTimeResult:
    """Backward induction V = min(E, E[V next]) on a trinomial lattice for Y under the physical measure.

    E(t, y) is the total risk of trading at (t, y); the indifference price fields come from the PDE.
    """
    times = np.linspace(0.0, model.T, n_steps + 1)
    dt = times[1] - times[0]
    y_min, y_max = model.y_domain()
    half_width = max(abs(y_max - y0), abs(y0 - y_min))

    span = np.linspace(y0 - half_width, y0 + half_width, 257)
    a_max = max(float(np.max(np.asarray(model.a(span, t)))) for t in times)
    dy = a_max * np.sqrt(3.0 * dt)
    reach = int(np.ceil(half_width / dy))
    y = y0 + dy * np.arange(-reach, reach + 1)

    grid = PdeGrid(pde_ny, n_steps, float(y[0]), float(y[-1]))
    seller = pde_phi_solver(model, Role.seller, 0.0, grid, check_residual=False)
    buyer = pde_phi_solver(model, Role.buyer, 0.0, grid, check_residual=False)
    v_s = np.array([np.interp(y, seller.y, level) for level in seller.price])
    v_b = np.array([np.interp(y, buyer.y, level) for level in buyer.price])
    risk = total_risk(model, times[:, None], v_s, v_b)

    def induct(allow_stop: bool) -> tuple[np.ndarray, np.ndarray]:
        value = np.empty_like(risk)
        stop = np.zeros(risk.shape, dtype=bool)
        value[-1] = risk[-1]
        stop[-1] = True
        for k in range(n_steps - 1, -1, -1):
            up, middle, down = _transition_probabilities(model, y, times[k], dt, dy)
            ahead = value[k + 1]
            # moves off the lattice stay on the edge node
            continuation = up * np.append(ahead[1:], ahead[-1]) + middle * ahead + down * np.insert(ahead[:-1], 0, ahead[0])
            if allow_stop:
                stop[k] = risk[k] <= continuation
                value[k] = np.minimum(risk[k], continuation)
            else:
                value[k] = continuation
        return value, stop

    value, stop = induct(rule == StopRule.any)
    terminal_only, _ = induct(False)
    return TradingTimeResult(
        times=times,
        y=y,
        total_risk=risk,
        value=value,
        stop=stop,
        value_at_start=float(value[0, reach]),
        risk_at_start=float(risk[0, reach]),
        expected_terminal_risk=float(terminal_only[0, reach]),
        rule=StopRule(rule)
    )
