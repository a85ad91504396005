from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from entities.errors import ConfigError, GridTooCoarse, LogDomain
from entities.nontraded import MzModel
from entities.utility import Role
from util.config import Config


@dataclass(frozen=True)
class PdeGrid:
    ny: int
    nt: int
    y_min: float
    y_max: float

    def __post_init__(self):
        if self.ny < 5 or self.nt < 1:
            raise ConfigError(f"PDE grid needs at least 5 space nodes and 1 time step, got {self.ny}x{self.nt}")
        if not self.y_min < self.y_max:
            raise ConfigError("PDE domain must be increasing")

    @staticmethod
    def for_model(model: MzModel, ny: int, nt: int, domain: Optional[tuple[float, float]] = None) -> "PdeGrid":
        y_min, y_max = domain or model.y_domain()
        return PdeGrid(ny, nt, y_min, y_max)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)


@dataclass(frozen=True, eq=False)
class PhiField:
    side: Role
    eps: float
    y: np.ndarray
    t: np.ndarray
    phi: np.ndarray
    price: np.ndarray

    def price_at(self, t: float, y: float) -> float:
        position = np.clip(t / self.t[-1], 0.0, 1.0) * (self.t.size - 1)
        before = min(int(np.floor(position)), self.t.size - 2)
        weight = position - before
        left = np.interp(y, self.y, self.price[before])
        right = np.interp(y, self.y, self.price[before + 1])
        return float((1.0 - weight) * left + weight * right)


def _operator(model: MzModel, y: np.ndarray, dy: float, t: float, source: float) -> tuple[np.ndarray, ...]:
    """Tridiagonal coefficients of 1/2 a^2 d_yy + drift d_y + source.

    Boundary rows drop the second derivative and take a one-sided first derivative.
    """
    diffusion = np.broadcast_to(np.asarray(model.a(y, t), dtype=float), y.shape)
    drift = np.broadcast_to(np.asarray(model.b(y, t), dtype=float), y.shape) \
        - model.rho * model.mu / model.sigma * diffusion
    alpha = 0.5 * diffusion ** 2 / dy ** 2
    beta = drift / (2.0 * dy)

    lower = alpha - beta
    main = -2.0 * alpha + source
    upper = alpha + beta

    lower[0], main[0], upper[0] = 0.0, -drift[0] / dy + source, drift[0] / dy
    lower[-1], main[-1], upper[-1] = -drift[-1] / dy, drift[-1] / dy + source, 0.0
    return lower, main, upper


def _apply(coefficients: tuple[np.ndarray, ...], phi: np.ndarray) -> np.ndarray:
    lower, main, upper = coefficients
    result = main * phi
    result[1:] += lower[1:] * phi[:-1]
    result[:-1] += upper[:-1] * phi[1:]
    return result


def _banded(coefficients: tuple[np.ndarray, ...], scale: float) -> np.ndarray:
    """Rows of I - scale * A in solve_banded layout."""
    lower, main, upper = coefficients
    bands = np.zeros((3, main.size))
    bands[0, 1:] = -scale * upper[:-1]
    bands[1] = 1.0 - scale * main
    bands[2, :-1] = -scale * lower[1:]
    return bands


def _source(model: MzModel, side: Role, eps: float, t: float) -> float:
    """R'/R for R(t) = (1 + eps delta_t)^(1 - rho^2)."""
    delta = model.delta(side, t)
    return model.rho_bar_sq * eps * (-0.5 * model.sharpe_sq * delta) / (1.0 + eps * delta)


def pde_phi_solver(
        model: MzModel,
        side: Role,
        eps: float,
        grid: PdeGrid,
        check_residual: bool = True
) -> PhiField:
    """Crank-Nicolson march of the linear Cauchy problem behind the reservation price.

    The seller's Phi ends at exp(c g) / R(T) and the buyer's at exp(-c g) / R(T),
    with c = gamma (1 - rho^2); prices are ln(Phi) / c and -ln(Phi) / c.
    """
    if eps < 0.0 and not 1.0 + eps * model.delta(side, 0.0) > 0.0:
        raise LogDomain(f"1 + eps * delta is not positive for eps = {eps}")

    sign = 1.0 if side == Role.seller else -1.0
    c = model.gamma(side) * model.rho_bar_sq
    y = grid.y
    dy = y[1] - y[0]
    times = np.linspace(0.0, model.T, grid.nt + 1)
    dt = times[1] - times[0]

    phi = np.empty((grid.nt + 1, grid.ny))
    terminal_r = (1.0 + eps * model.delta(side, model.T)) ** model.rho_bar_sq
    phi[-1] = np.exp(sign * c * model.g(y)) / terminal_r

    later = _operator(model, y, dy, times[-1], _source(model, side, eps, times[-1]))
    for step, k in enumerate(range(grid.nt - 1, -1, -1)):
        current = _operator(model, y, dy, times[k], _source(model, side, eps, times[k]))
        # fully implicit start damps the payoff kink
        theta = 1.0 if step < Config.pde_implicit_start_steps else 0.5
        rhs = phi[k + 1] + (1.0 - theta) * dt * _apply(later, phi[k + 1])
        phi[k] = solve_banded((1, 1), _banded(current, theta * dt), rhs)
        later = current

    if np.any(~(phi > 0.0)):
        raise GridTooCoarse("the linear PDE produced non-positive values")
    price = sign * np.log(phi) / c
    field = PhiField(side, eps, y, times, phi, price)
    if check_residual:
        residual = quasilinear_residual(model, field)
        if residual > Config.pde_residual_tolerance:
            raise GridTooCoarse(f"quasilinear residual {residual:.3e} exceeds {Config.pde_residual_tolerance}")
    return field


def quasilinear_residual(model: MzModel, field: PhiField) -> float:
    """Largest interior residual of the price equation, scaled by T / max(1, |P|).

    Seller: P_t + 1/2 a^2 P_yy + drift P_y + 1/2 c a^2 P_y^2 + Lambda' = 0,
    buyer with the signs of the last two terms flipped, Lambda = ln(1 + eps delta_t) / gamma.
    """
    sign = 1.0 if field.side == Role.seller else -1.0
    c = model.gamma(field.side) * model.rho_bar_sq
    y, times, price = field.y, field.t, field.price
    dy, dt = y[1] - y[0], times[1] - times[0]

    margin = int(0.5 * (1.0 - Config.pde_residual_space_fraction) * y.size)
    columns = slice(max(margin, 1), y.size - max(margin, 1))
    last_level = int(Config.pde_residual_time_fraction * (times.size - 1))

    worst = 0.0
    for k in range(1, min(last_level, times.size - 2) + 1):
        t = times[k]
        level = price[k]
        p_t = (price[k + 1][columns] - price[k - 1][columns]) / (2.0 * dt)
        p_y = (level[2:] - level[:-2])[columns.start - 1:columns.stop - 1] / (2.0 * dy)
        p_yy = (level[2:] - 2.0 * level[1:-1] + level[:-2])[columns.start - 1:columns.stop - 1] / dy ** 2
        points = y[columns]
        diffusion = np.asarray(model.a(points, t), dtype=float)
        drift = np.asarray(model.b(points, t), dtype=float) - model.rho * model.mu / model.sigma * diffusion
        delta = model.delta(field.side, t)
        lambda_rate = field.eps * (-0.5 * model.sharpe_sq * delta) / (1.0 + field.eps * delta) / model.gamma(field.side)
        residual = p_t + 0.5 * diffusion ** 2 * p_yy + drift * p_y \
            + sign * (0.5 * c * diffusion ** 2 * p_y ** 2 + lambda_rate)
        worst = max(worst, float(np.max(np.abs(residual))))
    return worst * model.T / max(1.0, float(np.max(np.abs(price))))
