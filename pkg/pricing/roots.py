from typing import Callable

import numpy as np
from scipy.optimize import brentq

from entities.errors import NonConvergence, OutOfRange
from util.config import Config


def bracket_monotone(
        func: Callable[[float], float],
        start: float,
        increasing: bool,
        floor: float = -np.inf
) -> tuple[float, float]:
    """Expands geometrically from `start` until `func` changes sign on (floor, inf)."""
    value = func(start)
    if value == 0.0:
        return start, start

    go_right = (value < 0.0) == increasing
    previous = start
    step = 1.0
    for _ in range(Config.bracket_max_expansions):
        if go_right:
            candidate = previous + step
        elif np.isfinite(floor):
            candidate = floor + 0.5 * (previous - floor)
            if candidate - floor <= Config.bracket_floor_gap * max(1.0, abs(floor)):
                raise OutOfRange(f"target is not reached above the wealth floor {floor}")
        else:
            candidate = previous - step

        candidate_value = func(candidate)
        if np.sign(candidate_value) != np.sign(value):
            return (previous, candidate) if previous < candidate else (candidate, previous)

        previous, value = candidate, candidate_value
        step *= 2.0
    raise OutOfRange(f"no sign change found after {Config.bracket_max_expansions} expansions from {start}")


def find_root(func: Callable[[float], float], lower: float, upper: float, what: str) -> tuple[float, int]:
    if lower == upper:
        return lower, 0
    root, result = brentq(
        func,
        lower,
        upper,
        xtol=Config.root_xtol,
        maxiter=Config.root_max_iterations,
        full_output=True,
        disp=False
    )
    if not result.converged:
        raise NonConvergence(f"{what} did not converge: {result.flag}")
    return float(root), int(result.iterations)
