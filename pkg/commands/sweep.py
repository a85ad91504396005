from typing import Optional

import numpy as np
from rich.progress import Progress

from entities.errors import ConfigError
from entities.market import arbitrage_bounds
from entities.utility import UtilityKind
from pricing.risk_sharing import RiskSharingProblem, RiskSharingSolution, lambda_bounds, lambda_sweep
from util.constants import Columns
from util.helpers import Util, Printer


class Sweep:
    def __init__(
            self,
            config: Optional[str],
            preset: Optional[str],
            lambda_range: Optional[str],
            out: Optional[str]
    ):
        self.config = config
        self.preset = preset
        self.lambda_range = lambda_range
        self.out = out
        self.step_count = 1
        self.total_steps = 2

    def sweep(self):
        Sweep.start_message()

        with Util.exit_on_error(), Util.relay_warnings():
            run_config = Util.load_run_config(self.config, self.preset)
            if not run_config.is_market:
                raise ConfigError("sweeps need a market block")

            lambda_range = Util.parse_range(self.lambda_range)
            if lambda_range:
                start, stop, num = lambda_range
                lambdas = tuple(float(lam) for lam in np.linspace(start, stop, num))
            else:
                lambdas = run_config.sweep
            if not lambdas:
                raise ConfigError("no sharing weights to sweep; add a sweep block or pass --lambdas")

            problem = RiskSharingProblem(
                run_config.market,
                run_config.seller,
                run_config.buyer,
                run_config.claim,
                run_config.lam
            )
            rows = [Sweep.solution_row(solution) for solution in self.do_sweep(problem, sorted(lambdas))]
            rows.extend(self.do_bounds(problem))
            Util.write_csv(Columns.sweep, rows, self.out)

        Printer.done_all()

    def do_sweep(self, problem: RiskSharingProblem, lambdas: list[float]) -> list[RiskSharingSolution]:
        with Progress(console=Printer.console, auto_refresh=False) as progress:
            progress_task = progress.add_task(
                Printer.progress_label_with_steps(
                    "Sharing weight sweep",
                    self.step_count,
                    self.total_steps
                ),
                total=len(lambdas)
            )

            def advance(_: RiskSharingSolution):
                progress.advance(progress_task)
                progress.refresh()

            solutions = lambda_sweep(problem, lambdas, on_solved=advance)

        Printer.done()
        self.step_count += 1
        return solutions

    def do_bounds(self, problem: RiskSharingProblem) -> list[list]:
        Printer.waiting(f"Inverting the arbitrage-free interval (step {self.step_count} of {self.total_steps})...")
        interval = arbitrage_bounds(problem.market, problem.claim)
        exponential = problem.seller.utility.kind == UtilityKind.exponential \
            and problem.buyer.utility.kind == UtilityKind.exponential
        bounds = lambda_bounds(problem, interval, cross_check=exponential)
        Printer.done()

        nan = float("nan")
        return [
            ["bound_lower", bounds.low, interval.lower, nan, nan, nan],
            ["bound_upper", bounds.high, interval.upper, nan, nan, nan]
        ]

    @staticmethod
    def solution_row(solution: RiskSharingSolution) -> list:
        return ["sweep", solution.lam, solution.price, solution.eps_s, solution.eps_b, solution.multiplier]

    @staticmethod
    def start_message():
        Printer.start("🧮 Starting sharing weight sweep! 🧮")
