from typing import Optional

from entities.errors import ConfigError
from entities.market import arbitrage_bounds
from pricing.risk_sharing import RiskSharingProblem, solve
from util.helpers import Util, Printer


class Price:
    def __init__(
            self,
            config: Optional[str],
            preset: Optional[str],
            lam: Optional[float],
            out: Optional[str]
    ):
        self.config = config
        self.preset = preset
        self.lam = lam
        self.out = out
        self.step_count = 1
        self.total_steps = 2

    def price(self):
        Price.start_message()

        with Util.exit_on_error(), Util.relay_warnings():
            run_config = Util.load_run_config(self.config, self.preset)
            if not run_config.is_market:
                raise ConfigError("price needs a market block; use `mz price` for the non-traded asset model")

            problem = RiskSharingProblem(
                run_config.market,
                run_config.seller,
                run_config.buyer,
                run_config.claim,
                self.lam if self.lam is not None else run_config.lam
            )
            Util.emit_json(self.do_price(problem), self.out)

        Printer.done_all()

    def do_price(self, problem: RiskSharingProblem) -> dict:
        Printer.waiting(f"Computing arbitrage-free interval (step {self.step_count} of {self.total_steps})...")
        interval = arbitrage_bounds(problem.market, problem.claim)
        Printer.done()
        self.step_count += 1

        Printer.waiting(f"Solving for the risk sharing price (step {self.step_count} of {self.total_steps})...")
        solution = solve(problem)
        Printer.done()

        return {
            **solution.to_dict(),
            "v_s": problem.seller_curve.price(0.0),
            "v_b": problem.buyer_curve.price(0.0),
            "arbitrage_interval": [interval.lower, interval.upper],
            "inside_bounds": interval.contains(solution.price),
            "iterations": solution.iterations,
            "residual": solution.residual
        }

    @staticmethod
    def start_message():
        Printer.start("💱 Starting risk sharing price! 💱")
