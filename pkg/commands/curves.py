from typing import Optional

import numpy as np
from rich.progress import Progress

from entities.errors import ConfigError
from pricing.reservation import PriceCurve
from util.constants import Columns
from util.helpers import Util, Printer


class Curves:
    def __init__(
            self,
            config: Optional[str],
            preset: Optional[str],
            eps_range: Optional[str],
            out: Optional[str]
    ):
        self.config = config
        self.preset = preset
        self.eps_range = eps_range
        self.out = out
        self.step_count = 1
        self.total_steps = 1

    def curves(self):
        Curves.start_message()

        with Util.exit_on_error(), Util.relay_warnings():
            run_config = Util.load_run_config(self.config, self.preset)
            if not run_config.is_market:
                raise ConfigError("curves need a market block")

            start, stop, num = Util.parse_range(self.eps_range) or run_config.curves
            if num < 2:
                raise ConfigError("curve grids need at least two points")

            seller = PriceCurve(run_config.market, run_config.seller, run_config.claim)
            buyer = PriceCurve(run_config.market, run_config.buyer, run_config.claim)
            rows = self.do_curves(seller, buyer, np.linspace(start, stop, num))
            if not rows:
                Printer.warning("No grid point lies inside both admissible loss sets.")
            Util.write_csv(Columns.curves, rows, self.out)

        Printer.done_all()

    def do_curves(self, seller: PriceCurve, buyer: PriceCurve, grid: np.ndarray) -> list[list[float]]:
        rows = []
        # both curves are only defined for losses above their open left edges
        admissible = grid[(grid > seller.a_lower) & (grid > buyer.a_lower)]

        with Progress(console=Printer.console, auto_refresh=False) as progress:
            progress_task = progress.add_task(
                Printer.progress_label_with_steps(
                    "Reservation curves",
                    self.step_count,
                    self.total_steps
                ),
                total=admissible.size
            )

            for count, eps in enumerate(admissible):
                progress.update(progress_task, completed=count)
                progress.refresh()

                eps = float(eps)
                rows.append([eps, seller.price(eps), buyer.price(eps), seller.derivative(eps), buyer.derivative(eps)])

            progress.update(progress_task, completed=admissible.size)
            progress.refresh()

        Printer.done()
        return rows

    @staticmethod
    def start_message():
        Printer.start("📈 Starting reservation curves! 📈")
