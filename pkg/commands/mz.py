from enum import Enum
from typing import Optional

import numpy as np

from entities.errors import ConfigError
from entities.run_config import RunConfig
from entities.utility import Role
from pricing.nontraded import Engine, indifference_prices_mz, reservation_price_mz
from pricing.pde import PdeGrid, pde_phi_solver
from pricing.trading_time import StopRule, optimal_trading_time
from util.constants import Columns
from util.helpers import Util, Printer


class MzAction(str, Enum):
    price = "price"
    field = "field"
    stop = "stop"


class Mz:
    def __init__(
            self,
            action: MzAction,
            config: Optional[str],
            preset: Optional[str],
            out: Optional[str],
            **overrides
    ):
        self.action = MzAction(action)
        self.config = config
        self.preset = preset
        self.out = out
        self.overrides = overrides

    def mz(self):
        Mz.start_message()

        with Util.exit_on_error(), Util.relay_warnings():
            run_config = Util.load_run_config(self.config, self.preset).with_options(**self.overrides)
            if run_config.is_market:
                raise ConfigError("mz needs an mz block")

            if self.action == MzAction.price:
                self.do_price(run_config)
            elif self.action == MzAction.field:
                self.do_field(run_config)
            else:
                self.do_stop(run_config)

        Printer.done_all()

    def do_price(self, run_config: RunConfig):
        model, options = run_config.mz, run_config.options
        y = model.y0 if options.y is None else options.y
        side = Role(options.side)

        with Printer.progress_spinner() as progress:
            progress.add_task(f"Pricing with the {options.engine} engine at t = {options.t}, y = {y}...\n")
            prices = indifference_prices_mz(
                model,
                options.t,
                y,
                engine=Engine(options.engine),
                n_paths=options.paths,
                seed=options.seed,
                grid=options.grid
            )
            reservation = reservation_price_mz(model, options.t, y, side, options.eps, prices=prices)
        Printer.done()

        Util.emit_json(
            {
                **prices.to_dict(),
                "side": side.value,
                "eps": options.eps,
                "reservation_price": reservation,
                "lambda": model.lam
            },
            self.out
        )

    def do_field(self, run_config: RunConfig):
        model, options = run_config.mz, run_config.options
        side = Role(options.side)

        with Printer.progress_spinner() as progress:
            progress.add_task(f"Solving the {side.value} PDE on a {options.grid[0]}x{options.grid[1]} grid...\n")
            field = pde_phi_solver(model, side, options.eps, PdeGrid.for_model(model, *options.grid))
        Printer.done()

        rows = (
            [t, y, phi, price]
            for t, phi_level, price_level in zip(field.t, field.phi, field.price)
            for y, phi, price in zip(field.y, phi_level, price_level)
        )
        Util.write_csv(Columns.field, rows, self.out)

    def do_stop(self, run_config: RunConfig):
        model, options = run_config.mz, run_config.options
        y0 = model.y0 if options.y is None else options.y

        with Printer.progress_spinner() as progress:
            progress.add_task(f"Backward induction over {options.lattice_steps} lattice steps...\n")
            result = optimal_trading_time(
                model,
                y0,
                n_steps=options.lattice_steps,
                rule=StopRule(options.stop),
                pde_ny=options.grid[0]
            )
        Printer.done()

        rows = (
            [t, y, risk, value, int(stop)]
            for t, risk_level, value_level, stop_level in zip(result.times, result.total_risk, result.value, result.stop)
            for y, risk, value, stop in zip(result.y, risk_level, value_level, stop_level)
        )
        Util.write_csv(Columns.stop, rows, self.out)

        summary = {
            "y0": y0,
            "rule": result.rule.value,
            "value": result.value_at_start,
            "total_risk_now": result.risk_at_start,
            "expected_terminal_risk": result.expected_terminal_risk,
            "stop_now": bool(result.stop[0, int(np.argmin(np.abs(result.y - y0)))])
        }
        if self.out is not None:
            Util.emit_json(summary)
        else:
            Printer.print(f"V(0, y0) = {Util.format_number(result.value_at_start)}", prefix=Printer.tab)

    @staticmethod
    def start_message():
        Printer.start("🌊 Starting non-traded asset model! 🌊")
