import typing
from enum import Enum

import typer

from commands.curves import Curves
from commands.mz import Mz, MzAction
from commands.price import Price
from commands.sweep import Sweep
from util.helpers import Util

app = typer.Typer(help="Risk sharing prices for non-replicable claims in incomplete markets.")


class Preset(str, Enum):
    trinomial_exponential = "trinomial_exponential"
    trinomial_log = "trinomial_log"
    quadrinomial_exponential = "quadrinomial_exponential"
    arbitrage_market = "arbitrage_market"
    mz_ornstein_uhlenbeck = "mz_ornstein_uhlenbeck"


def config_option():
    return typer.Option(
        None,
        "--config",
        "-c",
        help="The JSON run configuration."
    )


def preset_option():
    return typer.Option(
        None,
        "--preset",
        "-p",
        case_sensitive=False,
        help="A shipped run configuration, used instead of --config."
    )


def out_option():
    return typer.Option(
        None,
        "--out",
        "-o",
        help="Write the result to this file instead of stdout."
    )


def preset_value(preset: typing.Optional[Preset]) -> typing.Optional[str]:
    return preset.value if preset else None


@app.command(help="Solves for the risk sharing price on a finite market and prints it as JSON.")
def price(
        config: typing.Optional[str] = config_option(),
        preset: typing.Optional[Preset] = preset_option(),
        lam: typing.Optional[float] = typer.Option(
            None,
            "--lambda",
            "-l",
            help="Sharing weight in (0, 1), overriding the config."
        ),
        out: typing.Optional[str] = out_option()
):
    Price(config, preset_value(preset), lam, out).price()


@app.command(help="Samples both reservation price curves and their slopes as CSV.")
def curves(
        config: typing.Optional[str] = config_option(),
        preset: typing.Optional[Preset] = preset_option(),
        eps: typing.Optional[str] = typer.Option(
            None,
            "--eps",
            "-e",
            help="Loss grid as start,stop,num, overriding the config."
        ),
        out: typing.Optional[str] = out_option()
):
    Curves(config, preset_value(preset), eps, out).curves()


@app.command(help="Sweeps the sharing weight and appends the weights bounding the arbitrage-free interval.")
def sweep(
        config: typing.Optional[str] = config_option(),
        preset: typing.Optional[Preset] = preset_option(),
        lambdas: typing.Optional[str] = typer.Option(
            None,
            "--lambdas",
            "-l",
            help="Sharing weight grid as start,stop,num, overriding the config."
        ),
        out: typing.Optional[str] = out_option()
):
    Sweep(config, preset_value(preset), lambdas, out).sweep()


@app.command(help="Prices, solves fields, or finds the trading time in the non-traded asset model.")
def mz(
        action: MzAction = typer.Argument(
            ...,
            case_sensitive=False,
            help="What to compute: price, field or stop."
        ),
        config: typing.Optional[str] = config_option(),
        preset: typing.Optional[Preset] = preset_option(),
        out: typing.Optional[str] = out_option(),
        engine: typing.Optional[str] = typer.Option(
            None,
            "--engine",
            help="Pricing engine, mc or pde."
        ),
        seed: typing.Optional[int] = typer.Option(
            None,
            "--seed",
            "-s",
            help="Master seed for Monte Carlo paths."
        ),
        paths: typing.Optional[int] = typer.Option(
            None,
            "--paths",
            "-n",
            help="Number of Monte Carlo paths."
        ),
        grid: typing.Optional[str] = typer.Option(
            None,
            "--grid",
            "-g",
            help="PDE grid as ny,nt."
        ),
        t: typing.Optional[float] = typer.Option(
            None,
            "--t",
            help="Evaluation time."
        ),
        y: typing.Optional[float] = typer.Option(
            None,
            "--y",
            help="Evaluation level of the non-traded asset."
        ),
        side: typing.Optional[str] = typer.Option(
            None,
            "--side",
            help="seller or buyer, for reservation prices and fields."
        ),
        eps: typing.Optional[float] = typer.Option(
            None,
            "--eps",
            "-e",
            help="Loss of indirect utility, for reservation prices and fields."
        ),
        stop: typing.Optional[str] = typer.Option(
            None,
            "--stop",
            help="Trading times allowed: any or maturity."
        ),
        lattice_steps: typing.Optional[int] = typer.Option(
            None,
            "--lattice-steps",
            help="Time steps of the trading time lattice."
        )
):
    with Util.exit_on_error():
        parsed_grid = Util.parse_grid(grid)
    Mz(
        action,
        config,
        preset_value(preset),
        out,
        engine=engine,
        seed=seed,
        paths=paths,
        grid=parsed_grid,
        t=t,
        y=y,
        side=side,
        eps=eps,
        stop=stop,
        lattice_steps=lattice_steps
    ).mz()


def main():
    app()
