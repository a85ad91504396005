import csv
import io
import json
import math
import os
import sys
import warnings
from contextlib import contextmanager
from typing import Iterable, Optional

import typer
from rich.console import Console
from rich.markup import escape
from rich.progress import Progress, SpinnerColumn, TextColumn

from entities.errors import ConfigError, RiskSharingError
from entities.run_config import RunConfig
from util.config import Config


class Util:
    presets_directory = os.path.abspath(
        os.path.join(os.path.dirname(os.path.realpath(__file__)), '..', 'presets')
    )

    @staticmethod
    def preset_path(preset: str) -> str:
        return os.path.join(Util.presets_directory, f"{preset}.json")

    @staticmethod
    def config_path(config: Optional[str], preset: Optional[str]) -> str:
        if (config is None) == (preset is None):
            raise ConfigError("pass exactly one of --config and --preset")
        path = config if config is not None else Util.preset_path(preset)
        Printer.waiting(f"Using config \[{path}]...")
        return path

    @staticmethod
    def load_run_config(config: Optional[str], preset: Optional[str]) -> RunConfig:
        return RunConfig.load(Util.config_path(config, preset))

    @staticmethod
    @contextmanager
    def relay_warnings():
        """Collects library warnings and prints them once the block ends."""
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            yield
        for warning in caught:
            Printer.warning(escape(f"{warning.category.__name__}: {warning.message}"))

    @staticmethod
    def parse_grid(grid: Optional[str]) -> Optional[tuple[int, int]]:
        if grid is None:
            return None
        try:
            ny, nt = (int(size) for size in grid.split(","))
        except ValueError:
            raise ConfigError(f"grid must look like ny,nt, got [{grid}]")
        return ny, nt

    @staticmethod
    def parse_range(text: Optional[str]) -> Optional[tuple[float, float, int]]:
        if text is None:
            return None
        try:
            start, stop, num = text.split(",")
            return float(start), float(stop), int(num)
        except ValueError:
            raise ConfigError(f"range must look like start,stop,num, got [{text}]")

    @staticmethod
    def format_number(value) -> str:
        if isinstance(value, bool):
            return str(value).lower()
        if isinstance(value, str):
            return value
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.{Config.csv_significant_digits}g}"

    @staticmethod
    def normalize(data):
        """Floats rounded to the output precision; non-finite floats become strings."""
        if isinstance(data, dict):
            return {key: Util.normalize(value) for key, value in data.items()}
        if isinstance(data, (list, tuple)):
            return [Util.normalize(value) for value in data]
        if isinstance(data, bool) or data is None or isinstance(data, (str, int)):
            return data
        value = float(data)
        if not math.isfinite(value):
            return Util.format_number(value)
        return float(Util.format_number(value))

    @staticmethod
    def emit_json(data: dict, out: Optional[str] = None):
        text = json.dumps(Util.normalize(data), indent=2)
        Util.__emit(f"{text}\n", out)

    @staticmethod
    def write_csv(header: list[str], rows: Iterable[Iterable], out: Optional[str] = None):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([Util.format_number(value) for value in row])
        Util.__emit(buffer.getvalue(), out)

    @staticmethod
    @contextmanager
    def exit_on_error():
        try:
            yield
        except RiskSharingError as error:
            Printer.error(escape(f"{type(error).__name__}: {error.message}"))
            raise typer.Exit(code=error.exit_code)

    @staticmethod
    def __emit(text: str, out: Optional[str]):
        if out is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        try:
            with open(out, "w", newline="") as out_file:
                out_file.write(text)
        except OSError as error:
            raise ConfigError(f"cannot write [{out}]: {error.strerror}")
        Printer.waiting(f"Wrote \[{out}].")


class Printer:
    console = Console(highlight=False, stderr=True)

    color_title = "[magenta]"
    color_subtitle = "[cyan]"
    color_divider = "[bright_magenta]"
    color_done_all = "[bright_green]"
    color_done = "[green]"
    color_waiting = "[bright_black]"
    color_warning = "[bright_yellow]"
    color_error = "[bright_red]"

    tab = "    "

    @staticmethod
    def progress_label_with_steps(label: str, step: int, total: int):
        return f"{Printer.color_title}{label} {Printer.color_subtitle}(step {step} of {total})\n"

    @staticmethod
    def progress_spinner():
        return Progress(
            SpinnerColumn(),
            TextColumn(" [progress.description]{task.description}"),
            console=Printer.console
        )

    @staticmethod
    def start(title: str):
        Printer.divider()
        Printer.console.print(f"{Printer.color_divider}{title}")
        Printer.divider()

    @staticmethod
    def divider():
        Printer.console.print(
            f"\n{Printer.color_divider}================================================================\n"
        )

    @staticmethod
    def done_all(prefix: str = ""):
        Printer.divider()
        Printer.console.print(f"{Printer.color_done_all}{prefix}🎉🎊🥳 Done! 🥳🎊🎉")
        Printer.divider()

    @staticmethod
    def done(prefix: str = "", suffix: str = ""):
        Printer.console.print(f"{Printer.color_done}{prefix}👍 Done{suffix}!")

    @staticmethod
    def print(string: str, prefix: str = ""):
        Printer.console.print(f"{Printer.color_waiting}{prefix}{string}")

    @staticmethod
    def waiting(string: str, prefix: str = ""):
        Printer.console.print(f"{Printer.color_waiting}{prefix}⏳ {string}")

    @staticmethod
    def warning(string: str, prefix: str = ""):
        Printer.console.print(f"{Printer.color_warning}{prefix}❗ {string}")

    @staticmethod
    def error(string: str, prefix: str = ""):
        Printer.console.print(f"{Printer.color_error}{prefix}‼️  {string}")
