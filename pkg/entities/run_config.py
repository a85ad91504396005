import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from entities.errors import ConfigError, WrongUtilityKind
from entities.market import Claim, FiniteMarket
from entities.nontraded import ModelFunction, MzModel
from entities.utility import Agent, Role, Utility, UtilityKind
from util.config import Config
from util.constants import Keys, Options


@dataclass(frozen=True)
class RunOptions:
    engine: str = "mc"
    seed: int = Config.mc_default_seed
    paths: int = Config.mc_default_paths
    grid: tuple[int, int] = Config.pde_default_grid
    t: float = 0.0
    y: Optional[float] = None
    side: str = Role.seller.value
    eps: float = 0.0
    stop: str = "any"
    lattice_steps: int = Config.lattice_default_steps

    def __post_init__(self):
        if self.engine not in ("mc", "pde"):
            raise ConfigError(f"engine must be mc or pde, got [{self.engine}]")
        if self.side not in (Role.seller.value, Role.buyer.value):
            raise ConfigError(f"side must be seller or buyer, got [{self.side}]")
        if self.stop not in ("any", "maturity"):
            raise ConfigError(f"stop must be any or maturity, got [{self.stop}]")
        if len(self.grid) != 2 or min(self.grid) < 1:
            raise ConfigError(f"grid must be two positive sizes, got {self.grid}")
        if self.paths < 2 or self.lattice_steps < 1:
            raise ConfigError("paths must be at least 2 and lattice steps at least 1")

    def to_dict(self) -> dict:
        options = {
            Options.engine: self.engine,
            Options.seed: self.seed,
            Options.paths: self.paths,
            Options.grid: list(self.grid),
            Options.t: self.t,
            Options.side: self.side,
            Options.eps: self.eps,
            Options.stop: self.stop,
            Options.lattice_steps: self.lattice_steps
        }
        if self.y is not None:
            options[Options.y] = self.y
        return options

    @staticmethod
    def from_dict(data: dict) -> "RunOptions":
        unknown = set(data) - set(RunOptions.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown option(s) {sorted(unknown)}")
        try:
            values = dict(data)
            if Options.grid in values:
                values[Options.grid] = tuple(int(size) for size in values[Options.grid])
            for name, cast in ((Options.seed, int), (Options.paths, int), (Options.lattice_steps, int),
                               (Options.t, float), (Options.eps, float)):
                if name in values:
                    values[name] = cast(values[name])
            if values.get(Options.y) is not None:
                values[Options.y] = float(values[Options.y])
            return RunOptions(**values)
        except (TypeError, ValueError) as error:
            raise ConfigError(f"invalid options: {error}")


@dataclass(frozen=True, eq=False)
class RunConfig:
    seller: Agent
    buyer: Agent
    lam: float
    market: Optional[FiniteMarket] = None
    claim: Optional[Claim] = None
    mz: Optional[MzModel] = None
    sweep: tuple[float, ...] = ()
    curves: tuple[float, float, int] = (-0.5, 1.5, 101)
    options: RunOptions = field(default_factory=RunOptions)

    @staticmethod
    def load(path: str) -> "RunConfig":
        try:
            with open(path) as config_file:
                data = json.load(config_file)
        except OSError as error:
            raise ConfigError(f"cannot read config [{path}]: {error.strerror}")
        except json.JSONDecodeError as error:
            raise ConfigError(f"config [{path}] is not valid JSON: {error.msg} at line {error.lineno}")
        return RunConfig.from_dict(data)

    @staticmethod
    def from_dict(data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        if (Keys.market in data) == (Keys.mz in data):
            raise ConfigError("config needs exactly one of a market block and an mz block")

        seller = RunConfig.__agent(data, Keys.seller, Role.seller)
        buyer = RunConfig.__agent(data, Keys.buyer, Role.buyer)
        lam = RunConfig.__number(data, Keys.lam)
        options = RunOptions.from_dict(data.get(Keys.options, {}))
        sweep = RunConfig.__sweep(data.get(Keys.sweep))
        curves = RunConfig.__curves(data.get(Keys.curves))

        if Keys.market in data:
            block = RunConfig.__block(data, Keys.market)
            market = FiniteMarket(
                RunConfig.__required(block, Keys.probs, Keys.market),
                RunConfig.__required(block, Keys.increments, Keys.market)
            )
            claim = Claim(RunConfig.__required(RunConfig.__block(data, Keys.claim), Keys.payoffs, Keys.claim))
            market.check_claim(claim)
            return RunConfig(seller, buyer, lam, market=market, claim=claim, sweep=sweep, curves=curves, options=options)

        block = RunConfig.__block(data, Keys.mz)
        for agent in (seller, buyer):
            if agent.utility.kind != UtilityKind.exponential:
                raise WrongUtilityKind("the non-traded asset model needs exponential utility for both agents")
        model = MzModel(
            mu=RunConfig.__number(block, Keys.mu),
            sigma=RunConfig.__number(block, Keys.sigma),
            rho=RunConfig.__number(block, Keys.rho),
            T=RunConfig.__number(block, Keys.horizon),
            a=ModelFunction.build(Keys.diffusion, RunConfig.__required(block, Keys.diffusion, Keys.mz)),
            b=ModelFunction.build(Keys.drift, RunConfig.__required(block, Keys.drift, Keys.mz)),
            g=ModelFunction.build(Keys.payoff, RunConfig.__required(block, Keys.payoff, Keys.mz)),
            gamma_s=seller.utility.gamma,
            gamma_b=buyer.utility.gamma,
            x_s=seller.wealth,
            x_b=buyer.wealth,
            lam=lam,
            y0=float(block.get(Keys.y0, 0.0))
        )
        return RunConfig(seller, buyer, lam, mz=model, sweep=sweep, curves=curves, options=options)

    def to_dict(self) -> dict:
        data = {
            Keys.seller: self.seller.to_dict(),
            Keys.buyer: self.buyer.to_dict(),
            Keys.lam: self.lam,
            Keys.curves: {Keys.start: self.curves[0], Keys.stop: self.curves[1], Keys.num: self.curves[2]},
            Keys.options: self.options.to_dict()
        }
        if self.sweep:
            data[Keys.sweep] = {Keys.lambdas: list(self.sweep)}
        if self.market is not None:
            data[Keys.market] = self.market.to_dict()
            data[Keys.claim] = {Keys.payoffs: self.claim.to_list()}
        else:
            data[Keys.mz] = self.mz.to_dict()
        return data

    def with_options(self, **overrides) -> "RunConfig":
        present = {name: value for name, value in overrides.items() if value is not None}
        if not present:
            return self
        return replace(self, options=replace(self.options, **present))

    @property
    def is_market(self) -> bool:
        return self.market is not None

    @staticmethod
    def __agent(data: dict, key: str, role: Role) -> Agent:
        block = RunConfig.__block(data, key)
        utility = Utility.build(RunConfig.__block(block, Keys.utility))
        return Agent(utility, RunConfig.__number(block, Keys.wealth), role)

    @staticmethod
    def __sweep(block) -> tuple[float, ...]:
        if block is None:
            return ()
        if Keys.lambdas in block:
            return tuple(float(lam) for lam in block[Keys.lambdas])
        start, stop = RunConfig.__number(block, Keys.start), RunConfig.__number(block, Keys.stop)
        return tuple(float(lam) for lam in np.linspace(start, stop, int(RunConfig.__number(block, Keys.num))))

    @staticmethod
    def __curves(block) -> tuple[float, float, int]:
        if block is None:
            return RunConfig.__dataclass_fields__["curves"].default
        num = int(RunConfig.__number(block, Keys.num))
        if num < 2:
            raise ConfigError("curve grids need at least two points")
        return RunConfig.__number(block, Keys.start), RunConfig.__number(block, Keys.stop), num

    @staticmethod
    def __block(data: dict, key: str) -> dict:
        block = data.get(key)
        if not isinstance(block, dict):
            raise ConfigError(f"config block [{key}] is missing or not an object")
        return block

    @staticmethod
    def __required(block: dict, key: str, where: str):
        if key not in block:
            raise ConfigError(f"[{where}] needs [{key}]")
        return block[key]

    @staticmethod
    def __number(block: dict, key: str) -> float:
        try:
            return float(block[key])
        except KeyError:
            raise ConfigError(f"number [{key}] is missing")
        except (TypeError, ValueError):
            raise ConfigError(f"[{key}] must be a number, got {block[key]!r}")
