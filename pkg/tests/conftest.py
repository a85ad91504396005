import math

import pytest

from entities.market import Claim, FiniteMarket
from entities.nontraded import CappedCall, Constant, MeanReverting, MzModel
from entities.utility import Agent, ExponentialUtility, LogUtility, Role
from pricing.risk_sharing import RiskSharingProblem

SELLER_INDIFFERENCE = math.log((2.0 + math.e) / 3.0)
BUYER_INDIFFERENCE = -math.log((2.0 + math.exp(-1.0)) / 3.0)


@pytest.fixture
def trinomial():
    return FiniteMarket([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], [[1.0, 0.0, -1.0]])


@pytest.fixture
def middle_claim():
    return Claim([0.0, 1.0, 0.0])


@pytest.fixture
def quadrinomial():
    return FiniteMarket([0.1, 0.4, 0.3, 0.2], [[2.0, 1.0, -1.0, -2.0]])


@pytest.fixture
def exponential_seller():
    return Agent(ExponentialUtility(1.0), 0.0, Role.seller)


@pytest.fixture
def exponential_buyer():
    return Agent(ExponentialUtility(1.0), 0.0, Role.buyer)


@pytest.fixture
def log_seller():
    return Agent(LogUtility(), 2.0, Role.seller)


@pytest.fixture
def log_buyer():
    return Agent(LogUtility(), 2.0, Role.buyer)


@pytest.fixture
def exponential_problem(trinomial, middle_claim, exponential_seller, exponential_buyer):
    return RiskSharingProblem(trinomial, exponential_seller, exponential_buyer, middle_claim, 0.5)


@pytest.fixture
def log_problem(middle_claim, log_seller, log_buyer):
    market = FiniteMarket([0.25, 0.5, 0.25], [[1.0, 0.0, -1.0]])
    return RiskSharingProblem(market, log_seller, log_buyer, middle_claim, 0.5)


def ou_model(rho: float = 0.5, lam: float = 0.5, payoff=None) -> MzModel:
    return MzModel(
        mu=0.1,
        sigma=0.2,
        rho=rho,
        T=1.0,
        a=Constant(value=0.3),
        b=MeanReverting(kappa=1.0, mean=0.0),
        g=payoff or CappedCall(strike=0.0, cap=0.5),
        gamma_s=1.0,
        gamma_b=1.0,
        x_s=0.0,
        x_b=0.0,
        lam=lam
    )


@pytest.fixture
def ou():
    return ou_model()
