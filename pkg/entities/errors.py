class RiskSharingError(Exception):
    exit_code = 1

    def __init__(self, message: str):
        self.message = message
        super().__init__(self.message)


class InvalidInput(RiskSharingError):
    exit_code = 3


class Infeasible(RiskSharingError):
    exit_code = 2


class NumericalFailure(RiskSharingError):
    exit_code = 4


class ConfigError(InvalidInput):
    pass


class ArbitrageDetected(InvalidInput):
    pass


class CompleteMarket(InvalidInput):
    pass


class DomainError(InvalidInput):
    pass


class InvalidUtility(InvalidInput):
    pass


class NonPositiveMarginal(InvalidInput):
    pass


class OutOfRange(InvalidInput):
    pass


class WrongUtilityKind(InvalidInput):
    pass


class NonMonotonePsi(InvalidInput):
    pass


class LogDomain(InvalidInput):
    pass


class NoOverlap(Infeasible):
    pass


class InfeasibleWealth(Infeasible):
    pass


class EmptyFeasibleGrid(Infeasible):
    pass


class NonConvergence(NumericalFailure):
    pass


class StepUnderflow(NumericalFailure):
    pass


class GridTooCoarse(NumericalFailure):
    pass


class ElasticityWarning(UserWarning):
    pass


class BoundsDisagreementWarning(UserWarning):
    pass
