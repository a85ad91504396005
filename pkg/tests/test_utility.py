import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entities.errors import ConfigError, DomainError, ElasticityWarning, InvalidUtility, NonPositiveMarginal
from entities.utility import (
    CustomUtility,
    Domain,
    ExponentialUtility,
    LogUtility,
    PowerUtility,
    Utility,
    UtilityKind,
    derivative,
    evaluate,
    inverse_derivative
)


def test_build_from_json_blocks():
    assert Utility.build({"kind": "exponential", "gamma": 2.0}).gamma == 2.0
    assert Utility.build({"kind": "log"}).kind == UtilityKind.log
    assert Utility.build({"kind": "power", "R": 3.0}).risk_aversion == 3.0
    assert Utility.build({"kind": "power", "R": 1.0}).kind == UtilityKind.log


@pytest.mark.parametrize("block", [{"kind": "quadratic"}, {"kind": "exponential"}, {"kind": "exponential", "gamma": 0.0}])
def test_build_rejects_bad_blocks(block):
    with pytest.raises(ConfigError):
        Utility.build(block)


def test_exponential_values():
    utility = ExponentialUtility(2.0)
    assert evaluate(utility, 0.0) == pytest.approx(-1.0)
    assert derivative(utility, 0.0) == pytest.approx(2.0)
    assert inverse_derivative(utility, 2.0) == pytest.approx(0.0)
    assert utility.sup_value == 0.0
    assert not utility.is_type_two


def test_log_utility_outside_domain():
    utility = LogUtility()
    assert evaluate(utility, -1.0) == -np.inf
    assert evaluate(utility, 0.0) == -np.inf
    with pytest.raises(DomainError):
        derivative(utility, 0.0)
    assert utility.is_type_two and utility.left_edge == 0.0


@pytest.mark.parametrize("utility", [ExponentialUtility(1.0), LogUtility(), PowerUtility(3.0), PowerUtility(0.5)])
def test_inverse_derivative_inverts_marginal(utility):
    wealth = np.array([0.3, 1.0, 4.0])
    assert inverse_derivative(utility, derivative(utility, wealth)) == pytest.approx(wealth)


@pytest.mark.parametrize("utility", [ExponentialUtility(1.0), LogUtility()])
def test_marginal_must_be_positive(utility):
    with pytest.raises(NonPositiveMarginal):
        inverse_derivative(utility, 0.0)


def test_vectorized_evaluation_keeps_shape():
    values = evaluate(ExponentialUtility(1.0), np.zeros((2, 3)))
    assert values.shape == (2, 3)
    assert isinstance(evaluate(ExponentialUtility(1.0), 0.5), float)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 50.0), st.floats(0.01, 50.0))
def test_chord_lies_below_the_curve(a, b):
    for utility in (LogUtility(), ExponentialUtility(0.5), PowerUtility(2.0)):
        midpoint = evaluate(utility, 0.5 * (a + b))
        chord = 0.5 * (evaluate(utility, a) + evaluate(utility, b))
        assert midpoint >= chord - 1e-12


def test_custom_utility_matches_log():
    custom = CustomUtility(np.log, lambda w: 1.0 / w, lambda y: 1.0 / y, domain=Domain.positive_half_line)
    assert custom.evaluate(2.0) == pytest.approx(np.log(2.0))
    assert custom.second_derivative(2.0) == pytest.approx(-0.25, rel=1e-5)
    assert custom.evaluate(-1.0) == -np.inf


def test_custom_utility_must_be_increasing():
    with pytest.raises(InvalidUtility):
        CustomUtility(lambda w: -w, lambda w: -np.ones_like(w), lambda y: y)


def test_custom_utility_must_be_concave():
    with pytest.raises(InvalidUtility):
        CustomUtility(np.exp, np.exp, np.log)


def test_nearly_linear_custom_utility_warns():
    exponent = 0.9995
    with pytest.warns(ElasticityWarning):
        CustomUtility(
            lambda w: w ** exponent / exponent,
            lambda w: w ** (exponent - 1.0),
            lambda y: y ** (1.0 / (exponent - 1.0)),
            domain=Domain.positive_half_line
        )


@pytest.mark.parametrize("utility", [ExponentialUtility(0.5), LogUtility(), PowerUtility(3.0), PowerUtility(0.5)])
def test_marginal_inverts_across_decades(utility):
    marginals = np.geomspace(1e-6, 1e6, 49)
    assert derivative(utility, inverse_derivative(utility, marginals)) == pytest.approx(marginals, rel=1e-10)


@pytest.mark.parametrize("method", ["evaluate", "derivative", "second_derivative", "inverse_derivative"])
def test_base_utility_has_no_shape(method):
    with pytest.raises(NotImplementedError):
        getattr(Utility(), method)(1.0)
