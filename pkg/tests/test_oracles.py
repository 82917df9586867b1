"""Freeze the reference values used across the suite.

Each constant below was produced by ``oracles`` and is checked against it
here, so the module tests can compare the package to literals.
"""

from fractions import Fraction as F

import oracles

ACF_1234_LAG1 = F(1, 4)
OLS_HAND_INTERCEPT = F(1, 10)
OLS_HAND_SLOPE = F(13, 10)
THAMS_AR1_EXAMPLE = F(-400, 208)  # beta -0.4, alphas 0.8 and 0.99
THAMS_GENERAL_EXAMPLE = F(-4000, 496)  # sums 0.96 and 0.99
CLEARING_PRICE_EXAMPLE = F(70)
INTERCEPT_L0_ELASTIC = F(39924, 100)
INTERCEPT_L1_INELASTIC = F(1122, 100)
AR1_STATIONARY_VAR = F(2072, 100) / (1 - F(97, 100) ** 2)


def test_acf_oracle():
    assert oracles.sample_acf([1, 2, 3, 4], 1) == ACF_1234_LAG1


def test_ols_oracle():
    a, b = oracles.simple_regression([1, 2, 3, 4, 5], [2, 2, 4, 5, 7])
    assert (a, b) == (OLS_HAND_INTERCEPT, OLS_HAND_SLOPE)


def test_thams_oracles():
    assert oracles.thams_prediction(F(-4, 10), F(8, 10), F(99, 100)) == THAMS_AR1_EXAMPLE
    assert oracles.thams_prediction(F(-4, 10), F(96, 100), F(99, 100)) == THAMS_GENERAL_EXAMPLE


def test_market_oracles():
    assert oracles.clearing_price(400, 0, 0, 4, 16, F(75, 10)) == CLEARING_PRICE_EXAMPLE
    assert oracles.calibrated_intercept(374, F(76, 10), F(-4, 10), 0) == INTERCEPT_L0_ELASTIC
    assert oracles.calibrated_intercept(374, F(76, 10), 0, F(97, 100)) == INTERCEPT_L1_INELASTIC


def test_stationary_variance_oracle():
    assert abs(float(AR1_STATIONARY_VAR) - 350.5922165820643) < 1e-9
