"""Closed-form prediction of the IV inflation caused by an autocorrelated
instrument together with an autocorrelated dependent variable."""

from dataclasses import dataclass
from typing import Sequence

from .errors import BiasPoleError

RESULT_COLUMNS = ("beta", "pred_estimate", "inflation", "demand_ar_sum", "instrument_ar_sum")


@dataclass(frozen=True)
class BiasPrediction:
    true_slope: float
    predicted_estimate: float
    inflation_factor: float
    demand_ar_sum: float
    instrument_ar_sum: float

    def to_row(self) -> dict:
        return {
            "beta": self.true_slope,
            "pred_estimate": self.predicted_estimate,
            "inflation": self.inflation_factor,
            "demand_ar_sum": self.demand_ar_sum,
            "instrument_ar_sum": self.instrument_ar_sum,
        }


def _predict(beta: float, demand_sum: float, instrument_sum: float) -> BiasPrediction:
    product = demand_sum * instrument_sum
    if abs(product) >= 1.0:
        raise BiasPoleError(
            f"|{demand_sum:g} * {instrument_sum:g}| >= 1: the predicted estimate is unbounded"
        )
    inflation = 1.0 / (1.0 - product)
    estimate = beta * inflation
    # with no true effect there is nothing to inflate; report 1 instead of 0/0
    return BiasPrediction(
        float(beta), estimate, inflation if beta != 0 else 1.0, demand_sum, instrument_sum
    )


def thams_bias_ar1(beta: float, alpha_instrument: float, alpha_dependent: float) -> BiasPrediction:
    """beta / (1 - alpha_instrument * alpha_dependent) for AR(1) instrument and
    AR(1) dependent variable."""
    return _predict(beta, float(alpha_dependent), float(alpha_instrument))


def thams_bias_general(
    beta: float, demand_coeffs: Sequence[float], instrument_coeffs: Sequence[float]
) -> BiasPrediction:
    """Sum-of-coefficients generalisation to AR(L) demand and AR(M) instrument.

    This is an empirical approximation, exact only for L = M = 1.
    """
    return _predict(beta, float(sum(demand_coeffs)), float(sum(instrument_coeffs)))
