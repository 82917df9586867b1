"""OLS, two-stage least squares and Bartlett-kernel HAC inference, plus the
six identification strategies applied to an equilibrium panel."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from . import kernels
from .errors import SeriesTooShortError, WeakInstrumentWarning
from .linalg import check_rank, lstsq
from .market import EquilibriumPanel
from .series import lag_matrix

Z_975 = 1.959964
WEAK_F = 10.0
STRATEGIES = (
    "ols",
    "lagprice_iv",
    "regular_iv",
    "regular_iv_diff",
    "conditional_iv",
    "nuisance_iv",
)
DEFAULT_WIND_LAGS = 26
DEFAULT_DEMAND_LAGS = 2
DEFAULT_BANDWIDTH = "nw"

Bandwidth = Union[int, str]


# --------------------------------------------------------------------------
# HAC covariance
# --------------------------------------------------------------------------


def rule_of_thumb_bandwidth(nobs: int) -> int:
    """floor(4 (T/100)^(2/9))."""
    return int(math.floor(4.0 * (nobs / 100.0) ** (2.0 / 9.0)))


def newey_west_bandwidth(scores: np.ndarray) -> int:
    """Data-driven Bartlett bandwidth (Newey and West, 1994).

    Applied to the row sums of the score matrix, with the rule-of-thumb lag
    count as the pre-truncation.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim == 2:
        s = s.sum(axis=1)
    t = s.size
    m = max(rule_of_thumb_bandwidth(t), 1)
    sig = kernels.autocovariances(np.ascontiguousarray(s), min(m, t - 1)) / t
    s0 = sig[0] + 2.0 * sig[1:].sum()
    s1 = 2.0 * np.sum(np.arange(1, sig.size) * sig[1:])
    if s0 <= 0:
        return 0
    gamma = 1.1447 * ((s1 / s0) ** 2) ** (1.0 / 3.0)
    return int(min(math.ceil(gamma * t ** (1.0 / 3.0)), t - 1))


def resolve_bandwidth(bandwidth: Bandwidth, scores: np.ndarray) -> int:
    nobs = scores.shape[0]
    if bandwidth == "auto":
        bw = rule_of_thumb_bandwidth(nobs)
    elif bandwidth == "nw":
        bw = newey_west_bandwidth(scores)
    elif isinstance(bandwidth, (int, np.integer)) and not isinstance(bandwidth, bool):
        bw = int(bandwidth)
        if bw < 0:
            raise ValueError("bandwidth must be non-negative")
    else:
        raise ValueError(f"bandwidth must be a non-negative int, 'auto' or 'nw', got {bandwidth!r}")
    if bw >= nobs:
        raise ValueError(f"bandwidth {bw} must be smaller than the sample size {nobs}")
    return bw


def hac_covariance(
    regressors: np.ndarray, residuals: np.ndarray, bandwidth: Bandwidth = "auto"
) -> np.ndarray:
    """Bartlett-kernel sandwich covariance (X'X)^-1 S (X'X)^-1.

    Parameters
    ----------
    regressors : (T, k) array
        Design matrix; for 2SLS pass the second-stage design with fitted
        endogenous columns.
    residuals : (T,) array
        Residuals aligned with ``regressors``.
    bandwidth : int, 'auto' or 'nw'
        Number of autocovariance lags with Bartlett weights 1 - j/(bw+1).
        'auto' is floor(4 (T/100)^(2/9)); 'nw' is the Newey-West (1994)
        data-driven choice. 0 gives the White covariance.

    Returns
    -------
    (k, k) symmetric array
    """
    X = np.asarray(regressors, dtype=np.float64)
    e = np.asarray(residuals, dtype=np.float64).ravel()
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != e.size:
        raise ValueError(f"{X.shape[0]} regressor rows but {e.size} residuals")
    scores = np.ascontiguousarray(X * e[:, None])
    return _sandwich(X, scores, resolve_bandwidth(bandwidth, scores))


def _sandwich(X: np.ndarray, scores: np.ndarray, bw: int) -> np.ndarray:
    bread = np.linalg.inv(X.T @ X)
    meat = kernels.hac_meat(scores, bw)
    cov = bread @ meat @ bread
    return 0.5 * (cov + cov.T)


# --------------------------------------------------------------------------
# regressions
# --------------------------------------------------------------------------


@dataclass
class RegressionFit:
    """Coefficients, residuals and HAC covariance of one regression.

    For 2SLS, ``residuals`` are the structural residuals (evaluated at the
    observed endogenous regressor) and ``first_stage`` holds the first-stage
    fit, with ``f_stat`` the partial F statistic of the excluded instruments.
    """

    names: list
    params: np.ndarray
    residuals: np.ndarray
    covariance: np.ndarray
    bandwidth: int
    first_stage: Optional["RegressionFit"] = None
    f_stat: Optional[float] = None
    weak_instrument: bool = False
    notes: list = field(default_factory=list)

    @property
    def coefficients(self) -> dict:
        return dict(zip(self.names, (float(v) for v in self.params)))

    @property
    def nobs(self) -> int:
        return int(self.residuals.size)

    def std_errors(self) -> dict:
        return dict(zip(self.names, np.sqrt(np.clip(np.diag(self.covariance), 0, None))))

    def __getitem__(self, name: str) -> float:
        return self.coefficients[name]


def _columns(named: Optional[Mapping[str, Sequence[float]]], n: int) -> tuple:
    if not named:
        return [], np.empty((n, 0))
    names = list(named)
    cols = []
    for name in names:
        col = np.asarray(named[name], dtype=np.float64)
        if col.ndim == 2:
            raise ValueError(f"column {name!r} must be one-dimensional")
        if col.size != n:
            raise ValueError(f"column {name!r} has {col.size} rows, expected {n}")
        cols.append(col)
    return names, np.column_stack(cols)


def ols(
    y: Sequence[float],
    regressors: Mapping[str, Sequence[float]],
    hac_bandwidth: Bandwidth = "auto",
) -> RegressionFit:
    """Least squares of ``y`` on an intercept ("const") and ``regressors``."""
    y = np.asarray(y, dtype=np.float64).ravel()
    n = y.size
    names, R = _columns(regressors, n)
    names = ["const"] + names
    X = np.column_stack([np.ones(n), R])
    if n < X.shape[1] + 1:
        raise SeriesTooShortError(f"{n} observations cannot support {X.shape[1]} coefficients")
    beta = lstsq(X, y, names)
    resid = y - X @ beta
    scores = np.ascontiguousarray(X * resid[:, None])
    bw = resolve_bandwidth(hac_bandwidth, scores)
    return RegressionFit(names, beta, resid, _sandwich(X, scores, bw), bw)


def _partial_f(rss_restricted: float, rss_full: float, q: int, dof: int) -> float:
    if rss_full <= 0:
        return math.inf
    return ((rss_restricted - rss_full) / q) / (rss_full / dof)


def tsls(
    y: Sequence[float],
    endogenous: Sequence[float],
    instruments: Mapping[str, Sequence[float]],
    exogenous: Optional[Mapping[str, Sequence[float]]] = None,
    hac_bandwidth: Bandwidth = "auto",
    endog_name: str = "endog",
) -> RegressionFit:
    """Two-stage least squares with one endogenous regressor.

    Exogenous controls enter both stages. The coefficient covariance is the
    HAC sandwich on the second-stage design, using structural residuals
    ``y - [1, endog, exog] @ beta``.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    n = y.size
    x = np.asarray(endogenous, dtype=np.float64).ravel()
    if x.size != n:
        raise ValueError("endogenous column and y differ in length")
    if not instruments:
        raise ValueError("at least one instrument is required")
    inst_names, Zx = _columns(instruments, n)
    exog_names, W = _columns(exogenous, n)
    if endog_name in inst_names or endog_name in exog_names:
        raise ValueError(f"name {endog_name!r} used twice")

    base = np.column_stack([np.ones(n), W])
    base_names = ["const"] + exog_names
    Z = np.column_stack([base, Zx])
    z_names = base_names + inst_names
    if n < Z.shape[1] + 1:
        raise SeriesTooShortError(f"{n} observations cannot support {Z.shape[1]} first-stage coefficients")

    # first stage
    gamma = lstsq(Z, x, z_names)
    x_hat = Z @ gamma
    v = x - x_hat
    rss_u = float(v @ v)
    restricted = x - base @ lstsq(base, x, base_names)
    rss_r = float(restricted @ restricted)
    f_stat = _partial_f(rss_r, rss_u, len(inst_names), n - Z.shape[1])

    # second stage
    names = ["const", endog_name] + exog_names
    X_hat = np.column_stack([np.ones(n), x_hat, W])
    check_rank(X_hat, names)
    beta = lstsq(X_hat, y, names)
    X = np.column_stack([np.ones(n), x, W])
    resid = y - X @ beta

    scores = np.ascontiguousarray(X_hat * resid[:, None])
    bw = resolve_bandwidth(hac_bandwidth, scores)
    cov = _sandwich(X_hat, scores, bw)

    fz_scores = np.ascontiguousarray(Z * v[:, None])
    first = RegressionFit(
        z_names, gamma, v, _sandwich(Z, fz_scores, resolve_bandwidth(hac_bandwidth, fz_scores)),
        bw, f_stat=f_stat,
    )
    fit = RegressionFit(names, beta, resid, cov, bw, first_stage=first, f_stat=f_stat)
    if not f_stat >= WEAK_F:
        fit.weak_instrument = True
        msg = f"weak instruments {inst_names}: first-stage F = {f_stat:.3g} < {WEAK_F:g}"
        fit.notes.append(msg)
        warnings.warn(msg, WeakInstrumentWarning, stacklevel=2)
    return fit


# --------------------------------------------------------------------------
# identification strategies
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StrategySpec:
    """Which estimator to run and how.

    ``wind_lags`` (M) applies to conditional_iv and ``demand_lags`` (L) to
    nuisance_iv; both must be at least 1 when used.
    """

    kind: str
    wind_lags: int = DEFAULT_WIND_LAGS
    demand_lags: int = DEFAULT_DEMAND_LAGS
    hac_bandwidth: Bandwidth = DEFAULT_BANDWIDTH

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.kind!r}; expected one of {STRATEGIES}")
        if self.kind == "conditional_iv" and self.wind_lags < 1:
            raise ValueError("conditional_iv needs at least one wind lag (M >= 1)")
        if self.kind == "nuisance_iv" and self.demand_lags < 1:
            raise ValueError("nuisance_iv needs at least one demand lag (L >= 1)")

    @property
    def label(self) -> str:
        if self.kind == "conditional_iv":
            return f"conditional_iv(M={self.wind_lags})"
        if self.kind == "nuisance_iv":
            return f"nuisance_iv(L={self.demand_lags})"
        return self.kind

    def max_lag(self) -> int:
        return {
            "lagprice_iv": 1,
            "regular_iv_diff": 1,
            "conditional_iv": self.wind_lags,
            "nuisance_iv": self.demand_lags,
        }.get(self.kind, 0)


RESULT_COLUMNS = ("strategy", "slope", "std_error", "ci_low", "ci_high", "first_stage_f", "nobs")


@dataclass
class EstimationResult:
    strategy: StrategySpec
    slope: float
    std_error: float
    ci_low: float
    ci_high: float
    first_stage_f: Optional[float]
    nobs: int
    bandwidth: int = 0
    weak_instrument: bool = False
    fit: Optional[RegressionFit] = field(default=None, repr=False)

    def covers(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high

    def to_row(self) -> dict:
        return {
            "strategy": self.strategy.kind,
            "slope": self.slope,
            "std_error": self.std_error,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "first_stage_f": self.first_stage_f if self.first_stage_f is not None else "",
            "nobs": self.nobs,
        }


def _result(spec: StrategySpec, fit: RegressionFit) -> EstimationResult:
    slope = float(fit.coefficients["price"])
    se = float(math.sqrt(max(fit.covariance[1, 1], 0.0)))
    half = Z_975 * se
    return EstimationResult(
        spec, slope, se, slope - half, slope + half, fit.f_stat, fit.nobs,
        bandwidth=fit.bandwidth, weak_instrument=fit.weak_instrument, fit=fit,
    )


def estimate(strategy: Union[StrategySpec, str], panel: EquilibriumPanel) -> EstimationResult:
    """Estimate the demand slope on ``panel`` with ``strategy``.

    Rows whose lags are unavailable are dropped from the front.
    """
    spec = StrategySpec(strategy) if isinstance(strategy, str) else strategy
    w = panel.wind.values
    p = panel.price.values
    d = panel.demand.values
    k = spec.max_lag()
    # intercept, slope and controls need a few spare rows beyond the lags
    need = k + 3 + (k if spec.kind in ("conditional_iv", "nuisance_iv") else 0)
    if len(panel) < need:
        raise SeriesTooShortError(
            f"panel of length {len(panel)} too short for {spec.label} (needs {need})"
        )
    bw = spec.hac_bandwidth
    kind = spec.kind

    if kind == "ols":
        fit = ols(d, {"price": p}, bw)
    elif kind == "lagprice_iv":
        fit = _iv(d[1:], p[1:], {"price_lag1": p[:-1]}, None, bw)
    elif kind == "regular_iv":
        fit = _iv(d, p, {"wind": w}, None, bw)
    elif kind == "regular_iv_diff":
        fit = _iv(np.diff(d), np.diff(p), {"wind": np.diff(w)}, None, bw)
    elif kind == "conditional_iv":
        m = spec.wind_lags
        lags = lag_matrix(w, range(1, m + 1))
        controls = {f"wind_lag{l}": lags[:, l - 1] for l in range(1, m + 1)}
        fit = _iv(d[m:], p[m:], {"wind": w[m:]}, controls, bw)
    else:
        L = spec.demand_lags
        lags = lag_matrix(d, range(1, L + 1))
        controls = {f"demand_lag{l}": lags[:, l - 1] for l in range(1, L + 1)}
        fit = _iv(d[L:], p[L:], {"wind": w[L:]}, controls, bw)
    return _result(spec, fit)


def _iv(y, x, instruments, exogenous, bw) -> RegressionFit:
    with warnings.catch_warnings():
        # weakness is reported on the result instead
        warnings.simplefilter("ignore", WeakInstrumentWarning)
        return tsls(y, x, instruments, exogenous, bw, endog_name="price")
