"""Hourly time series container and the core time-series statistics."""

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import kernels
from .errors import NonStationaryError, ParseError, SeriesTooShortError
from .linalg import lstsq
from .rng import Seed, generator

HOUR = timedelta(hours=1)

ArrayLike = Union["TimeSeries", Sequence[float], np.ndarray]


@dataclass(frozen=True)
class TimeSeries:
    """Ordered hourly observations.

    ``values`` is stored as a read-only float64 array. ``start`` is the
    timestamp of the first observation, if known; observations are one hour
    apart.
    """

    values: np.ndarray
    start: Optional[datetime] = None
    label: str = ""

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64).ravel()
        if arr.size < 1:
            raise ValueError("a TimeSeries needs at least one observation")
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise ValueError(f"non-finite value at index {int(bad[0])}")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def timestamps(self) -> Optional[list]:
        if self.start is None:
            return None
        return [self.start + i * HOUR for i in range(len(self))]

    def replace(self, values, label: Optional[str] = None, start=...) -> "TimeSeries":
        return TimeSeries(
            values,
            start=self.start if start is ... else start,
            label=self.label if label is None else label,
        )

    def mean(self) -> float:
        return float(self.values.mean())

    def std(self) -> float:
        return float(self.values.std())


def _values(series: ArrayLike) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.values
    return np.asarray(series, dtype=np.float64)


@dataclass(frozen=True)
class ArModel:
    """AR(L) model ``x_t = intercept + sum_l coefficients[l-1] x_{t-l} + e_t``."""

    intercept: float
    coefficients: tuple = ()
    innovation_variance: float = 0.0
    order: int = field(default=None)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in np.atleast_1d(np.asarray(self.coefficients, float)))
        order = len(coeffs) if self.order is None else int(self.order)
        if order != len(coeffs):
            raise ValueError(f"order {order} but {len(coeffs)} coefficients given")
        if not self.innovation_variance >= 0:
            raise ValueError("innovation_variance must be non-negative")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "innovation_variance", float(self.innovation_variance))

    def roots(self) -> np.ndarray:
        """Roots of the characteristic polynomial 1 - a_1 z - ... - a_L z^L."""
        if self.order == 0:
            return np.array([])
        poly = np.concatenate((-np.asarray(self.coefficients)[::-1], [1.0]))
        return np.roots(poly)

    @property
    def stationary(self) -> bool:
        if self.order == 0:
            return True
        return bool(np.all(np.abs(self.roots()) > 1.0 + 1e-12))

    @property
    def unconditional_mean(self) -> float:
        return self.intercept / (1.0 - sum(self.coefficients))

    def stationary_variance(self) -> float:
        """Variance of the stationary distribution, from the MA(inf) weights."""
        if not self.stationary:
            raise NonStationaryError("model is not stationary")
        return self.innovation_variance * _psi_weight_sum_sq(self.coefficients)


def _psi_weight_sum_sq(coeffs: Sequence[float], tol: float = 1e-15) -> float:
    # Yule-Walker in closed form would need a case per order; summing the
    # squared impulse response is order-agnostic.
    if len(coeffs) == 0:
        return 1.0
    a = np.asarray(coeffs, dtype=np.float64)
    p = a.size
    psi = [1.0]
    total = 1.0
    for j in range(1, 1_000_000):
        val = sum(a[i] * psi[j - 1 - i] for i in range(min(p, j)))
        psi.append(val)
        total += val * val
        if j > p and abs(val) < tol and max(abs(v) for v in psi[-p:]) < tol:
            break
    return total


# --------------------------------------------------------------------------
# statistics
# --------------------------------------------------------------------------


def _check_lag(n: int, max_lag: int) -> None:
    if max_lag < 1:
        raise ValueError("max_lag must be a positive integer")
    if n <= max_lag + 1:
        raise SeriesTooShortError(f"series of length {n} too short for max_lag={max_lag}")


def acf(series: ArrayLike, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags 1..max_lag.

    Deviations are taken from the full-sample mean and every lag is divided by
    the lag-0 sum of squares.
    """
    x = _values(series)
    _check_lag(x.size, max_lag)
    dev = np.ascontiguousarray(x - x.mean())
    sums = kernels.autocovariances(dev, max_lag)
    if sums[0] == 0.0:
        return np.zeros(max_lag)
    return sums[1:] / sums[0]


def pacf(series: ArrayLike, max_lag: int) -> np.ndarray:
    """Partial autocorrelations at lags 1..max_lag.

    ``pacf[k-1]`` is the lag-k coefficient of a least-squares AR(k) fit with
    intercept.
    """
    x = _values(series)
    _check_lag(x.size, max_lag)
    out = np.empty(max_lag)
    for k in range(1, max_lag + 1):
        out[k - 1] = fit_ar(x, k).coefficients[-1]
    return out


def lag_matrix(series: ArrayLike, lags: Iterable[int]) -> np.ndarray:
    """Columns of lagged values aligned on a common row index.

    Lags are sorted ascending. With ``m = max(lags)``, row ``i`` corresponds to
    time ``t = m + i`` and column ``j`` holds ``x[t - lags[j]]``; the
    contemporaneous value for that row is ``x[m:][i]``. An empty lag set gives
    an ``(n, 0)`` array.
    """
    x = _values(series)
    lags = sorted(set(int(l) for l in lags))
    if not lags:
        return np.empty((x.size, 0))
    if lags[0] < 1:
        raise ValueError("lags must be positive integers")
    m = lags[-1]
    if m >= x.size:
        raise SeriesTooShortError(f"lag {m} not available in a series of length {x.size}")
    n = x.size
    return np.column_stack([x[m - l : n - l] for l in lags])


def fit_ar(series: ArrayLike, order: int) -> ArModel:
    """Conditional least-squares AR fit.

    Regresses ``x_t`` on an intercept and ``x_{t-1}..x_{t-order}``. The
    innovation variance is the residual sum of squares divided by the degrees
    of freedom (so ``order=0`` gives the sample mean and the ddof=1 sample
    variance).
    """
    x = _values(series)
    if order < 0:
        raise ValueError("order must be non-negative")
    if x.size <= order + 2:
        raise SeriesTooShortError(f"series of length {x.size} too short for AR({order})")
    y = x[order:]
    X = np.column_stack([np.ones(y.size), lag_matrix(x, range(1, order + 1))[-y.size :]])
    names = ["const"] + [f"lag{l}" for l in range(1, order + 1)]
    beta = lstsq(X, y, names)
    resid = y - X @ beta
    dof = y.size - (order + 1)
    var = float(resid @ resid / dof)
    return ArModel(beta[0], tuple(beta[1:]), max(var, 0.0))


def simulate_ar(
    model: ArModel, length: int, seed: Seed, initial: Optional[Sequence[float]] = None
) -> TimeSeries:
    """Draw ``length`` observations from ``model`` with Gaussian innovations.

    Pre-sample lags default to the unconditional mean.
    """
    if not model.stationary:
        raise NonStationaryError(f"AR coefficients {model.coefficients} are not stationary")
    if length < 1:
        raise ValueError("length must be positive")
    if initial is None:
        initial = np.full(model.order, model.unconditional_mean)
    else:
        initial = np.asarray(initial, dtype=np.float64)
        if initial.size != model.order:
            raise ValueError(f"need {model.order} initial values, got {initial.size}")
    rng = generator(seed)
    eps = rng.standard_normal(length) * math.sqrt(model.innovation_variance)
    x = kernels.ar_recursion(
        model.intercept, np.asarray(model.coefficients, dtype=np.float64), eps, initial
    )
    return TimeSeries(x, label="ar")


def difference(series: TimeSeries) -> TimeSeries:
    x = _values(series)
    if x.size < 2:
        raise SeriesTooShortError("difference needs at least two observations")
    if isinstance(series, TimeSeries):
        start = None if series.start is None else series.start + HOUR
        return TimeSeries(np.diff(x), start=start, label=series.label)
    return TimeSeries(np.diff(x))


def shuffle(series: TimeSeries, seed: Seed) -> TimeSeries:
    """Uniform random permutation of the values; timestamps are kept."""
    x = _values(series)
    out = generator(seed).permutation(x)
    if isinstance(series, TimeSeries):
        return series.replace(out)
    return TimeSeries(out)


# --------------------------------------------------------------------------
# text format: "timestamp,value" with header, or bare values
# --------------------------------------------------------------------------


def _parse_float(text: str, row: int, min_value: Optional[float] = None) -> float:
    text = text.strip()
    if not text:
        raise ParseError("empty value", row=row)
    try:
        val = float(text)
    except ValueError:
        raise ParseError(f"cannot parse {text!r} as a number", row=row) from None
    if not math.isfinite(val):
        raise ParseError(f"non-finite value {text!r}", row=row)
    if min_value is not None and val < min_value:
        raise ParseError(f"value {val} below the allowed minimum {min_value}", row=row)
    return val


def read_series(
    path: Union[str, Path], label: str = "", min_value: Optional[float] = None
) -> TimeSeries:
    """Read the two-column ``timestamp,value`` format (header required) or a
    headerless single column of values.

    Errors carry the 1-based line number of the offending row.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh)]
    # drop trailing blank lines only; interior blanks are errors
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()
    if not rows:
        raise ParseError("file is empty", row=1)

    header = [c.strip().lower() for c in rows[0]]
    if header == ["timestamp", "value"]:
        values, stamps = [], []
        for i, r in enumerate(rows[1:], start=2):
            if len(r) != 2:
                raise ParseError(f"expected 2 fields, got {len(r)}", row=i)
            try:
                ts = datetime.fromisoformat(r[0].strip())
            except ValueError:
                raise ParseError(f"bad timestamp {r[0]!r}", row=i) from None
            if stamps and ts <= stamps[-1]:
                raise ParseError("timestamps not strictly increasing", row=i)
            stamps.append(ts)
            values.append(_parse_float(r[1], i, min_value))
        if not values:
            raise ParseError("no data rows", row=2)
        return TimeSeries(values, start=stamps[0], label=label or path.stem)

    start_row = 2 if header == ["value"] else 1
    values = []
    for i, r in enumerate(rows[start_row - 1 :], start=start_row):
        if len(r) != 1:
            raise ParseError("expected a header 'timestamp,value' or one value per row", row=i)
        values.append(_parse_float(r[0], i, min_value))
    if not values:
        raise ParseError("no data rows", row=start_row)
    return TimeSeries(values, label=label or path.stem)


def write_series(series: TimeSeries, path: Union[str, Path]) -> None:
    path = Path(path)
    stamps = series.timestamps()
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if stamps is None:
            w.writerow(["value"])
            w.writerows([repr(float(v))] for v in series.values)
        else:
            w.writerow(["timestamp", "value"])
            for ts, v in zip(stamps, series.values):
                w.writerow([ts.strftime("%Y-%m-%dT%H:%M:%S"), repr(float(v))])
