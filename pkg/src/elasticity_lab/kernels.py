"""Hot numeric loops, each with a numba and a pure-numpy implementation.

The public names (``ar_recursion``, ``market_recursion``, ``hac_meat``,
``autocovariances``) dispatch to the numba versions unless
``ELASTICITY_LAB_DISABLE_NUMBA`` is set. Both variants stay importable under
``*_numba`` / ``*_numpy`` so tests and the benchmark can compare them.
"""

import numpy as np
from scipy.signal import lfilter, lfiltic

from ._accel import USE_NUMBA, njit

# Sentinel returned by the market kernel when no step exploded.
NO_BLOWUP = -1


# --------------------------------------------------------------------------
# AR recursion: x_t = c + sum_l a_l x_{t-l} + e_t
# --------------------------------------------------------------------------


def _ar_recursion_py(intercept, coeffs, innovations, initial):
    order = coeffs.shape[0]
    n = innovations.shape[0]
    buf = np.empty(n + order)
    buf[:order] = initial
    for t in range(n):
        acc = intercept + innovations[t]
        for lag in range(1, order + 1):
            acc += coeffs[lag - 1] * buf[order + t - lag]
        buf[order + t] = acc
    return buf[order:].copy()


ar_recursion_numba = njit(_ar_recursion_py)


def ar_recursion_numpy(intercept, coeffs, innovations, initial):
    coeffs = np.asarray(coeffs, dtype=np.float64)
    drive = intercept + np.asarray(innovations, dtype=np.float64)
    if coeffs.size == 0:
        return drive
    a = np.concatenate(([1.0], -coeffs))
    # lfiltic wants the most recent output first
    zi = lfiltic([1.0], a, y=np.asarray(initial, dtype=np.float64)[::-1])
    out, _ = lfilter([1.0], a, drive, zi=zi)
    return out


# --------------------------------------------------------------------------
# Market equilibrium recursion
# --------------------------------------------------------------------------


def _market_recursion_py(
    demand_intercept,
    demand_slope,
    demand_ar,
    supply_intercept,
    supply_slope,
    wind_effect,
    wind,
    eps_d,
    eps_s,
    initial,
    limit,
):
    order = demand_ar.shape[0]
    n = wind.shape[0]
    denom = demand_slope - supply_slope
    d = np.empty(n + order)
    d[:order] = initial
    p = np.empty(n)
    blowup = -1
    for t in range(n):
        lagsum = 0.0
        for lag in range(1, order + 1):
            lagsum += demand_ar[lag - 1] * d[order + t - lag]
        price = (
            supply_intercept
            - demand_intercept
            + wind_effect * wind[t]
            - lagsum
            + eps_s[t]
            - eps_d[t]
        ) / denom
        dt = demand_intercept + demand_slope * price + lagsum + eps_d[t]
        p[t] = price
        d[order + t] = dt
        if not abs(dt) <= limit:
            blowup = t
            break
    return p, d[order:].copy(), blowup


market_recursion_numba = njit(_market_recursion_py)


def market_recursion_numpy(
    demand_intercept,
    demand_slope,
    demand_ar,
    supply_intercept,
    supply_slope,
    wind_effect,
    wind,
    eps_d,
    eps_s,
    initial,
    limit,
):
    # Substituting the clearing price into the demand equation leaves a linear
    # AR filter in demand with coefficients scaled by supply_slope / (supply_slope - demand_slope).
    demand_ar = np.asarray(demand_ar, dtype=np.float64)
    order = demand_ar.size
    k = 1.0 / (supply_slope - demand_slope)
    drive = (
        demand_intercept
        + demand_slope * k * (demand_intercept - supply_intercept - wind_effect * wind - eps_s)
        + supply_slope * k * eps_d
    )
    with np.errstate(over="ignore", invalid="ignore"):
        d = ar_recursion_numpy(0.0, supply_slope * k * demand_ar, drive, initial)
        full = np.concatenate((np.asarray(initial, dtype=np.float64), d))
        lagsum = np.zeros(d.size)
        for lag in range(1, order + 1):
            lagsum += demand_ar[lag - 1] * full[order - lag : order - lag + d.size]
        p = (
            supply_intercept - demand_intercept + wind_effect * wind - lagsum + eps_s - eps_d
        ) / (demand_slope - supply_slope)
    bad = np.flatnonzero(~(np.abs(d) <= limit))
    blowup = int(bad[0]) if bad.size else NO_BLOWUP
    return p, d, blowup


# --------------------------------------------------------------------------
# HAC meat: S = G_0 + sum_j w_j (G_j + G_j')
# --------------------------------------------------------------------------


def _hac_meat_py(scores, bandwidth):
    # h_t = sum_{j=1..B} (1 - j/(B+1)) g_{t-j} is carried by two running sums,
    # plain (a) and lag-weighted (c), so the cost is O(n k^2) for any bandwidth.
    n, k = scores.shape
    scale = 1.0 / (bandwidth + 1.0)
    s = np.zeros((k, k))
    a = np.zeros(k)
    c = np.zeros(k)
    h = np.empty(k)
    for t in range(n):
        for i in range(k):
            h[i] = a[i] - c[i] * scale
        for i in range(k):
            gi = scores[t, i]
            hi = h[i]
            for m in range(k):
                s[i, m] += gi * scores[t, m] + gi * h[m] + hi * scores[t, m]
        if bandwidth > 0:
            old = t - bandwidth
            for i in range(k):
                gone = scores[old, i] if old >= 0 else 0.0
                c[i] += a[i] + scores[t, i] - (bandwidth + 1.0) * gone
                a[i] += scores[t, i] - gone
    return s


hac_meat_numba = njit(_hac_meat_py)


def hac_meat_numpy(scores, bandwidth):
    s = scores.T @ scores
    for j in range(1, bandwidth + 1):
        gam = scores[j:].T @ scores[:-j]
        s += (1.0 - j / (bandwidth + 1.0)) * (gam + gam.T)
    return s


# --------------------------------------------------------------------------
# Autocovariance sums of a demeaned series (lags 0..max_lag, unnormalised)
# --------------------------------------------------------------------------


def _autocovariances_py(x, max_lag):
    n = x.shape[0]
    out = np.zeros(max_lag + 1)
    for j in range(max_lag + 1):
        acc = 0.0
        for t in range(j, n):
            acc += x[t] * x[t - j]
        out[j] = acc
    return out


autocovariances_numba = njit(_autocovariances_py)


def autocovariances_numpy(x, max_lag):
    n = x.shape[0]
    return np.array([x[j:] @ x[: n - j] for j in range(max_lag + 1)])


if USE_NUMBA:
    ar_recursion = ar_recursion_numba
    market_recursion = market_recursion_numba
    hac_meat = hac_meat_numba
    autocovariances = autocovariances_numba
else:
    ar_recursion = ar_recursion_numpy
    market_recursion = market_recursion_numpy
    hac_meat = hac_meat_numpy
    autocovariances = autocovariances_numpy
