"""Linear demand/supply market with autoregressive demand.

Demand:  d_t = b0_d + b_d p_t + sum_l a_l d_{t-l} + e_d
Supply:  s_t = b0_s + b_s p_t + b_w w_t + e_s
The price clears the market (d_t = s_t) every hour.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels
from .errors import (
    DegenerateEquilibriumError,
    InstabilityError,
    NonStationaryError,
    ParseError,
    SeriesTooShortError,
)
from .rng import Seed, generator, spawn
from .series import HOUR, ArModel, TimeSeries

DEFAULT_BURN_IN = 672  # 28 days
INSTABILITY_LIMIT = 1e6  # MWh
PANEL_HEADER = ("timestamp", "wind_ms", "price_eur_mwh", "demand_mwh")


@dataclass(frozen=True)
class MarketParams:
    """Parameters of the simulated market.

    Slopes are in MWh per EUR/MWh, ``wind_effect`` in MWh per m/s. Supply-side
    defaults follow the calibrated setup (b_s = 4, b_w = 16, b0_s = 0,
    Var(e_s) = 0.01).
    """

    demand_intercept: float
    demand_slope: float
    demand_ar: tuple = ()
    demand_noise_var: float = 0.0
    supply_intercept: float = 0.0
    supply_slope: float = 4.0
    wind_effect: float = 16.0
    supply_noise_var: float = 0.01
    check_orientation: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        ar = tuple(float(a) for a in np.atleast_1d(np.asarray(self.demand_ar, dtype=float)))
        object.__setattr__(self, "demand_ar", ar)
        if self.supply_slope == self.demand_slope:
            raise DegenerateEquilibriumError(
                "supply and demand slopes coincide; the equilibrium price is undefined"
            )
        if self.check_orientation and not (self.demand_slope <= 0 < self.supply_slope):
            raise ValueError("expected demand_slope <= 0 < supply_slope")
        if self.demand_noise_var < 0 or self.supply_noise_var < 0:
            raise ValueError("noise variances must be non-negative")
        if not self.effective_demand_ar().stationary:
            raise NonStationaryError(
                f"demand AR {ar} is explosive once the price feedback is included"
            )

    @property
    def order(self) -> int:
        return len(self.demand_ar)

    @property
    def slope_gap(self) -> float:
        """supply_slope - demand_slope (Delta beta)."""
        return self.supply_slope - self.demand_slope

    def effective_demand_ar(self) -> ArModel:
        """Reduced-form AR filter of equilibrium demand.

        Substituting the clearing price into the demand equation scales each lag
        coefficient by supply_slope / (supply_slope - demand_slope).
        """
        scale = self.supply_slope / self.slope_gap
        return ArModel(0.0, tuple(scale * a for a in self.demand_ar))


def equilibrium_price(
    params: MarketParams,
    wind_t: float,
    demand_lags: Sequence[float] = (),
    eps_d: float = 0.0,
    eps_s: float = 0.0,
) -> float:
    """Market-clearing price for one hour.

    ``demand_lags`` is ordered most recent first: (d_{t-1}, d_{t-2}, ...).
    """
    gap = params.supply_slope - params.demand_slope
    if gap == 0:
        raise DegenerateEquilibriumError("coincident supply and demand slopes")
    lagsum = _lag_sum(params, demand_lags)
    num = (
        params.supply_intercept
        - params.demand_intercept
        + params.wind_effect * wind_t
        - lagsum
        + eps_s
        - eps_d
    )
    return num / -gap


def demand_response(
    params: MarketParams, price_t: float, demand_lags: Sequence[float] = (), eps_d: float = 0.0
) -> float:
    return params.demand_intercept + params.demand_slope * price_t + _lag_sum(params, demand_lags) + eps_d


def supply(params: MarketParams, price, wind, eps_s=0.0):
    """Supply at the given price and wind (scalars or arrays)."""
    return (
        params.supply_intercept
        + params.supply_slope * np.asarray(price)
        + params.wind_effect * np.asarray(wind)
        + eps_s
    )


def _lag_sum(params: MarketParams, demand_lags: Sequence[float]) -> float:
    lags = np.asarray(demand_lags, dtype=float).ravel()
    if lags.size != params.order:
        raise ValueError(f"expected {params.order} demand lags, got {lags.size}")
    return float(np.dot(params.demand_ar, lags)) if lags.size else 0.0


def calibrate_intercept(
    target_mean_demand: float,
    mean_wind: float,
    params: MarketParams,
) -> float:
    """Demand intercept that makes ``target_mean_demand`` the deterministic
    steady state at ``mean_wind``.

    The demand intercept stored in ``params`` is ignored.
    """
    if params.supply_slope <= 0:
        raise ValueError("supply_slope must be positive")
    mean_price = (
        target_mean_demand - params.wind_effect * mean_wind - params.supply_intercept
    ) / params.supply_slope
    return target_mean_demand * (1.0 - sum(params.demand_ar)) - params.demand_slope * mean_price


def calibrated_params(
    demand_slope: float,
    demand_ar: Sequence[float],
    demand_noise_var: float,
    target_mean_demand: float,
    mean_wind: float,
    **supply_side,
) -> MarketParams:
    """MarketParams with the demand intercept solved by ``calibrate_intercept``."""
    draft = MarketParams(0.0, demand_slope, tuple(demand_ar), demand_noise_var, **supply_side)
    return replace(draft, demand_intercept=calibrate_intercept(target_mean_demand, mean_wind, draft))


def steady_state(params: MarketParams, mean_wind: float) -> tuple:
    """Noise-free fixed point (demand, price) at constant wind."""
    # d (1 - sum a) = b0_d + b_d p  and  d = b0_s + b_s p + b_w w
    a = 1.0 - sum(params.demand_ar)
    det = a * params.supply_slope - params.demand_slope
    if det == 0:
        raise DegenerateEquilibriumError("no unique steady state")
    shift = params.supply_intercept + params.wind_effect * mean_wind
    price = (params.demand_intercept - a * shift) / det
    demand = shift + params.supply_slope * price
    return demand, price


@dataclass(frozen=True)
class EquilibriumPanel:
    """Aligned wind, price and demand after burn-in.

    ``demand_noise``/``supply_noise`` hold the realised shocks when the panel was
    simulated, so market clearing can be audited; they are None for panels
    read from disk.
    """

    wind: TimeSeries
    price: TimeSeries
    demand: TimeSeries
    params: Optional[MarketParams] = None
    burn_in_dropped: int = 0
    demand_noise: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    supply_noise: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.wind)
        if len(self.price) != n or len(self.demand) != n:
            raise ValueError("wind, price and demand must have equal lengths")

    def __len__(self) -> int:
        return len(self.wind)

    def clearing_gap(self) -> np.ndarray:
        """Relative supply-demand imbalance at every hour."""
        if self.params is None or self.supply_noise is None:
            raise ValueError("clearing can only be checked on simulated panels")
        s = supply(self.params, self.price.values, self.wind.values, self.supply_noise)
        d = self.demand.values
        return np.abs(d - s) / np.maximum(np.abs(d), 1.0)

    def with_series(self, wind=None, price=None, demand=None) -> "EquilibriumPanel":
        return EquilibriumPanel(
            wind if wind is not None else self.wind,
            price if price is not None else self.price,
            demand if demand is not None else self.demand,
            self.params,
            self.burn_in_dropped,
        )


def simulate_market(
    params: MarketParams,
    wind: TimeSeries,
    seed: Seed,
    burn_in: int = DEFAULT_BURN_IN,
    initial_demand: Optional[Sequence[float]] = None,
) -> EquilibriumPanel:
    """Simulate hourly equilibria driven by ``wind``.

    Demand shocks and supply shocks come from two independent streams spawned
    from ``seed``. Pre-sample demand lags start at the deterministic steady
    state for the mean of ``wind`` (the calibration target when the intercept
    came from ``calibrate_intercept``) unless ``initial_demand`` is given. The
    first ``burn_in`` hours are dropped from every series.
    """
    w = np.ascontiguousarray(wind.values if isinstance(wind, TimeSeries) else wind, dtype=np.float64)
    order = params.order
    if burn_in < 0:
        raise ValueError("burn_in must be non-negative")
    if w.size <= burn_in + max(1, order):
        raise SeriesTooShortError(
            f"wind series of length {w.size} too short for burn_in={burn_in} and {order} lags"
        )
    if initial_demand is None:
        initial = np.full(order, steady_state(params, float(w.mean()))[0])
    else:
        initial = np.asarray(initial_demand, dtype=np.float64)
        if initial.size != order:
            raise ValueError(f"need {order} initial demand values, got {initial.size}")

    ss_d, ss_s = spawn(seed, 2)
    eps_d = generator(ss_d).standard_normal(w.size) * math.sqrt(params.demand_noise_var)
    eps_s = generator(ss_s).standard_normal(w.size) * math.sqrt(params.supply_noise_var)

    price, demand, blowup = kernels.market_recursion(
        params.demand_intercept,
        params.demand_slope,
        np.asarray(params.demand_ar, dtype=np.float64),
        params.supply_intercept,
        params.supply_slope,
        params.wind_effect,
        w,
        eps_d,
        eps_s,
        initial,
        INSTABILITY_LIMIT,
    )
    if blowup != kernels.NO_BLOWUP:
        raise InstabilityError(f"demand exceeded {INSTABILITY_LIMIT:g} MWh at hour {blowup}")

    start = None
    if isinstance(wind, TimeSeries) and wind.start is not None:
        start = wind.start + burn_in * HOUR
    keep = slice(burn_in, None)
    return EquilibriumPanel(
        TimeSeries(w[keep], start=start, label="wind"),
        TimeSeries(price[keep], start=start, label="price"),
        TimeSeries(demand[keep], start=start, label="demand"),
        params,
        burn_in,
        demand_noise=eps_d[keep],
        supply_noise=eps_s[keep],
    )


# --------------------------------------------------------------------------
# panel files
# --------------------------------------------------------------------------


def write_panel(panel: EquilibriumPanel, path: Union[str, Path]) -> None:
    stamps = panel.wind.timestamps()
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(PANEL_HEADER)
        for i in range(len(panel)):
            ts = stamps[i].strftime("%Y-%m-%dT%H:%M:%S") if stamps else str(i)
            out.writerow(
                [
                    ts,
                    repr(float(panel.wind.values[i])),
                    repr(float(panel.price.values[i])),
                    repr(float(panel.demand.values[i])),
                ]
            )


def read_panel(path: Union[str, Path]) -> EquilibriumPanel:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(c.strip() for c in rows[0]) != PANEL_HEADER:
        raise ParseError(f"expected header {','.join(PANEL_HEADER)}", row=1)
    cols = [[], [], []]
    start = None
    prev = None
    for i, r in enumerate(rows[1:], start=2):
        if not any(c.strip() for c in r):
            continue
        if len(r) != 4:
            raise ParseError(f"expected 4 fields, got {len(r)}", row=i)
        key = r[0].strip()
        try:
            stamp = datetime.fromisoformat(key)
        except ValueError:
            try:
                stamp = int(key)
            except ValueError:
                raise ParseError(f"bad timestamp {key!r}", row=i) from None
        if prev is not None and not (type(stamp) is type(prev) and stamp > prev):
            raise ParseError("timestamps not strictly increasing", row=i)
        if prev is None and isinstance(stamp, datetime):
            start = stamp
        prev = stamp
        for j in range(3):
            try:
                val = float(r[j + 1])
            except ValueError:
                raise ParseError(f"cannot parse {r[j + 1]!r}", row=i) from None
            if not math.isfinite(val):
                raise ParseError(f"non-finite value {r[j + 1]!r}", row=i)
            cols[j].append(val)
    if not cols[0]:
        raise ParseError("no data rows", row=2)
    return EquilibriumPanel(
        TimeSeries(cols[0], start=start, label="wind"),
        TimeSeries(cols[1], start=start, label="price"),
        TimeSeries(cols[2], start=start, label="demand"),
    )
