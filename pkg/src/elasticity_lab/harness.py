"""Scenario configuration, the experiment catalogue, replication and result files."""

from __future__ import annotations

import csv
import json
import math
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from . import __version__
from ._accel import backend
from .bias import thams_bias_general
from .errors import BiasPoleError
from .estimators import EstimationResult, StrategySpec, estimate
from .market import DEFAULT_BURN_IN, EquilibriumPanel, calibrated_params, simulate_market, write_panel
from .rng import derive_seed, spawn
from .series import fit_ar
from .wind import DEFAULT_AR1_ALPHA, DEFAULT_LENGTH, WindSpec, generate_wind

DEFAULT_SEED = 0
TARGET_MEAN_DEMAND = 374.0

# demand order -> (AR coefficients, innovation variance, reported intercept)
DEMAND_TABLE = {
    0: ((), 309.49, 399.44),
    1: ((0.97,), 20.72, 38.09),
    2: ((1.20, -0.24), 19.52, 41.15),
}

# summary statistics of the calibrated scenarios: (L, beta) -> demand std, price std
REPORTED_STD = {
    (0, 0.0): (17.4, 10.1),
    (1, 0.0): (17.7, 10.2),
    (2, 0.0): (17.7, 10.0),
    (0, -0.4): (16.0, 9.1),
    (1, -0.4): (26.2, 4.7),
    (2, -0.4): (25.7, 4.6),
}

EXPERIMENTS = (
    "scatter",
    "strategy-grid",
    "conditional-sweep",
    "wind-variants",
    "alpha-sweep",
    "bias-prediction",
)

ALPHA_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95)
BIAS_GRID = (0.0, 0.2, 0.4, 0.6, 0.8, 0.9)
SCENARIO_GRID = tuple((beta, order) for beta in (0.0, -0.4) for order in (0, 1, 2))


@dataclass(frozen=True)
class ScenarioConfig:
    """One synthetic market: demand order and slope, wind recipe, seed."""

    demand_order: int = 1
    beta: float = -0.4
    demand_ar: Optional[tuple] = None
    wind: WindSpec = field(default_factory=WindSpec)
    target_mean_demand: float = TARGET_MEAN_DEMAND
    seed: int = DEFAULT_SEED
    burn_in: int = DEFAULT_BURN_IN
    length: int = DEFAULT_LENGTH

    def __post_init__(self):
        if self.demand_ar is not None:
            ar = tuple(float(a) for a in self.demand_ar)
            object.__setattr__(self, "demand_ar", ar)
            if len(ar) != self.demand_order:
                raise ValueError(
                    f"demand_order={self.demand_order} but {len(ar)} AR coefficients given"
                )
        elif self.demand_order not in DEMAND_TABLE:
            raise ValueError(f"demand_order must be one of {sorted(DEMAND_TABLE)}")
        if self.length <= self.burn_in:
            raise ValueError("length must exceed burn_in")

    def demand_coefficients(self) -> tuple:
        if self.demand_ar is not None:
            return self.demand_ar
        return DEMAND_TABLE[self.demand_order][0]

    def demand_noise_var(self) -> float:
        # overridden coefficients keep the innovation variance of their order
        return DEMAND_TABLE[min(self.demand_order, 2)][1]

    @property
    def label(self) -> str:
        return f"L={self.demand_order},beta={self.beta:g}"

    def provenance(self) -> dict:
        return OrderedDict(
            demand_order=self.demand_order,
            beta=self.beta,
            demand_ar=";".join(f"{a:g}" for a in self.demand_coefficients()),
            wind=self.wind.describe(),
            target_mean_demand=self.target_mean_demand,
            seed=self.seed,
            burn_in=self.burn_in,
            length=self.length,
        )


def run_scenario(config: ScenarioConfig) -> EquilibriumPanel:
    """Wind, calibrated demand intercept and simulated equilibria for ``config``.

    The wind stream depends only on ``config.seed``, so scenarios that share a
    seed share the same wind path.
    """
    wind_ss, market_ss = spawn(config.seed, 2)
    wind = generate_wind(config.wind.with_run(config.length, int(wind_ss.generate_state(1)[0])))
    params = calibrated_params(
        config.beta,
        config.demand_coefficients(),
        config.demand_noise_var(),
        config.target_mean_demand,
        float(wind.values.mean()),
    )
    return simulate_market(params, wind, market_ss, config.burn_in)


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------

# numeric columns that replicate() aggregates
VALUE_FIELDS = (
    "demand_intercept",
    "slope",
    "std_error",
    "ci_low",
    "ci_high",
    "first_stage_f",
    "pred_true",
    "pred_estimated",
    "demand_ar_fit1",
    "demand_ar_fit2",
    "wind_ar_fit1",
    "wind_ar_fit2",
    "demand_mean",
    "demand_std",
    "demand_min",
    "demand_max",
    "price_mean",
    "price_std",
    "price_min",
    "price_max",
    "wind_mean",
    "wind_std",
    "wind_min",
    "wind_max",
    "price_ar_fit1",
    "price_ar_fit2",
)


@dataclass
class ExperimentResult:
    experiment_id: str
    rows: list
    metadata: dict
    panels: Dict[str, EquilibriumPanel] = field(default_factory=dict, repr=False)

    def column(self, name: str, **where) -> list:
        return [r[name] for r in self.select(**where)]

    def select(self, **where) -> list:
        return [r for r in self.rows if all(r.get(k) == v for k, v in where.items())]


def _metadata(experiment_id: str, seed: int, overrides: Optional[dict], **extra) -> dict:
    meta = OrderedDict(
        experiment_id=experiment_id,
        seed=seed,
        overrides=_jsonable(overrides or {}),
        created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        version=__version__,
        backend=backend(),
    )
    meta.update(extra)
    return meta


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, WindSpec):
        return obj.describe()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _estimation_row(
    experiment_id: str, config: ScenarioConfig, result: EstimationResult, **extra
) -> dict:
    row = OrderedDict(experiment=experiment_id, scenario=config.label)
    row.update(config.provenance())
    row.update(
        strategy=result.strategy.kind,
        wind_lags=result.strategy.wind_lags if result.strategy.kind == "conditional_iv" else "",
        demand_lags=result.strategy.demand_lags if result.strategy.kind == "nuisance_iv" else "",
        slope=result.slope,
        std_error=result.std_error,
        ci_low=result.ci_low,
        ci_high=result.ci_high,
        first_stage_f=result.first_stage_f if result.first_stage_f is not None else math.nan,
        nobs=result.nobs,
        bandwidth=result.bandwidth,
        weak_instrument=result.weak_instrument,
        true_beta=config.beta,
        covers_truth=result.covers(config.beta),
    )
    row.update(extra)
    return row


# --------------------------------------------------------------------------
# experiment catalogue
# --------------------------------------------------------------------------

_CONFIG_FIELDS = {f.name for f in fields(ScenarioConfig)}


def _base_config(seed: int, overrides: dict, **defaults) -> ScenarioConfig:
    kwargs = dict(defaults)
    for key, value in overrides.items():
        if key in _CONFIG_FIELDS:
            if key == "wind" and isinstance(value, str):
                value = WindSpec.parse(value)
            kwargs[key] = value
    kwargs["seed"] = seed
    return ScenarioConfig(**kwargs)


def _strategies(overrides: dict, kinds: Sequence[str]) -> list:
    bw = overrides.get("hac_bandwidth", StrategySpec("ols").hac_bandwidth)
    m = int(overrides.get("wind_lags", 26))
    l = int(overrides.get("demand_lags", 2))
    return [StrategySpec(k, wind_lags=m, demand_lags=l, hac_bandwidth=bw) for k in kinds]


ALL_STRATEGIES = ("ols", "lagprice_iv", "regular_iv", "regular_iv_diff", "conditional_iv", "nuisance_iv")


def _panel_summary(panel: EquilibriumPanel) -> dict:
    out = OrderedDict()
    for name in ("wind", "demand", "price"):
        x = getattr(panel, name).values
        out[f"{name}_n"] = x.size
        out[f"{name}_mean"] = float(x.mean())
        out[f"{name}_std"] = float(x.std(ddof=1))
        out[f"{name}_min"] = float(x.min())
        out[f"{name}_max"] = float(x.max())
        ar = fit_ar(x, 2).coefficients
        out[f"{name}_ar_fit1"] = ar[0]
        out[f"{name}_ar_fit2"] = ar[1]
    return out


def _exp_scatter(seed: int, overrides: dict) -> ExperimentResult:
    rows, panels = [], {}
    for beta, order in SCENARIO_GRID:
        cfg = _base_config(seed, overrides, demand_order=order, beta=beta)
        panel = run_scenario(cfg)
        panels[cfg.label] = panel
        row = OrderedDict(experiment="scatter", scenario=cfg.label)
        row.update(cfg.provenance())
        row["demand_intercept"] = panel.params.demand_intercept
        row.update(_panel_summary(panel))
        rows.append(row)
    return ExperimentResult("scatter", rows, {}, panels)


def _exp_strategy_grid(seed: int, overrides: dict) -> ExperimentResult:
    rows = []
    for beta, order in SCENARIO_GRID:
        cfg = _base_config(seed, overrides, demand_order=order, beta=beta)
        panel = run_scenario(cfg)
        for spec in _strategies(overrides, ALL_STRATEGIES):
            rows.append(_estimation_row("strategy-grid", cfg, estimate(spec, panel)))
    return ExperimentResult("strategy-grid", rows, {})


def _exp_conditional_sweep(seed: int, overrides: dict) -> ExperimentResult:
    cfg = _base_config(seed, overrides, demand_order=1, beta=-0.4)
    panel = run_scenario(cfg)
    max_m = int(overrides.get("max_wind_lags", 26))
    bw = overrides.get("hac_bandwidth", StrategySpec("ols").hac_bandwidth)
    rows = []
    for m in range(1, max_m + 1):
        spec = StrategySpec("conditional_iv", wind_lags=m, hac_bandwidth=bw)
        rows.append(_estimation_row("conditional-sweep", cfg, estimate(spec, panel)))
    ref = StrategySpec("nuisance_iv", demand_lags=int(overrides.get("demand_lags", 2)), hac_bandwidth=bw)
    rows.append(_estimation_row("conditional-sweep", cfg, estimate(ref, panel)))
    return ExperimentResult("conditional-sweep", rows, {})


def _exp_wind_variants(seed: int, overrides: dict) -> ExperimentResult:
    alpha = float(overrides.get("ar1_alpha", DEFAULT_AR1_ALPHA))
    winds = (
        ("shuffled", WindSpec("shuffled", base=WindSpec("surrogate"))),
        ("synthetic", WindSpec("synthetic_ar1", alpha=alpha)),
        ("actual", WindSpec("surrogate")),
    )
    rows = []
    for variant, wind in winds:
        cfg = _base_config(seed, {k: v for k, v in overrides.items() if k != "wind"},
                           demand_order=1, beta=-0.4, wind=wind)
        panel = run_scenario(cfg)
        demand_fit = fit_ar(panel.demand, 1).coefficients[0]
        for spec in _strategies(overrides, ALL_STRATEGIES):
            res = estimate(spec, panel)
            valid = not (variant == "shuffled" and spec.kind == "lagprice_iv")
            rows.append(
                _estimation_row(
                    "wind-variants", cfg, res,
                    wind_variant=variant,
                    valid=valid,
                    demand_ar_fit1=demand_fit,
                )
            )
    return ExperimentResult("wind-variants", rows, {})


def _exp_alpha_sweep(seed: int, overrides: dict) -> ExperimentResult:
    grid = tuple(overrides.get("alpha_grid", ALPHA_GRID))
    rows = []
    for a in grid:
        cfg = _base_config(seed, overrides, demand_order=1, beta=-0.4, demand_ar=(a,))
        panel = run_scenario(cfg)
        for spec in _strategies(overrides, ("ols", "regular_iv", "nuisance_iv", "conditional_iv")):
            rows.append(_estimation_row("alpha-sweep", cfg, estimate(spec, panel), alpha_d=a))
    return ExperimentResult("alpha-sweep", rows, {})


def _bias_demand_ar(order: int, level: float) -> tuple:
    if order == 1:
        return (level,)
    # keep the shape of the fitted AR(2) demand, rescaled to the requested sum
    a1, a2 = DEMAND_TABLE[2][0]
    return (a1 * level / (a1 + a2), a2 * level / (a1 + a2))


def _safe_prediction(beta, demand, instrument) -> float:
    try:
        return thams_bias_general(beta, demand, instrument).predicted_estimate
    except BiasPoleError:
        return math.nan


def _exp_bias_prediction(seed: int, overrides: dict) -> ExperimentResult:
    alpha = float(overrides.get("ar1_alpha", DEFAULT_AR1_ALPHA))
    grid = tuple(overrides.get("alpha_grid", BIAS_GRID))
    bw = overrides.get("hac_bandwidth", StrategySpec("ols").hac_bandwidth)
    winds = (("synthetic", WindSpec("synthetic_ar1", alpha=alpha)), ("actual", WindSpec("surrogate")))
    rows = []
    for variant, wind in winds:
        wind_order = len(wind.autoregressive_coefficients())
        for order in (1, 2):
            levels = grid + (sum(DEMAND_TABLE[order][0]),)
            for level in levels:
                demand_ar = _bias_demand_ar(order, level)
                cfg = _base_config(seed, {k: v for k, v in overrides.items() if k != "wind"},
                                   demand_order=order, beta=-0.4, demand_ar=demand_ar, wind=wind)
                panel = run_scenario(cfg)
                res = estimate(StrategySpec("regular_iv", hac_bandwidth=bw), panel)
                d_fit = fit_ar(panel.demand, order).coefficients
                w_fit = fit_ar(panel.wind, wind_order).coefficients
                rows.append(
                    _estimation_row(
                        "bias-prediction", cfg, res,
                        wind_variant=variant,
                        demand_ar_sum=sum(demand_ar),
                        wind_ar_sum=sum(wind.autoregressive_coefficients()),
                        pred_true=_safe_prediction(cfg.beta, demand_ar, wind.autoregressive_coefficients()),
                        pred_estimated=_safe_prediction(cfg.beta, d_fit, w_fit),
                        demand_ar_fit1=d_fit[0],
                        demand_ar_fit2=d_fit[1] if order > 1 else math.nan,
                        wind_ar_fit1=w_fit[0],
                        wind_ar_fit2=w_fit[1] if wind_order > 1 else math.nan,
                    )
                )
    return ExperimentResult("bias-prediction", rows, {})


_RUNNERS: Dict[str, Callable[[int, dict], ExperimentResult]] = {
    "scatter": _exp_scatter,
    "strategy-grid": _exp_strategy_grid,
    "conditional-sweep": _exp_conditional_sweep,
    "wind-variants": _exp_wind_variants,
    "alpha-sweep": _exp_alpha_sweep,
    "bias-prediction": _exp_bias_prediction,
}


def run_experiment(
    experiment_id: str, overrides: Optional[dict] = None, seed: Optional[int] = None
) -> ExperimentResult:
    """Run one named experiment.

    ``overrides`` may set any ScenarioConfig field (applied to every scenario
    except the axes the experiment itself varies) and experiment knobs:
    ``hac_bandwidth``, ``wind_lags``, ``demand_lags``, ``max_wind_lags``,
    ``alpha_grid``, ``ar1_alpha``.
    """
    if experiment_id not in _RUNNERS:
        raise ValueError(f"unknown experiment {experiment_id!r}; expected one of {EXPERIMENTS}")
    overrides = dict(overrides or {})
    if seed is None:
        seed = int(overrides.pop("seed", DEFAULT_SEED))
    else:
        overrides.pop("seed", None)
    result = _RUNNERS[experiment_id](int(seed), overrides)
    result.metadata = _metadata(experiment_id, int(seed), overrides)
    return result


# --------------------------------------------------------------------------
# replication
# --------------------------------------------------------------------------

_KEY_EXCLUDE = {"seed", "nobs", "bandwidth", "weak_instrument", "covers_truth", "valid"}


def _cell_key(row: dict) -> tuple:
    return tuple((k, v) for k, v in row.items() if k not in _KEY_EXCLUDE and k not in VALUE_FIELDS)


def _run_one(args) -> ExperimentResult:
    experiment_id, overrides, seed = args
    return run_experiment(experiment_id, overrides, seed)


def replicate(
    experiment_id: str,
    n_replications: int,
    base_seed: int = DEFAULT_SEED,
    overrides: Optional[dict] = None,
    workers: int = 1,
) -> ExperimentResult:
    """Run an experiment under ``n_replications`` derived seeds and aggregate.

    Replication i uses ``derive_seed(base_seed, i)``. Each output row is one
    experiment cell with the mean and standard deviation of every numeric
    result and, for estimation cells, the share of replications whose 95% CI
    covers the true slope. Aggregation order does not depend on ``workers``.
    """
    if n_replications < 1:
        raise ValueError("n_replications must be positive")
    seeds = [derive_seed(base_seed, i) for i in range(n_replications)]
    jobs = [(experiment_id, dict(overrides or {}), s) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_one, jobs))
    else:
        runs = [_run_one(j) for j in jobs]
    rows = aggregate([r.rows for r in runs])
    for row in rows:
        row["base_seed"] = base_seed
    meta = _metadata(
        experiment_id, base_seed, overrides, replications=n_replications, seeds=seeds
    )
    return ExperimentResult(experiment_id, rows, meta)


def aggregate(replications: Sequence[Sequence[dict]]) -> list:
    """Reduce per-replication row lists (same cell order) to summary rows."""
    cells: "OrderedDict[tuple, list]" = OrderedDict()
    for rows in replications:
        for row in rows:
            cells.setdefault(_cell_key(row), []).append(row)
    out = []
    for key, members in cells.items():
        row = OrderedDict((k, v) for k, v in members[0].items() if k not in VALUE_FIELDS and k not in _KEY_EXCLUDE)
        row["n"] = len(members)
        for name in VALUE_FIELDS:
            vals = [m[name] for m in members if name in m]
            if not vals:
                continue
            arr = np.asarray(vals, dtype=float)
            row[f"{name}_mean"] = float(np.mean(arr))
            row[f"{name}_sd"] = float(np.std(arr, ddof=1)) if arr.size > 1 else math.nan
        if "covers_truth" in members[0]:
            row["coverage"] = float(np.mean([bool(m["covers_truth"]) for m in members]))
        if "weak_instrument" in members[0]:
            row["weak_share"] = float(np.mean([bool(m["weak_instrument"]) for m in members]))
        out.append(row)
    return out


# --------------------------------------------------------------------------
# result files
# --------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_rows(rows: Sequence[dict], path, columns: Optional[Sequence[str]] = None) -> None:
    if columns is None:
        columns = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(columns)
        for r in rows:
            out.writerow([_fmt(r.get(c, "")) for c in columns])


def write_experiment(result: ExperimentResult, out_dir) -> Path:
    """Write rows.csv, metadata.json and any panels into a fresh run directory.

    The directory is named ``<experiment>-seed<seed>``; existing runs are never
    overwritten, a numeric suffix is added instead.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{result.experiment_id}-seed{result.metadata.get('seed', 'na')}"
    if "replications" in result.metadata:
        stem += f"-n{result.metadata['replications']}"
    run_dir = out_dir / stem
    k = 2
    while run_dir.exists():
        run_dir = out_dir / f"{stem}-{k}"
        k += 1
    run_dir.mkdir()
    write_rows(result.rows, run_dir / "rows.csv")
    with (run_dir / "metadata.json").open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(result.metadata), fh, indent=2)
        fh.write("\n")
    if result.panels:
        pdir = run_dir / "panels"
        pdir.mkdir()
        for label, panel in result.panels.items():
            safe = label.replace("=", "").replace(",", "_").replace("-", "m")
            write_panel(panel, pdir / f"{safe}.csv")
    return run_dir


__all__ = [
    "DEMAND_TABLE",
    "EXPERIMENTS",
    "ExperimentResult",
    "ScenarioConfig",
    "aggregate",
    "replicate",
    "run_experiment",
    "run_scenario",
    "write_experiment",
    "write_rows",
]
