"""Command-line entry point: ``elasticity-lab <subcommand> ...``.

Every flag can also come from an INI file passed with ``--config``; keys
live in a ``[common]`` section or a section named after the subcommand and
use the flag name with dashes or underscores (``max-lag`` / ``max_lag``).
Command-line flags win over the file.

On failure a single JSON line ``{"error": <type>, "message": <text>}`` is
written to stderr and the exit status is non-zero.
"""

import argparse
import configparser
import csv
import json
import sys
from pathlib import Path

from .bias import RESULT_COLUMNS as BIAS_COLUMNS
from .bias import thams_bias_general
from .estimators import RESULT_COLUMNS, STRATEGIES, StrategySpec, estimate
from .harness import EXPERIMENTS, ScenarioConfig, replicate, run_experiment, run_scenario, write_experiment
from .market import read_panel, write_panel
from .series import acf, pacf, read_series
from .wind import WindSpec


def _floats(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(t) for t in text.split(","))


def _bandwidth(text):
    text = str(text).strip()
    return text if text in ("auto", "nw") else int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elasticity-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="INI file with default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one equilibrium panel")
    p.add_argument("--l", dest="l", type=int, choices=(0, 1, 2), default=1, help="demand AR order")
    p.add_argument("--beta", type=float, default=-0.4, help="true demand slope")
    p.add_argument("--wind", default="surrogate",
                   help="empirical:PATH | surrogate | ar1:ALPHA | shuffled:<wind>")
    p.add_argument("--demand-ar", type=_floats, default=None,
                   help="comma-separated AR coefficients overriding the defaults for --l")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=672)
    p.add_argument("--length", type=int, default=9432)
    p.add_argument("--target-mean", type=float, default=374.0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("estimate", help="estimate the demand slope on a panel file")
    p.add_argument("--panel", required=True)
    p.add_argument("--strategy", required=True, choices=STRATEGIES)
    p.add_argument("--m", type=int, default=26, help="wind lags for conditional_iv")
    p.add_argument("--lags", type=int, default=2, help="demand lags for nuisance_iv")
    p.add_argument("--bandwidth", type=_bandwidth, default="nw", help="int, 'auto' or 'nw'")

    p = sub.add_parser("experiment", help="run a named experiment")
    p.add_argument("--id", required=True, choices=EXPERIMENTS)
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--bandwidth", type=_bandwidth, default=None)
    p.add_argument("--max-m", type=int, default=None, help="upper wind lag for conditional-sweep")
    p.add_argument("--out", required=True)

    p = sub.add_parser("bias", help="predicted IV estimate under autocorrelation")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--demand-ar", type=_floats, required=True)
    p.add_argument("--wind-ar", type=_floats, required=True)

    p = sub.add_parser("diagnose", help="ACF/PACF table of a series file")
    p.add_argument("--series", required=True)
    p.add_argument("--max-lag", type=int, default=24)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("command", nargs="?")
    early, _ = pre.parse_known_args(argv)
    if not early.config or early.command not in _COMMANDS:
        return parser.parse_args(argv)

    cfg = configparser.ConfigParser()
    if not cfg.read(early.config, encoding="utf-8"):
        raise FileNotFoundError(f"config file {early.config} not found")
    values = {}
    for section in ("common", early.command):
        if cfg.has_section(section):
            values.update({k.replace("-", "_"): v for k, v in cfg.items(section)})

    sub = _subparser(parser, early.command)
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        if key not in known:
            raise ValueError(f"unknown key {key!r} for {early.command} in {early.config}")
        action = known[key]
        defaults[key] = action.type(raw) if action.type else raw
        action.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _cmd_simulate(args) -> None:
    wind = WindSpec.parse(args.wind, length=args.length, seed=args.seed)
    cfg = ScenarioConfig(
        demand_order=args.l,
        beta=args.beta,
        demand_ar=args.demand_ar,
        wind=wind,
        target_mean_demand=args.target_mean,
        seed=args.seed,
        burn_in=args.burn_in,
        length=args.length,
    )
    panel = run_scenario(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"panel_L{args.l}_beta{args.beta:g}_seed{args.seed}.csv"
    write_panel(panel, path)
    print(path)


def _cmd_estimate(args) -> None:
    panel = read_panel(args.panel)
    spec = StrategySpec(args.strategy, wind_lags=args.m, demand_lags=args.lags, hac_bandwidth=args.bandwidth)
    row = estimate(spec, panel).to_row()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    w.writerow([row[c] for c in RESULT_COLUMNS])


def _cmd_experiment(args) -> None:
    overrides = {}
    if args.bandwidth is not None:
        overrides["hac_bandwidth"] = args.bandwidth
    if args.max_m is not None:
        overrides["max_wind_lags"] = args.max_m
    if args.replications > 1:
        result = replicate(args.id, args.replications, args.seed, overrides, workers=args.workers)
    else:
        result = run_experiment(args.id, overrides, seed=args.seed)
    print(write_experiment(result, args.out))


def _cmd_bias(args) -> None:
    row = thams_bias_general(args.beta, args.demand_ar, args.wind_ar).to_row()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(BIAS_COLUMNS)
    w.writerow([row[c] for c in BIAS_COLUMNS])


def _cmd_diagnose(args) -> None:
    series = read_series(args.series)
    a = acf(series, args.max_lag)
    p = pacf(series, args.max_lag)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["lag", "acf", "pacf"])
    for k in range(args.max_lag):
        w.writerow([k + 1, repr(float(a[k])), repr(float(p[k]))])


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "experiment": _cmd_experiment,
    "bias": _cmd_bias,
    "diagnose": _cmd_diagnose,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        _COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse usage errors
        if exc.code not in (0, None):
            print(json.dumps({"error": "UsageError", "message": "invalid arguments"}), file=sys.stderr)
        return int(exc.code or 0)
    except Exception as exc:
        msg = " ".join(str(exc).split())
        print(json.dumps({"error": type(exc).__name__, "message": msg}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
