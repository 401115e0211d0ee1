"""Command-line entry point: simulate, validate, sweep, bench.

Configuration is a TOML file layered over documented defaults, with
``--set dotted.key=value`` overrides on top.  Every run directory receives
the fully resolved config so the run can be reproduced exactly.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import itertools
import math
import sys
import time
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import engine as engine_mod
from . import metrics
from .control import ControlTarget, PidGains, SignConvention
from .mmc_oracle import MmcParams, UnstableSystemError, mean_queue_length
from .sim_kernel import ControlConfig, DistSpec, SimConfig, run, run_python, _run_compiled
from .workload import WorkloadSpec

DEFAULTS = {
    "seed": 42,
    "horizon_s": 3600.0,  # inf = unbounded (workload.limit must bound the run)
    "engine": "auto",  # auto | python | compiled
    "workload": {
        "kind": "poisson",  # poisson | deterministic | trace
        "mean_interarrival_s": 1.0,
        "interval_s": 1.0,
        "path": "",
        "limit": -1,  # -1 = unlimited, 0 = no requests
    },
    "service": {
        "kind": "exponential",  # exponential | constant
        "mean_s": 5.0,
    },
    "startup": {
        "kind": "constant",  # constant | exponential
        "mean_s": 1.0,
    },
    "control": {
        "mode": "pid",  # pid | fixed
        "target": 25.0,
        "kp": 0.9,
        "ki": 0.0,
        "kd": 0.2,
        "sign": "w_minus_t",  # w_minus_t | t_minus_w
        "integral_clamp": 1000.0,
        "p_min": 1,
        "p_max": 100,
        "fixed_pool": 6,
    },
    "output": {
        "dir": "out",
        "write_samples": True,
        "write_actions": True,
        "smoothing_window": 10,
    },
}


class ConfigError(Exception):
    """Invalid configuration; maps to exit code 2."""


def _merge(base: dict, override: dict, prefix: str = "") -> None:
    for key, value in override.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key: {path}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path} must be a table")
            _merge(base[key], value, path + ".")
        else:
            base[key] = _coerce(path, value, base[key])


def _coerce(path: str, value, default):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path} must be a boolean")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path} must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path} must be a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path} must be a string")
        return value
    raise ConfigError(f"{path}: unsupported value type")


def _parse_scalar(path: str, text: str, default):
    if isinstance(default, bool):
        low = text.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ConfigError(f"{path}: expected a boolean, got {text!r}")
    if isinstance(default, int):
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{path}: expected an integer, got {text!r}") from None
    if isinstance(default, float):
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{path}: expected a number, got {text!r}") from None
    return text


def _set_path(config: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"--set needs key=value, got {assignment!r}")
    dotted, text = assignment.split("=", 1)
    keys = dotted.strip().split(".")
    node = config
    for key in keys[:-1]:
        if key not in node or not isinstance(node[key], dict):
            raise ConfigError(f"unknown config key: {dotted}")
        node = node[key]
    leaf = keys[-1]
    if leaf not in node or isinstance(node[leaf], dict):
        raise ConfigError(f"unknown config key: {dotted}")
    node[leaf] = _parse_scalar(dotted, text.strip(), node[leaf])


def load_config(path: str | None) -> dict:
    """Defaults layered under the TOML file at `path` (if any)."""
    config = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        _merge(config, data)
    return config


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        text = repr(value)
        return text if ("." in text or "e" in text or "E" in text) else text + ".0"
    if isinstance(value, int):
        return str(value)
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def resolved_toml(config: dict) -> str:
    """Deterministic TOML echo of the resolved configuration."""
    lines = []
    for key, value in config.items():
        if not isinstance(value, dict):
            lines.append(f"{key} = {_toml_value(value)}")
    for key, table in config.items():
        if isinstance(table, dict):
            lines.append("")
            lines.append(f"[{key}]")
            for sub, value in table.items():
                lines.append(f"{sub} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


def build_sim_config(config: dict) -> SimConfig:
    wl = config["workload"]
    try:
        workload = WorkloadSpec(
            kind=wl["kind"],
            mean_interarrival=wl["mean_interarrival_s"],
            interval=wl["interval_s"],
            path=wl["path"] or None,
            limit=None if wl["limit"] < 0 else wl["limit"],
        )
        ctrl = config["control"]
        try:
            sign = SignConvention(ctrl["sign"])
        except ValueError:
            raise ConfigError(f"control.sign must be one of "
                              f"{[s.value for s in SignConvention]}") from None
        control = ControlConfig(
            gains=PidGains(
                kp=ctrl["kp"], ki=ctrl["ki"], kd=ctrl["kd"],
                sign=sign, integral_clamp=ctrl["integral_clamp"],
            ),
            target=ControlTarget(
                target_queue_length=ctrl["target"],
                p_min=ctrl["p_min"], p_max=ctrl["p_max"],
            ),
            mode=ctrl["mode"],
            fixed_pool=ctrl["fixed_pool"],
        )
        horizon = config["horizon_s"]
        return SimConfig(
            seed=config["seed"],
            workload=workload,
            service=DistSpec(config["service"]["kind"], config["service"]["mean_s"]),
            startup=DistSpec(config["startup"]["kind"], config["startup"]["mean_s"]),
            control=control,
            horizon=None if math.isinf(horizon) else horizon,
            engine=config["engine"],
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _write_run_outputs(outdir: Path, config: dict, cfg: SimConfig, result) -> metrics.RunSummary:
    outdir.mkdir(parents=True, exist_ok=True)
    summary = metrics.build_summary(result.raw, cfg, result.engine)
    out = config["output"]
    if out["write_samples"]:
        metrics.write_samples_csv(outdir / "samples.csv", result.raw)
        metrics.write_smoothed_csv(
            outdir / "samples_smoothed.csv", result.raw, out["smoothing_window"]
        )
    if out["write_actions"]:
        metrics.write_actions_log(outdir / "actions.log", result.raw)
    metrics.write_summary_json(outdir / "summary.json", summary)
    (outdir / "config_resolved.toml").write_text(resolved_toml(config), encoding="utf-8")
    return summary


def _print_summary(summary: metrics.RunSummary) -> None:
    d = summary.to_dict()
    width = max(len(k) for k in d)
    for key, value in d.items():
        print(f"  {key:<{width}}  {value}")


def _resolve_common(args) -> dict:
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    if getattr(args, "horizon", None) is not None:
        config["horizon_s"] = args.horizon
    if getattr(args, "out", None) is not None:
        config["output"]["dir"] = args.out
    if getattr(args, "engine", None) is not None:
        config["engine"] = args.engine
    for assignment in getattr(args, "set", None) or []:
        _set_path(config, assignment)
    return config


def cmd_simulate(args) -> int:
    config = _resolve_common(args)
    cfg = build_sim_config(config)
    result = run(cfg)
    outdir = Path(config["output"]["dir"])
    summary = _write_run_outputs(outdir, config, cfg, result)
    print(f"simulation finished ({result.engine} engine), outputs in {outdir}/")
    _print_summary(summary)
    return 0


def cmd_validate(args) -> int:
    try:
        params = MmcParams(args.lam, args.mu, args.servers)
        lq = mean_queue_length(params)
    except UnstableSystemError as exc:
        print(f"unstable system: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.requests < 1:
        raise ConfigError("--requests must be >= 1")
    cfg = SimConfig(
        seed=args.seed,
        workload=WorkloadSpec("poisson", mean_interarrival=1.0 / args.lam, limit=args.requests),
        service=DistSpec("exponential", 1.0 / args.mu),
        startup=DistSpec("constant", 0.0),
        control=ControlConfig(mode="fixed", fixed_pool=args.servers),
        horizon=None,
        engine=args.engine or "auto",
    )
    result = run(cfg)
    measured = result.raw.acc_w / result.raw.end_time
    rel_err = abs(measured - lq) / lq
    print(f"M/M/{args.servers}: lambda={args.lam} mu={args.mu} "
          f"rho={params.utilization:.4f}")
    print(f"analytic Lq = {lq:.6f}")
    print(f"simulated time-average W = {measured:.6f} "
          f"({result.raw.generated} requests, {result.engine} engine)")
    print(f"relative error = {rel_err:.4%} (tolerance {args.tolerance:.2%})")
    if rel_err > args.tolerance:
        print("FAIL: relative error above tolerance", file=sys.stderr)
        return 1
    print("OK")
    return 0


def _parse_grid(specs: list[str], base: dict) -> list[tuple[str, list]]:
    axes = []
    for spec in specs:
        if "=" not in spec:
            raise ConfigError(f"--grid needs key=v1,v2,..., got {spec!r}")
        dotted, text = spec.split("=", 1)
        values = [v for v in text.split(",") if v != ""]
        if not values:
            raise ConfigError(f"--grid {dotted}: empty value list")
        # probe the key and parse each value against the default's type
        probe = copy.deepcopy(base)
        parsed = []
        for v in values:
            _set_path(probe, f"{dotted}={v}")
            node = probe
            for key in dotted.strip().split("."):
                node = node[key]
            parsed.append(node)
        axes.append((dotted.strip(), parsed))
    return axes


def cmd_sweep(args) -> int:
    base = _resolve_common(args)
    axes = _parse_grid(args.grid or [], base)
    seeds = []
    if args.seeds:
        try:
            seeds = [int(s) for s in args.seeds.split(",") if s != ""]
        except ValueError:
            raise ConfigError(f"--seeds must be integers, got {args.seeds!r}") from None
    if not axes and not seeds:
        raise ConfigError("empty sweep: provide --grid and/or --seeds")
    if not seeds:
        seeds = [base["seed"]]

    outdir = Path(base["output"]["dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    grid_keys = [key for key, _ in axes]
    rows = []
    points = list(itertools.product(*[values for _, values in axes]))
    for index, (point, seed) in enumerate(itertools.product(points, seeds)):
        config = copy.deepcopy(base)
        config["seed"] = seed
        for key, value in zip(grid_keys, point):
            node = config
            parts = key.split(".")
            for part in parts[:-1]:
                node = node[part]
            node[parts[-1]] = value
        run_dir = outdir / f"run_{index:03d}"
        config["output"]["dir"] = str(run_dir)
        cfg = build_sim_config(config)
        result = run(cfg)
        summary = _write_run_outputs(run_dir, config, cfg, result)
        row = {"run": run_dir.name, "seed": seed}
        row.update({key: value for key, value in zip(grid_keys, point)})
        row.update(summary.to_dict())
        rows.append(row)
        print(f"{run_dir.name}: seed={seed} "
              + " ".join(f"{k}={v}" for k, v in zip(grid_keys, point))
              + f" tavg_w={summary.time_average_w:.3f} tavg_p={summary.time_average_p:.3f}")

    agg_path = outdir / "sweep_summary.csv"
    fieldnames = list(rows[0].keys())
    with open(agg_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    print(f"{len(rows)} runs, aggregate in {agg_path}")
    return 0


def cmd_bench(args) -> int:
    config = _resolve_common(args)
    cfg = build_sim_config(config)

    def timed(engine_name):
        best = math.inf
        raw = None
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            raw = run_python(cfg) if engine_name == "python" else _run_compiled(cfg)
            best = min(best, time.perf_counter() - t0)
        return raw, best

    raw_py, t_py = timed("python")
    events = raw_py.n_samples
    print(f"events processed: {events}")
    print(f"python engine:   {t_py:.4f} s  ({events / t_py:,.0f} events/s)")
    if engine_mod.compiled_available():
        raw_cy, t_cy = timed("compiled")
        print(f"compiled engine: {t_cy:.4f} s  ({events / t_cy:,.0f} events/s)")
        speedup = t_py / t_cy if t_cy > 0 else math.inf
        print(f"speedup: {speedup:.1f}x")
        identical = all(
            getattr(raw_py, f) == getattr(raw_cy, f)
            for f in raw_py.__dataclass_fields__
        )
        print(f"outputs identical: {identical}")
        if not identical:
            print("FAIL: engines disagree", file=sys.stderr)
            return 1
    else:
        print("compiled engine: not built (pip install -e . rebuilds it)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parsim",
        description="Deterministic simulator of a PID-driven, queue-targeting autoscaler",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_out=True):
        p.add_argument("--config", help="TOML config file (defaults apply underneath)")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--horizon", type=float, help="override the horizon in seconds")
        if with_out:
            p.add_argument("--out", help="output directory")
        p.add_argument("--engine", choices=["auto", "python", "compiled"],
                       help="engine backend (default: auto)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config value by dotted path "
                            "(e.g. --set control.target=25)")

    p_sim = sub.add_parser("simulate", help="run one simulation and export traces")
    add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_val = sub.add_parser("validate",
                           help="fixed-pool simulation against the analytic M/M/c oracle")
    p_val.add_argument("--lambda", dest="lam", type=float, default=1.0,
                       help="arrival rate per second (default 1.0)")
    p_val.add_argument("--mu", type=float, default=0.2,
                       help="per-worker service rate per second (default 0.2)")
    p_val.add_argument("-c", "--servers", type=int, default=6,
                       help="fixed pool size (default 6)")
    p_val.add_argument("--requests", type=int, default=100_000,
                       help="number of requests to simulate (default 100000)")
    p_val.add_argument("--seed", type=int, default=42)
    p_val.add_argument("--tolerance", type=float, default=0.05,
                       help="maximum relative error (default 0.05)")
    p_val.add_argument("--engine", choices=["auto", "python", "compiled"], default=None)
    p_val.set_defaults(func=cmd_validate)

    p_sweep = sub.add_parser("sweep", help="run a parameter grid and aggregate summaries")
    add_common(p_sweep)
    p_sweep.add_argument("--grid", action="append", metavar="KEY=V1,V2,...",
                         help="sweep axis by dotted config path (repeatable)")
    p_sweep.add_argument("--seeds", help="comma-separated seed list")
    p_sweep.set_defaults(func=cmd_sweep)

    p_bench = sub.add_parser("bench", help="compare the python and compiled engines")
    add_common(p_bench, with_out=False)
    p_bench.add_argument("--repeat", type=int, default=3,
                         help="timing repetitions, best-of (default 3)")
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
