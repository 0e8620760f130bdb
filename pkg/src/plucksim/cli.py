"""Command-line front end: run, sweep, check, oracle.

Exit codes: 0 clean, 1 configuration error, 2 divergence abort, 3 failed
check/oracle.  Outputs are byte-deterministic for a fixed scenario and seed;
the default output directory comes from PLUCKSIM_OUT (falling back to ./out).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import copy
import json
import os
import sys

import numpy as np

from . import checks, config, simulate
from .twolink import run_equivalence

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2
EXIT_CHECK_FAILED = 3

SUMMARY_FORMAT_VERSION = 1


def _out_dir(args):
    return args.out or os.environ.get("PLUCKSIM_OUT", "out")


def _contact_axis(scenario):
    if scenario.environment is None:
        return None
    return int(np.argmax(np.abs(scenario.environment.normal)))


def _summarize(scenario, log, aborted):
    axis = _contact_axis(scenario)
    m = simulate.metrics(
        log,
        stiffness=scenario.controller.spec.stiffness if axis is not None else None,
        f_desired=scenario.controller.spec.f_desired,
        contact_axis=axis,
    )
    return {
        "format_version": SUMMARY_FORMAT_VERSION,
        "scenario": scenario.settings.name,
        "seed": int(scenario.settings.seed),
        "dt_s": scenario.settings.dt,
        "duration_s": scenario.settings.duration,
        "n_ticks": len(log.rows),
        "aborted_at_tick": aborted,
        "metrics": m,
    }


def _write_outputs(out_root, name, log, summary):
    run_dir = os.path.join(out_root, name)
    os.makedirs(run_dir, exist_ok=True)
    log.write_csv(os.path.join(run_dir, "log.csv"))
    with open(os.path.join(run_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return run_dir


def _run_one(scenario, out_root, write=True):
    sim = scenario.build()
    log, aborted = sim.run(raise_on_divergence=False)
    summary = _summarize(scenario, log, aborted)
    if write:
        _write_outputs(out_root, scenario.settings.name, log, summary)
    return summary, aborted


def cmd_run(args):
    try:
        scenario = config.load_scenario(args.scenario)
        if args.seed is not None:
            scenario = _reseed(scenario, args.seed)
    except config.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary, aborted = _run_one(scenario, _out_dir(args))
    print(json.dumps(summary, indent=2, sort_keys=True))
    if aborted is not None:
        print(f"divergence abort at tick {aborted}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def _reseed(scenario, seed):
    raw = copy.deepcopy(scenario.raw)
    raw["seed"] = int(seed)
    return config.scenario_from_dict(raw, scenario.settings.name, scenario.base_dir)


def _sweep_cell(raw, where, base_dir, path, value):
    raw_mod = copy.deepcopy(raw)
    config.set_by_path(raw_mod, path, value)
    scenario = config.scenario_from_dict(raw_mod, where, base_dir)
    sim = scenario.build()
    log, aborted = sim.run(raise_on_divergence=False)
    summary = _summarize(scenario, log, aborted)
    return summary, aborted


def cmd_sweep(args):
    try:
        spec = config._load_yaml(args.spec)
        base_file = spec["base_scenario"]
        parameter = spec["parameter"]
        values = spec["values"]
        parallelism = int(spec.get("parallelism", 1) if args.jobs is None else args.jobs)
        base_path = base_file if os.path.isabs(base_file) else os.path.join(os.path.dirname(args.spec), base_file)
        raw = config._load_yaml(base_path)
        base_dir = os.path.dirname(base_path)
        if not isinstance(values, list) or not values:
            raise config.ConfigError(f"{args.spec}: 'values' must be a non-empty list")
    except (KeyError, TypeError) as exc:
        print(f"config error: {args.spec}: missing sweep key {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except config.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    rows = [None] * len(values)

    def cell(idx):
        try:
            summary, aborted = _sweep_cell(raw, base_path, base_dir, parameter, values[idx])
            return idx, summary, aborted, None
        except Exception as exc:  # failed cells are reported, sweep continues
            return idx, None, None, str(exc)

    if parallelism > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=parallelism) as pool:
            for idx, summary, aborted, error in pool.map(cell, range(len(values))):
                rows[idx] = (summary, aborted, error)
    else:
        for idx in range(len(values)):
            rows[idx] = cell(idx)[1:]

    out_root = _out_dir(args)
    os.makedirs(out_root, exist_ok=True)
    table_path = os.path.join(out_root, "sweep.csv")
    with open(table_path, "w") as fh:
        fh.write("# plucksim sweep v1\n")
        fh.write("value,status,peak_force_est_n,peak_force_true_n,rms_position_error_m,rho_s,aborted_at_tick\n")
        for value, row in zip(values, rows):
            summary, aborted, error = row
            if error is not None or summary is None:
                fh.write(f"{value!r},failed,,,,,\n")
                continue
            m = summary["metrics"]
            status = "aborted" if aborted is not None else "ok"
            fh.write(
                f"{value!r},{status},{m['peak_force_est_n']!r},{m['peak_force_true_n']!r},"
                f"{m['rms_position_error_m']!r},{m['rho_s']!r},{aborted if aborted is not None else ''}\n"
            )
    with open(table_path) as fh:
        print(fh.read(), end="")
    return EXIT_OK


def cmd_check(args):
    failed = 0
    for name, passed, measured, threshold in checks.run_all():
        status = "PASS" if passed else "FAIL"
        print(f"{status}  {name:32s} measured={measured:.3e} threshold={threshold:.3e}")
        failed += 0 if passed else 1
    if failed:
        print(f"{failed} check(s) failed", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_oracle(args):
    dev, _, log = run_equivalence(dt=args.dt, duration=args.duration)
    print(f"pipelines: per-body momentum residual vs joint-space oracle")
    print(f"ticks: {len(log.rows)}  dt: {args.dt}  duration: {args.duration}s")
    print(f"max relative deviation: {dev:.3e}  (bound 1e-6)")
    if dev > 1e-6:
        print("oracle disagreement above bound", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(prog="plucksim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario, write log.csv and summary.json")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep from a sweep spec file")
    p_sweep.add_argument("spec")
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--jobs", type=int, default=None)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_check = sub.add_parser("check", help="run the numeric invariant suite")
    p_check.set_defaults(fn=cmd_check)

    p_oracle = sub.add_parser("oracle", help="compare the two momentum-observer pipelines")
    p_oracle.add_argument("--dt", type=float, default=2e-4)
    p_oracle.add_argument("--duration", type=float, default=10.0)
    p_oracle.set_defaults(fn=cmd_oracle)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
