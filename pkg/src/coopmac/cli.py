"""Command-line interface.

Four subcommands cover the experiment workflows:

* ``solve``: optimize one weighted-rate objective, writing the policy
  CSV, the convergence trace CSV, and a run summary.
* ``region``: sweep the weight fan for every configured scheme mode,
  writing one region CSV per mode plus a combined hull CSV.
* ``verify``: run the structural checks on a previously written policy
  CSV, emitting the report text block and the waterfilling-surface CSV
  for a fixed-direct-gain slice.
* ``trace``: like solve but emitting only the convergence trace, for
  step-size experiments.

Exit codes: 0 success, 1 usage or scenario-parse error, 2 runtime or
validation error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import artifacts
from .rates import check_weights, rate_bounds
from .region import SchemeMode, solve_mode, sweep
from .scenario import Scenario, ScenarioParseError, \
    ScenarioValidationError, load_scenario
from .verify import min_gap, slice_indices, structure_report

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parse_pair(text: str, flag: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise _UsageError(f"{flag} expects two comma-separated numbers, "
                          f"got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise _UsageError(f"{flag} expects numbers, got {text!r}")


def _rate_scale(log_base: str) -> float:
    return 1.0 / float(np.log(2.0)) if log_base == "2" else 1.0


def _mode_from_name(name: str) -> SchemeMode:
    try:
        return SchemeMode(name)
    except ValueError:
        known = ", ".join(m.value for m in SchemeMode)
        raise _UsageError(f"unknown mode {name!r} (known: {known})")


def _tag(scenario: Scenario, mode: SchemeMode | None = None,
         mu: tuple[float, float] | None = None) -> str:
    parts = [scenario.label or "scenario"]
    if mode is not None:
        parts.append(mode.value)
    if mu is not None:
        parts.append(f"mu{mu[0]:g}_{mu[1]:g}")
    return "_".join(parts)


def build_parser() -> _Parser:
    parser = _Parser(prog="coopmac",
                     description="Power allocation and rate regions for "
                                 "the two-user cooperative fading channel.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", default="uniform_paper",
                       help="scenario file path or preset name")
        p.add_argument("--out", default=None,
                       help="artifact directory (default: scenario out_dir)")
        p.add_argument("--log-base", choices=("e", "2"), default=None,
                       help="emit rates in nats (e) or bits (2)")

    solve = sub.add_parser("solve", help="optimize one weighted objective")
    common(solve)
    solve.add_argument("--mu", default="1,1",
                       help="weight pair, e.g. 2,1")
    solve.add_argument("--mode", default=SchemeMode.COOP_POWER_CONTROL.value,
                       help="scheme mode name")
    solve.add_argument("--iters", type=int, default=None,
                       help="override the scenario iteration budget")

    region = sub.add_parser("region", help="sweep rate regions per mode")
    common(region)

    verify = sub.add_parser("verify", help="structural checks on a policy")
    common(verify)
    verify.add_argument("--policy", required=True,
                        help="policy CSV produced by solve")
    verify.add_argument("--slice", default="0.2,0.15",
                        help="direct-gain pair fixing the slice")

    trace = sub.add_parser("trace", help="emit only the convergence trace")
    common(trace)
    trace.add_argument("--mu", default="2,1", help="weight pair")
    trace.add_argument("--mode", default=SchemeMode.COOP_POWER_CONTROL.value,
                       help="scheme mode name")
    trace.add_argument("--iters", type=int, default=None,
                       help="override the scenario iteration budget")
    return parser


def _load(args) -> tuple[Scenario, str, float, str]:
    scenario = load_scenario(args.scenario)
    out_dir = args.out if args.out is not None else scenario.out_dir
    log_base = args.log_base if args.log_base is not None \
        else scenario.log_base
    return scenario, out_dir, _rate_scale(log_base), log_base


def _solve_common(args):
    scenario, out_dir, scale, log_base = _load(args)
    mu = check_weights(_parse_pair(args.mu, "--mu"))
    mode = _mode_from_name(args.mode)
    ensemble = scenario.build_ensemble()
    config = scenario.solver_config(max_iters=args.iters)
    policy, result = solve_mode(ensemble, mode, mu, config)
    return scenario, out_dir, scale, log_base, mu, mode, ensemble, \
        policy, result


def run_solve(args) -> int:
    scenario, out_dir, scale, log_base, mu, mode, ensemble, policy, \
        result = _solve_common(args)
    tag = _tag(scenario, mode, mu)
    policy_path = os.path.join(out_dir, f"policy_{tag}.csv")
    artifacts.write_text(policy_path, artifacts.policy_csv_text(policy))
    if result is not None:
        trace_path = os.path.join(out_dir, f"trace_{tag}.csv")
        artifacts.write_text(trace_path,
                             artifacts.trace_csv_text(result, scale))
    # the summary is computed from the file just written, so its rates
    # are exactly reproducible from the emitted artifact
    stored = artifacts.read_policy_csv(policy_path, ensemble)
    bounds = rate_bounds(stored)
    avg1, avg2 = stored.average_powers()
    summary = {
        "scenario": scenario.label,
        "command": "solve",
        "mode": mode.value,
        "mu1": mu[0],
        "mu2": mu[1],
        "log_base": log_base,
        "iterations": 0 if result is None else result.iterations_run,
        "best_value": (mu[0] * bounds.r1_bound + mu[1] * bounds.r2_bound
                       if result is None else result.best_value * scale),
        "r1_bound": bounds.r1_bound * scale,
        "r2_bound": bounds.r2_bound * scale,
        "sum_bound": bounds.sum_bound * scale,
        "min_gap": min_gap(stored) * scale,
        "avg_power_1": avg1,
        "avg_power_2": avg2,
    }
    artifacts.write_text(os.path.join(out_dir, f"summary_{tag}.txt"),
                         artifacts.summary_text(summary))
    return 0


def run_trace(args) -> int:
    scenario, out_dir, scale, _, mu, mode, _, _, result = \
        _solve_common(args)
    if result is None:
        print("nothing to trace: this mode has no optimization",
              file=sys.stderr)
        return RUNTIME_ERROR
    tag = _tag(scenario, mode, mu)
    artifacts.write_text(os.path.join(out_dir, f"trace_{tag}.csv"),
                         artifacts.trace_csv_text(result, scale))
    return 0


def run_region(args) -> int:
    scenario, out_dir, scale, _ = _load(args)
    ensemble = scenario.build_ensemble()
    config = scenario.solver_config()
    weights = scenario.weight_list()
    regions = []
    for mode in scenario.modes:
        region = sweep(ensemble, mode, weights=weights, config=config)
        regions.append(region)
        path = os.path.join(out_dir,
                            f"region_{_tag(scenario, mode)}.csv")
        artifacts.write_text(path, artifacts.region_csv_text(region, scale))
    hull_path = os.path.join(out_dir,
                             f"hull_{scenario.label or 'scenario'}.csv")
    artifacts.write_text(hull_path, artifacts.hull_csv_text(regions, scale))
    return 0


def run_verify(args) -> int:
    scenario, out_dir, scale, _ = _load(args)
    ensemble = scenario.build_ensemble()
    policy = artifacts.read_policy_csv(args.policy, ensemble)
    s10, s20 = _parse_pair(args.slice, "--slice")
    indices = slice_indices(ensemble, s10, s20)
    if indices.size == 0:
        print(f"warning: no states match slice ({s10:g}, {s20:g}); "
              f"slice checks are not applicable", file=sys.stderr)
    report = structure_report(policy, slice_gains=(s10, s20))
    label = scenario.label or "scenario"
    slice_tag = f"{label}_s{s10:g}_{s20:g}"
    artifacts.write_text(os.path.join(out_dir, f"report_{slice_tag}.txt"),
                         report.to_text())
    artifacts.write_text(os.path.join(out_dir, f"surface_{slice_tag}.csv"),
                         artifacts.surface_csv_text(policy, indices))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except SystemExit as exc:
        # argparse handles --help by exiting; mirror its code
        return 0 if exc.code in (0, None) else USAGE_ERROR
    runners = {"solve": run_solve, "region": run_region,
               "verify": run_verify, "trace": run_trace}
    try:
        return runners[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ScenarioParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ScenarioValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
