"""Command-line interface.

Subcommands:
  run            replay a scenario under one or more policies, emit CSVs
  sweep          repeat `run` over a grid of one parameter
  validate       check a scenario file and exit
  show-decision  print the full per-cut cost vector for one round

Exit codes: 0 success, 1 usage error, 2 validation error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from . import harness
from .card import cost_curve, optimal_frequency
from .cost_model import InfeasibleScenarioError, norm_bounds
from .llm_profile import default_llama_profile
from .scenario import (
    CHANNEL_STATE_EXPONENTS,
    Scenario,
    ScenarioValidationError,
    builtin_scenario,
    load_scenario,
    with_overrides,
)
from .wireless import LinkOutageError, realize_round_channel

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _add_scenario_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", help="scenario JSON path (default: builtin fleet)")
    parser.add_argument(
        "--channel-state",
        default="normal",
        choices=sorted(CHANNEL_STATE_EXPONENTS),
        help="channel state for the builtin scenario",
    )
    parser.add_argument("--rounds", type=int, help="override the round count")
    parser.add_argument("--seed", type=int, help="override the RNG seed")


def _load(args) -> Scenario:
    if args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        scenario = builtin_scenario(channel_state=args.channel_state)
    overrides = {}
    if args.rounds is not None:
        overrides["rounds"] = args.rounds
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return with_overrides(scenario, **overrides) if overrides else scenario


def build_parser() -> _Parser:
    parser = _Parser(prog="cardsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write CSV results")
    _add_scenario_args(run)
    run.add_argument(
        "--policies",
        default="card,server-only,device-only",
        help="comma-separated policies: card, server-only, device-only, "
        "fixed-cut=C, fixed-freq=HZ, or combos joined with +",
    )
    run.add_argument("--out", required=True, help="output directory for CSV files")

    sweep = sub.add_parser("sweep", help="run an experiment per value of one parameter")
    _add_scenario_args(sweep)
    sweep.add_argument("--param", required=True, choices=["w", "alpha", "batch"])
    sweep.add_argument("--values", required=True, help="comma-separated parameter values")
    sweep.add_argument(
        "--policies", default="card,server-only,device-only", help="policies per run"
    )
    sweep.add_argument("--out", required=True, help="output directory (one subdir per value)")

    validate = sub.add_parser("validate", help="validate a scenario file")
    validate.add_argument("--scenario", required=True)

    show = sub.add_parser(
        "show-decision", help="print the per-cut cost vector for one (device, round)"
    )
    _add_scenario_args(show)
    show.add_argument("--device", type=int, default=0, help="device index (0-based)")
    show.add_argument("--round", type=int, default=0, dest="round_index")
    show.add_argument("--out", help="write decisions.csv here instead of stdout")

    return parser


def _apply_sweep_value(scenario: Scenario, param: str, raw: str) -> Scenario:
    if param == "w":
        return with_overrides(scenario, weight=float(raw))
    if param == "alpha":
        from dataclasses import replace

        devices = tuple(
            replace(entry, channel=replace(entry.channel, pathloss_exponent=float(raw)))
            for entry in scenario.devices
        )
        return with_overrides(scenario, devices=devices)
    # batch: rebuild the default profile with a new mini-batch size
    return with_overrides(scenario, profile=default_llama_profile(batch_size=int(raw)))


def _cmd_run(args) -> int:
    scenario = _load(args)
    policies = harness.parse_policies(args.policies)
    if not policies:
        raise _UsageError("at least one policy is required")
    result = harness.run_experiment(scenario, policies, out_dir=args.out)
    for metric, baseline, pct in result.reductions:
        print(f"{metric} reduction vs {baseline}: {pct:.2f}%")
    print(f"wrote {len(result.traces)} round traces to {args.out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    import csv
    import os

    base = _load(args)
    policies = harness.parse_policies(args.policies)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise _UsageError("--values must list at least one value")

    os.makedirs(args.out, exist_ok=True)
    rows = []
    for raw in values:
        scenario = _apply_sweep_value(base, args.param, raw)
        sub_dir = os.path.join(args.out, f"{args.param}={raw}")
        result = harness.run_experiment(scenario, policies, out_dir=sub_dir)
        for policy, device, mean_d, mean_e, mean_u in result.summary:
            rows.append((args.param, raw, policy, device, mean_d, mean_e, mean_u))
    with open(os.path.join(args.out, "sweep_summary.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["param", "value", "policy", "device", "mean_delay_s", "mean_energy_j", "mean_cost_u"]
        )
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else str(v) for v in row])
    print(f"swept {args.param} over {len(values)} values into {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    load_scenario(args.scenario)
    print(f"{args.scenario}: OK")
    return EXIT_OK


def _cmd_show_decision(args) -> int:
    scenario = _load(args)
    if not 0 <= args.device < len(scenario.devices):
        raise _UsageError(
            f"--device {args.device} out of range [0, {len(scenario.devices) - 1}]"
        )
    if not 0 <= args.round_index < scenario.rounds:
        raise _UsageError(f"--round {args.round_index} out of range [0, {scenario.rounds - 1}]")
    realization, _ = realize_round_channel(
        scenario.devices[args.device].channel,
        scenario.mapping_table,
        scenario.seed,
        args.device,
        args.round_index,
        require_nonzero_rates=scenario.payload_pending,
    )
    inputs = scenario.round_inputs(args.device, realization)
    bounds = norm_bounds(inputs)
    freq = optimal_frequency(inputs, bounds)
    curve = cost_curve(inputs, bounds, freq)
    if args.out:
        harness.write_decisions_csv(args.out, curve)
        print(f"wrote {len(curve)} decision rows to {args.out}")
    else:
        print(f"server frequency: {freq!r} Hz")
        print(",".join(harness.DECISIONS_CSV_HEADER))
        for cut, bd in enumerate(curve):
            print(f"{cut},{bd.normalized_cost!r},{bd.total_delay_s!r},{bd.server_energy_j!r}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "run": _cmd_run,
            "sweep": _cmd_sweep,
            "validate": _cmd_validate,
            "show-decision": _cmd_show_decision,
        }[args.command]
        return handler(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (InfeasibleScenarioError, LinkOutageError, ValueError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entrypoint() -> None:  # console_scripts hook
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
