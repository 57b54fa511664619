"""Round-by-round replay of the split fine-tuning protocol, with CSV output.

Each training round is materialized as a timed event sequence: adapter
download, T epochs of (device compute, activation uplink, server compute,
gradient downlink), adapter upload. Channel realizations are drawn once per
(device, round) and shared across all policies, so method comparisons are
paired and the whole result set is a pure function of (scenario, seed).
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

from .card import RoundDecision, card_decide, optimal_frequency
from .cost_model import NormBounds, RoundCostInputs, breakdown, cost, f_min_for_device, norm_bounds
from .scenario import Scenario
from .wireless import ChannelRealization, realize_round_channel

ROUNDS_CSV_HEADER = [
    "device", "round", "policy", "cut_layer", "server_freq_hz", "delay_s",
    "energy_j", "cost_u", "snr_up_db", "snr_down_db", "outage_redraws",
]
SUMMARY_CSV_HEADER = ["policy", "device", "mean_delay_s", "mean_energy_j", "mean_cost_u"]
REDUCTIONS_CSV_HEADER = ["metric", "baseline", "value_pct"]
DECISIONS_CSV_HEADER = ["cut_layer", "cost_u", "delay_s", "energy_j"]


@dataclass(frozen=True)
class Policy:
    """Per-round decision rule: CARD, or any combination of fixed choices.

    A fixed cut of -1 means "all transformer layers on the device" and is
    resolved against the scenario's profile. Whatever is not fixed falls
    back to the optimizer: the closed-form frequency, the exhaustive cut
    loop, or both.
    """

    name: str
    fixed_cut: int | None = None
    fixed_freq_hz: float | None = None


CARD = Policy("card")
SERVER_ONLY = Policy("server_only", fixed_cut=0)
DEVICE_ONLY = Policy("device_only", fixed_cut=-1)
DEFAULT_POLICIES = (CARD, SERVER_ONLY, DEVICE_ONLY)


def parse_policy(text: str) -> Policy:
    """Parse a policy token: ``card``, ``server-only``, ``device-only``,
    ``fixed-cut=C``, ``fixed-freq=HZ``, or combinations joined with ``+``."""
    token = text.strip().lower().replace("-", "_")
    if token == "card":
        return CARD
    if token == "server_only":
        return SERVER_ONLY
    if token == "device_only":
        return DEVICE_ONLY
    cut: int | None = None
    freq: float | None = None
    for part in token.split("+"):
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"unknown policy {text!r}")
        if key == "fixed_cut":
            cut = int(value)
        elif key == "fixed_freq":
            freq = float(value)
        else:
            raise ValueError(f"unknown policy component {part!r} in {text!r}")
    return Policy(token, fixed_cut=cut, fixed_freq_hz=freq)


def parse_policies(text: str) -> tuple[Policy, ...]:
    return tuple(parse_policy(tok) for tok in text.split(",") if tok.strip())


def decide(inputs: RoundCostInputs, policy: Policy) -> RoundDecision:
    """Apply a policy to one round, reusing the optimizer for anything unfixed."""
    if policy.fixed_cut is None and policy.fixed_freq_hz is None:
        return card_decide(inputs)

    num_layers = inputs.profile.num_layers
    bounds = norm_bounds(inputs)
    f_floor = f_min_for_device(inputs.device, inputs.server)
    f_ceil = inputs.server.max_freq_hz

    if policy.fixed_freq_hz is None:
        freq = optimal_frequency(inputs, bounds)
        clamped = freq <= f_floor or freq >= f_ceil
    else:
        freq = policy.fixed_freq_hz
        if not f_floor <= freq <= f_ceil:
            raise ValueError(
                f"policy {policy.name}: frequency {freq:.4g} Hz outside "
                f"[{f_floor:.4g}, {f_ceil:.4g}] for {inputs.device.label}"
            )
        clamped = False

    if policy.fixed_cut is None:
        best_cut, best_cost = 0, float("inf")
        for cut in range(num_layers + 1):
            u = cost(inputs, bounds, cut, freq)
            if u < best_cost:
                best_cut, best_cost = cut, u
    else:
        best_cut = num_layers if policy.fixed_cut == -1 else policy.fixed_cut
        if not 0 <= best_cut <= num_layers:
            raise ValueError(
                f"policy {policy.name}: cut {best_cut} outside [0, {num_layers}]"
            )
        best_cost = cost(inputs, bounds, best_cut, freq)

    return RoundDecision(
        cut_layer=best_cut,
        server_freq_hz=freq,
        cost=best_cost,
        breakdown=breakdown(inputs, bounds, best_cut, freq),
        bounds=bounds,
        clamp_flag=clamped,
    )


@dataclass(frozen=True)
class StageTimings:
    """Whole-round wall time of each protocol stage, seconds."""

    adapter_down_s: float
    device_compute_s: float
    uplink_s: float
    server_compute_s: float
    downlink_s: float
    adapter_up_s: float

    @property
    def total_s(self) -> float:
        return (
            self.adapter_down_s + self.device_compute_s + self.uplink_s
            + self.server_compute_s + self.downlink_s + self.adapter_up_s
        )


@dataclass(frozen=True)
class RoundTrace:
    device_index: int
    device_label: str
    round_index: int
    policy: str
    cut_layer: int
    server_freq_hz: float
    stages: StageTimings
    total_delay_s: float
    server_energy_j: float
    cost_u: float
    channel: ChannelRealization
    outage_redraws: int
    decision: RoundDecision


def _stage_timings(inputs: RoundCostInputs, cut: int, server_freq_hz: float) -> StageTimings:
    p, ch, t = inputs.profile, inputs.channel, inputs.local_epochs
    phi = inputs.compression_ratio

    def link(bits: float, rate: float) -> float:
        return bits / rate if bits else 0.0

    return StageTimings(
        adapter_down_s=link(p.adapter_bits(cut), ch.rate_down_bits_per_s),
        device_compute_s=t * p.device_flops(cut) / inputs.device.flop_rate,
        uplink_s=t * link(phi * p.smashed_bits(cut), ch.rate_up_bits_per_s),
        server_compute_s=t
        * p.server_flops(cut)
        / inputs.server.flop_rate_at(server_freq_hz),
        downlink_s=t * link(phi * p.grad_bits(cut), ch.rate_down_bits_per_s),
        adapter_up_s=link(p.adapter_bits(cut), ch.rate_up_bits_per_s),
    )


def simulate_round(
    scenario: Scenario,
    device_index: int,
    round_index: int,
    policy: Policy,
    realization: ChannelRealization | None = None,
    outage_redraws: int = 0,
) -> RoundTrace:
    """Run one (device, round) cell under a policy and emit its stage trace.

    A pre-drawn channel realization can be passed in to pair policies on the
    same draw; otherwise the cell's own deterministic stream is used.
    """
    if realization is None:
        realization, outage_redraws = realize_round_channel(
            scenario.devices[device_index].channel,
            scenario.mapping_table,
            scenario.seed,
            device_index,
            round_index,
            require_nonzero_rates=scenario.payload_pending,
        )
    inputs = scenario.round_inputs(device_index, realization)
    decision = decide(inputs, policy)
    stages = _stage_timings(inputs, decision.cut_layer, decision.server_freq_hz)
    return RoundTrace(
        device_index=device_index,
        device_label=scenario.devices[device_index].spec.label,
        round_index=round_index,
        policy=policy.name,
        cut_layer=decision.cut_layer,
        server_freq_hz=decision.server_freq_hz,
        stages=stages,
        total_delay_s=decision.breakdown.total_delay_s,
        server_energy_j=decision.breakdown.server_energy_j,
        cost_u=decision.cost,
        channel=realization,
        outage_redraws=outage_redraws,
        decision=decision,
    )


@dataclass(frozen=True)
class ExperimentResult:
    scenario_name: str
    traces: tuple[RoundTrace, ...]
    summary: tuple[tuple[str, str, float, float, float], ...]  # SUMMARY_CSV_HEADER rows
    reductions: tuple[tuple[str, str, float], ...]  # REDUCTIONS_CSV_HEADER rows

    def policy_traces(self, policy_name: str) -> list[RoundTrace]:
        return [t for t in self.traces if t.policy == policy_name]


def run_experiment(
    scenario: Scenario,
    policies: tuple[Policy, ...] = DEFAULT_POLICIES,
    out_dir: str | None = None,
) -> ExperimentResult:
    """Replay every (device, round) cell under each policy and aggregate.

    Emits rounds.csv / summary.csv / reductions.csv into out_dir when given.
    """
    if scenario.rounds < 1:
        raise ValueError("scenario has no rounds to run")
    names = [p.name for p in policies]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate policy names: {names}")

    traces: list[RoundTrace] = []
    for device_index in range(len(scenario.devices)):
        entry = scenario.devices[device_index]
        for round_index in range(scenario.rounds):
            realization, redraws = realize_round_channel(
                entry.channel,
                scenario.mapping_table,
                scenario.seed,
                device_index,
                round_index,
                require_nonzero_rates=scenario.payload_pending,
            )
            for policy in policies:
                traces.append(
                    simulate_round(
                        scenario, device_index, round_index, policy,
                        realization=realization, outage_redraws=redraws,
                    )
                )
    traces.sort(key=lambda t: (t.device_index, t.round_index, t.policy))

    summary = []
    for policy in policies:
        for device_index in range(len(scenario.devices)):
            cell = [
                t for t in traces
                if t.policy == policy.name and t.device_index == device_index
            ]
            n = len(cell)
            summary.append((
                policy.name,
                scenario.devices[device_index].spec.label,
                sum(t.total_delay_s for t in cell) / n,
                sum(t.server_energy_j for t in cell) / n,
                sum(t.cost_u for t in cell) / n,
            ))

    reductions = []
    by_policy = {p.name: [t for t in traces if t.policy == p.name] for p in policies}

    def fleet_mean(policy_name: str, attr: str) -> float:
        rows = by_policy[policy_name]
        return sum(getattr(t, attr) for t in rows) / len(rows)

    if "card" in by_policy and "device_only" in by_policy:
        reductions.append((
            "delay",
            "device_only",
            100.0 * (1.0 - fleet_mean("card", "total_delay_s") / fleet_mean("device_only", "total_delay_s")),
        ))
    if "card" in by_policy and "server_only" in by_policy:
        reductions.append((
            "energy",
            "server_only",
            100.0 * (1.0 - fleet_mean("card", "server_energy_j") / fleet_mean("server_only", "server_energy_j")),
        ))

    result = ExperimentResult(
        scenario_name=scenario.name,
        traces=tuple(traces),
        summary=tuple(summary),
        reductions=tuple(reductions),
    )
    if out_dir is not None:
        write_result_csvs(result, out_dir)
    return result


def _fmt(value) -> str:
    # repr round-trips floats exactly and is byte-stable across runs
    return repr(value) if isinstance(value, float) else str(value)


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_result_csvs(result: ExperimentResult, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    _write_csv(
        os.path.join(out_dir, "rounds.csv"),
        ROUNDS_CSV_HEADER,
        (
            (
                t.device_label, t.round_index, t.policy, t.cut_layer,
                t.server_freq_hz, t.total_delay_s, t.server_energy_j, t.cost_u,
                t.channel.snr_up_db, t.channel.snr_down_db, t.outage_redraws,
            )
            for t in result.traces
        ),
    )
    _write_csv(os.path.join(out_dir, "summary.csv"), SUMMARY_CSV_HEADER, result.summary)
    _write_csv(
        os.path.join(out_dir, "reductions.csv"), REDUCTIONS_CSV_HEADER, result.reductions
    )


def write_decisions_csv(path: str, curve) -> None:
    """Write the per-cut cost vector (show-decision output)."""
    _write_csv(
        path,
        DECISIONS_CSV_HEADER,
        (
            (cut, bd.normalized_cost, bd.total_delay_s, bd.server_energy_j)
            for cut, bd in enumerate(curve)
        ),
    )
