"""Joint cut-layer and server-frequency decision (the CARD solver).

The per-round problem separates exactly: the cost is convex in the server
frequency with an optimum whose cut-dependent factor cancels, so one
closed-form frequency serves every cut candidate, and the integer cut is
then found by enumerating all I+1 candidates. The fleet-level problem is a
sum of independent per-(device, round) instances.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cost_model import (
    CostBreakdown,
    NormBounds,
    RoundCostInputs,
    breakdown,
    cost,
    f_min_for_device,
    norm_bounds,
)
from .scenario import Scenario
from .wireless import realize_round_channel


@dataclass(frozen=True)
class RoundDecision:
    """Solver output for one (device, round) cell."""

    cut_layer: int
    server_freq_hz: float
    cost: float
    breakdown: CostBreakdown
    bounds: NormBounds
    clamp_flag: bool


def optimal_frequency(inputs: RoundCostInputs, bounds: NormBounds) -> float:
    """Cost-minimizing server frequency, clamped to the feasible interval.

    The unclamped optimum is the cube root of
    ``w * energy_range / (2 * power_coeff * (1 - w) * delay_range)``;
    the server-FLOP factor cancels between the delay and energy terms, so
    the result does not depend on the cut layer. The pure-delay limit (w=1)
    pins the frequency to the maximum, the pure-energy limit (w=0) to the
    per-device floor. A degenerate delay range drops the delay term from the
    cost, which likewise reduces to the pure-energy limit.
    """
    f_floor = f_min_for_device(inputs.device, inputs.server)
    f_ceil = inputs.server.max_freq_hz
    w = inputs.weight
    if w == 0.0:
        return f_floor
    if w == 1.0 or bounds.energy_range == 0.0:
        return f_ceil
    if bounds.delay_range == 0.0:
        return f_floor
    q = (
        w * bounds.energy_range
        / (2.0 * inputs.server.power_coeff * (1.0 - w) * bounds.delay_range)
    ) ** (1.0 / 3.0)
    return min(max(q, f_floor), f_ceil)


def card_decide(inputs: RoundCostInputs) -> RoundDecision:
    """Solve one (device, round) cell: frequency first, then the cut loop.

    Exactly I+1 cost evaluations; ties break toward the smaller cut so the
    output is deterministic.
    """
    bounds = norm_bounds(inputs)
    freq = optimal_frequency(inputs, bounds)
    f_floor = f_min_for_device(inputs.device, inputs.server)
    clamped = freq <= f_floor or freq >= inputs.server.max_freq_hz

    best_cut = 0
    best_cost = float("inf")
    for cut in range(inputs.profile.num_layers + 1):
        u = cost(inputs, bounds, cut, freq)
        if u < best_cost:
            best_cost = u
            best_cut = cut
    return RoundDecision(
        cut_layer=best_cut,
        server_freq_hz=freq,
        cost=best_cost,
        breakdown=breakdown(inputs, bounds, best_cut, freq),
        bounds=bounds,
        clamp_flag=clamped,
    )


def cost_curve(
    inputs: RoundCostInputs, bounds: NormBounds, server_freq_hz: float
) -> list[CostBreakdown]:
    """Cost-model view at every cut candidate for a fixed frequency."""
    return [
        breakdown(inputs, bounds, cut, server_freq_hz)
        for cut in range(inputs.profile.num_layers + 1)
    ]


@dataclass(frozen=True)
class FleetSolution:
    """Per-cell decisions plus their summed cost."""

    decisions: dict[tuple[int, int], RoundDecision]
    aggregate_cost: float


def solve_p1(scenario: Scenario) -> FleetSolution:
    """Optimize every (device, round) cell independently and sum the costs."""
    decisions: dict[tuple[int, int], RoundDecision] = {}
    total = 0.0
    for device_index in range(len(scenario.devices)):
        entry = scenario.devices[device_index]
        for round_index in range(scenario.rounds):
            realization, _ = realize_round_channel(
                entry.channel,
                scenario.mapping_table,
                scenario.seed,
                device_index,
                round_index,
                require_nonzero_rates=scenario.payload_pending,
            )
            decision = card_decide(scenario.round_inputs(device_index, realization))
            decisions[(device_index, round_index)] = decision
            total += decision.cost
    return FleetSolution(decisions=decisions, aggregate_cost=total)
