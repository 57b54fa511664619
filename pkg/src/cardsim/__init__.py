"""Co-simulator and optimizer for split LoRA fine-tuning at the network edge.

Models per-round training delay and server energy of device/server split
execution, decides the cut layer and server GPU frequency per round
(closed-form frequency + exhaustive cut search), and replays experiments
against fixed-split baselines.
"""

from .card import FleetSolution, RoundDecision, card_decide, optimal_frequency, solve_p1
from .cost_model import (
    CostBreakdown,
    DeviceSpec,
    InfeasibleScenarioError,
    NormBounds,
    RoundCostInputs,
    ServerSpec,
    cost,
    f_min_for_device,
    norm_bounds,
    server_energy,
    total_delay,
)
from .harness import Policy, RoundTrace, run_experiment, simulate_round
from .llm_profile import LlmProfile, default_llama_profile
from .scenario import Scenario, builtin_scenario, load_scenario, save_scenario
from .wireless import (
    ChannelConfig,
    ChannelRealization,
    LinkOutageError,
    MappingTable,
    default_mapping_table,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig",
    "ChannelRealization",
    "CostBreakdown",
    "DeviceSpec",
    "FleetSolution",
    "InfeasibleScenarioError",
    "LinkOutageError",
    "LlmProfile",
    "MappingTable",
    "NormBounds",
    "Policy",
    "RoundCostInputs",
    "RoundDecision",
    "RoundTrace",
    "Scenario",
    "ServerSpec",
    "builtin_scenario",
    "card_decide",
    "cost",
    "default_llama_profile",
    "default_mapping_table",
    "f_min_for_device",
    "load_scenario",
    "norm_bounds",
    "optimal_frequency",
    "run_experiment",
    "save_scenario",
    "server_energy",
    "simulate_round",
    "solve_p1",
    "total_delay",
]
