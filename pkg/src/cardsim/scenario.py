"""Experiment descriptions: device fleet, server, model profile, channel, knobs.

Scenarios are plain JSON (see ``docs/scenario.example.json`` in the repo for
an annotated example). Loading is strict by default: unknown keys are
rejected with the offending field path so typos cannot silently change an
experiment.
"""

from __future__ import annotations

import json
import os
from dataclasses import MISSING, dataclass, field, fields, replace

from .cost_model import DeviceSpec, RoundCostInputs, ServerSpec, f_min_for_device
from .llm_profile import LlmProfile, default_llama_profile
from .wireless import ChannelConfig, ChannelRealization, MappingTable, default_mapping_table

CHANNEL_STATE_EXPONENTS = {"good": 2.0, "normal": 4.0, "poor": 6.0}


class ScenarioValidationError(ValueError):
    """Scenario file violates the schema or a component invariant."""

    def __init__(self, path: str, message: str):
        self.field_path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class DeviceEntry:
    spec: DeviceSpec
    channel: ChannelConfig


@dataclass(frozen=True)
class Scenario:
    """A fully validated experiment description."""

    devices: tuple[DeviceEntry, ...]
    server: ServerSpec
    profile: LlmProfile
    local_epochs: int
    compression_ratio: float
    weight: float
    rounds: int
    seed: int
    mapping_table: MappingTable = field(default_factory=default_mapping_table)
    name: str = "scenario"

    def __post_init__(self) -> None:
        if not self.devices:
            raise ScenarioValidationError("devices", "at least one device is required")
        if self.rounds < 1:
            raise ScenarioValidationError("rounds", f"must be >= 1, got {self.rounds}")
        if self.local_epochs < 1:
            raise ScenarioValidationError(
                "local_epochs", f"must be >= 1, got {self.local_epochs}"
            )
        if not 0.0 < self.compression_ratio <= 1.0:
            raise ScenarioValidationError(
                "compression_ratio", f"must be in (0, 1], got {self.compression_ratio}"
            )
        if not 0.0 <= self.weight <= 1.0:
            raise ScenarioValidationError(
                "weight", f"must be in [0, 1], got {self.weight}"
            )
        # fails early if the server is weaker than any device
        for i, entry in enumerate(self.devices):
            try:
                f_min_for_device(entry.spec, self.server)
            except ValueError as exc:
                raise ScenarioValidationError(f"devices[{i}]", str(exc)) from exc

    def round_inputs(self, device_index: int, realization: ChannelRealization) -> RoundCostInputs:
        """Cost-model inputs for one device under a given channel realization."""
        return RoundCostInputs(
            profile=self.profile,
            device=self.devices[device_index].spec,
            server=self.server,
            channel=realization,
            local_epochs=self.local_epochs,
            compression_ratio=self.compression_ratio,
            weight=self.weight,
        )

    @property
    def payload_pending(self) -> bool:
        """Whether any round must move bits over the link (drives outage handling)."""
        p = self.profile
        return (
            p.smashed_bits_per_layer > 0
            or p.grad_bits_per_layer > 0
            or p.adapter_bits_per_layer > 0
        )


def builtin_scenario(
    channel_state: str = "normal",
    rounds: int = 100,
    seed: int = 42,
) -> Scenario:
    """Reference fleet: five heterogeneous edge devices and one RTX-4060Ti-class server.

    Device compute capability decreases from device 1 to device 5. Channel
    states good/normal/poor select path-loss exponents 2/4/6; the link budget
    (10 MHz, 23/30 dBm, 50 m) is a documented default, not a calibrated
    measurement.
    """
    state = channel_state.lower()
    if state not in CHANNEL_STATE_EXPONENTS:
        raise ScenarioValidationError(
            "channel_state",
            f"unknown state {channel_state!r}; expected one of {sorted(CHANNEL_STATE_EXPONENTS)}",
        )
    alpha = CHANNEL_STATE_EXPONENTS[state]
    fleet = [
        ("device1", 1.3e9, 2048.0),
        ("device2", 1.0e9, 2048.0),
        ("device3", 0.7e9, 1792.0),
        ("device4", 0.7e9, 1024.0),
        ("device5", 0.5e9, 512.0),
    ]
    channel = ChannelConfig(pathloss_exponent=alpha)
    return Scenario(
        devices=tuple(
            DeviceEntry(
                spec=DeviceSpec(
                    gpu_freq_hz=freq, flops_per_cycle=2.0, core_count=cores, label=label
                ),
                channel=channel,
            )
            for label, freq, cores in fleet
        ),
        server=ServerSpec(
            max_freq_hz=2.46e9, flops_per_cycle=2.0, core_count=3072.0, power_coeff=1e-25
        ),
        profile=default_llama_profile(),
        local_epochs=5,
        compression_ratio=0.1,
        weight=0.2,
        rounds=rounds,
        seed=seed,
        name=f"builtin-{state}",
    )


# ---------------------------------------------------------------------------
# JSON (de)serialization


def _require_keys(data: dict, allowed: set[str], required: set[str], path: str, strict: bool) -> None:
    missing = required - data.keys()
    if missing:
        raise ScenarioValidationError(path, f"missing required keys {sorted(missing)}")
    unknown = data.keys() - allowed
    if unknown:
        msg = f"unknown keys {sorted(unknown)} (allowed: {sorted(allowed)})"
        if strict:
            raise ScenarioValidationError(path, msg)
        import warnings

        warnings.warn(f"{path}: {msg}", stacklevel=3)


def _build(cls, data: dict, path: str, strict: bool):
    if not isinstance(data, dict):
        raise ScenarioValidationError(path, "expected an object")
    names = {f.name for f in fields(cls)}
    required = {
        f.name
        for f in fields(cls)
        if f.default is MISSING and f.default_factory is MISSING
    }
    _require_keys(data, names, required, path, strict)
    try:
        return cls(**{k: v for k, v in data.items() if k in names})
    except (TypeError, ValueError) as exc:
        raise ScenarioValidationError(path, str(exc)) from exc


def scenario_from_dict(data: dict, strict: bool = True, base_dir: str = ".") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioValidationError("$", f"expected a JSON object, got {type(data).__name__}")
    top_allowed = {
        "name", "devices", "server", "profile", "local_epochs", "compression_ratio",
        "weight", "rounds", "seed", "mapping_table_csv",
    }
    top_required = {
        "devices", "server", "profile", "local_epochs", "compression_ratio",
        "weight", "rounds", "seed",
    }
    _require_keys(data, top_allowed, top_required, "$", strict)

    if not isinstance(data["devices"], list) or not data["devices"]:
        raise ScenarioValidationError("devices", "expected a non-empty list")
    devices = []
    for i, dev in enumerate(data["devices"]):
        path = f"devices[{i}]"
        if not isinstance(dev, dict):
            raise ScenarioValidationError(path, "expected an object")
        _require_keys(dev, {"spec", "channel"}, {"spec", "channel"}, path, strict)
        spec = _build(DeviceSpec, dev["spec"], f"{path}.spec", strict)
        channel = _build(ChannelConfig, dev["channel"], f"{path}.channel", strict)
        devices.append(DeviceEntry(spec=spec, channel=channel))

    server = _build(ServerSpec, data["server"], "server", strict)
    profile = _build(LlmProfile, data["profile"], "profile", strict)

    table = default_mapping_table()
    if "mapping_table_csv" in data:
        csv_path = os.path.join(base_dir, data["mapping_table_csv"])
        try:
            table = MappingTable.from_csv(csv_path)
        except (OSError, ValueError) as exc:
            raise ScenarioValidationError("mapping_table_csv", str(exc)) from exc

    return Scenario(
        devices=tuple(devices),
        server=server,
        profile=profile,
        local_epochs=data["local_epochs"],
        compression_ratio=data["compression_ratio"],
        weight=data["weight"],
        rounds=data["rounds"],
        seed=data["seed"],
        mapping_table=table,
        name=data.get("name", "scenario"),
    )


def load_scenario(path: str, strict: bool = True) -> Scenario:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ScenarioValidationError("$", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioValidationError("$", f"invalid JSON in {path}: {exc}") from exc
    return scenario_from_dict(data, strict=strict, base_dir=os.path.dirname(path) or ".")


def scenario_to_dict(scenario: Scenario) -> dict:
    def asdict_no_defaults(obj) -> dict:
        return {f.name: getattr(obj, f.name) for f in fields(obj)}

    return {
        "name": scenario.name,
        "devices": [
            {
                "spec": asdict_no_defaults(entry.spec),
                "channel": asdict_no_defaults(entry.channel),
            }
            for entry in scenario.devices
        ],
        "server": asdict_no_defaults(scenario.server),
        "profile": asdict_no_defaults(scenario.profile),
        "local_epochs": scenario.local_epochs,
        "compression_ratio": scenario.compression_ratio,
        "weight": scenario.weight,
        "rounds": scenario.rounds,
        "seed": scenario.seed,
    }


def save_scenario(scenario: Scenario, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2)
        fh.write("\n")


def with_overrides(scenario: Scenario, **kwargs) -> Scenario:
    """Copy of the scenario with selected fields replaced."""
    return replace(scenario, **kwargs)
