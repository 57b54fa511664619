"""Delay, energy, and scalarized cost of one split training round.

A round for one device comprises T local epochs of device-side compute,
activation exchange, and server-side compute, plus a one-off adapter
transfer in each direction. The server's power follows a cubic law in its
GPU frequency, so round energy scales with frequency squared. Cost is a
weighted sum of delay and energy, each min-max normalized against the
frequency/cut extremes for the same channel realization.
"""

from __future__ import annotations

from dataclasses import dataclass

from .llm_profile import LlmProfile
from .wireless import ChannelRealization, LinkOutageError

__all__ = [
    "DeviceSpec",
    "ServerSpec",
    "RoundCostInputs",
    "CostBreakdown",
    "NormBounds",
    "InfeasibleScenarioError",
    "LinkOutageError",
    "device_compute_delay",
    "server_compute_delay",
    "transmission_delay",
    "total_delay",
    "server_energy",
    "f_min_for_device",
    "norm_bounds",
    "cost",
    "breakdown",
]


class InfeasibleScenarioError(ValueError):
    """The server cannot match a device's per-FLOP speed within its frequency range."""


@dataclass(frozen=True)
class DeviceSpec:
    """Fixed compute capability of one edge device's GPU."""

    gpu_freq_hz: float
    flops_per_cycle: float
    core_count: float
    label: str = "device"

    def __post_init__(self) -> None:
        for name in ("gpu_freq_hz", "flops_per_cycle", "core_count"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")

    @property
    def flop_rate(self) -> float:
        """Sustained FLOP/s at the device's fixed frequency."""
        return self.gpu_freq_hz * self.flops_per_cycle * self.core_count


@dataclass(frozen=True)
class ServerSpec:
    """Edge server GPU: frequency range and cubic power coefficient."""

    max_freq_hz: float
    flops_per_cycle: float
    core_count: float
    power_coeff: float  # Watt / (cycle/s)^3

    def __post_init__(self) -> None:
        for name in ("max_freq_hz", "flops_per_cycle", "core_count", "power_coeff"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")

    @property
    def flops_per_hz(self) -> float:
        return self.flops_per_cycle * self.core_count

    def flop_rate_at(self, freq_hz: float) -> float:
        return freq_hz * self.flops_per_hz


@dataclass(frozen=True)
class RoundCostInputs:
    """Everything needed to price one (device, round) cell."""

    profile: LlmProfile
    device: DeviceSpec
    server: ServerSpec
    channel: ChannelRealization
    local_epochs: int
    compression_ratio: float
    weight: float

    def __post_init__(self) -> None:
        if self.local_epochs < 1:
            raise ValueError(f"local_epochs must be >= 1, got {self.local_epochs}")
        if not 0.0 < self.compression_ratio <= 1.0:
            raise ValueError(
                f"compression_ratio must be in (0, 1], got {self.compression_ratio}"
            )
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"weight must be in [0, 1], got {self.weight}")


@dataclass(frozen=True)
class CostBreakdown:
    """Delay components (whole round), energy, and normalized cost at one (c, f)."""

    device_compute_s: float
    server_compute_s: float
    transmission_s: float
    total_delay_s: float
    server_energy_j: float
    normalized_cost: float


@dataclass(frozen=True)
class NormBounds:
    """Min-max normalization brackets for delay and energy."""

    d_min_s: float
    d_max_s: float
    e_min_j: float
    e_max_j: float

    def __post_init__(self) -> None:
        if self.d_min_s > self.d_max_s or self.e_min_j > self.e_max_j:
            raise ValueError(f"invalid normalization bounds: {self}")

    @property
    def delay_range(self) -> float:
        return self.d_max_s - self.d_min_s

    @property
    def energy_range(self) -> float:
        return self.e_max_j - self.e_min_j

    def norm_delay(self, delay_s: float) -> float:
        # degenerate range: the term carries no information, defined as 0
        if self.delay_range == 0.0:
            return 0.0
        return (delay_s - self.d_min_s) / self.delay_range

    def norm_energy(self, energy_j: float) -> float:
        if self.energy_range == 0.0:
            return 0.0
        return (energy_j - self.e_min_j) / self.energy_range


def device_compute_delay(inputs: RoundCostInputs, cut: int) -> float:
    """Device-side compute time per local epoch, seconds."""
    return inputs.profile.device_flops(cut) / inputs.device.flop_rate


def server_compute_delay(inputs: RoundCostInputs, cut: int, server_freq_hz: float) -> float:
    """Server-side compute time per local epoch at the given frequency, seconds."""
    if server_freq_hz <= 0:
        raise ValueError(f"server_freq_hz must be > 0, got {server_freq_hz}")
    return inputs.profile.server_flops(cut) / inputs.server.flop_rate_at(server_freq_hz)


def _link_time(payload_bits: float, rate_bits_per_s: float, what: str) -> float:
    if payload_bits == 0.0:
        return 0.0
    if rate_bits_per_s <= 0.0:
        raise LinkOutageError(f"{what}: {payload_bits:g} bits pending on a zero-rate link")
    return payload_bits / rate_bits_per_s


def transmission_delay(inputs: RoundCostInputs, cut: int) -> float:
    """Whole-round transmission time, seconds.

    Compressed activations and gradients cross the link every epoch; the
    device-side adapter stack is exchanged once per round in each direction.
    """
    p, ch = inputs.profile, inputs.channel
    phi = inputs.compression_ratio
    per_epoch = _link_time(
        phi * p.smashed_bits(cut), ch.rate_up_bits_per_s, "activation uplink"
    ) + _link_time(
        phi * p.grad_bits(cut), ch.rate_down_bits_per_s, "gradient downlink"
    )
    adapters = _link_time(
        p.adapter_bits(cut), ch.rate_up_bits_per_s, "adapter upload"
    ) + _link_time(
        p.adapter_bits(cut), ch.rate_down_bits_per_s, "adapter download"
    )
    return inputs.local_epochs * per_epoch + adapters


def total_delay(inputs: RoundCostInputs, cut: int, server_freq_hz: float) -> float:
    """Whole-round training delay: T epochs of compute plus transmissions."""
    compute = device_compute_delay(inputs, cut) + server_compute_delay(
        inputs, cut, server_freq_hz
    )
    return inputs.local_epochs * compute + transmission_delay(inputs, cut)


def server_energy(inputs: RoundCostInputs, cut: int, server_freq_hz: float) -> float:
    """Server compute energy for the round, joules.

    Cubic power times compute time leaves a quadratic frequency dependence.
    """
    if server_freq_hz <= 0:
        raise ValueError(f"server_freq_hz must be > 0, got {server_freq_hz}")
    return (
        inputs.local_epochs
        * inputs.server.power_coeff
        * server_freq_hz**2
        * inputs.profile.server_flops(cut)
        / inputs.server.flops_per_hz
    )


def f_min_for_device(device: DeviceSpec, server: ServerSpec) -> float:
    """Lowest server frequency at which the server matches the device's FLOP rate."""
    f_min = device.flop_rate / server.flops_per_hz
    if f_min > server.max_freq_hz:
        raise InfeasibleScenarioError(
            f"{device.label}: requires server frequency {f_min:.4g} Hz "
            f"> F_max {server.max_freq_hz:.4g} Hz"
        )
    return f_min


def norm_bounds(inputs: RoundCostInputs) -> NormBounds:
    """Normalization brackets from the cut/frequency extremes.

    Delay peaks (and energy bottoms out) with everything on the device and
    the server idling at its per-device floor frequency; the reverse extreme
    is full offload at maximum frequency. Evaluated against the same channel
    realization as the round being normalized.
    """
    profile = inputs.profile
    f_min = f_min_for_device(inputs.device, inputs.server)
    f_max = inputs.server.max_freq_hz
    return NormBounds(
        d_min_s=total_delay(inputs, 0, f_max),
        d_max_s=total_delay(inputs, profile.num_layers, f_min),
        e_min_j=server_energy(inputs, profile.num_layers, f_min),
        e_max_j=server_energy(inputs, 0, f_max),
    )


def cost(inputs: RoundCostInputs, bounds: NormBounds, cut: int, server_freq_hz: float) -> float:
    """Scalarized cost: weight on normalized delay, remainder on normalized energy."""
    w = inputs.weight
    u = 0.0
    if w > 0.0:
        u += w * bounds.norm_delay(total_delay(inputs, cut, server_freq_hz))
    if w < 1.0:
        u += (1.0 - w) * bounds.norm_energy(server_energy(inputs, cut, server_freq_hz))
    return u


def breakdown(
    inputs: RoundCostInputs, bounds: NormBounds, cut: int, server_freq_hz: float
) -> CostBreakdown:
    """Full component view at one (cut, frequency) point."""
    t = inputs.local_epochs
    dev = t * device_compute_delay(inputs, cut)
    srv = t * server_compute_delay(inputs, cut, server_freq_hz)
    tx = transmission_delay(inputs, cut)
    delay = dev + srv + tx
    energy = server_energy(inputs, cut, server_freq_hz)
    u = inputs.weight * bounds.norm_delay(delay) + (1.0 - inputs.weight) * bounds.norm_energy(energy)
    return CostBreakdown(
        device_compute_s=dev,
        server_compute_s=srv,
        transmission_s=tx,
        total_delay_s=delay,
        server_energy_j=energy,
        normalized_cost=u,
    )
