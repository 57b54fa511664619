"""Computational and data-volume geometry of a split LLM.

A profile describes how much work and traffic a cut layer induces:
FLOPs on each side of the cut and the byte counts crossing the link.
All FLOP counts and data sizes are integers so that conservation
identities (device + server = total) hold exactly.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class LlmProfile:
    """Per-stage FLOP counts and data volumes as functions of the cut layer.

    The embedding always runs on the device, the output head always on the
    server; the cut layer ``c`` in ``0..num_layers`` is the index of the last
    transformer layer executed on the device. Layers are assumed uniform in
    both compute and activation size.
    """

    num_layers: int
    flops_embedding: int
    flops_per_layer: int
    flops_head: int
    smashed_bits_per_layer: int
    grad_bits_per_layer: int
    adapter_bits_per_layer: int
    lora_rank: int = 8

    def __post_init__(self) -> None:
        if self.num_layers < 1:
            raise ValueError(f"num_layers must be >= 1, got {self.num_layers}")
        if self.flops_per_layer <= 0:
            raise ValueError(f"flops_per_layer must be > 0, got {self.flops_per_layer}")
        for name in ("flops_embedding", "flops_head", "smashed_bits_per_layer",
                     "grad_bits_per_layer", "adapter_bits_per_layer"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    def _check_cut(self, cut: int) -> None:
        if not 0 <= cut <= self.num_layers:
            raise ValueError(
                f"cut layer {cut} out of range [0, {self.num_layers}]"
            )

    @property
    def total_flops(self) -> int:
        return self.flops_embedding + self.num_layers * self.flops_per_layer + self.flops_head

    def device_flops(self, cut: int) -> int:
        """FLOPs per local epoch on the device side: embedding plus ``cut`` layers."""
        self._check_cut(cut)
        return self.flops_embedding + cut * self.flops_per_layer

    def server_flops(self, cut: int) -> int:
        """FLOPs per local epoch on the server side: remaining layers plus head."""
        self._check_cut(cut)
        return (self.num_layers - cut) * self.flops_per_layer + self.flops_head

    def smashed_bits(self, cut: int) -> int:
        """Uplink activation payload at the cut; uniform layers make it constant."""
        self._check_cut(cut)
        return self.smashed_bits_per_layer

    def grad_bits(self, cut: int) -> int:
        """Downlink activation-gradient payload at the cut."""
        self._check_cut(cut)
        return self.grad_bits_per_layer

    def adapter_bits(self, cut: int) -> int:
        """Size of the device-side adapter stack: one (A, B) pair per device layer."""
        self._check_cut(cut)
        return cut * self.adapter_bits_per_layer


def adapter_pair_bits(rank: int, rows: int, cols: int, precision_bits: int = 32) -> int:
    """Bits of one low-rank adapter pair A (rows x rank) and B (rank x cols)."""
    return rank * (rows + cols) * precision_bits


def default_llama_profile(
    batch_size: int = 4,
    seq_len: int = 512,
    hidden_dim: int = 2048,
    lora_rank: int = 8,
    num_layers: int = 32,
    vocab_size: int = 128256,
    activation_bits: int = 16,
) -> LlmProfile:
    """Built-in profile for a 1B-class, 32-layer decoder model.

    Per-layer training FLOPs are taken as 3x the forward cost (forward plus
    roughly twice that for the backward pass through the frozen trunk), with
    forward cost 2 * params * tokens. Layer parameters follow the usual
    decoder block: 4 attention projections of hidden_dim^2 plus a gated MLP
    of 3 * hidden_dim * (4 * hidden_dim). The mini-batch shape is not part
    of the model identity and is freely tunable.
    """
    tokens = batch_size * seq_len
    ffn_dim = 4 * hidden_dim
    params_per_layer = 4 * hidden_dim * hidden_dim + 3 * hidden_dim * ffn_dim
    activation_payload = batch_size * seq_len * hidden_dim * activation_bits
    return LlmProfile(
        num_layers=num_layers,
        # embedding is a lookup; charged a nominal copy cost per token
        flops_embedding=6 * tokens * hidden_dim,
        flops_per_layer=6 * params_per_layer * tokens,
        flops_head=6 * tokens * hidden_dim * vocab_size,
        smashed_bits_per_layer=activation_payload,
        grad_bits_per_layer=activation_payload,
        adapter_bits_per_layer=2 * adapter_pair_bits(lora_rank, hidden_dim, hidden_dim),
        lora_rank=lora_rank,
    )
