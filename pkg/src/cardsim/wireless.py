"""Wireless link model: path loss, Rayleigh block fading, and CQI rate mapping.

Per-round uplink/downlink rates come from a standard link budget feeding a
piecewise-constant SNR -> spectral-efficiency table (15 CQI levels). Fading
draws are keyed by (seed, device, round) so every realization is reproducible
and independent rounds can be evaluated in parallel.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np


class LinkOutageError(RuntimeError):
    """A nonzero payload must cross a link whose realized rate is zero."""


@dataclass(frozen=True)
class ChannelConfig:
    """Link budget parameters for one device-AP link."""

    bandwidth_hz: float = 10e6
    tx_power_up_dbm: float = 23.0
    tx_power_down_dbm: float = 30.0
    noise_psd_dbm_hz: float = -174.0
    distance_m: float = 50.0
    pathloss_exponent: float = 4.0
    reference_pathloss_db: float = 30.0
    fading: bool = True

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ValueError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")
        if self.pathloss_exponent <= 0:
            raise ValueError(
                f"pathloss_exponent must be > 0, got {self.pathloss_exponent}"
            )
        if self.distance_m <= 0:
            raise ValueError(f"distance_m must be > 0, got {self.distance_m}")


@dataclass(frozen=True)
class MappingTable:
    """Ordered (min_snr_db, spectral_efficiency) rows; below row 0 the rate is 0."""

    rows: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.rows:
            raise ValueError("mapping table must have at least one row")
        for i in range(1, len(self.rows)):
            if self.rows[i][0] <= self.rows[i - 1][0]:
                raise ValueError("mapping table SNR thresholds must be strictly increasing")
            if self.rows[i][1] <= self.rows[i - 1][1]:
                raise ValueError("mapping table efficiencies must be strictly increasing")
        if self.rows[0][1] <= 0:
            raise ValueError("spectral efficiencies must be positive")

    def efficiency(self, snr_db: float) -> float:
        """Spectral efficiency (bits/s/Hz) of the highest CQI supported at snr_db."""
        thresholds = [row[0] for row in self.rows]
        idx = bisect_right(thresholds, snr_db)
        if idx == 0:
            return 0.0
        return self.rows[idx - 1][1]

    @classmethod
    def from_csv(cls, path: str) -> "MappingTable":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"min_snr_db", "spectral_efficiency"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise ValueError(
                    f"{path}: expected CSV header with columns {sorted(required)}"
                )
            rows = tuple(
                (float(r["min_snr_db"]), float(r["spectral_efficiency"]))
                for r in reader
            )
        return cls(rows)


# 4-bit CQI efficiencies from the 3GPP NR 64-QAM table; the SNR thresholds
# are a documented convention (-6 dB to +22 dB in 2 dB steps), not
# standardized, and can be replaced via MappingTable.from_csv.
_CQI_EFFICIENCIES = (
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770,
    1.1758, 1.4766, 1.9141, 2.4063, 2.7305,
    3.3223, 3.9023, 4.5234, 5.1152, 5.5547,
)


def default_mapping_table() -> MappingTable:
    return MappingTable(
        tuple((-6.0 + 2.0 * i, eff) for i, eff in enumerate(_CQI_EFFICIENCIES))
    )


@dataclass(frozen=True)
class ChannelRealization:
    """Per-round link state: SNRs and the rates they map to."""

    snr_up_db: float
    snr_down_db: float
    rate_up_bits_per_s: float
    rate_down_bits_per_s: float


def snr_db(config: ChannelConfig, tx_power_dbm: float, fading_gain: float) -> float:
    """Received SNR in dB for a given fading power gain; -inf for a deep fade."""
    if fading_gain < 0:
        raise ValueError(f"fading_gain must be >= 0, got {fading_gain}")
    if fading_gain == 0.0:
        return -math.inf
    noise_dbm = config.noise_psd_dbm_hz + 10.0 * math.log10(config.bandwidth_hz)
    pathloss_db = (
        config.reference_pathloss_db
        + 10.0 * config.pathloss_exponent * math.log10(config.distance_m)
    )
    return tx_power_dbm - pathloss_db - noise_dbm + 10.0 * math.log10(fading_gain)


def rate_from_snr(table: MappingTable, snr_value_db: float, bandwidth_hz: float) -> float:
    """Achievable rate in bits/s: bandwidth times tabulated spectral efficiency."""
    return table.efficiency(snr_value_db) * bandwidth_hz


def round_rng(seed: int, device_index: int, round_index: int, redraw: int = 0) -> np.random.Generator:
    """Dedicated RNG stream for one (device, round) cell; redraw bumps the stream."""
    return np.random.default_rng(
        np.random.SeedSequence((seed, device_index, round_index, redraw))
    )


def draw_round_channel(
    config: ChannelConfig, table: MappingTable, rng: np.random.Generator
) -> ChannelRealization:
    """Sample one round's link state from the given stream.

    Rayleigh block fading: independent unit-mean exponential power gains for
    uplink and downlink, constant within the round. With fading disabled the
    realization is deterministic (gain 1 both ways).
    """
    if config.fading:
        gain_up, gain_down = rng.exponential(1.0, size=2)
    else:
        gain_up = gain_down = 1.0
    up = snr_db(config, config.tx_power_up_dbm, gain_up)
    down = snr_db(config, config.tx_power_down_dbm, gain_down)
    return ChannelRealization(
        snr_up_db=up,
        snr_down_db=down,
        rate_up_bits_per_s=rate_from_snr(table, up, config.bandwidth_hz),
        rate_down_bits_per_s=rate_from_snr(table, down, config.bandwidth_hz),
    )


def realize_round_channel(
    config: ChannelConfig,
    table: MappingTable,
    seed: int,
    device_index: int,
    round_index: int,
    require_nonzero_rates: bool = True,
    max_redraws: int = 1000,
) -> tuple[ChannelRealization, int]:
    """Draw the (device, round) channel, re-drawing on link outage.

    Returns the realization and the number of redraws that were needed.
    A rate of zero with payload pending would make the round infeasible, so
    the fading for that round is resampled from a fresh substream; this keeps
    every round feasible and the whole sequence deterministic.
    """
    for redraw in range(max_redraws + 1):
        realization = draw_round_channel(
            config, table, round_rng(seed, device_index, round_index, redraw)
        )
        if not require_nonzero_rates:
            return realization, redraw
        if realization.rate_up_bits_per_s > 0 and realization.rate_down_bits_per_s > 0:
            return realization, redraw
        if not config.fading:
            raise LinkOutageError(
                f"device {device_index}: zero rate without fading; "
                "the link budget cannot carry any payload"
            )
    raise LinkOutageError(
        f"device {device_index}, round {round_index}: link still in outage "
        f"after {max_redraws} redraws"
    )
