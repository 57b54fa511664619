import numpy as np
import pytest

from cardsim.cost_model import (
    DeviceSpec,
    InfeasibleScenarioError,
    LinkOutageError,
    NormBounds,
    RoundCostInputs,
    ServerSpec,
    breakdown,
    cost,
    device_compute_delay,
    f_min_for_device,
    norm_bounds,
    server_compute_delay,
    server_energy,
    total_delay,
    transmission_delay,
)
from cardsim.llm_profile import LlmProfile
from cardsim.scenario import builtin_scenario
from cardsim.wireless import ChannelRealization

from oracles import random_round_inputs

DEVICE_1 = DeviceSpec(gpu_freq_hz=1.3e9, flops_per_cycle=2.0, core_count=2048.0, label="device1")
DEVICE_5 = DeviceSpec(gpu_freq_hz=0.5e9, flops_per_cycle=2.0, core_count=512.0, label="device5")
SERVER = ServerSpec(max_freq_hz=2.46e9, flops_per_cycle=2.0, core_count=3072.0, power_coeff=1e-25)


def worked_example_inputs() -> RoundCostInputs:
    """Single-layer profile built to hit the hand-computed component values."""
    profile = LlmProfile(
        num_layers=1,
        flops_embedding=0,
        flops_per_layer=5_324_800_000_000,  # device side at cut 1
        flops_head=6_144_000_000_000,  # server side at cut 1
        smashed_bits_per_layer=10**8,
        grad_bits_per_layer=10**8,
        adapter_bits_per_layer=10**7,
    )
    channel = ChannelRealization(
        snr_up_db=20.0, snr_down_db=20.0,
        rate_up_bits_per_s=1e8, rate_down_bits_per_s=1e8,
    )
    return RoundCostInputs(
        profile=profile,
        device=DEVICE_1,
        server=SERVER,
        channel=channel,
        local_epochs=5,
        compression_ratio=0.1,
        weight=0.2,
    )


class TestWorkedExamples:
    def test_device_compute_delay(self):
        # 5.3248e12 FLOPs / (1.3 GHz * 2 * 2048 cores) = exactly 1 s
        assert device_compute_delay(worked_example_inputs(), 1) == pytest.approx(1.0, rel=1e-12)

    def test_device_delay_inverse_in_frequency(self):
        inputs = worked_example_inputs()
        doubled = RoundCostInputs(
            profile=inputs.profile,
            device=DeviceSpec(gpu_freq_hz=2.6e9, flops_per_cycle=2.0, core_count=2048.0),
            server=inputs.server,
            channel=inputs.channel,
            local_epochs=5,
            compression_ratio=0.1,
            weight=0.2,
        )
        assert device_compute_delay(doubled, 1) == pytest.approx(0.5, rel=1e-12)

    def test_server_compute_delay(self):
        # 6.144e12 / (2.46 GHz * 2 * 3072) = 1/2.46 s
        assert server_compute_delay(worked_example_inputs(), 1, 2.46e9) == pytest.approx(
            1.0 / 2.46, rel=1e-12
        )

    def test_transmission_delay(self):
        # 5 * (0.1 + 0.1) + 0.1 + 0.1
        assert transmission_delay(worked_example_inputs(), 1) == pytest.approx(1.2, rel=1e-12)

    def test_total_delay_composition(self):
        expected = 5.0 * (1.0 + 1.0 / 2.46) + 1.2
        assert total_delay(worked_example_inputs(), 1, 2.46e9) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(8.2325, abs=5e-4)

    def test_server_energy(self):
        # 5 * 1e-25 * (2.46e9)^2 * 6.144e12 / 6144 = 3025.8 J
        assert server_energy(worked_example_inputs(), 1, 2.46e9) == pytest.approx(3025.8, rel=1e-12)

    def test_energy_quadratic_in_frequency(self):
        inputs = worked_example_inputs()
        assert server_energy(inputs, 1, 2.0e9) * 4.0 == pytest.approx(
            server_energy(inputs, 1, 4.0e9), rel=1e-12
        )

    def test_adapter_terms_vanish_at_cut_zero(self):
        inputs = worked_example_inputs()
        # only the per-epoch activation/gradient terms remain
        assert transmission_delay(inputs, 0) == pytest.approx(1.0, rel=1e-12)

    def test_compression_scales_only_per_epoch_terms(self):
        inputs = worked_example_inputs()
        full = RoundCostInputs(
            profile=inputs.profile, device=inputs.device, server=inputs.server,
            channel=inputs.channel, local_epochs=5, compression_ratio=1.0, weight=0.2,
        )
        assert transmission_delay(full, 1) == pytest.approx(5.0 * 2.0 + 0.2, rel=1e-12)


class TestFrequencyFloor:
    def test_device_1(self):
        assert f_min_for_device(DEVICE_1, SERVER) == pytest.approx(1.3e9 * 2 * 2048 / 6144, rel=1e-12)

    def test_device_5(self):
        assert f_min_for_device(DEVICE_5, SERVER) == pytest.approx(0.5e9 / 6, rel=1e-12)

    def test_identical_specs(self):
        dev = DeviceSpec(gpu_freq_hz=1e9, flops_per_cycle=2.0, core_count=3072.0)
        assert f_min_for_device(dev, SERVER) == pytest.approx(1e9, rel=1e-12)

    def test_server_weaker_than_device_is_infeasible(self):
        monster = DeviceSpec(gpu_freq_hz=3e9, flops_per_cycle=4.0, core_count=8192.0)
        with pytest.raises(InfeasibleScenarioError):
            f_min_for_device(monster, SERVER)


class TestNormBounds:
    def test_headless_profile_has_zero_energy_floor(self):
        inputs = worked_example_inputs()
        headless = RoundCostInputs(
            profile=LlmProfile(
                num_layers=1, flops_embedding=0, flops_per_layer=10**12, flops_head=0,
                smashed_bits_per_layer=10**8, grad_bits_per_layer=10**8,
                adapter_bits_per_layer=10**7,
            ),
            device=inputs.device, server=inputs.server, channel=inputs.channel,
            local_epochs=5, compression_ratio=0.1, weight=0.2,
        )
        assert norm_bounds(headless).e_min_j == 0.0
        assert server_energy(headless, 1, 2.46e9) == 0.0

    def test_builtin_bounds_nondegenerate(self):
        scenario = builtin_scenario(rounds=1)
        channel = ChannelRealization(20.0, 20.0, 5e7, 5e7)
        for m in range(len(scenario.devices)):
            b = norm_bounds(scenario.round_inputs(m, channel))
            assert b.d_min_s < b.d_max_s
            assert b.e_min_j < b.e_max_j

    def test_bounds_bracket_random_feasible_points(self):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            inputs = random_round_inputs(rng)
            b = norm_bounds(inputs)
            f_lo = f_min_for_device(inputs.device, inputs.server)
            f_hi = inputs.server.max_freq_hz
            for _ in range(10):
                c = int(rng.integers(0, inputs.profile.num_layers + 1))
                f = rng.uniform(f_lo, f_hi)
                d = total_delay(inputs, c, f)
                e = server_energy(inputs, c, f)
                assert b.d_min_s * (1 - 1e-12) <= d <= b.d_max_s * (1 + 1e-12)
                assert b.e_min_j * (1 - 1e-12) <= e <= b.e_max_j * (1 + 1e-12)

    def test_degenerate_normalization_maps_to_zero(self):
        b = NormBounds(d_min_s=1.0, d_max_s=1.0, e_min_j=0.0, e_max_j=5.0)
        assert b.norm_delay(1.0) == 0.0
        assert b.norm_energy(2.5) == 0.5


class TestCost:
    def test_delay_only_at_delay_minimum(self):
        inputs = worked_example_inputs()
        delay_only = RoundCostInputs(
            profile=inputs.profile, device=inputs.device, server=inputs.server,
            channel=inputs.channel, local_epochs=5, compression_ratio=0.1, weight=1.0,
        )
        b = norm_bounds(delay_only)
        assert cost(delay_only, b, 0, delay_only.server.max_freq_hz) == pytest.approx(0.0, abs=1e-12)

    def test_energy_only_at_energy_minimum(self):
        inputs = worked_example_inputs()
        energy_only = RoundCostInputs(
            profile=inputs.profile, device=inputs.device, server=inputs.server,
            channel=inputs.channel, local_epochs=5, compression_ratio=0.1, weight=0.0,
        )
        b = norm_bounds(energy_only)
        f_lo = f_min_for_device(energy_only.device, energy_only.server)
        assert cost(energy_only, b, energy_only.profile.num_layers, f_lo) == pytest.approx(0.0, abs=1e-12)

    def test_midpoint_against_independent_recomputation(self):
        inputs = worked_example_inputs()
        b = norm_bounds(inputs)
        f = 1.5e9
        d = total_delay(inputs, 1, f)
        e = server_energy(inputs, 1, f)
        expected = 0.2 * (d - b.d_min_s) / (b.d_max_s - b.d_min_s) + 0.8 * (e - b.e_min_j) / (
            b.e_max_j - b.e_min_j
        )
        assert cost(inputs, b, 1, f) == pytest.approx(expected, rel=1e-12)

    def test_cost_in_unit_interval_for_random_feasible_points(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            inputs = random_round_inputs(rng)
            b = norm_bounds(inputs)
            f_lo = f_min_for_device(inputs.device, inputs.server)
            for _ in range(5):
                c = int(rng.integers(0, inputs.profile.num_layers + 1))
                f = rng.uniform(f_lo, inputs.server.max_freq_hz)
                assert -1e-9 <= cost(inputs, b, c, f) <= 1.0 + 1e-9

    def test_finite_difference_matches_analytic_derivative(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            inputs = random_round_inputs(rng)
            b = norm_bounds(inputs)
            f_lo = f_min_for_device(inputs.device, inputs.server)
            f_hi = inputs.server.max_freq_hz
            c = int(rng.integers(0, inputs.profile.num_layers + 1))
            f = rng.uniform(1.05 * f_lo, 0.95 * f_hi)
            srv = inputs.profile.server_flops(c)
            per_hz = inputs.server.flops_per_hz
            a = inputs.weight * inputs.local_epochs * srv / (per_hz * b.delay_range)
            bb = (
                (1.0 - inputs.weight) * inputs.local_epochs * inputs.server.power_coeff * srv
                / (per_hz * b.energy_range)
            )
            analytic = -a / f**2 + 2.0 * bb * f
            h = 1e-6 * f
            numeric = (cost(inputs, b, c, f + h) - cost(inputs, b, c, f - h)) / (2.0 * h)
            assert numeric == pytest.approx(analytic, rel=1e-6)


class TestOutage:
    def test_zero_rate_with_payload_raises(self):
        inputs = worked_example_inputs()
        dead = RoundCostInputs(
            profile=inputs.profile, device=inputs.device, server=inputs.server,
            channel=ChannelRealization(-50.0, -50.0, 0.0, 0.0),
            local_epochs=5, compression_ratio=0.1, weight=0.2,
        )
        with pytest.raises(LinkOutageError):
            transmission_delay(dead, 1)

    def test_zero_rate_with_zero_payload_is_fine(self):
        inputs = worked_example_inputs()
        silent = RoundCostInputs(
            profile=LlmProfile(
                num_layers=1, flops_embedding=0, flops_per_layer=10**12, flops_head=10**12,
                smashed_bits_per_layer=0, grad_bits_per_layer=0, adapter_bits_per_layer=0,
            ),
            device=inputs.device, server=inputs.server,
            channel=ChannelRealization(-50.0, -50.0, 0.0, 0.0),
            local_epochs=5, compression_ratio=0.1, weight=0.2,
        )
        assert transmission_delay(silent, 1) == 0.0


def test_breakdown_components_sum_to_total():
    inputs = worked_example_inputs()
    b = norm_bounds(inputs)
    bd = breakdown(inputs, b, 1, 1.7e9)
    assert bd.device_compute_s + bd.server_compute_s + bd.transmission_s == pytest.approx(
        bd.total_delay_s, rel=1e-12
    )
    assert bd.total_delay_s == pytest.approx(total_delay(inputs, 1, 1.7e9), rel=1e-12)
