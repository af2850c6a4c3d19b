from __future__ import annotations

import os
from collections.abc import Callable

import pytest

from ccfl_lab.channel import ChannelSet
from ccfl_lab.scenario import Scenario, from_preset, parse_scenario


def env_flag(name: str) -> bool:
    return (os.getenv(name) or "").strip().lower() in {"1", "true", "yes", "y", "on"}


def _device(x: float, y: float, **overrides: object) -> dict:
    return {
        "position": {"x": x, "y": y},
        "max_power": 0.01,
        "samples": 500,
        "cpu_freq": 2e9,
        "cycles_per_sample": 1e6,
        **overrides,
    }


def scenario_dict(n_devices: int = 1, **overrides: object) -> dict:
    """Fig.-3 constants around a fixed, collision-free toy layout in a 500 m square."""
    devices = [_device(50.0 + 40.0 * (i % 10), 60.0 + 35.0 * (i // 10)) for i in range(n_devices)]
    data: dict = {
        "side": 500.0,
        "devices": devices,
        "jammer_pos": {"x": 400.0, "y": 120.0},
        "warden_pos": {"x": 100.0, "y": 420.0},
        "bs_pos": None,
        "jammer_max_power": 100.0,
        "total_bandwidth": 20e6,
        "noise_psd": 10.0 ** (-20.4),
        "pathloss_ref_gain": 1e-3,
        "pathloss_exponent": 3.0,
        "epsilon": 0.1,
        "tx_probability": 0.7,
        "jam_price": 0.5,
        "budget": 30.0,
        "model_size_bits": 1e5,
        "local_iter_coeff": 10.0,
        "global_iter_coeff": 2.0,
        "seed": 0,
    }
    data.update(overrides)
    return data


def unit_channels(
    n: int = 1,
    *,
    g_device_bs: list[float] | None = None,
    g_device_warden: list[float] | None = None,
    g_jammer_bs: float = 1.0,
    g_jammer_warden: float = 1.0,
    bandwidth: float = 1e6,
    noise: float = 1.0,
) -> ChannelSet:
    return ChannelSet(
        g_device_bs=g_device_bs or [1.0] * n,
        g_device_warden=g_device_warden or [1.0] * n,
        g_jammer_bs=g_jammer_bs,
        g_jammer_warden=g_jammer_warden,
        subchannel_bandwidth=bandwidth,
        noise_power_subchannel=noise,
    )


@pytest.fixture
def make_scenario() -> Callable[..., Scenario]:
    def _make(n_devices: int = 1, **overrides: object) -> Scenario:
        return parse_scenario(scenario_dict(n_devices, **overrides))

    return _make


@pytest.fixture(scope="session")
def fig3_scenario() -> Scenario:
    return from_preset("paper-fig3", 7)
