from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ccfl_lab.scenario import Position, Scenario


class ChannelSet(BaseModel):
    """Average (path-loss only) gains of every link plus the OFDMA subchannel constants."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    g_device_bs: list[float] = Field(min_length=1)
    g_device_warden: list[float] = Field(min_length=1)
    g_jammer_bs: float = Field(gt=0)
    g_jammer_warden: float = Field(gt=0)
    subchannel_bandwidth: float = Field(gt=0)
    noise_power_subchannel: float = Field(gt=0)

    @property
    def n_devices(self) -> int:
        return len(self.g_device_bs)

    def device_bs_array(self) -> np.ndarray:
        return np.asarray(self.g_device_bs, dtype=float)

    def device_warden_array(self) -> np.ndarray:
        return np.asarray(self.g_device_warden, dtype=float)


def pathloss_gain(d: float, ref_gain: float, exponent: float) -> float:
    if not d > 0:
        raise ValueError(f"distance must be > 0 (got {d}).")
    return ref_gain * d ** (-exponent)


def _gain(a: Position, b: Position, s: Scenario, label: str) -> float:
    d = a.distance_to(b)
    if d <= 0:
        raise ValueError(f"Coincident positions on link {label}: path loss is singular at d=0.")
    return pathloss_gain(d, s.pathloss_ref_gain, s.pathloss_exponent)


def build_channels(s: Scenario) -> ChannelSet:
    bs = s.base_station
    n = s.n_devices
    g_db = [_gain(d.position, bs, s, f"device {i} -> BS") for i, d in enumerate(s.devices)]
    g_dw = [_gain(d.position, s.warden_pos, s, f"device {i} -> warden") for i, d in enumerate(s.devices)]
    bandwidth = s.total_bandwidth / n
    return ChannelSet(
        g_device_bs=g_db,
        g_device_warden=g_dw,
        g_jammer_bs=_gain(s.jammer_pos, bs, s, "jammer -> BS"),
        g_jammer_warden=_gain(s.jammer_pos, s.warden_pos, s, "jammer -> warden"),
        subchannel_bandwidth=bandwidth,
        noise_power_subchannel=s.noise_psd * bandwidth,
    )


def jamming_per_subchannel(p_j: float, ch: ChannelSet) -> float:
    # Barrage jamming spreads p_j evenly over all N subchannels.
    return p_j / ch.n_devices


def _check_powers(p_i: float, p_j: float) -> None:
    if p_i < 0 or p_j < 0:
        raise ValueError(f"powers must be >= 0 (p_i={p_i}, p_j={p_j}).")


def sinr_at_bs(i: int, p_i: float, p_j: float, ch: ChannelSet) -> float:
    _check_powers(p_i, p_j)
    interference = jamming_per_subchannel(p_j, ch) * ch.g_jammer_bs + ch.noise_power_subchannel
    return p_i * ch.g_device_bs[i] / interference


def uplink_rate(i: int, p_i: float, p_j: float, ch: ChannelSet) -> float:
    return ch.subchannel_bandwidth * math.log2(1.0 + sinr_at_bs(i, p_i, p_j, ch))


def uplink_rates(powers: np.ndarray, p_j: float, ch: ChannelSet) -> np.ndarray:
    """Vectorised uplink_rate over all devices."""
    p = np.asarray(powers, dtype=float)
    if np.any(p < 0) or p_j < 0:
        raise ValueError("powers must be >= 0.")
    interference = jamming_per_subchannel(p_j, ch) * ch.g_jammer_bs + ch.noise_power_subchannel
    sinr = p * ch.device_bs_array() / interference
    return ch.subchannel_bandwidth * np.log2(1.0 + sinr)
