from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ccfl_lab.channel import ChannelSet, uplink_rate, uplink_rates
from ccfl_lab.errors import InfeasibleError
from ccfl_lab.scenario import Scenario

# Relative slack when re-checking box constraints on optimizer output.
_BOX_RTOL = 1e-12


class Allocation(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    device_powers: list[float] = Field(min_length=1)
    jam_power: float = Field(ge=0)
    local_accuracy: float = Field(gt=0.0, lt=1.0)

    def powers_array(self) -> np.ndarray:
        return np.asarray(self.device_powers, dtype=float)

    def scaled(self, c: float) -> "Allocation":
        return Allocation(
            device_powers=[p * c for p in self.device_powers],
            jam_power=self.jam_power * c,
            local_accuracy=self.local_accuracy,
        )


class LatencyBreakdown(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    local_iters: float
    global_iters: float
    per_device_compute: list[float]
    per_device_upload: list[float]
    per_device_round: list[float]
    total: float

    @property
    def bottleneck(self) -> int:
        return int(np.argmax(self.per_device_round))


def _check_eta(eta: float) -> None:
    if not (0.0 < eta < 1.0):
        raise ValueError(f"local accuracy eta must be in (0, 1) (got {eta}).")


def local_iterations(eta: float, nu: float) -> float:
    _check_eta(eta)
    return nu * math.log2(1.0 / eta)


def global_iterations(eta: float, theta: float) -> float:
    _check_eta(eta)
    return theta / (1.0 - eta)


def compute_time(i: int, s: Scenario) -> float:
    """Seconds for one local iteration on device ``i``."""
    d = s.devices[i]
    if d.samples < 1:
        raise ValueError("device must hold at least one sample.")
    return d.cycles_per_sample * d.samples / d.cpu_freq


def compute_times(s: Scenario) -> np.ndarray:
    return np.array([compute_time(i, s) for i in range(s.n_devices)], dtype=float)


def upload_time(i: int, alloc: Allocation, s: Scenario, ch: ChannelSet) -> float:
    p_i = alloc.device_powers[i]
    if p_i <= 0:
        raise InfeasibleError(f"device {i} has zero transmit power and can never upload.", constraint="upload")
    return s.model_size_bits / uplink_rate(i, p_i, alloc.jam_power, ch)


def upload_times(powers: np.ndarray, p_j: float, s: Scenario, ch: ChannelSet) -> np.ndarray:
    """Vectorised upload_time; zero-power devices get +inf."""
    rates = uplink_rates(powers, p_j, ch)
    with np.errstate(divide="ignore"):
        return np.where(rates > 0, s.model_size_bits / np.where(rates > 0, rates, 1.0), np.inf)


def latency_total(
    powers: np.ndarray,
    p_j: float,
    eta: float,
    s: Scenario,
    ch: ChannelSet,
    t_compute: np.ndarray | None = None,
) -> float:
    """fl_latency(...).total without building the breakdown; +inf if any device is silent."""
    t_cmp = compute_times(s) if t_compute is None else t_compute
    rounds = local_iterations(eta, s.local_iter_coeff) * t_cmp + upload_times(powers, p_j, s, ch)
    return global_iterations(eta, s.global_iter_coeff) * float(np.max(rounds))


def fl_latency(alloc: Allocation, s: Scenario, ch: ChannelSet) -> LatencyBreakdown:
    eta = alloc.local_accuracy
    i_loc = local_iterations(eta, s.local_iter_coeff)
    i_glob = global_iterations(eta, s.global_iter_coeff)
    t_cmp = [compute_time(i, s) for i in range(s.n_devices)]
    t_up = [upload_time(i, alloc, s, ch) for i in range(s.n_devices)]
    rounds = [i_loc * c + u for c, u in zip(t_cmp, t_up, strict=True)]
    return LatencyBreakdown(
        local_iters=i_loc,
        global_iters=i_glob,
        per_device_compute=t_cmp,
        per_device_upload=t_up,
        per_device_round=rounds,
        total=i_glob * max(rounds),
    )


def check_allocation(alloc: Allocation, s: Scenario) -> None:
    """Raise InfeasibleError naming the first violated power or budget constraint."""
    if len(alloc.device_powers) != s.n_devices:
        raise ValueError(
            f"allocation has {len(alloc.device_powers)} device powers, scenario has {s.n_devices} devices."
        )
    for i, (p, d) in enumerate(zip(alloc.device_powers, s.devices, strict=True)):
        if p < 0 or p > d.max_power * (1.0 + _BOX_RTOL):
            raise InfeasibleError(
                f"device {i} power {p} W outside [0, {d.max_power}] W.", constraint="device power"
            )
    if alloc.jam_power > s.jammer_max_power * (1.0 + _BOX_RTOL):
        raise InfeasibleError(
            f"jamming power {alloc.jam_power} W exceeds {s.jammer_max_power} W.", constraint="jammer power"
        )
    cost = s.jam_price * alloc.jam_power
    if cost > s.budget * (1.0 + _BOX_RTOL):
        raise InfeasibleError(f"jamming cost ${cost:.6g} exceeds budget ${s.budget:.6g}.", constraint="budget constraint")
