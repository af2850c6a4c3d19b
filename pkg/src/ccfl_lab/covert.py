"""Warden-side hypothesis testing under barrage jamming.

The warden runs a radiometer on one Rayleigh-faded block of a device's
subchannel. Received jamming and device powers are independent exponentials
with means ``mu_j`` and ``mu_s``; the warden declares "transmitting" when the
observed power exceeds ``noise + t``. Everything here is closed form.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import bisect

from ccfl_lab.channel import ChannelSet, jamming_per_subchannel
from ccfl_lab.errors import InfeasibleError
from ccfl_lab.latency import Allocation

logger = logging.getLogger(__name__)

CC_CONSTRAINT = "CC constraint"

_EQUAL_MEANS_RTOL = 1e-6
_RATIO_RTOL = 1e-9


class WardenObservationModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    mu_j: float = Field(ge=0)
    mu_s: float = Field(ge=0)
    noise: float = Field(gt=0)

    @property
    def ratio(self) -> float:
        return self.mu_s / self.mu_j


class DetectionReport(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    p_fa: float = Field(ge=0.0, le=1.0)
    p_md: float = Field(ge=0.0, le=1.0)
    covert_prob: float = Field(ge=0.0, le=1.0)
    threshold: float = Field(ge=0.0)
    margin: float = Field(ge=0.0)


def hypo_exponential_cdf(x, mu1: float, mu2: float):
    """CDF of Exp(mean mu1) + Exp(mean mu2); accepts scalars or arrays for ``x``."""
    if not (mu1 > 0 and mu2 > 0):
        raise ValueError(f"means must be > 0 (mu1={mu1}, mu2={mu2}).")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be >= 0.")
    if abs(mu1 - mu2) <= _EQUAL_MEANS_RTOL * max(mu1, mu2):
        mu = 0.5 * (mu1 + mu2)
        out = 1.0 - (1.0 + x / mu) * np.exp(-x / mu)
    else:
        out = 1.0 - (mu1 * np.exp(-x / mu1) - mu2 * np.exp(-x / mu2)) / (mu1 - mu2)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def false_alarm(t, model: WardenObservationModel):
    if model.mu_j <= 0:
        raise ValueError("false_alarm needs mu_j > 0 (without jamming H0 is degenerate).")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("threshold margin t must be >= 0.")
    out = np.exp(-t / model.mu_j)
    return float(out) if out.ndim == 0 else out


def miss_detection(t, model: WardenObservationModel):
    return hypo_exponential_cdf(t, model.mu_s, model.mu_j)


def optimal_threshold(model: WardenObservationModel) -> float:
    """Margin t* minimising p_fa(t) + p_md(t)."""
    ms, mj = model.mu_s, model.mu_j
    if not (ms > 0 and mj > 0):
        raise ValueError(f"means must be > 0 (mu_s={ms}, mu_j={mj}).")
    if abs(ms - mj) <= _EQUAL_MEANS_RTOL * max(ms, mj):
        return 0.5 * (ms + mj)
    return mj * ms * math.log(ms / mj) / (ms - mj)


def _log_ratio_slope(r: float) -> float:
    # ln(r) / (r - 1), continuous through r = 1.
    d = r - 1.0
    if abs(d) < 1e-8:
        return 1.0 - d / 2.0 + d * d / 3.0
    return math.log1p(d) / d


def detection_error_floor(r: float) -> float:
    """Warden's minimum total error xi*(r) for signal-to-jamming ratio r = mu_s / mu_j.

    At t* the false alarm is r^(-r/(r-1)) and the miss detection collapses so that the
    sum simplifies to 1 - r^(-1/(r-1)); r = 1 gives 1 - 1/e.
    """
    if not r > 0:
        raise ValueError(f"ratio r must be > 0 (got {r}).")
    if math.isinf(r):
        return 0.0
    return -math.expm1(-_log_ratio_slope(r))


def max_covert_ratio(epsilon: float) -> float:
    """Largest r with xi*(r) >= 1 - epsilon; +inf when epsilon = 1."""
    if not (0.0 <= epsilon <= 1.0):
        raise ValueError(f"epsilon must be in [0, 1] (got {epsilon}).")
    if epsilon == 0.0:
        raise InfeasibleError("epsilon = 0 leaves only silence covert.", constraint=CC_CONSTRAINT)
    if epsilon == 1.0:
        return math.inf

    target = 1.0 - epsilon

    def excess(r: float) -> float:
        return detection_error_floor(r) - target

    lo, hi = 1.0, 1.0
    while excess(lo) < 0:
        lo /= 2.0
    while excess(hi) > 0:
        hi *= 2.0
    if lo == hi:
        return lo
    if excess(lo) == 0:
        return lo
    if excess(hi) == 0:
        return hi
    r_max = bisect(excess, lo, hi, xtol=1e-300, rtol=_RATIO_RTOL, maxiter=500)
    logger.debug("max_covert_ratio(epsilon=%g) = %.12g", epsilon, r_max)
    return float(r_max)


def covert_power_cap(i: int, p_j: float, epsilon: float, ch: ChannelSet) -> float:
    if p_j < 0:
        raise ValueError(f"p_j must be >= 0 (got {p_j}).")
    r_max = max_covert_ratio(epsilon)
    if p_j == 0:
        return 0.0 if math.isfinite(r_max) else math.inf
    return r_max * jamming_per_subchannel(p_j, ch) * ch.g_jammer_warden / ch.g_device_warden[i]


def covert_power_caps(p_j: float, epsilon: float, ch: ChannelSet) -> np.ndarray:
    """covert_power_cap for every device at once."""
    r_max = max_covert_ratio(epsilon)
    mu_j = jamming_per_subchannel(p_j, ch) * ch.g_jammer_warden
    if not math.isfinite(r_max):
        return np.full(ch.n_devices, math.inf)
    return r_max * mu_j / ch.device_warden_array()


def warden_model(i: int, alloc: Allocation, ch: ChannelSet) -> WardenObservationModel:
    return WardenObservationModel(
        mu_j=jamming_per_subchannel(alloc.jam_power, ch) * ch.g_jammer_warden,
        mu_s=alloc.device_powers[i] * ch.g_device_warden[i],
        noise=ch.noise_power_subchannel,
    )


def detection_report(model: WardenObservationModel) -> DetectionReport:
    if model.mu_s <= 0:
        # Identical hypotheses: any threshold errs with total probability one.
        return DetectionReport(p_fa=1.0, p_md=0.0, covert_prob=1.0, threshold=model.noise, margin=0.0)
    if model.mu_j <= 0:
        return DetectionReport(p_fa=0.0, p_md=0.0, covert_prob=0.0, threshold=model.noise, margin=0.0)
    t = optimal_threshold(model)
    p_fa = false_alarm(t, model)
    p_md = miss_detection(t, model)
    return DetectionReport(
        p_fa=p_fa,
        p_md=p_md,
        covert_prob=min(1.0, p_fa + p_md),
        threshold=model.noise + t,
        margin=t,
    )


def device_covert_probability(i: int, alloc: Allocation, ch: ChannelSet) -> float:
    p_i = alloc.device_powers[i]
    if p_i <= 0:
        return 1.0
    if alloc.jam_power <= 0:
        return 0.0
    return detection_error_floor(warden_model(i, alloc, ch).ratio)


def device_reports(alloc: Allocation, ch: ChannelSet) -> list[DetectionReport]:
    return [detection_report(warden_model(i, alloc, ch)) for i in range(ch.n_devices)]


def network_covert_probability(alloc: Allocation, ch: ChannelSet) -> float:
    return min(device_covert_probability(i, alloc, ch) for i in range(ch.n_devices))
