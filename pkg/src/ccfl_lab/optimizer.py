"""Joint latency minimisation over jamming power, device powers and local accuracy.

Device powers are an explicit function of the jamming power (the covert cap,
clipped at each device's maximum power), so the power block is a 1-D search
over p_j. The alternating loop then trades that block against the 1-D search
over the shared local accuracy eta.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict

from ccfl_lab.channel import ChannelSet, build_channels
from ccfl_lab.covert import (
    CC_CONSTRAINT,
    DetectionReport,
    covert_power_caps,
    device_reports,
    max_covert_ratio,
    network_covert_probability,
)
from ccfl_lab.errors import InfeasibleError
from ccfl_lab.latency import (
    Allocation,
    LatencyBreakdown,
    check_allocation,
    compute_times,
    fl_latency,
    global_iterations,
    latency_total,
    local_iterations,
    upload_times,
)
from ccfl_lab.scenario import Scenario
from ccfl_lab.search import minimize_unimodal
from ccfl_lab.settings import settings

logger = logging.getLogger(__name__)

# Slack on the post-hoc covertness check; max_covert_ratio is exact to 1e-9 relative.
_COVERT_CHECK_SLACK = 1e-7
_START_ETA = 0.5


@dataclass(frozen=True, slots=True)
class OptimizerSettings:
    max_outer_iters: int = 50
    objective_rel_tol: float = 1e-6
    golden_section_tol: float = 1e-8
    eta_bounds: tuple[float, float] = (0.01, 0.99)
    pj_lower: float = 1e-6
    prescan_points: int = 32

    def __post_init__(self) -> None:
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1.")
        if not (self.objective_rel_tol > 0 and self.golden_section_tol > 0):
            raise ValueError("tolerances must be > 0.")
        lo, hi = self.eta_bounds
        if not (0.0 < lo < hi < 1.0):
            raise ValueError(f"eta_bounds must lie strictly inside (0, 1) (got {self.eta_bounds}).")
        if not self.pj_lower > 0:
            raise ValueError("pj_lower must be > 0.")
        if self.prescan_points < 2:
            raise ValueError("prescan_points must be >= 2.")

    @classmethod
    def from_settings(cls) -> "OptimizerSettings":
        return cls(
            max_outer_iters=settings.max_outer_iters,
            objective_rel_tol=settings.objective_rel_tol,
            golden_section_tol=settings.golden_section_tol,
            eta_bounds=(settings.eta_min, settings.eta_max),
            pj_lower=settings.pj_lower,
        )


class OptimizationResult(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    allocation: Allocation
    latency: LatencyBreakdown
    covert: list[DetectionReport]
    network_covert_prob: float
    outer_iterations: int
    converged: bool
    objective_trace: list[float]


def jam_power_interval(s: Scenario, cfg: OptimizerSettings) -> tuple[float, float]:
    hi = s.jam_power_upper
    if hi < cfg.pj_lower:
        raise InfeasibleError(
            f"budget ${s.budget:.6g} at ${s.jam_price:.6g}/W buys {hi:.6g} W, below the "
            f"{cfg.pj_lower:.3g} W floor.",
            constraint="budget constraint",
        )
    return cfg.pj_lower, hi


def _implied_powers(p_j: float, epsilon: float, s: Scenario, ch: ChannelSet) -> np.ndarray:
    max_powers = np.array([d.max_power for d in s.devices], dtype=float)
    return np.minimum(max_powers, covert_power_caps(p_j, epsilon, ch))


def implied_device_powers(p_j: float, epsilon: float, s: Scenario, ch: ChannelSet) -> list[float]:
    """Latency-optimal device powers for a given p_j: the covert cap clipped at max power."""
    if not p_j > 0:
        raise ValueError(f"p_j must be > 0 (got {p_j}).")
    return [float(p) for p in _implied_powers(p_j, epsilon, s, ch)]


def power_subproblem(
    eta: float,
    s: Scenario,
    ch: ChannelSet,
    cfg: OptimizerSettings,
) -> tuple[float, list[float]]:
    lo, hi = jam_power_interval(s, cfg)
    t_cmp = compute_times(s)

    def objective(p_j: float) -> float:
        return latency_total(_implied_powers(p_j, s.epsilon, s, ch), p_j, eta, s, ch, t_cmp)

    best = minimize_unimodal(
        objective, lo, hi, cfg.golden_section_tol, points=cfg.prescan_points, log=True
    )
    p_j = min(max(best.x, lo), hi)
    return p_j, implied_device_powers(p_j, s.epsilon, s, ch)


def accuracy_subproblem(
    alloc: Allocation,
    s: Scenario,
    ch: ChannelSet,
    cfg: OptimizerSettings,
) -> float:
    """Best shared local accuracy for the powers fixed in ``alloc`` (its eta is ignored)."""
    powers = alloc.powers_array()
    if np.any(powers <= 0):
        raise InfeasibleError("every device needs positive power to upload.", constraint="upload")
    t_cmp = compute_times(s)

    def objective(eta: float) -> float:
        return latency_total(powers, alloc.jam_power, eta, s, ch, t_cmp)

    lo, hi = cfg.eta_bounds
    best = minimize_unimodal(objective, lo, hi, cfg.golden_section_tol, points=cfg.prescan_points)
    return best.x


def verify_feasible(alloc: Allocation, s: Scenario, ch: ChannelSet) -> float:
    """Re-check all four constraints independently; returns the network covert probability."""
    check_allocation(alloc, s)
    xi = network_covert_probability(alloc, ch)
    if xi < 1.0 - s.epsilon - _COVERT_CHECK_SLACK:
        raise InfeasibleError(
            f"network covert probability {xi:.9f} below requirement {1.0 - s.epsilon:.9f}.",
            constraint=CC_CONSTRAINT,
        )
    return xi


def _finish(
    alloc: Allocation,
    s: Scenario,
    ch: ChannelSet,
    *,
    outer_iterations: int,
    converged: bool,
    trace: list[float],
) -> OptimizationResult:
    xi = verify_feasible(alloc, s, ch)
    return OptimizationResult(
        allocation=alloc,
        latency=fl_latency(alloc, s, ch),
        covert=device_reports(alloc, ch),
        network_covert_prob=xi,
        outer_iterations=outer_iterations,
        converged=converged,
        objective_trace=trace,
    )


def optimize(
    s: Scenario,
    cfg: OptimizerSettings | None = None,
    ch: ChannelSet | None = None,
) -> OptimizationResult:
    cfg = cfg or OptimizerSettings.from_settings()
    ch = ch or build_channels(s)
    max_covert_ratio(s.epsilon)
    lo, hi = jam_power_interval(s, cfg)
    t_cmp = compute_times(s)

    eta = _START_ETA
    p_j = 0.5 * (lo + hi)
    powers = implied_device_powers(p_j, s.epsilon, s, ch)
    objective = latency_total(np.asarray(powers), p_j, eta, s, ch, t_cmp)
    trace = [objective]
    converged = False
    k = 0

    for k in range(1, cfg.max_outer_iters + 1):
        prev = objective

        cand_pj, cand_powers = power_subproblem(eta, s, ch, cfg)
        value = latency_total(np.asarray(cand_powers), cand_pj, eta, s, ch, t_cmp)
        if value <= objective:
            p_j, powers, objective = cand_pj, cand_powers, value

        fixed = Allocation(device_powers=powers, jam_power=p_j, local_accuracy=eta)
        cand_eta = accuracy_subproblem(fixed, s, ch, cfg)
        value = latency_total(np.asarray(powers), p_j, cand_eta, s, ch, t_cmp)
        if value <= objective:
            eta, objective = cand_eta, value

        trace.append(objective)
        logger.debug("outer %d: latency=%.9g s p_j=%.6g W eta=%.6f", k, objective, p_j, eta)
        if prev - objective <= cfg.objective_rel_tol * abs(prev):
            converged = True
            break

    alloc = Allocation(device_powers=powers, jam_power=p_j, local_accuracy=eta)
    result = _finish(alloc, s, ch, outer_iterations=k, converged=converged, trace=trace)
    logger.info(
        "optimized N=%d eps=%g budget=%g: latency=%.6g s p_j=%.6g W eta=%.4f xi=%.6f (%d outer iters)",
        s.n_devices,
        s.epsilon,
        s.budget,
        result.latency.total,
        p_j,
        eta,
        result.network_covert_prob,
        k,
    )
    return result


def brute_force(
    s: Scenario,
    grid_pj: int,
    grid_eta: int,
    cfg: OptimizerSettings | None = None,
    ch: ChannelSet | None = None,
) -> OptimizationResult:
    """Exhaustive (p_j, eta) grid with implied device powers; p_j is log-spaced."""
    if grid_pj < 1 or grid_eta < 1:
        raise ValueError("grid sizes must be >= 1.")
    cfg = cfg or OptimizerSettings.from_settings()
    ch = ch or build_channels(s)
    max_covert_ratio(s.epsilon)
    lo, hi = jam_power_interval(s, cfg)
    t_cmp = compute_times(s)

    pj_grid = np.geomspace(lo, hi, grid_pj) if grid_pj > 1 else np.array([lo])
    eta_lo, eta_hi = cfg.eta_bounds
    eta_grid = np.linspace(eta_lo, eta_hi, grid_eta) if grid_eta > 1 else np.array([eta_lo])
    i_loc = np.array([local_iterations(float(e), s.local_iter_coeff) for e in eta_grid])
    i_glob = np.array([global_iterations(float(e), s.global_iter_coeff) for e in eta_grid])

    best_value = math.inf
    best_pj, best_eta = float(pj_grid[0]), float(eta_grid[0])
    for p_j in pj_grid:
        t_up = upload_times(_implied_powers(float(p_j), s.epsilon, s, ch), float(p_j), s, ch)
        totals = i_glob * np.max(i_loc[:, None] * t_cmp[None, :] + t_up[None, :], axis=1)
        j = int(np.argmin(totals))
        if totals[j] < best_value:
            best_value = float(totals[j])
            best_pj, best_eta = float(p_j), float(eta_grid[j])

    alloc = Allocation(
        device_powers=implied_device_powers(best_pj, s.epsilon, s, ch),
        jam_power=best_pj,
        local_accuracy=best_eta,
    )
    return _finish(alloc, s, ch, outer_iterations=0, converged=True, trace=[best_value])
