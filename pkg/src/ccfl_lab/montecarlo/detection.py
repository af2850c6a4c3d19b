from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ccfl_lab.channel import ChannelSet
from ccfl_lab.covert import (
    DetectionReport,
    WardenObservationModel,
    detection_error_floor,
    detection_report,
    false_alarm,
    miss_detection,
    optimal_threshold,
    warden_model,
)
from ccfl_lab.latency import Allocation
from ccfl_lab.rng import FADING, TRAFFIC, chunk_seeds
from ccfl_lab.settings import settings

logger = logging.getLogger(__name__)

MIN_TRIALS = 10_000
ORACLE_SIGMAS = 3.0
DEFAULT_RATIOS = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)


class McReport(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    trials: int
    margin: float
    empirical_p_fa: float = Field(ge=0.0, le=1.0)
    empirical_p_md: float = Field(ge=0.0, le=1.0)
    empirical_covert: float = Field(ge=0.0, le=2.0)
    std_error: float = Field(ge=0.0)
    analytic: DetectionReport

    def agrees(self, sigmas: float = ORACLE_SIGMAS) -> bool:
        # Standard error floored at one trial so deterministic outcomes still compare.
        se = max(self.std_error, 1.0 / self.trials)
        return abs(self.empirical_covert - self.analytic.covert_prob) <= sigmas * se


class CovertCheck(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    label: str
    ratio: float
    trials: int
    analytic_p_fa: float
    analytic_p_md: float
    analytic_xi: float
    empirical_p_fa: float
    empirical_p_md: float
    empirical_xi: float
    std_error: float
    passed: bool


def _check_trials(trials: int) -> None:
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be >= {MIN_TRIALS} (got {trials}).")


def _chunk_sizes(trials: int, chunk: int) -> list[int]:
    n_chunks = max(1, math.ceil(trials / chunk))
    sizes = [chunk] * (n_chunks - 1)
    sizes.append(trials - chunk * (n_chunks - 1))
    return sizes


def _analytic_at(model: WardenObservationModel, t: float) -> DetectionReport:
    """Closed-form error rates at an arbitrary margin t (not necessarily optimal)."""
    if model.mu_j <= 0:
        p_fa = 0.0 if t >= 0 else 1.0
        p_md = 1.0 - math.exp(-t / model.mu_s) if model.mu_s > 0 else 1.0
    elif model.mu_s <= 0:
        p_fa = false_alarm(t, model)
        p_md = 1.0 - p_fa
    else:
        p_fa = false_alarm(t, model)
        p_md = miss_detection(t, model)
    return DetectionReport(
        p_fa=p_fa,
        p_md=p_md,
        covert_prob=min(1.0, p_fa + p_md),
        threshold=model.noise + t,
        margin=t,
    )


def _radiometer_chunk(
    model: WardenObservationModel, t: float, n: int, seq: np.random.SeedSequence
) -> tuple[int, int]:
    rng = np.random.default_rng(seq)
    tau = model.noise + t
    # H0: noise + jamming only. H1: noise + jamming + device signal.
    h0 = model.noise + rng.exponential(model.mu_j, n)
    h1 = model.noise + rng.exponential(model.mu_j, n) + rng.exponential(model.mu_s, n)
    return int(np.count_nonzero(h0 > tau)), int(np.count_nonzero(h1 <= tau))


def simulate_detection(
    model: WardenObservationModel,
    threshold: float,
    trials: int,
    seed: int,
    *,
    purpose: str = FADING,
    chunk: int | None = None,
    jobs: int = 1,
) -> McReport:
    """Empirical radiometer error rates at margin ``threshold`` above the noise floor.

    Trials are split into fixed-size chunks with per-chunk substreams, so the
    result does not depend on ``jobs``.
    """
    _check_trials(trials)
    if threshold < 0:
        raise ValueError("threshold margin must be >= 0.")
    sizes = _chunk_sizes(trials, chunk or settings.mc_chunk)
    seqs = chunk_seeds(seed, purpose, len(sizes))
    logger.debug("radiometer MC: %d trials in %d chunks (jobs=%d)", trials, len(sizes), jobs)

    if jobs > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            counts = list(pool.map(lambda a: _radiometer_chunk(model, threshold, *a), zip(sizes, seqs)))
    else:
        counts = [_radiometer_chunk(model, threshold, n, q) for n, q in zip(sizes, seqs)]

    fa = sum(c[0] for c in counts)
    md = sum(c[1] for c in counts)
    p_fa = fa / trials
    p_md = md / trials
    se = math.sqrt(p_fa * (1.0 - p_fa) / trials + p_md * (1.0 - p_md) / trials)
    return McReport(
        trials=trials,
        margin=threshold,
        empirical_p_fa=p_fa,
        empirical_p_md=p_md,
        empirical_covert=p_fa + p_md,
        std_error=se,
        analytic=_analytic_at(model, threshold),
    )


def simulate_traffic_detection(
    model: WardenObservationModel,
    alpha: float,
    trials: int,
    seed: int,
) -> float:
    """Warden's prior-weighted total error when the device transmits with probability alpha.

    This is alpha * p_md + (1 - alpha) * p_fa at the warden-optimal margin. It is a
    companion to the prior-free covert probability, not a replacement for it.
    """
    _check_trials(trials)
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must be in (0, 1] (got {alpha}).")
    t = optimal_threshold(model)
    tau = model.noise + t
    errors = 0
    sizes = _chunk_sizes(trials, settings.mc_chunk)
    for n, seq in zip(sizes, chunk_seeds(seed, TRAFFIC, len(sizes)), strict=True):
        rng = np.random.default_rng(seq)
        transmits = rng.random(n) < alpha
        observed = model.noise + rng.exponential(model.mu_j, n)
        observed = observed + np.where(transmits, rng.exponential(model.mu_s, n), 0.0)
        declared = observed > tau
        errors += int(np.count_nonzero(declared != transmits))
    return errors / trials


def _check_row(label: str, ratio: float, report: McReport) -> CovertCheck:
    return CovertCheck(
        label=label,
        ratio=ratio,
        trials=report.trials,
        analytic_p_fa=report.analytic.p_fa,
        analytic_p_md=report.analytic.p_md,
        analytic_xi=report.analytic.covert_prob,
        empirical_p_fa=report.empirical_p_fa,
        empirical_p_md=report.empirical_p_md,
        empirical_xi=report.empirical_covert,
        std_error=report.std_error,
        passed=report.agrees(),
    )


def validate_covert_grid(
    ratios: tuple[float, ...] | list[float] = DEFAULT_RATIOS,
    trials: int = 1_000_000,
    seed: int = 0,
    *,
    jobs: int = 1,
) -> list[CovertCheck]:
    rows: list[CovertCheck] = []
    for r in ratios:
        model = WardenObservationModel(mu_j=1.0, mu_s=float(r), noise=1.0)
        t = optimal_threshold(model)
        report = simulate_detection(model, t, trials, seed, purpose=f"{FADING}:r={r!r}", jobs=jobs)
        row = _check_row(f"r={r:g}", float(r), report)
        if abs(row.analytic_xi - detection_error_floor(float(r))) > 1e-9:
            raise RuntimeError(f"closed forms disagree at r={r}.")
        rows.append(row)
        logger.info("r=%g analytic=%.6f empirical=%.6f passed=%s", r, row.analytic_xi, row.empirical_xi, row.passed)
    return rows


def validate_allocation(
    alloc: Allocation,
    ch: ChannelSet,
    trials: int,
    seed: int,
    *,
    jobs: int = 1,
) -> list[CovertCheck]:
    """Per-device radiometer simulation at the warden-optimal threshold of an allocation."""
    rows: list[CovertCheck] = []
    for i in range(ch.n_devices):
        model = warden_model(i, alloc, ch)
        if model.mu_s <= 0 or model.mu_j <= 0:
            t = 0.0
        else:
            t = optimal_threshold(model)
        report = simulate_detection(model, t, trials, seed, purpose=f"{FADING}:device={i}", jobs=jobs)
        report = report.model_copy(update={"analytic": detection_report(model)})
        ratio = model.mu_s / model.mu_j if model.mu_j > 0 else math.inf
        rows.append(_check_row(f"device={i}", ratio, report))
    return rows
