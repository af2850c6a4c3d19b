from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from itertools import repeat
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ccfl_lab.optimizer import OptimizerSettings, optimize
from ccfl_lab.scenario import ScenarioConstants, generate_scenario

logger = logging.getLogger(__name__)

Axis = Literal["n_devices", "epsilon", "budget"]


class SweepSpec(BaseModel):
    """A one-axis parameter sweep over several topology seeds."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    axis: Axis
    values: list[float] = Field(min_length=1)
    seeds: list[int] = Field(min_length=1)
    base: ScenarioConstants = Field(default_factory=ScenarioConstants)

    @field_validator("values")
    @classmethod
    def _strictly_increasing(cls, v: list[float]) -> list[float]:
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("values must be strictly increasing.")
        return v

    @field_validator("seeds")
    @classmethod
    def _non_negative(cls, v: list[int]) -> list[int]:
        if any(s < 0 for s in v):
            raise ValueError("seeds must be >= 0.")
        return v

    @model_validator(mode="after")
    def _values_fit_axis(self) -> "SweepSpec":
        if self.axis == "n_devices" and any(x != int(x) or x < 1 for x in self.values):
            raise ValueError("n_devices values must be positive integers.")
        for v in self.values:
            try:
                self.constants_for(v)
            except ValidationError as e:
                msg = e.errors()[0]["msg"]
                raise ValueError(f"{self.axis}={v:g} is not a valid scenario constant: {msg}") from e
        return self

    def constants_for(self, value: float) -> ScenarioConstants:
        update: dict[str, float | int] = {self.axis: int(value) if self.axis == "n_devices" else value}
        return ScenarioConstants.model_validate({**self.base.model_dump(), **update})


class SweepRow(BaseModel):
    axis: str
    value: float
    seed: int
    feasible: bool
    latency: float | None = None
    covert_prob: float | None = None
    p_j: float | None = None
    eta: float | None = None
    outer_iterations: int | None = None
    error: str | None = None


class SweepSummary(BaseModel):
    axis: str
    value: float
    points: int
    feasible_points: int
    median_latency: float | None = None
    median_covert_prob: float | None = None
    median_p_j: float | None = None
    median_eta: float | None = None


def run_point(spec: SweepSpec, value: float, seed: int, cfg: OptimizerSettings) -> SweepRow:
    try:
        c = spec.constants_for(value)
        s = generate_scenario(c.n_devices, c.side, seed, c)
        result = optimize(s, cfg)
    except ValueError as e:
        # Infeasible and invalid points both become flagged rows.
        logger.warning("%s=%g seed=%d infeasible: %s", spec.axis, value, seed, e)
        return SweepRow(axis=spec.axis, value=value, seed=seed, feasible=False, error=str(e))
    logger.info("%s=%g seed=%d latency=%.6g s", spec.axis, value, seed, result.latency.total)
    return SweepRow(
        axis=spec.axis,
        value=value,
        seed=seed,
        feasible=True,
        latency=result.latency.total,
        covert_prob=result.network_covert_prob,
        p_j=result.allocation.jam_power,
        eta=result.allocation.local_accuracy,
        outer_iterations=result.outer_iterations,
    )


def run_sweep(spec: SweepSpec, cfg: OptimizerSettings, *, jobs: int = 1) -> list[SweepRow]:
    """Optimise every (value, seed) point; rows come back sorted by (value, seed)."""
    points = [(v, s) for v in spec.values for s in spec.seeds]
    if jobs > 1 and len(points) > 1:
        values = [v for v, _ in points]
        seeds = [s for _, s in points]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_point, repeat(spec), values, seeds, repeat(cfg)))
    else:
        rows = [run_point(spec, v, s, cfg) for v, s in points]
    return sorted(rows, key=lambda r: (r.value, r.seed))


def _median(xs: list[float | None]) -> float | None:
    vals = [x for x in xs if x is not None]
    return float(np.median(vals)) if vals else None


def summarize(rows: list[SweepRow]) -> list[SweepSummary]:
    by_value: dict[float, list[SweepRow]] = {}
    for r in rows:
        by_value.setdefault(r.value, []).append(r)
    out: list[SweepSummary] = []
    for value in sorted(by_value):
        group = by_value[value]
        ok = [r for r in group if r.feasible]
        out.append(
            SweepSummary(
                axis=group[0].axis,
                value=value,
                points=len(group),
                feasible_points=len(ok),
                median_latency=_median([r.latency for r in ok]),
                median_covert_prob=_median([r.covert_prob for r in ok]),
                median_p_j=_median([r.p_j for r in ok]),
                median_eta=_median([r.eta for r in ok]),
            )
        )
    return out
