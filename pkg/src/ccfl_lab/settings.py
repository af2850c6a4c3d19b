from __future__ import annotations

import os
from pathlib import Path

from pydantic import Field
from pydantic import field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

_ENV_FILES = [
    str(Path(__file__).resolve().parents[2] / ".env"),
    ".env",
]


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=_ENV_FILES, env_file_encoding="utf-8", extra="ignore")

    log_level: str = Field(default="INFO", alias="CCFL_LOG_LEVEL")
    jobs: int = Field(default=0, ge=0, alias="CCFL_JOBS")
    out_dir: Path = Field(default=Path("results"), alias="CCFL_OUT_DIR")

    mc_trials: int = Field(default=1_000_000, ge=10_000, alias="CCFL_MC_TRIALS")
    mc_chunk: int = Field(default=250_000, ge=1, alias="CCFL_MC_CHUNK")

    max_outer_iters: int = Field(default=50, ge=1, alias="CCFL_MAX_OUTER_ITERS")
    objective_rel_tol: float = Field(default=1e-6, gt=0, alias="CCFL_OBJECTIVE_REL_TOL")
    golden_section_tol: float = Field(default=1e-8, gt=0, alias="CCFL_GOLDEN_SECTION_TOL")
    eta_min: float = Field(default=0.01, alias="CCFL_ETA_MIN")
    eta_max: float = Field(default=0.99, alias="CCFL_ETA_MAX")
    pj_lower: float = Field(default=1e-6, gt=0, alias="CCFL_PJ_LOWER")

    fedavg_lr: float = Field(default=0.1, gt=0, alias="CCFL_FEDAVG_LR")

    @field_validator("log_level", mode="before")
    @classmethod
    def _normalize_log_level(cls, v: str) -> str:
        if not isinstance(v, str) or not v.strip():
            return "INFO"
        return v.strip().upper()

    @model_validator(mode="after")
    def _check_eta_bounds(self) -> "Settings":
        if not (0.0 < self.eta_min < self.eta_max < 1.0):
            raise ValueError("CCFL_ETA_MIN/CCFL_ETA_MAX must satisfy 0 < min < max < 1.")
        return self

    def effective_jobs(self) -> int:
        if self.jobs > 0:
            return self.jobs
        return max(1, os.cpu_count() or 1)


settings = Settings()
