from __future__ import annotations

import hashlib
import logging
import math
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ccfl_lab.errors import ScenarioError
from ccfl_lab.rng import TOPOLOGY, spawn_streams

logger = logging.getLogger(__name__)

_MODEL_CONFIG = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


def dbm_to_watts(p: float) -> float:
    return 10.0 ** ((float(p) - 30.0) / 10.0)


class Position(BaseModel):
    model_config = _MODEL_CONFIG

    x: float
    y: float

    def distance_to(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class DeviceSpec(BaseModel):
    model_config = _MODEL_CONFIG

    position: Position
    max_power: float = Field(gt=0)
    samples: int = Field(ge=1)
    cpu_freq: float = Field(gt=0)
    cycles_per_sample: float = Field(gt=0)


class Scenario(BaseModel):
    """One experiment: topology plus every radio, FL, economic and security constant.

    Units are SI throughout (meters, watts, hertz, watts/hertz, bits, dollars).
    """

    model_config = _MODEL_CONFIG

    side: float = Field(gt=0)
    devices: list[DeviceSpec] = Field(min_length=1)
    jammer_pos: Position
    warden_pos: Position
    # None places the base station at the centre of the area.
    bs_pos: Position | None = None
    jammer_max_power: float = Field(gt=0)
    total_bandwidth: float = Field(gt=0)
    noise_psd: float = Field(gt=0)
    pathloss_ref_gain: float = Field(gt=0)
    pathloss_exponent: float = Field(gt=0)
    epsilon: float = Field(ge=0.0, le=1.0)
    tx_probability: float = Field(gt=0.0, le=1.0)
    jam_price: float = Field(ge=0)
    budget: float = Field(ge=0)
    model_size_bits: float = Field(gt=0)
    local_iter_coeff: float = Field(gt=0)
    global_iter_coeff: float = Field(gt=0)
    seed: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_inside_area(self) -> "Scenario":
        named = [("jammer_pos", self.jammer_pos), ("warden_pos", self.warden_pos)]
        if self.bs_pos is not None:
            named.append(("bs_pos", self.bs_pos))
        named += [(f"devices.{i}.position", d.position) for i, d in enumerate(self.devices)]
        for name, pos in named:
            if not (0.0 <= pos.x <= self.side and 0.0 <= pos.y <= self.side):
                raise ValueError(f"{name} ({pos.x}, {pos.y}) lies outside [0, {self.side}]^2")
        return self

    @property
    def n_devices(self) -> int:
        return len(self.devices)

    @property
    def base_station(self) -> Position:
        if self.bs_pos is not None:
            return self.bs_pos
        return Position(x=self.side / 2.0, y=self.side / 2.0)

    @property
    def jam_power_upper(self) -> float:
        """Largest jamming power allowed by both the jammer cap and the budget."""
        if self.jam_price <= 0:
            return self.jammer_max_power
        return min(self.jammer_max_power, self.budget / self.jam_price)


class ScenarioConstants(BaseModel):
    """Everything generate_scenario needs besides the device count, area and seed."""

    model_config = _MODEL_CONFIG

    n_devices: int = Field(default=50, ge=1)
    side: float = Field(default=500.0, gt=0)
    device_max_power_dbm: float = 10.0
    samples: int = Field(default=500, ge=1)
    cpu_freq: float = Field(default=2e9, gt=0)
    cycles_per_sample: float = Field(default=1e6, gt=0)
    jammer_max_power: float = Field(default=100.0, gt=0)
    total_bandwidth: float = Field(default=20e6, gt=0)
    noise_psd: float = Field(default=10.0 ** (-20.4), gt=0)
    pathloss_ref_gain: float = Field(default=1e-3, gt=0)
    pathloss_exponent: float = Field(default=3.0, gt=0)
    epsilon: float = Field(default=0.1, ge=0.0, le=1.0)
    tx_probability: float = Field(default=0.7, gt=0.0, le=1.0)
    jam_price: float = Field(default=0.5, ge=0)
    budget: float = Field(default=30.0, ge=0)
    model_size_bits: float = Field(default=1e5, gt=0)
    local_iter_coeff: float = Field(default=10.0, gt=0)
    global_iter_coeff: float = Field(default=2.0, gt=0)


PRESETS: dict[str, ScenarioConstants] = {
    "paper-fig3": ScenarioConstants(),
}


def preset_constants(name: str) -> ScenarioConstants:
    key = (name or "").strip().lower()
    if key not in PRESETS:
        known = ", ".join(sorted(PRESETS))
        raise ScenarioError(f"Unknown preset {name!r} (known: {known}).", fields=["preset"])
    return PRESETS[key]


def generate_scenario(
    n_devices: int,
    side: float,
    seed: int,
    defaults: ScenarioConstants | None = None,
) -> Scenario:
    if n_devices < 1:
        raise ValueError("n_devices must be >= 1.")
    if not (side > 0 and math.isfinite(side)):
        raise ValueError("side must be a positive finite length.")
    c = defaults or PRESETS["paper-fig3"]

    rng = spawn_streams(seed, TOPOLOGY)[TOPOLOGY]
    # Jammer and warden first: devices are then a prefix-stable sequence in n_devices.
    jammer_xy = rng.uniform(0.0, side, size=2)
    warden_xy = rng.uniform(0.0, side, size=2)
    device_xy = rng.uniform(0.0, side, size=(n_devices, 2))

    max_power = dbm_to_watts(c.device_max_power_dbm)
    devices = [
        DeviceSpec(
            position=Position(x=float(x), y=float(y)),
            max_power=max_power,
            samples=c.samples,
            cpu_freq=c.cpu_freq,
            cycles_per_sample=c.cycles_per_sample,
        )
        for x, y in device_xy
    ]
    scenario = Scenario(
        side=float(side),
        devices=devices,
        jammer_pos=Position(x=float(jammer_xy[0]), y=float(jammer_xy[1])),
        warden_pos=Position(x=float(warden_xy[0]), y=float(warden_xy[1])),
        jammer_max_power=c.jammer_max_power,
        total_bandwidth=c.total_bandwidth,
        noise_psd=c.noise_psd,
        pathloss_ref_gain=c.pathloss_ref_gain,
        pathloss_exponent=c.pathloss_exponent,
        epsilon=c.epsilon,
        tx_probability=c.tx_probability,
        jam_price=c.jam_price,
        budget=c.budget,
        model_size_bits=c.model_size_bits,
        local_iter_coeff=c.local_iter_coeff,
        global_iter_coeff=c.global_iter_coeff,
        seed=int(seed),
    )
    logger.debug("generated scenario n=%d side=%.1f seed=%d", n_devices, side, seed)
    return scenario


def from_preset(name: str, seed: int, *, n_devices: int | None = None) -> Scenario:
    c = preset_constants(name)
    return generate_scenario(c.n_devices if n_devices is None else n_devices, c.side, seed, c)


def _format_validation_error(e: ValidationError) -> tuple[str, list[str]]:
    lines: list[str] = []
    fields: list[str] = []
    for err in e.errors():
        loc = ".".join(str(p) for p in err.get("loc") or ()) or "<root>"
        fields.append(loc)
        lines.append(f"{loc}: {err.get('msg')}")
    return "; ".join(lines), fields


def parse_scenario(data: dict | str | bytes) -> Scenario:
    try:
        if isinstance(data, (str, bytes)):
            return Scenario.model_validate_json(data)
        return Scenario.model_validate(data)
    except ValidationError as e:
        message, fields = _format_validation_error(e)
        raise ScenarioError(f"Invalid scenario: {message}", fields=fields) from e


def load_scenario(path: Path | str) -> Scenario:
    p = Path(path)
    try:
        raw = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario file {p}: {e}") from e
    return parse_scenario(raw)


def save_scenario(s: Scenario, path: Path | str) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(s.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return p


def with_overrides(s: Scenario, **changes: object) -> Scenario:
    updates = {k: v for k, v in changes.items() if v is not None}
    if not updates:
        return s
    return parse_scenario({**s.model_dump(), **updates})


def scenario_digest(s: Scenario) -> str:
    return hashlib.sha256(s.model_dump_json().encode("utf-8")).hexdigest()
