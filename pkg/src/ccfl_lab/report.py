from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import TypeVar

from pydantic import BaseModel

from ccfl_lab import __version__

M = TypeVar("M", bound=BaseModel)


class RunMetadata(BaseModel):
    tool: str = "ccfl-lab"
    version: str = __version__
    command: str
    seed: int | None = None
    seeds: list[int] | None = None
    scenario_digest: str | None = None
    scenario: dict | None = None
    sweep: dict | None = None
    optimizer: dict | None = None
    extra: dict | None = None


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        # repr is the shortest string that parses back to the same double.
        return repr(value)
    return str(value)


def write_rows(path: Path, rows: list[BaseModel], model: type[BaseModel] | None = None) -> Path:
    """Write pydantic rows as a one-header CSV table."""
    path.parent.mkdir(parents=True, exist_ok=True)
    cls = model or (type(rows[0]) if rows else None)
    if cls is None:
        raise ValueError("Cannot infer CSV columns from an empty row list; pass model=.")
    fields = list(cls.model_fields)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_cell(getattr(row, name)) for name in fields])
    return path


def read_rows(path: Path, model: type[M]) -> list[M]:
    with path.open("r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        return [model.model_validate({k: (v if v != "" else None) for k, v in rec.items()}) for rec in reader]


def write_metadata(out_dir: Path, meta: RunMetadata) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "metadata.json"
    payload = meta.model_dump(mode="json", exclude_none=True)
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


_PLOT_TEMPLATE = '''"""Plot the {axis} sweep in this directory (needs matplotlib)."""

import csv
from pathlib import Path

import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent

with (HERE / "summary.csv").open(encoding="utf-8") as f:
    rows = list(csv.DictReader(f))

x = [float(r["value"]) for r in rows]
latency = [float(r["median_latency"]) if r["median_latency"] else float("nan") for r in rows]
covert = [float(r["median_covert_prob"]) if r["median_covert_prob"] else float("nan") for r in rows]

fig, ax1 = plt.subplots(figsize=(6, 4))
ax1.plot(x, latency, "o-", color="tab:blue", label="FL latency")
ax1.set_xlabel("{xlabel}")
ax1.set_ylabel("median FL latency (s)", color="tab:blue")
ax2 = ax1.twinx()
ax2.plot(x, covert, "s--", color="tab:red", label="covert probability")
ax2.set_ylabel("median network covert probability", color="tab:red")
ax1.grid(True, alpha=0.3, linestyle=":")
fig.tight_layout()
fig.savefig(HERE / "sweep_{axis}.png", dpi=200)
'''

_AXIS_LABELS = {
    "n_devices": "number of devices N",
    "epsilon": "security threshold epsilon",
    "budget": "server budget ($)",
}


def write_plot_script(out_dir: Path, axis: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"plot_{axis}.py"
    path.write_text(_PLOT_TEMPLATE.format(axis=axis, xlabel=_AXIS_LABELS.get(axis, axis)), encoding="utf-8")
    return path
