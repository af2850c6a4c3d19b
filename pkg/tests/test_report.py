from __future__ import annotations

import json
from pathlib import Path

import pytest

from ccfl_lab.report import RunMetadata, read_rows, write_metadata, write_plot_script, write_rows
from ccfl_lab.sweep import SweepRow


def _rows() -> list[SweepRow]:
    return [
        SweepRow(
            axis="epsilon",
            value=0.1,
            seed=1,
            feasible=True,
            latency=0.1 + 0.2,
            covert_prob=0.9000000000000001,
            p_j=1.2345678901234567e-5,
            eta=2.0 / 3.0,
            outer_iterations=3,
        ),
        SweepRow(axis="epsilon", value=0.0, seed=2, feasible=False, error="CC constraint: silence only"),
    ]


def test_rows_round_trip_at_full_precision(tmp_path: Path) -> None:
    path = write_rows(tmp_path / "sweep.csv", _rows())
    assert read_rows(path, SweepRow) == _rows()


def test_header_and_empty_cells(tmp_path: Path) -> None:
    path = write_rows(tmp_path / "sweep.csv", _rows())
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(SweepRow.model_fields)
    assert lines[2].startswith("epsilon,0.0,2,False,,")


def test_empty_rows_need_a_model(tmp_path: Path) -> None:
    with pytest.raises(ValueError):
        write_rows(tmp_path / "x.csv", [])
    path = write_rows(tmp_path / "x.csv", [], model=SweepRow)
    assert path.read_text(encoding="utf-8") == ",".join(SweepRow.model_fields) + "\n"


def test_output_is_byte_stable(tmp_path: Path) -> None:
    a = write_rows(tmp_path / "a.csv", _rows()).read_bytes()
    b = write_rows(tmp_path / "b.csv", _rows()).read_bytes()
    assert a == b


def test_metadata_sidecar(tmp_path: Path) -> None:
    meta = RunMetadata(command="optimize", seed=7, scenario_digest="ab" * 32, optimizer={"pj_lower": 1e-6})
    path = write_metadata(tmp_path / "run", meta)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert path.name == "metadata.json"
    assert data["tool"] == "ccfl-lab"
    assert data["seed"] == 7
    assert "seeds" not in data
    assert list(data) == sorted(data)


def test_plot_script(tmp_path: Path) -> None:
    path = write_plot_script(tmp_path, "budget")
    text = path.read_text(encoding="utf-8")
    assert path.name == "plot_budget.py"
    assert "summary.csv" in text
    assert "server budget ($)" in text
    compile(text, str(path), "exec")
