from __future__ import annotations

import json
from pathlib import Path

import pytest

from ccfl_lab.errors import ScenarioError
from ccfl_lab.scenario import (
    ScenarioConstants,
    dbm_to_watts,
    from_preset,
    generate_scenario,
    load_scenario,
    parse_scenario,
    preset_constants,
    save_scenario,
    scenario_digest,
    with_overrides,
)
from conftest import scenario_dict

EXAMPLE_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "example-4-devices.json"


@pytest.mark.parametrize(("dbm", "watts"), [(10.0, 0.01), (30.0, 1.0), (0.0, 0.001)])
def test_dbm_to_watts(dbm: float, watts: float) -> None:
    assert dbm_to_watts(dbm) == pytest.approx(watts, rel=1e-12)


def test_generate_fig3_defaults() -> None:
    s = generate_scenario(50, 500.0, 7, preset_constants("paper-fig3"))
    assert s.n_devices == 50
    assert s.epsilon == 0.1
    assert s.total_bandwidth == 20e6
    assert s.tx_probability == 0.7
    assert s.devices[0].max_power == pytest.approx(0.01)
    assert s.jam_power_upper == pytest.approx(60.0)


def test_generate_single_device_inside_area() -> None:
    s = generate_scenario(1, 500.0, 0)
    assert s.n_devices == 1
    p = s.devices[0].position
    assert 0.0 <= p.x <= 500.0 and 0.0 <= p.y <= 500.0


def test_generate_is_deterministic() -> None:
    a = generate_scenario(50, 500.0, 7)
    b = generate_scenario(50, 500.0, 7)
    assert a.model_dump_json() == b.model_dump_json()
    assert scenario_digest(a) == scenario_digest(b)


def test_generate_seeds_differ() -> None:
    digests = {scenario_digest(generate_scenario(10, 500.0, seed)) for seed in range(1, 6)}
    assert len(digests) == 5


def test_generated_positions_stay_inside_area() -> None:
    side = 500.0
    for seed in range(1000):
        s = generate_scenario(1 + seed % 50, side, seed)
        points = [d.position for d in s.devices] + [s.jammer_pos, s.warden_pos]
        assert all(0.0 <= p.x <= side and 0.0 <= p.y <= side for p in points), seed


def test_fewer_devices_is_prefix_of_more() -> None:
    small = generate_scenario(10, 500.0, 3)
    large = generate_scenario(20, 500.0, 3)
    assert small.jammer_pos == large.jammer_pos
    assert small.warden_pos == large.warden_pos
    assert small.devices == large.devices[:10]


@pytest.mark.parametrize(("n", "side"), [(0, 500.0), (5, 0.0), (5, -1.0)])
def test_generate_rejects_bad_arguments(n: int, side: float) -> None:
    with pytest.raises(ValueError):
        generate_scenario(n, side, 0)


def test_save_load_round_trip(tmp_path: Path) -> None:
    s = from_preset("paper-fig3", 7)
    path = save_scenario(s, tmp_path / "s.json")
    assert load_scenario(path) == s


def test_load_rejects_epsilon_out_of_range(tmp_path: Path) -> None:
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(scenario_dict(2, epsilon=1.5)), encoding="utf-8")
    with pytest.raises(ScenarioError) as exc:
        load_scenario(path)
    assert "epsilon" in exc.value.fields
    assert "epsilon" in str(exc.value)


def test_load_reports_missing_field(tmp_path: Path) -> None:
    data = scenario_dict(2)
    del data["budget"]
    path = tmp_path / "missing.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(ScenarioError) as exc:
        load_scenario(path)
    assert "budget" in exc.value.fields


def test_nested_field_path_is_reported() -> None:
    data = scenario_dict(4)
    data["devices"][3]["max_power"] = -1.0
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(data)
    assert "devices.3.max_power" in exc.value.fields


def test_unknown_key_rejected() -> None:
    with pytest.raises(ScenarioError):
        parse_scenario(scenario_dict(1, jammer_colour="red"))


def test_position_outside_area_rejected() -> None:
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(scenario_dict(1, warden_pos={"x": 600.0, "y": 10.0}))
    assert "outside" in str(exc.value)


def test_load_missing_file(tmp_path: Path) -> None:
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "nope.json")


def test_parse_invalid_json_text() -> None:
    with pytest.raises(ScenarioError):
        parse_scenario("{not json")


def test_unknown_preset() -> None:
    with pytest.raises(ScenarioError) as exc:
        preset_constants("paper-fig9")
    assert "paper-fig3" in str(exc.value)


def test_from_preset_device_override() -> None:
    s = from_preset("paper-fig3", 7, n_devices=12)
    assert s.n_devices == 12
    assert s.seed == 7


def test_from_preset_rejects_zero_devices() -> None:
    with pytest.raises(ValueError):
        from_preset("paper-fig3", 7, n_devices=0)


def test_with_overrides(make_scenario) -> None:
    s = make_scenario(3)
    assert with_overrides(s) is s
    t = with_overrides(s, epsilon=0.3, budget=None)
    assert t.epsilon == 0.3
    assert t.budget == s.budget
    with pytest.raises(ScenarioError):
        with_overrides(s, budget=-1.0)


def test_jam_power_upper(make_scenario) -> None:
    assert make_scenario(1).jam_power_upper == pytest.approx(60.0)
    assert make_scenario(1, budget=10.0).jam_power_upper == pytest.approx(20.0)
    assert make_scenario(1, jam_price=0.0).jam_power_upper == 100.0


def test_base_station_defaults_to_centre(make_scenario) -> None:
    s = make_scenario(1)
    assert (s.base_station.x, s.base_station.y) == (250.0, 250.0)
    t = make_scenario(1, bs_pos={"x": 10.0, "y": 20.0})
    assert (t.base_station.x, t.base_station.y) == (10.0, 20.0)


def test_committed_example_loads() -> None:
    s = load_scenario(EXAMPLE_CONFIG)
    assert s.n_devices == 4
    assert s.epsilon == 0.1
    assert s.budget == 30.0


def test_constants_defaults_match_preset() -> None:
    c = ScenarioConstants()
    assert c.n_devices == 50
    assert c.side == 500.0
    assert c.noise_psd == pytest.approx(10.0 ** (-20.4))
    assert c.jammer_max_power == 100.0
