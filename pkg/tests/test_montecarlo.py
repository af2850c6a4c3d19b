from __future__ import annotations

import math

import pytest

from ccfl_lab.channel import build_channels
from ccfl_lab.covert import WardenObservationModel, detection_report, optimal_threshold
from ccfl_lab.montecarlo import (
    DEFAULT_RATIOS,
    simulate_detection,
    simulate_traffic_detection,
    validate_allocation,
    validate_covert_grid,
)
from ccfl_lab.optimizer import optimize
from ccfl_lab.scenario import generate_scenario
from conftest import env_flag

RUN_SLOW = env_flag("RUN_SLOW_TESTS")

R2 = WardenObservationModel(mu_s=2.0, mu_j=1.0, noise=0.5)


def test_radiometer_matches_closed_form_at_r2() -> None:
    t = optimal_threshold(R2)
    rep = simulate_detection(R2, t, 200_000, seed=4)
    assert rep.analytic.covert_prob == pytest.approx(0.5, rel=1e-12)
    assert abs(rep.empirical_covert - 0.5) <= 4 * rep.std_error
    assert abs(rep.empirical_p_fa - 0.25) < 0.01
    assert abs(rep.empirical_p_md - 0.25) < 0.01


@pytest.mark.skipif(not RUN_SLOW, reason="Set RUN_SLOW_TESTS=1 to run 10^6-trial Monte-Carlo checks.")
def test_radiometer_r2_full_scale() -> None:
    rep = simulate_detection(R2, optimal_threshold(R2), 1_000_000, seed=7)
    assert rep.agrees()


def test_zero_threshold_always_alarms() -> None:
    rep = simulate_detection(R2, 0.0, 10_000, seed=1)
    assert rep.empirical_p_fa == 1.0
    assert rep.empirical_p_md == 0.0


def test_same_seed_same_report() -> None:
    t = optimal_threshold(R2)
    assert simulate_detection(R2, t, 50_000, seed=9) == simulate_detection(R2, t, 50_000, seed=9)
    assert simulate_detection(R2, t, 50_000, seed=9) != simulate_detection(R2, t, 50_000, seed=10)


def test_parallel_chunks_match_serial() -> None:
    t = optimal_threshold(R2)
    serial = simulate_detection(R2, t, 55_000, seed=3, chunk=10_000, jobs=1)
    threaded = simulate_detection(R2, t, 55_000, seed=3, chunk=10_000, jobs=4)
    assert serial == threaded


def test_trials_below_minimum_rejected() -> None:
    with pytest.raises(ValueError):
        simulate_detection(R2, 1.0, 1_000, seed=0)
    with pytest.raises(ValueError):
        simulate_traffic_detection(R2, 0.7, 1_000, seed=0)


def test_traffic_detection_full_prior_is_miss_rate() -> None:
    rep = detection_report(R2)
    err = simulate_traffic_detection(R2, 1.0, 200_000, seed=2)
    se = math.sqrt(rep.p_md * (1 - rep.p_md) / 200_000)
    assert abs(err - rep.p_md) <= 4 * se


def test_traffic_detection_at_r2() -> None:
    assert simulate_traffic_detection(R2, 0.7, 200_000, seed=5) == pytest.approx(0.25, abs=0.005)


def test_traffic_detection_even_prior_is_mean() -> None:
    m = WardenObservationModel(mu_s=4.0, mu_j=1.0, noise=1.0)
    rep = detection_report(m)
    err = simulate_traffic_detection(m, 0.5, 200_000, seed=6)
    assert err == pytest.approx(0.5 * (rep.p_fa + rep.p_md), abs=0.005)


def test_traffic_detection_rejects_bad_alpha() -> None:
    with pytest.raises(ValueError):
        simulate_traffic_detection(R2, 0.0, 10_000, seed=0)


def test_covert_grid_reduced() -> None:
    rows = validate_covert_grid(DEFAULT_RATIOS, 100_000, seed=11)
    assert [r.ratio for r in rows] == list(DEFAULT_RATIOS)
    for row in rows:
        assert abs(row.empirical_xi - row.analytic_xi) <= 4 * row.std_error


@pytest.mark.skipif(not RUN_SLOW, reason="Set RUN_SLOW_TESTS=1 to run 10^6-trial Monte-Carlo checks.")
def test_covert_grid_full_scale() -> None:
    rows = validate_covert_grid(DEFAULT_RATIOS, 1_000_000, seed=0, jobs=4)
    assert all(r.passed for r in rows), [r.label for r in rows if not r.passed]


@pytest.mark.parametrize("r", [0.5, 2.0, 8.0])
def test_perturbed_threshold_is_not_better(r: float) -> None:
    m = WardenObservationModel(mu_s=r, mu_j=1.0, noise=1.0)
    t = optimal_threshold(m)
    trials = 1_000_000 if RUN_SLOW else 200_000
    best = simulate_detection(m, t, trials, seed=8)
    for factor in (0.9, 1.1):
        other = simulate_detection(m, t * factor, trials, seed=8)
        assert other.empirical_covert >= best.empirical_covert - 3 * best.std_error


def test_allocation_checks_cover_every_device() -> None:
    s = generate_scenario(5, 500.0, 2)
    ch = build_channels(s)
    res = optimize(s)
    rows = validate_allocation(res.allocation, ch, 20_000, seed=1)
    assert len(rows) == 5
    for row, rep in zip(rows, res.covert):
        assert row.analytic_xi == pytest.approx(rep.covert_prob)
        assert row.analytic_xi >= 0.9 - 1e-6
        assert abs(row.empirical_xi - row.analytic_xi) <= 5 * max(row.std_error, 1 / row.trials)
