"""Capacity arithmetic and frequency-plan generation."""

import math

import numpy as np
import pytest

from fdmsim import (
    CapacityQuery,
    ConfigError,
    FrequencyPlan,
    InfeasiblePlanError,
    SpacingRule,
    adjacent_crosstalk,
    carson_bandwidth,
    crosstalk_limited_spacing,
    format_plan_report,
    generate_plan,
    max_channels,
    plan_for_chip,
    snr_proxy,
)

TWO_PI = 2 * math.pi
KAPPA = TWO_PI * 10e6


def test_carson_bandwidth_formula_on_grid():
    rng = np.random.default_rng(2)
    for _ in range(50):
        shift = rng.uniform(0, 1e7)
        gamma = rng.uniform(0, 1e6)
        assert carson_bandwidth(shift, gamma) == 2 * (shift + 2 * gamma)


def test_adjacent_crosstalk_anchor_points():
    assert adjacent_crosstalk(1.5 * KAPPA, KAPPA) == pytest.approx(-10.0, abs=0.001)
    assert adjacent_crosstalk(5.0 * KAPPA, KAPPA) == pytest.approx(-20.043, abs=0.001)
    assert adjacent_crosstalk(0.0, KAPPA) == 0.0
    # monotone decreasing in spacing
    s = np.linspace(0, 10, 50) * KAPPA
    vals = [adjacent_crosstalk(x, KAPPA) for x in s]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_crosstalk_limited_spacing_half_kappa_grid():
    assert crosstalk_limited_spacing(KAPPA, -10.0) == pytest.approx(1.5 * KAPPA)
    assert crosstalk_limited_spacing(KAPPA, -20.0) == pytest.approx(5.0 * KAPPA)
    # the snapped spacing always meets the limit
    for limit in (-6.0, -13.0, -17.5, -25.0, -30.0):
        spacing = crosstalk_limited_spacing(KAPPA, limit)
        assert adjacent_crosstalk(spacing, KAPPA) <= limit + 1e-9
        steps = spacing / (KAPPA / 2)
        assert steps == pytest.approx(round(steps), abs=1e-9)


def query(limit_db, bandwidth=1e9):
    return CapacityQuery(
        bandwidth=bandwidth,
        kappa=KAPPA,
        gamma=TWO_PI * 0.1e6,
        dispersive_shift=TWO_PI * 0.3e6,
        crosstalk_limit_db=limit_db,
    )


def test_max_channels_20_at_minus_20db():
    result = max_channels(query(-20.0))
    assert result.count == 20
    assert result.spacing == pytest.approx(50e6)
    assert result.crosstalk_spacing == pytest.approx(50e6)


def test_max_channels_66_at_minus_10db_with_derating_note():
    result = max_channels(query(-10.0))
    assert result.count == 66
    assert 54 <= result.count <= 66
    assert result.spacing == pytest.approx(15e6)
    assert any("60" in note for note in result.notes)


def test_max_channels_carson_limited():
    q = CapacityQuery(
        bandwidth=100e6,
        kappa=TWO_PI * 0.1e6,  # narrow resonator: crosstalk allows tight packing
        gamma=TWO_PI * 0.5e6,
        dispersive_shift=TWO_PI * 2e6,
        crosstalk_limit_db=-20.0,
    )
    result = max_channels(q)
    assert result.carson_bandwidth > result.crosstalk_spacing
    assert result.spacing == pytest.approx(result.carson_bandwidth)
    assert result.count == int(100e6 // result.spacing)
    assert "Carson" in result.notes[0] or "carson" in result.notes[0].lower()


def test_max_channels_infeasible_band():
    with pytest.raises(InfeasiblePlanError):
        max_channels(query(-20.0, bandwidth=30e6))


def test_generate_plan_edge_to_edge_spacings():
    plan = generate_plan(7, 9.3e9, 10.2e9)
    assert plan.frequencies[0] == pytest.approx(9.3e9)
    assert plan.frequencies[-1] == pytest.approx(10.2e9)
    np.testing.assert_allclose(plan.spacings(), [150e6] * 6, rtol=1e-12)


def test_generate_plan_fixed_spacing_is_centered():
    plan = generate_plan(6, 9.3e9, 10.3e9, spacing=150e6)
    np.testing.assert_allclose(plan.spacings(), [150e6] * 5, rtol=1e-12)
    # symmetric margins
    low = plan.frequencies[0] - 9.3e9
    high = 10.3e9 - plan.frequencies[-1]
    assert low == pytest.approx(high, rel=1e-9)


def test_generate_plan_infeasible_span():
    with pytest.raises(InfeasiblePlanError):
        generate_plan(6, 9.5e9, 10.0e9, spacing=150e6)


def test_generate_plan_kappa_multiple_rule():
    plan = generate_plan(
        5, 9.0e9, 10.0e9, SpacingRule.KAPPA_MULTIPLE, kappa=KAPPA,
        crosstalk_limit_db=-20.0,
    )
    np.testing.assert_allclose(plan.spacings(), [50e6] * 4, rtol=1e-12)


def test_generate_plan_audits_crosstalk_limit():
    with pytest.raises(InfeasiblePlanError):
        generate_plan(10, 9.0e9, 9.1e9, kappa=KAPPA, crosstalk_limit_db=-20.0)


def test_generate_plan_single_channel_at_center():
    plan = generate_plan(1, 9.0e9, 10.0e9)
    assert plan.frequencies == (9.5e9,)


def test_generate_plan_guard_respected():
    plan = generate_plan(3, 9.0e9, 10.0e9, guard=100e6)
    assert plan.frequencies[0] >= 9.1e9 - 1e-3
    assert plan.frequencies[-1] <= 9.9e9 + 1e-3


def test_frequency_plan_validation():
    with pytest.raises(ConfigError):
        FrequencyPlan(band_start=9e9, band_stop=10e9,
                      channels=((1, 9.5e9), (2, 9.4e9)))  # not increasing
    with pytest.raises(ConfigError):
        FrequencyPlan(band_start=9e9, band_stop=10e9,
                      channels=((1, 9.3e9), (1, 9.5e9)))  # duplicate id
    with pytest.raises(ConfigError):
        FrequencyPlan(band_start=9e9, band_stop=10e9,
                      channels=((1, 10.5e9),))  # outside band


def test_plan_for_chip_tracks_dressed_resonances():
    from fdmsim import builtin_chip_path, dressed_resonance, load_chip

    chip = load_chip(builtin_chip_path())
    plan = plan_for_chip(chip)
    assert plan.device_ids == chip.device_ids
    for dev_id, freq in plan.channels:
        dev = chip.device(dev_id)
        assert freq == pytest.approx(
            dressed_resonance(dev, dev.qubit.symmetry_flux), abs=1.0
        )
    # grid snapping lands channels on lo + k * grid
    snapped = plan_for_chip(chip, lo_frequency=9.75e9, grid=250e3)
    for _, freq in snapped.channels:
        assert (freq - 9.75e9) / 250e3 == pytest.approx(round((freq - 9.75e9) / 250e3), abs=1e-9)


def test_snr_proxy_scalings():
    base = snr_proxy(0.95 * KAPPA, KAPPA, 1e-6)
    assert snr_proxy(0.95 * KAPPA, KAPPA, 4e-6) == pytest.approx(2 * base)
    assert snr_proxy(0.475 * KAPPA, KAPPA, 1e-6) == pytest.approx(base / 2)
    with pytest.raises(ConfigError):
        snr_proxy(1.1 * KAPPA, KAPPA, 1e-6)


def test_format_plan_report_mentions_channels_and_margin():
    plan = generate_plan(3, 9.0e9, 9.3e9)
    text = format_plan_report(
        plan, kappa=KAPPA, gamma=TWO_PI * 0.1e6, dispersive_shift=TWO_PI * 0.3e6
    )
    assert "3 channels" in text
    assert "carson" in text.lower()
    for _, freq in plan.channels:
        assert f"{freq:.9g}" in text
