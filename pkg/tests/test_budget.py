import math

import pytest
from hypothesis import assume, given, strategies as st

from bb84sim.budget import (
    ABSORBED_QBER,
    LimitingFactor,
    SecurityThresholds,
    TRANSMITTED_FRACTION,
    VACUUM_COUNT_RATE_HZ,
    VACUUM_QBER,
    analytic_qber,
    assess,
    calibrate,
    calibrated_detector,
    calibrated_optics,
    calibrated_source,
    default_calibration,
    link_budget,
    preset,
    presets,
    scaled_transmittance,
    signal_click_rate_hz,
    source_for_count_rate,
)
from bb84sim.channel import ExplicitTransmittance, ProfilePath, equivalent_path
from bb84sim.errors import CalibrationError, DomainError

# Closed-form inversion frozen from a 30-digit oracle:
# d = 1000 * (0.0768 - 0.0086) / (0.5 - 0.0768)
CALIBRATED_DARK_HZ = 161.153119092628


def test_analytic_qber_values():
    assert analytic_qber(0.0, 1000.0, 0.0) == 0.0
    assert analytic_qber(0.3, 0.0, 50.0) == 0.5
    assert analytic_qber(0.0086, 1000.0, CALIBRATED_DARK_HZ) == pytest.approx(
        0.0768, rel=1e-12
    )
    assert analytic_qber(0.0, 0.0, 0.0) is None


def test_analytic_qber_domain():
    with pytest.raises(DomainError):
        analytic_qber(0.6, 1000.0, 0.0)
    with pytest.raises(DomainError):
        analytic_qber(0.1, -1.0, 0.0)
    with pytest.raises(DomainError):
        analytic_qber(0.1, 1.0, -1.0)


@given(
    st.floats(0, 0.5),
    st.floats(0, 1e7),
    st.floats(0, 1e7),
    st.floats(0, 1e5),
)
def test_analytic_qber_monotone_and_bounded(e_opt, rate1, rate2, dark):
    assume(rate1 + dark > 0 and rate2 + dark > 0)
    lo, hi = sorted((rate1, rate2))
    q_lo = analytic_qber(e_opt, lo, dark)
    q_hi = analytic_qber(e_opt, hi, dark)
    slack = 4 * math.ulp(0.5)  # the quotient itself rounds
    assert 0.0 <= q_hi <= 0.5 + slack
    assert q_hi <= q_lo + slack  # more signal never hurts
    assert analytic_qber(e_opt, lo, dark + 1.0) >= q_lo - slack  # dark never helps


def test_calibrate_operating_points():
    result = default_calibration()
    assert result.e_opt == VACUUM_QBER
    assert result.dark_rate_hz == pytest.approx(CALIBRATED_DARK_HZ, rel=1e-12)
    assert not result.refined


def test_calibrate_trivial_cases():
    assert calibrate(0.01, 0.01, 1e4, 1.0).dark_rate_hz == 0.0
    assert calibrate(0.0, 0.25, 1000.0, 1.0).dark_rate_hz == pytest.approx(
        1000.0, rel=1e-12
    )


def test_calibrate_round_trip():
    """Both formulations reproduce their operating points to 1e-12:
    the default one with the vacuum point dark-free, the refined one
    with a single dark rate shared by both equations."""
    result = default_calibration()
    vac = analytic_qber(result.e_opt, VACUUM_COUNT_RATE_HZ, 0.0)
    absorbed = analytic_qber(
        result.e_opt,
        VACUUM_COUNT_RATE_HZ * TRANSMITTED_FRACTION,
        result.dark_rate_hz,
    )
    assert vac == pytest.approx(VACUUM_QBER, rel=1e-12)
    assert absorbed == pytest.approx(ABSORBED_QBER, rel=1e-12)

    refined = default_calibration(refine=True)
    assert refined.refined
    assert refined.e_opt < VACUUM_QBER  # part of the vacuum error is dark counts
    vac = analytic_qber(refined.e_opt, VACUUM_COUNT_RATE_HZ, refined.dark_rate_hz)
    absorbed = analytic_qber(
        refined.e_opt,
        VACUUM_COUNT_RATE_HZ * TRANSMITTED_FRACTION,
        refined.dark_rate_hz,
    )
    assert vac == pytest.approx(VACUUM_QBER, rel=1e-12)
    assert absorbed == pytest.approx(ABSORBED_QBER, rel=1e-12)


@given(
    st.floats(0.0, 0.2),
    st.floats(0.0, 0.45),
    st.floats(1.0, 1e8),
    st.floats(1e-6, 1.0),
)
def test_calibrate_inversion_property(vacuum_qber, absorbed_qber, rate, fraction):
    assume(vacuum_qber <= absorbed_qber)
    result = calibrate(vacuum_qber, absorbed_qber, rate, fraction)
    assert result.dark_rate_hz >= 0.0
    reproduced = analytic_qber(
        result.e_opt, rate * fraction, result.dark_rate_hz
    )
    assert reproduced == pytest.approx(absorbed_qber, rel=1e-12, abs=1e-15)


def test_calibrate_rejects_impossible_points():
    with pytest.raises(CalibrationError):
        calibrate(0.01, 0.5, 1e5, 0.01)
    with pytest.raises(DomainError):
        calibrate(0.05, 0.01, 1e5, 0.01)  # absorbed below vacuum
    with pytest.raises(DomainError):
        calibrate(0.01, 0.02, 1e5, 0.0)
    # refined solve: a fraction too close to 1 leaves no dark-rate budget
    with pytest.raises(CalibrationError):
        calibrate(0.01, 0.3, 1e5, 1.0, refine=True)


def test_assess_verdicts():
    assert assess(0.0677, 10.0) == (True, LimitingFactor.NONE)
    assert assess(0.12, 10.0) == (False, LimitingFactor.QBER_LIMIT)
    assert assess(0.05, 157.0) == (False, LimitingFactor.LOSS_LIMIT)
    assert assess(0.0768, 20.0) == (True, LimitingFactor.NONE)
    # at-threshold values are already insecure
    assert assess(0.11, 10.0)[0] is False
    assert assess(0.05, 40.0)[0] is False


def test_assess_respects_custom_thresholds():
    strict = SecurityThresholds(qber_limit=0.05, max_loss_db=15.0)
    assert assess(0.0677, 10.0, strict) == (False, LimitingFactor.QBER_LIMIT)
    assert assess(0.01, 20.0, strict) == (False, LimitingFactor.LOSS_LIMIT)
    with pytest.raises(DomainError):
        SecurityThresholds(qber_limit=0.0)


@given(st.floats(0, 0.5), st.floats(0, 0.5), st.floats(0, 200), st.floats(0, 200))
def test_assess_monotone(q1, q2, l1, l2):
    q_lo, q_hi = sorted((q1, q2))
    l_lo, l_hi = sorted((l1, l2))
    if assess(q_hi, l_hi)[0]:
        assert assess(q_lo, l_lo)[0]


def test_source_rate_round_trip():
    det = calibrated_detector(0.0)
    src = source_for_count_rate(1e5, det)
    assert src.mean_photons_per_window == pytest.approx(0.0205263157894737, rel=1e-12)
    chain = calibrated_optics()
    assert signal_click_rate_hz(src, det, 1.0, chain) == pytest.approx(1e5, rel=1e-12)
    assert signal_click_rate_hz(src, det, 0.01, chain) == pytest.approx(
        1e3, rel=1e-12
    )


def test_calibrated_parameter_sets():
    optics = calibrated_optics()
    assert optics.extinction_ratio == 1000.0
    assert optics.misalignment_deg == pytest.approx(5.00662531415, abs=1e-9)
    det = calibrated_detector()
    assert 2.0 * det.dark_rate_hz == pytest.approx(CALIBRATED_DARK_HZ, rel=1e-12)
    assert det.quantum_efficiency == 0.38
    assert det.dead_time_ns == 78.0
    assert calibrated_source().wavelength_nm == 632.8


def test_preset_catalog():
    catalog = presets()
    assert len(catalog) >= 12
    names = [scenario.name for scenario in catalog]
    assert names[0] == "vacuum-cell"
    assert "bromine-cell" in names
    assert "horizontal-144km" in names
    assert "satellite-downlink" in names
    for profile_label in (
        "summer-urban-5km",
        "summer-urban-13km",
        "summer-rural-5km",
        "summer-rural-13km",
        "winter-urban-5km",
        "winter-urban-13km",
        "winter-rural-5km",
        "winter-rural-13km",
    ):
        assert profile_label in names
    assert len(set(names)) == len(names)


def test_vacuum_and_bromine_presets():
    vacuum = preset("vacuum-cell")
    assert vacuum.transmittance() == 1.0
    assert vacuum.detector.dark_rate_hz == 0.0
    report = link_budget(vacuum)
    assert report.loss_db == 0.0
    assert report.expected_qber == pytest.approx(VACUUM_QBER, rel=1e-9)
    assert report.sifted_rate_hz == pytest.approx(5e4, rel=1e-9)
    assert report.secure

    bromine = preset("bromine-cell")
    assert bromine.transmittance() == 0.01
    report = link_budget(bromine)
    assert report.loss_db == 20.0
    assert report.expected_qber == pytest.approx(ABSORBED_QBER, rel=1e-9)
    assert report.secure
    assert report.limiting_factor is LimitingFactor.NONE


def test_profile_presets_sit_at_their_quoted_lengths():
    scenario = preset("summer-rural-13km")
    assert isinstance(scenario.channel, ProfilePath)
    assert scenario.channel.profile.k_per_km == 0.0158
    assert scenario.channel.length_km == 290.9  # quoted value drives the preset
    # the recomputed equivalent path is cross-reported, not silently adopted
    assert equivalent_path(0.0158, 0.01) == pytest.approx(291.466467467601, rel=1e-12)


def test_reference_presets():
    horizontal = preset("horizontal-144km")
    assert horizontal.transmittance() == pytest.approx(0.1)
    assert horizontal.reference_qber == 0.0677
    assert horizontal.reference_loss_db == 10.0
    assert horizontal.reference_rate_hz == 28.0
    report = link_budget(horizontal)
    assert report.loss_db == pytest.approx(10.0, rel=1e-12)
    assert report.secure

    satellite = preset("satellite-downlink")
    report = link_budget(satellite)
    assert report.loss_db == pytest.approx(157.0, rel=1e-12)
    assert not report.secure
    # its own analytic QBER is dark-dominated (~0.5), so the QBER gate
    # trips before the loss gate in the qber-first ordering
    assert report.expected_qber > 0.49
    assert report.limiting_factor is LimitingFactor.QBER_LIMIT

    with pytest.raises(KeyError):
        preset("no-such-scenario")


def test_scaled_transmittance_helper():
    scenario = scaled_transmittance(preset("bromine-cell"), 0.5)
    assert isinstance(scenario.channel, ExplicitTransmittance)
    assert scenario.transmittance() == 0.5
    assert scenario.name == "bromine-cell"


def test_link_budget_degenerate_scenario():
    from dataclasses import replace

    from bb84sim.detector import SourceParams

    dead = replace(
        preset("vacuum-cell"),
        source=SourceParams(mean_photons_per_window=0.0),
    )
    report = link_budget(dead)
    assert report.expected_qber is None
    assert not report.secure
    assert report.limiting_factor is LimitingFactor.NONE
