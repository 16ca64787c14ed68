# tests/test_experimental_fixture.py
"""Reported numbers for the shipped experimental readout fixture."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from qikit import instrument as qi
from qikit.pauli_algebra import named_state
from qikit.serialization import load_instrument

FIXTURE_TOL = 0.02


@pytest.fixture
def measured(fixtures_dir):
    return load_instrument(fixtures_dir / "paper_experimental.json")


def test_validates_at_rounding_tolerance(measured):
    assert qi.validate(measured, tol=FIXTURE_TOL).passed
    assert qi.validate(measured).tp_residual < 1e-12


def test_confusion_matrix(measured):
    confusion = qi.confusion_matrix(measured)
    assert_allclose(confusion, [[1.0, 0.02], [0.0, 0.98]], atol=0.01)
    assert qi.assignment_fidelity(confusion) == pytest.approx(0.99, abs=0.005)


def test_probabilities_from_excited_state(measured):
    p0, p1 = qi.outcome_probabilities(measured, named_state("1"))
    assert p0 == pytest.approx(0.02, abs=0.005)
    assert p1 == pytest.approx(0.98, abs=0.005)


def test_povm_effect_components(measured):
    effect = qi.povm_effects(measured)[0]
    assert_allclose(effect.coefficients, [0.5117, 0.0018, -0.0026, 0.4940], atol=5e-4)


def test_axis_tilt(measured):
    tilt = qi.measurement_axis(qi.povm_effects(measured)[0]).tilt_degrees
    assert tilt == pytest.approx(0.367, abs=0.01)


def test_post_states_from_mixed_input(measured):
    branches = {b.label: b.state for b in qi.apply(measured, named_state("mixed"))}
    zero, one = branches["0"], branches["1"]
    # the Y component of outcome 0 is compared by magnitude only
    assert_allclose([zero[0], zero[1], abs(zero[2]), zero[3]], [1, 0, 0.02, 0.96], atol=0.02)
    assert_allclose(one, [1, 0, 0, -0.84], atol=0.02)


def test_post_state_from_excited_input(measured):
    state = qi.post_measurement_state(measured, "1", named_state("1"))
    assert state[3] == pytest.approx(-0.85, abs=0.02)


def test_diagnose_report(measured):
    report = qi.diagnose(measured, tol=FIXTURE_TOL)
    assert report.passed
    assert report.assignment_fidelity == pytest.approx(0.99, abs=0.005)
    assert report.post_mixed_states["1"][3] == pytest.approx(-0.84, abs=0.02)
    assert report.tp_dependence_residual == pytest.approx(0.0, abs=1e-12)
    assert report.qnd_repeatability["1"] == pytest.approx(0.904, abs=0.005)
    assert report.measure_and_prepare is False
    assert any("tilted" in f for f in report.findings)
    assert any("T1" in f for f in report.findings)


def test_zz_asymmetry(measured):
    assert measured.branch("1").matrix[3, 3] < measured.branch("0").matrix[3, 3]
    assert np.isclose(measured.branch("0").matrix[3, 3], 0.49)
