# tests/test_render.py
import numpy as np
import pytest

from qikit import instrument as qi
from qikit.pauli_algebra import Ptm
from qikit.render import render_instrument
from qikit.serialization import load_instrument


def test_ideal_heatmap_annotations(tmp_path):
    out = render_instrument(list(qi.ideal_projective_instrument(1)), tmp_path / "ideal.svg")
    svg = out.read_text()
    assert svg.startswith("<?xml")
    # four cells of magnitude 0.50 per branch
    assert svg.count("0.50<") == 8
    assert svg.count("-0.50<") == 2


def test_measured_fixture_cell(tmp_path, fixtures_dir):
    measured = load_instrument(fixtures_dir / "paper_experimental.json")
    svg = render_instrument(list(measured), tmp_path / "measured.svg").read_text()
    assert "0.49<" in svg
    assert "0.51<" in svg


def test_output_is_deterministic(tmp_path):
    named = list(qi.ideal_projective_instrument(1))
    a = render_instrument(named, tmp_path / "a.svg").read_bytes()
    b = render_instrument(named, tmp_path / "b.svg").read_bytes()
    assert a == b


def test_zero_matrix(tmp_path):
    svg = render_instrument([("zero", Ptm(np.zeros((4, 4)), 1))], tmp_path / "z.svg").read_text()
    assert svg.count("0.00<") == 16


def test_two_qubit_labels(tmp_path):
    svg = render_instrument(list(qi.ideal_projective_instrument(2)), tmp_path / "two.svg").read_text()
    assert "ZZ" in svg


def test_nothing_to_render(tmp_path):
    with pytest.raises(ValueError):
        render_instrument([], tmp_path / "x.svg")
