# tests/test_channels.py
import numpy as np
import pytest
from numpy.testing import assert_allclose

from qikit import channels
from qikit import superoperator as so
from qikit.pauli_algebra import named_state


@pytest.mark.parametrize("name", channels.GATE_NAMES)
def test_every_gate_is_cptp(name):
    params = [0.3] if name in ("rx", "ry", "rz", "amplitude_damping", "dephasing", "depolarizing", "bit_flip") else []
    ptm = channels.gate_ptm(name, params)
    assert so.is_cp(ptm)
    assert so.is_tp(ptm)


def test_amplitude_damping_ptm():
    g = 0.15
    ptm = channels.gate_ptm("amplitude_damping", [g])
    expected = np.array(
        [
            [1, 0, 0, 0],
            [0, np.sqrt(1 - g), 0, 0],
            [0, 0, np.sqrt(1 - g), 0],
            [g, 0, 0, 1 - g],
        ]
    )
    assert_allclose(ptm.matrix, expected, atol=1e-12)


def test_dephasing_and_bit_flip():
    assert_allclose(
        so.pauli_fidelities(channels.gate_ptm("dephasing", [0.25])), [1, 0.5, 0.5, 1], atol=1e-12
    )
    assert_allclose(
        so.pauli_fidelities(channels.gate_ptm("bit_flip", [0.1])), [1, 1, 0.8, 0.8], atol=1e-12
    )


def test_rotation_moves_z_towards_x():
    ry = channels.gate_ptm("ry", [np.pi / 2])
    assert_allclose(ry.matrix @ named_state("0"), named_state("+"), atol=1e-12)


def test_x_flips():
    assert_allclose(channels.gate_ptm("x").matrix @ named_state("0"), named_state("1"))


def test_local_ptm_is_tensor_power():
    one = channels.gate_ptm("dephasing", [0.2])
    two = channels.local_ptm(channels.dephasing(0.2), 2)
    assert two.n == 2
    assert_allclose(two.matrix, np.kron(one.matrix, one.matrix), atol=1e-12)


def test_local_ptm_rejects_multi_qubit():
    with pytest.raises(ValueError, match="single-qubit"):
        channels.local_ptm(channels.gate_kraus("cx"), 2)


def test_errors():
    with pytest.raises(ValueError, match="Unknown gate"):
        channels.gate_kraus("toffoli")
    with pytest.raises(ValueError, match="exactly one parameter"):
        channels.gate_kraus("rx")
    with pytest.raises(ValueError, match="no parameters"):
        channels.gate_kraus("h", [1.0])
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        channels.amplitude_damping(1.5)
    with pytest.raises(ValueError, match="axis"):
        channels.rotation("w", 0.1)
