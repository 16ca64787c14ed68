# tests/test_superoperator.py
import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_density, random_kraus
from qikit import channels
from qikit import superoperator as so
from qikit.pauli_algebra import Ptm, ptm_from_kraus, vectorize


def transpose_map():
    return Ptm(np.diag([1.0, 1.0, -1.0, 1.0]), 1)


def test_identity_choi_is_unnormalized_bell_projector():
    choi = so.ptm_to_choi(Ptm.identity(1))
    omega = np.array([1, 0, 0, 1], dtype=complex)
    assert_allclose(choi, np.outer(omega, omega.conj()), atol=1e-12)


def test_choi_roundtrip(rng):
    for n in (1, 2):
        ptm = ptm_from_kraus(random_kraus(rng, 2**n, 3))
        back = so.choi_to_ptm(so.ptm_to_choi(ptm))
        assert_allclose(back.matrix, ptm.matrix, atol=1e-12)


def test_choi_to_ptm_rejects_non_hermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        so.choi_to_ptm(np.triu(np.ones((4, 4))))


def test_transpose_map_is_not_cp():
    check = so.is_cp(transpose_map())
    assert not check
    assert check.value < -0.01


def test_kraus_maps_are_cp(rng):
    for _ in range(50):
        ptm = ptm_from_kraus(random_kraus(rng, 2, rng.integers(1, 5)))
        assert so.is_cp(ptm)


def test_is_tp_complete_vs_incomplete_kraus(rng):
    for _ in range(100):
        kraus = random_kraus(rng, 2, 2)
        assert so.is_tp(ptm_from_kraus(kraus), 1e-10)
        # drop one operator: no longer complete
        assert not so.is_tp(ptm_from_kraus(kraus[:1]), 1e-10)


def test_trace_nonincreasing():
    assert so.is_trace_nonincreasing(ptm_from_kraus([np.diag([1, 0])]))
    assert not so.is_trace_nonincreasing(Ptm.identity(1).scaled(1.5))


def test_is_unital():
    assert so.is_unital(channels.gate_ptm("dephasing", [0.3]))
    assert not so.is_unital(channels.gate_ptm("amplitude_damping", [0.3]))


def test_compose_order():
    # H then S differs from S then H
    h, s = channels.gate_ptm("h"), channels.gate_ptm("s")
    v = vectorize(np.array([[1, 0], [0, 0]]))
    assert_allclose(so.compose(s, h).matrix @ v, s.matrix @ (h.matrix @ v))
    assert not np.allclose(so.compose(s, h).matrix, so.compose(h, s).matrix)


def test_compose_dimension_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        so.compose(Ptm.identity(1), Ptm.identity(2))


def test_apply_length_check():
    with pytest.raises(ValueError):
        so.apply(Ptm.identity(1), np.ones(16))


def test_blocks_are_lossless(rng):
    ptm = ptm_from_kraus(random_kraus(rng, 4, 2))
    parts = so.blocks(ptm)
    assert_allclose(parts.tp_row, ptm.matrix[0])
    assert_allclose(parts.nonunital_col, ptm.matrix[:, 0])
    assert np.array_equal(so.assemble(parts).matrix, ptm.matrix)


def test_pauli_fidelities_of_depolarizing():
    assert_allclose(
        so.pauli_fidelities(channels.gate_ptm("depolarizing", [0.2])),
        [1, 0.8, 0.8, 0.8],
        atol=1e-12,
    )


def test_unital_offdiagonal_max():
    assert so.unital_offdiagonal_max(channels.gate_ptm("z")) == pytest.approx(0.0, abs=1e-12)
    rotated = channels.gate_ptm("ry", [0.1])
    assert so.unital_offdiagonal_max(rotated) == pytest.approx(np.sin(0.1), abs=1e-12)


def test_numerical_rank():
    assert so.numerical_rank(Ptm.identity(1)) == 4
    assert so.numerical_rank(ptm_from_kraus([np.diag([1, 0])])) == 1
    assert so.numerical_rank(Ptm.zeros(1)) == 0


def test_entanglement_fidelity():
    assert so.entanglement_fidelity(Ptm.identity(1), Ptm.identity(1)) == pytest.approx(1.0)
    x = channels.gate_ptm("x")
    assert so.entanglement_fidelity(x, Ptm.identity(1)) == pytest.approx(0.0, abs=1e-12)


def test_kraus_roundtrip_through_choi(rng):
    ptm = ptm_from_kraus(random_kraus(rng, 2, 3))
    kraus = so.ptm_to_kraus(ptm)
    assert_allclose(ptm_from_kraus(kraus).matrix, ptm.matrix, atol=1e-10)
    rho = random_density(rng, 2)
    assert_allclose(
        vectorize(so.apply_kraus(kraus, rho)), ptm.matrix @ vectorize(rho), atol=1e-10
    )


def test_ptm_to_kraus_rejects_non_cp():
    with pytest.raises(ValueError, match="not CP"):
        so.ptm_to_kraus(transpose_map())
