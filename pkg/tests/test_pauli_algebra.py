# tests/test_pauli_algebra.py
import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_density, random_kraus
from qikit import channels
from qikit.pauli_algebra import (
    Ptm,
    ResourceLimitError,
    basis_state,
    check_qubits,
    devectorize,
    embed,
    is_physical,
    named_state,
    pauli_basis,
    pauli_labels,
    pauli_matrix,
    product_state,
    ptm_from_kraus,
    vectorize,
)


def test_labels_order():
    assert pauli_labels(1) == ("I", "X", "Y", "Z")
    labels = pauli_labels(2)
    assert labels[:5] == ("II", "IX", "IY", "IZ", "XI")
    assert labels[-1] == "ZZ"
    assert len(pauli_labels(3)) == 64


def test_basis_is_read_only():
    basis = pauli_basis(1)
    with pytest.raises(ValueError):
        basis[0, 0, 0] = 2.0


def test_leftmost_label_is_qubit_zero():
    assert_allclose(pauli_matrix("XI"), np.kron(pauli_matrix("X"), np.eye(2)))


def test_vectorize_named_states():
    assert_allclose(vectorize(basis_state("0")), [1, 0, 0, 1])
    assert_allclose(vectorize(basis_state("1")), [1, 0, 0, -1])
    assert_allclose(vectorize(np.eye(2) / 2), [1, 0, 0, 0])
    plus = np.array([[1, 1], [1, 1]]) / 2
    assert_allclose(vectorize(plus), [1, 1, 0, 0])


def test_vectorize_devectorize_roundtrip(rng):
    for n in (1, 2, 3):
        rho = random_density(rng, 2**n)
        assert_allclose(devectorize(vectorize(rho)), rho, atol=1e-12)


def test_vectorize_rejects_non_hermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        vectorize(np.array([[1, 1], [0, 0]]))


def test_vectorize_rejects_bad_dimension():
    with pytest.raises(ValueError):
        vectorize(np.eye(3))


def test_identity_kraus_gives_identity_ptm():
    for n in (1, 2):
        assert_allclose(ptm_from_kraus([np.eye(2**n)]).matrix, np.eye(4**n), atol=1e-12)


def test_projector_ptm():
    ptm = ptm_from_kraus([basis_state("0")])
    expected = 0.5 * np.array(
        [[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]]
    )
    assert_allclose(ptm.matrix, expected, atol=1e-12)


def test_ptm_acts_like_kraus_map(rng):
    kraus = random_kraus(rng, 4, 3)
    ptm = ptm_from_kraus(kraus)
    rho = random_density(rng, 4)
    out = sum(k @ rho @ k.conj().T for k in kraus)
    assert_allclose(ptm.matrix @ vectorize(rho), vectorize(out), atol=1e-10)


def test_kraus_dimension_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        ptm_from_kraus([np.eye(2), np.eye(4)])


def test_ptm_is_frozen_copy():
    source = np.eye(4)
    ptm = Ptm(source, 1)
    source[0, 0] = 5.0
    assert ptm.matrix[0, 0] == 1.0
    with pytest.raises(ValueError):
        ptm.matrix[0, 0] = 2.0


def test_ptm_shape_checked():
    with pytest.raises(ValueError):
        Ptm(np.eye(5), 1)
    with pytest.raises(ValueError):
        Ptm.from_matrix(np.eye(8))


def test_embed_single_qubit_on_each_position():
    x = channels.gate_ptm("x")
    for target in range(3):
        full = embed(x, [target], 3)
        tokens = ["0", "0", "0"]
        out = full.matrix @ product_state(tokens)
        tokens[target] = "1"
        assert_allclose(out, product_state(tokens), atol=1e-12)


def test_embed_matches_kron():
    h = channels.gate_ptm("h")
    assert_allclose(embed(h, [0], 2).matrix, np.kron(h.matrix, np.eye(4)))
    assert_allclose(embed(h, [1], 2).matrix, np.kron(np.eye(4), h.matrix))


def test_embed_respects_target_order():
    cx = channels.gate_ptm("cx")
    # control is the first listed target
    flipped = embed(cx, [1, 0], 2)
    out = flipped.matrix @ product_state(["0", "1"])
    assert_allclose(out, product_state(["1", "1"]), atol=1e-12)


def test_embed_errors():
    x = channels.gate_ptm("x")
    with pytest.raises(ValueError, match="out of range"):
        embed(x, [3], 2)
    with pytest.raises(ValueError, match="Duplicate"):
        embed(channels.gate_ptm("cx"), [0, 0], 2)
    with pytest.raises(ValueError, match="target"):
        embed(x, [0, 1], 2)


def test_named_and_product_states():
    assert_allclose(named_state("-i"), [1, 0, -1, 0])
    assert_allclose(product_state(["0", "1"]), vectorize(basis_state("01")))
    with pytest.raises(ValueError, match="Unknown state token"):
        named_state("2")


def test_is_physical():
    assert is_physical(named_state("+"))
    assert is_physical(named_state("mixed"))
    assert not is_physical(np.array([1.0, 0.0, 0.0, 1.5]))


def test_qubit_guard(monkeypatch):
    monkeypatch.setenv("QIKIT_MAX_QUBITS", "2")
    assert check_qubits(2) == 2
    with pytest.raises(ResourceLimitError):
        check_qubits(3)
    with pytest.raises(ValueError):
        check_qubits(0)
