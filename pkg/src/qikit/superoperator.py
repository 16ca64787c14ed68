"""PTM channel algebra: application, composition, Choi form and validity tests.

Choi convention: for a map E on d x d matrices,

    J = sum_ab |a><b| (x) E(|a><b|)        (input factor first)
      = (1/d) sum_ij Lambda_ij P_j^T (x) P_i

so the identity channel maps to |Omega><Omega| with |Omega> = sum_a |aa>,
i.e. d times the maximally entangled projector. E is CP iff J >= 0, and
trace-nonincreasing iff I - Tr_out J >= 0.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from qikit.pauli_algebra import (
    HERMITIAN_TOL,
    Ptm,
    PauliVector,
    pauli_basis,
    qubits_for_dim,
)

logger = logging.getLogger(__name__)

CP_TOL = 1e-8
TP_TOL = 1e-10
RANK_TOL = 1e-6


@dataclass(frozen=True)
class PtmBlocks:
    """Exact submatrix copies of a PTM (top row, first column, unital block, diagonal)."""

    tp_row: np.ndarray
    nonunital_col: np.ndarray
    unital_block: np.ndarray
    diagonal: np.ndarray


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a validity test together with the number it was decided on."""

    ok: bool
    value: float

    def __bool__(self) -> bool:
        return self.ok


def _same_size(a: Ptm, b: Ptm) -> None:
    if a.n != b.n:
        raise ValueError(f"PTM dimension mismatch: {a.dim}x{a.dim} vs {b.dim}x{b.dim}")


def apply(ptm: Ptm, v: PauliVector) -> PauliVector:
    v = np.asarray(v, dtype=float)
    if v.shape != (ptm.dim,):
        raise ValueError(
            f"Pauli vector of length {v.shape} does not match PTM side {ptm.dim}"
        )
    return ptm.matrix @ v


def compose(second: Ptm, first: Ptm) -> Ptm:
    """The map 'first, then second'."""
    _same_size(second, first)
    return Ptm(second.matrix @ first.matrix, first.n)


def ptm_to_choi(ptm: Ptm) -> np.ndarray:
    basis = pauli_basis(ptm.n)
    d = 2**ptm.n
    transposed = basis.transpose(0, 2, 1)
    choi = np.einsum("ij,jab,icd->acbd", ptm.matrix, transposed, basis) / d
    return choi.reshape(d * d, d * d)


def choi_to_ptm(choi) -> Ptm:
    choi = np.asarray(choi, dtype=complex)
    if choi.ndim != 2 or choi.shape[0] != choi.shape[1]:
        raise ValueError(f"Choi matrix must be square, got shape {choi.shape}")
    d = int(round(np.sqrt(choi.shape[0])))
    if d * d != choi.shape[0]:
        raise ValueError(f"Choi side {choi.shape[0]} is not a perfect square")
    n = qubits_for_dim(d)
    if not np.allclose(choi, choi.conj().T, rtol=0.0, atol=HERMITIAN_TOL):
        raise ValueError("Choi matrix is not Hermitian within tolerance")
    basis = pauli_basis(n)
    tensor = choi.reshape(d, d, d, d)
    lam = np.einsum("acbd,jab,idc->ij", tensor, basis, basis) / d
    return Ptm.from_matrix(lam)


def _hermitian_min_eig(matrix: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((matrix + matrix.conj().T) / 2).min())


def is_cp(ptm: Ptm, tol: float = CP_TOL) -> CheckResult:
    """CP iff the smallest Choi eigenvalue is >= -tol; the eigenvalue is reported."""
    min_eig = _hermitian_min_eig(ptm_to_choi(ptm))
    return CheckResult(min_eig >= -tol, min_eig)


def is_tp(ptm: Ptm, tol: float = TP_TOL) -> CheckResult:
    target = np.zeros(ptm.dim)
    target[0] = 1.0
    residual = float(np.max(np.abs(ptm.matrix[0] - target)))
    return CheckResult(residual <= tol, residual)


def is_trace_nonincreasing(ptm: Ptm, tol: float = CP_TOL) -> CheckResult:
    """Tr[E(rho)] <= Tr[rho] for all rho >= 0, tested as I - Tr_out(J) >= 0."""
    d = 2**ptm.n
    tensor = ptm_to_choi(ptm).reshape(d, d, d, d)
    reduced = np.einsum("acbc->ab", tensor)
    min_eig = _hermitian_min_eig(np.eye(d) - reduced)
    return CheckResult(min_eig >= -tol, min_eig)


def is_unital(ptm: Ptm, tol: float = TP_TOL) -> CheckResult:
    target = np.zeros(ptm.dim)
    target[0] = 1.0
    residual = float(np.max(np.abs(ptm.matrix[:, 0] - target)))
    return CheckResult(residual <= tol, residual)


def blocks(ptm: Ptm) -> PtmBlocks:
    m = ptm.matrix
    return PtmBlocks(
        tp_row=m[0].copy(),
        nonunital_col=m[:, 0].copy(),
        unital_block=m[1:, 1:].copy(),
        diagonal=np.diag(m).copy(),
    )


def assemble(parts: PtmBlocks) -> Ptm:
    """Inverse of blocks()."""
    side = parts.tp_row.shape[0]
    m = np.empty((side, side))
    m[0] = parts.tp_row
    m[:, 0] = parts.nonunital_col
    m[1:, 1:] = parts.unital_block
    if not np.array_equal(np.diag(m), parts.diagonal):
        raise ValueError("Diagonal is inconsistent with the other blocks")
    return Ptm.from_matrix(m)


def pauli_fidelities(ptm: Ptm) -> np.ndarray:
    return np.diag(ptm.matrix).copy()


def unital_offdiagonal_max(ptm: Ptm) -> float:
    """Largest |entry| off the diagonal of the unital block."""
    block = ptm.matrix[1:, 1:]
    off = block - np.diag(np.diag(block))
    return float(np.max(np.abs(off), initial=0.0))


def numerical_rank(ptm: Ptm, tol: float = RANK_TOL) -> int:
    """Singular values above tol * sigma_max."""
    sv = np.linalg.svd(ptm.matrix, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def entanglement_fidelity(ptm: Ptm, target: Ptm) -> float:
    """Tr[target^T Lambda] / d^2."""
    _same_size(ptm, target)
    return float(np.trace(target.matrix.T @ ptm.matrix) / ptm.dim)


def ptm_to_kraus(ptm: Ptm, tol: float = 1e-12) -> list[np.ndarray]:
    """Kraus operators from the Choi eigendecomposition (CP maps only).

    Eigenvalues below tol are dropped; negative ones beyond -tol are an error.
    """
    d = 2**ptm.n
    eigvals, eigvecs = np.linalg.eigh(ptm_to_choi(ptm))
    if eigvals.min() < -max(tol, CP_TOL):
        raise ValueError(f"Map is not CP (min Choi eigenvalue {eigvals.min():.3g})")
    kraus = []
    for value, vec in zip(eigvals, eigvecs.T):
        if value > tol:
            # J = sum_a,b |a><b| (x) E(|a><b|) with J = sum |k>><<k|, |k>> = sum_a |a>(x)K|a>
            kraus.append(np.sqrt(value) * vec.reshape(d, d).T)
    return kraus


def apply_kraus(kraus: Sequence, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    for k in kraus:
        k = np.asarray(k, dtype=complex)
        out += k @ rho @ k.conj().T
    return out
