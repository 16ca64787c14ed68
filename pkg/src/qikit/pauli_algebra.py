"""Pauli basis, state vectorization and PTM construction from Kraus operators.

Conventions used everywhere in qikit:

* Pauli labels are ordered IXYZ-lexicographically with the leftmost qubit
  most significant (n=2: II, IX, IY, IZ, XI, ...). Serialized files carry the
  token ``IXYZ-lex``.
* A Pauli vector holds ``v_P = Tr[P rho]``, so ``v_I = Tr[rho]`` and
  ``|0><0| -> (1, 0, 0, 1)``. ``devectorize`` carries the ``1/d``.
* A PTM has entries ``Lambda_ij = Tr[P_i E(P_j)] / d`` and acts on Pauli
  vectors by matrix multiplication.
"""

from __future__ import annotations

import functools
import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from qikit.config import max_qubits

logger = logging.getLogger(__name__)

PAULI_ORDER = "IXYZ-lex"
HERMITIAN_TOL = 1e-9

_SINGLE_QUBIT_PAULIS = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

NAMED_STATES = {
    "0": (1.0, 0.0, 0.0, 1.0),
    "1": (1.0, 0.0, 0.0, -1.0),
    "+": (1.0, 1.0, 0.0, 0.0),
    "-": (1.0, -1.0, 0.0, 0.0),
    "i": (1.0, 0.0, 1.0, 0.0),
    "-i": (1.0, 0.0, -1.0, 0.0),
    "mixed": (1.0, 0.0, 0.0, 0.0),
}

# A Pauli vector is a plain 1-D float array of length 4**n.
PauliVector = np.ndarray


class ResourceLimitError(ValueError):
    """Raised when a qubit count exceeds the dense-storage guard."""


def check_qubits(n: int) -> int:
    """Validate a qubit count against n >= 1 and the configured guard."""
    if n < 1:
        raise ValueError(f"Qubit count must be >= 1, got {n}")
    limit = max_qubits()
    if n > limit:
        raise ResourceLimitError(
            f"{n} qubits exceeds the dense-storage limit of {limit} "
            f"(override with QIKIT_MAX_QUBITS)"
        )
    return n


def qubits_for_dim(d: int) -> int:
    """Number of qubits for a Hilbert-space dimension d = 2**n."""
    n = int(d).bit_length() - 1
    if n < 1 or 2**n != d:
        raise ValueError(f"Dimension {d} is not a power of 2 (>= 2)")
    return n


def qubits_for_ptm_side(side: int) -> int:
    """Number of qubits for a PTM side (or Pauli vector length) 4**n."""
    n = (int(side).bit_length() - 1) // 2
    if n < 1 or 4**n != side:
        raise ValueError(f"Length {side} is not a power of 4 (>= 4)")
    return n


def _real(values: np.ndarray, what: str, tol: float = HERMITIAN_TOL) -> np.ndarray:
    residue = float(np.max(np.abs(np.imag(values)), initial=0.0))
    if residue >= tol:
        raise ValueError(f"{what} has imaginary residue {residue:.3g} (>= {tol:g})")
    return np.ascontiguousarray(np.real(values), dtype=float)


@dataclass(frozen=True)
class Ptm:
    """A 4**n x 4**n real Pauli transfer matrix.

    The matrix is copied and frozen on construction. Entries are not clipped
    to [-1, 1]: non-physical maps must stay representable so the validators
    can reject them.
    """

    matrix: np.ndarray
    n: int

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float)
        side = 4**self.n
        if m.shape != (side, side):
            raise ValueError(
                f"PTM for {self.n} qubit(s) must be {side}x{side}, got {m.shape}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, matrix) -> Ptm:
        m = np.asarray(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"PTM must be square, got shape {m.shape}")
        if np.iscomplexobj(m):
            m = _real(m, "PTM")
        return cls(m, qubits_for_ptm_side(m.shape[0]))

    @classmethod
    def identity(cls, n: int) -> Ptm:
        return cls(np.eye(4**n), n)

    @classmethod
    def zeros(cls, n: int) -> Ptm:
        return cls(np.zeros((4**n, 4**n)), n)

    @property
    def dim(self) -> int:
        """Side length 4**n."""
        return 4**self.n

    def __add__(self, other: Ptm) -> Ptm:
        if not isinstance(other, Ptm):
            return NotImplemented
        if other.n != self.n:
            raise ValueError(f"Cannot add PTMs on {self.n} and {other.n} qubits")
        return Ptm(self.matrix + other.matrix, self.n)

    def scaled(self, factor: float) -> Ptm:
        return Ptm(self.matrix * factor, self.n)


@functools.lru_cache(maxsize=None)
def pauli_labels(n: int) -> tuple[str, ...]:
    """All n-qubit Pauli labels in IXYZ-lex order."""
    if n < 1:
        raise ValueError(f"Qubit count must be >= 1, got {n}")
    return tuple("".join(chars) for chars in itertools.product("IXYZ", repeat=n))


def pauli_matrix(label: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis; leftmost character is qubit 0."""
    if not label:
        raise ValueError("Pauli label must be non-empty")
    bad = sorted(set(label) - set(_SINGLE_QUBIT_PAULIS))
    if bad:
        raise ValueError(f"Invalid Pauli character(s) {bad} in label {label!r}")
    return functools.reduce(np.kron, (_SINGLE_QUBIT_PAULIS[c] for c in label))


@functools.lru_cache(maxsize=None)
def pauli_basis(n: int) -> np.ndarray:
    """Stacked (4**n, 2**n, 2**n) read-only array of the Pauli matrices."""
    basis = np.stack([pauli_matrix(label) for label in pauli_labels(n)])
    basis.setflags(write=False)
    return basis


def vectorize(rho, tol: float = HERMITIAN_TOL) -> PauliVector:
    """Pauli vector v_P = Tr[P rho] of a Hermitian d x d matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {rho.shape}")
    n = qubits_for_dim(rho.shape[0])
    if not np.allclose(rho, rho.conj().T, rtol=0.0, atol=tol):
        raise ValueError("Input matrix is not Hermitian within tolerance")
    v = np.einsum("pab,ba->p", pauli_basis(n), rho)
    return _real(v, "Pauli vector")


def devectorize(v) -> np.ndarray:
    """Inverse of vectorize: rho = (1/d) sum_P v_P P."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"Pauli vector must be 1-D, got shape {v.shape}")
    n = qubits_for_ptm_side(v.shape[0])
    return np.einsum("p,pab->ab", v, pauli_basis(n)) / 2**n


def ptm_from_kraus(kraus: Sequence) -> Ptm:
    """PTM of rho -> sum_k K rho K^dagger."""
    ops = [np.asarray(k, dtype=complex) for k in kraus]
    if not ops:
        raise ValueError("At least one Kraus operator is required")
    shape = ops[0].shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ValueError(f"Kraus operators must be square, got shape {shape}")
    for op in ops[1:]:
        if op.shape != shape:
            raise ValueError(
                f"Kraus operator dimension mismatch: {op.shape} vs {shape}"
            )
    n = qubits_for_dim(shape[0])
    basis = pauli_basis(n)
    stacked = np.stack(ops)
    images = np.einsum("kab,jbc,kdc->jad", stacked, basis, stacked.conj())
    lam = np.einsum("iab,jba->ij", basis, images) / 2**n
    return Ptm(_real(lam, "PTM"), n)


def embed(ptm: Ptm, targets: Sequence[int], n_total: int) -> Ptm:
    """Lift a PTM on len(targets) qubits to n_total qubits (identity elsewhere)."""
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise ValueError(f"Duplicate target qubits in {targets}")
    for t in targets:
        if not 0 <= t < n_total:
            raise ValueError(f"Target qubit {t} out of range for {n_total} qubits")
    if len(targets) != ptm.n:
        raise ValueError(
            f"PTM acts on {ptm.n} qubit(s) but {len(targets)} target(s) given"
        )
    if n_total == ptm.n and targets == list(range(n_total)):
        return ptm

    rest = [q for q in range(n_total) if q not in targets]
    full = np.kron(ptm.matrix, np.eye(4 ** len(rest)))
    # axis j of the kron product belongs to qubit order[j]
    order = targets + rest
    perm = [order.index(q) for q in range(n_total)]
    tensor = full.reshape([4] * (2 * n_total))
    tensor = tensor.transpose(perm + [n_total + p for p in perm])
    side = 4**n_total
    return Ptm(tensor.reshape(side, side), n_total)


def basis_state(bits: str) -> np.ndarray:
    """Density matrix of the computational basis state |bits><bits|."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"Basis state must be a non-empty bit string, got {bits!r}")
    d = 2 ** len(bits)
    rho = np.zeros((d, d), dtype=complex)
    index = int(bits, 2)
    rho[index, index] = 1.0
    return rho


def named_state(token: str) -> PauliVector:
    """Single-qubit Pauli vector for one of the six Pauli eigenstates or 'mixed'."""
    try:
        return np.array(NAMED_STATES[token], dtype=float)
    except KeyError:
        raise ValueError(
            f"Unknown state token {token!r}; expected one of {sorted(NAMED_STATES)}"
        ) from None


def product_state(tokens: Sequence[str]) -> PauliVector:
    """Tensor product of named single-qubit states, qubit 0 first."""
    if not tokens:
        raise ValueError("At least one state token is required")
    return functools.reduce(np.kron, (named_state(t) for t in tokens))


def is_physical(v, tol: float = 1e-8) -> bool:
    """True if devectorize(v) is positive semidefinite to -tol."""
    rho = devectorize(v)
    rho = (rho + rho.conj().T) / 2
    return bool(np.linalg.eigvalsh(rho).min() >= -tol)
