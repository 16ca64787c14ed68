"""Kraus library -- named gates and standard noise channels."""

from __future__ import annotations

import functools
from collections.abc import Sequence

import numpy as np

from qikit.pauli_algebra import Ptm, pauli_matrix, ptm_from_kraus

Kraus = list[np.ndarray]

_I = pauli_matrix("I")
_X = pauli_matrix("X")
_Y = pauli_matrix("Y")
_Z = pauli_matrix("Z")


def _probability(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")
    return value


def identity(n: int = 1) -> Kraus:
    return [np.eye(2**n, dtype=complex)]


def rotation(axis: str, theta: float) -> Kraus:
    """exp(-i theta/2 sigma_axis)."""
    paulis = {"x": _X, "y": _Y, "z": _Z}
    try:
        sigma = paulis[axis.lower()]
    except KeyError:
        raise ValueError(f"Rotation axis must be x, y or z, got {axis!r}") from None
    theta = float(theta)
    return [np.cos(theta / 2) * _I - 1j * np.sin(theta / 2) * sigma]


def amplitude_damping(gamma: float) -> Kraus:
    g = _probability(gamma, "gamma")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - g)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(g)], [0, 0]], dtype=complex)
    return [k0, k1]


def dephasing(p: float) -> Kraus:
    """rho -> (1-p) rho + p Z rho Z."""
    p = _probability(p, "p")
    return [np.sqrt(1 - p) * _I, np.sqrt(p) * _Z]


def depolarizing(p: float) -> Kraus:
    """rho -> (1-p) rho + p I/2; Pauli fidelities (1, 1-p, 1-p, 1-p)."""
    p = _probability(p, "p")
    return [np.sqrt(1 - 3 * p / 4) * _I] + [np.sqrt(p / 4) * s for s in (_X, _Y, _Z)]


def bit_flip(p: float) -> Kraus:
    p = _probability(p, "p")
    return [np.sqrt(1 - p) * _I, np.sqrt(p) * _X]


_FIXED_GATES = {
    "i": _I,
    "x": _X,
    "y": _Y,
    "z": _Z,
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
    "cx": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
}

_PARAMETRIC = {
    "rx": functools.partial(rotation, "x"),
    "ry": functools.partial(rotation, "y"),
    "rz": functools.partial(rotation, "z"),
    "amplitude_damping": amplitude_damping,
    "dephasing": dephasing,
    "depolarizing": depolarizing,
    "bit_flip": bit_flip,
}

GATE_NAMES = tuple(sorted(_FIXED_GATES) + sorted(_PARAMETRIC))


def gate_kraus(name: str, params: Sequence[float] = ()) -> Kraus:
    """Kraus operators for a named gate or channel."""
    key = name.lower()
    if key in _FIXED_GATES:
        if params:
            raise ValueError(f"Gate {name!r} takes no parameters, got {list(params)}")
        return [_FIXED_GATES[key].copy()]
    if key in _PARAMETRIC:
        if len(params) != 1:
            raise ValueError(
                f"Gate {name!r} takes exactly one parameter, got {list(params)}"
            )
        return _PARAMETRIC[key](params[0])
    raise ValueError(f"Unknown gate {name!r}; expected one of {list(GATE_NAMES)}")


def gate_ptm(name: str, params: Sequence[float] = ()) -> Ptm:
    return ptm_from_kraus(gate_kraus(name, params))


def local_ptm(kraus: Kraus, n: int) -> Ptm:
    """The same single-qubit channel on each of n qubits."""
    ptm = ptm_from_kraus(kraus)
    if ptm.n != 1:
        raise ValueError(f"local_ptm expects a single-qubit channel, got {ptm.n} qubits")
    return Ptm(functools.reduce(np.kron, [ptm.matrix] * n), n)
