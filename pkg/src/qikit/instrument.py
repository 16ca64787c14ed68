"""Quantum instruments as outcome-labeled PTM branches, and their diagnostics.

An instrument maps rho -> sum_i E_i(rho) (x) |i><i|. Each branch E_i is stored
as its PTM; Tr[E_i(rho)] is the top row of that PTM dotted into the Pauli
vector of rho, and the branches must add up to a trace-preserving map.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from qikit import superoperator as so
from qikit.models import (
    BranchDiagnostics,
    BranchValidation,
    DiagnosticReport,
    PovmEffectReport,
    ValidationReport,
)
from qikit.pauli_algebra import (
    Ptm,
    PauliVector,
    basis_state,
    check_qubits,
    pauli_basis,
    ptm_from_kraus,
    vectorize,
)

logger = logging.getLogger(__name__)

P_FLOOR = 1e-12
VALIDATE_TOL = 1e-6
LABEL_SEPARATOR = ","

# thresholds for the plain-language findings in diagnose()
FINDING_TOL = 5e-3
TILT_FINDING_DEGREES = 0.1
ZZ_ASYMMETRY_FINDING = 0.02


class UndefinedStateError(ValueError):
    """A conditional state or axis that rho_i = E_i(rho)/p_i cannot define."""


class OutcomeBranch(NamedTuple):
    label: str
    probability: float
    state: PauliVector


class MeasurementAxis(NamedTuple):
    axis: np.ndarray
    tilt_degrees: float


@dataclass(frozen=True)
class PovmEffect:
    label: str
    matrix: np.ndarray
    coefficients: np.ndarray  # E = sum_P coefficients[P] * P


@dataclass(frozen=True)
class QuantumInstrument:
    """Ordered, outcome-labeled PTM branches on n qubits.

    Construction checks structure only (labels, dimensions). Physicality is
    reported by validate(), so non-physical instruments stay representable.
    """

    n: int
    outcomes: tuple[tuple[str, Ptm], ...]

    def __post_init__(self) -> None:
        outcomes = tuple((str(label), ptm) for label, ptm in self.outcomes)
        if not outcomes:
            raise ValueError("An instrument needs at least one outcome")
        labels = [label for label, _ in outcomes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"Duplicate outcome labels in {labels}")
        for label, ptm in outcomes:
            if not isinstance(ptm, Ptm):
                raise ValueError(f"Outcome {label!r}: branch must be a Ptm")
            if ptm.n != self.n:
                raise ValueError(
                    f"Outcome {label!r}: branch acts on {ptm.n} qubit(s), "
                    f"instrument on {self.n}"
                )
        object.__setattr__(self, "outcomes", outcomes)

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.outcomes]

    def branch(self, label: str) -> Ptm:
        for name, ptm in self.outcomes:
            if name == label:
                return ptm
        raise ValueError(f"Unknown outcome {label!r}; expected one of {self.labels}")

    def __len__(self) -> int:
        return len(self.outcomes)

    def __iter__(self) -> Iterator[tuple[str, Ptm]]:
        return iter(self.outcomes)


def _check_vector(instr: QuantumInstrument, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (4**instr.n,):
        raise ValueError(
            f"Pauli vector of shape {v.shape} does not match a "
            f"{instr.n}-qubit instrument (length {4**instr.n})"
        )
    return v


def _bitstrings(n: int) -> list[str]:
    return [format(b, f"0{n}b") for b in range(2**n)]


def _ideal_branch(bits: str) -> Ptm:
    return ptm_from_kraus([basis_state(bits)])


# --- Construction ---


def from_kraus(branches: Mapping[str, Sequence]) -> QuantumInstrument:
    outcomes = [(label, ptm_from_kraus(kraus)) for label, kraus in branches.items()]
    if not outcomes:
        raise ValueError("An instrument needs at least one outcome")
    return QuantumInstrument(outcomes[0][1].n, tuple(outcomes))


def ideal_projective_instrument(n: int) -> QuantumInstrument:
    """Computational-basis measurement; outcome b keeps |b><b| as its only Kraus op."""
    check_qubits(n)
    return QuantumInstrument(n, tuple((b, _ideal_branch(b)) for b in _bitstrings(n)))


def uninformative_instrument(n: int, labels: Sequence[str]) -> QuantumInstrument:
    """Leaves the state alone and reports a uniformly random label."""
    check_qubits(n)
    share = Ptm.identity(n).scaled(1.0 / len(labels))
    return QuantumInstrument(n, tuple((label, share) for label in labels))


def wrap(
    instr: QuantumInstrument,
    pre: Ptm | None = None,
    post_by_outcome: Mapping[str, Ptm] | None = None,
    tol: float = 1e-9,
) -> QuantumInstrument:
    """branch_i <- post_i . branch_i . pre; missing posts are the identity."""
    pre = pre if pre is not None else Ptm.identity(instr.n)
    post_by_outcome = dict(post_by_outcome or {})
    unknown = sorted(set(post_by_outcome) - set(instr.labels))
    if unknown:
        raise ValueError(f"Unknown outcome label(s) {unknown} in post maps")
    wrappers = [("pre", pre)] + [(f"post[{k}]", p) for k, p in post_by_outcome.items()]
    for name, ptm in wrappers:
        if ptm.n != instr.n:
            raise ValueError(
                f"{name} acts on {ptm.n} qubit(s), instrument on {instr.n}"
            )
        check = so.is_tp(ptm, tol)
        if not check:
            raise ValueError(
                f"{name} wrapper is not trace preserving (residual {check.value:.3g})"
            )
    outcomes = []
    for label, branch in instr:
        post = post_by_outcome.get(label, Ptm.identity(instr.n))
        outcomes.append((label, so.compose(post, so.compose(branch, pre))))
    return QuantumInstrument(instr.n, tuple(outcomes))


def mix(a: QuantumInstrument, b: QuantumInstrument, weight: float) -> QuantumInstrument:
    """(1 - weight) * a + weight * b, branchwise, over a's label order."""
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must be in [0, 1], got {weight}")
    if a.n != b.n:
        raise ValueError(f"Cannot mix instruments on {a.n} and {b.n} qubits")
    if set(a.labels) != set(b.labels):
        raise ValueError(f"Label sets differ: {a.labels} vs {b.labels}")
    outcomes = tuple(
        (label, ptm.scaled(1.0 - weight) + b.branch(label).scaled(weight))
        for label, ptm in a
    )
    return QuantumInstrument(a.n, outcomes)


def compose(
    second: QuantumInstrument,
    first: QuantumInstrument,
    separator: str = LABEL_SEPARATOR,
) -> QuantumInstrument:
    """first, then second; labels read first-measurement-first."""
    if first.n != second.n:
        raise ValueError(
            f"Cannot compose instruments on {first.n} and {second.n} qubits"
        )
    outcomes = tuple(
        (f"{a}{separator}{b}", so.compose(fb, fa))
        for a, fa in first
        for b, fb in second
    )
    return QuantumInstrument(first.n, outcomes)


# --- Action on states ---


def discard(instr: QuantumInstrument) -> Ptm:
    """The channel obtained by forgetting the outcome."""
    total = Ptm.zeros(instr.n)
    for _, ptm in instr:
        total = total + ptm
    return total


def outcome_probabilities(instr: QuantumInstrument, v: PauliVector) -> np.ndarray:
    v = _check_vector(instr, v)
    return np.array([ptm.matrix[0] @ v for _, ptm in instr])


def post_measurement_state(
    instr: QuantumInstrument,
    outcome: str,
    v: PauliVector,
    p_floor: float = P_FLOOR,
) -> PauliVector:
    v = _check_vector(instr, v)
    out = so.apply(instr.branch(outcome), v)
    p = out[0]
    if p <= p_floor:
        raise UndefinedStateError(
            f"Outcome {outcome!r} has probability {p:.3g} <= {p_floor:g}; "
            f"its post-measurement state is undefined"
        )
    return out / p


def apply(
    instr: QuantumInstrument, v: PauliVector, p_floor: float = P_FLOOR
) -> list[OutcomeBranch]:
    """Outcomes with p > p_floor, each with its normalized post-measurement state."""
    v = _check_vector(instr, v)
    result = []
    for label, ptm in instr:
        out = so.apply(ptm, v)
        if out[0] > p_floor:
            result.append(OutcomeBranch(label, float(out[0]), out / out[0]))
    return result


# --- Validation ---


def validate(instr: QuantumInstrument, tol: float = VALIDATE_TOL) -> ValidationReport:
    """Every branch CP and trace-nonincreasing, and the sum TP, all to tol."""
    tp = so.is_tp(discard(instr), tol)
    branches = []
    problems = []
    for label, ptm in instr:
        cp = so.is_cp(ptm, tol)
        tni = so.is_trace_nonincreasing(ptm, tol)
        branches.append(
            BranchValidation(
                label=label,
                cp_min_eigenvalue=cp.value,
                completely_positive=cp.ok,
                trace_nonincreasing=tni.ok,
                trace_margin=tni.value,
            )
        )
        if not cp:
            problems.append(
                f"outcome {label!r} is not CP (min Choi eigenvalue {cp.value:.3g})"
            )
        if not tni:
            problems.append(
                f"outcome {label!r} can increase trace (margin {tni.value:.3g})"
            )
    if not tp:
        problems.append(
            f"TP violation: branches sum to a map with top-row residual {tp.value:.3g}"
        )
    logger.debug("validate: %d branch(es), tp_residual=%.3g", len(instr), tp.value)
    return ValidationReport(
        passed=not problems,
        tolerance=tol,
        tp_residual=tp.value,
        branches=branches,
        problems=problems,
    )


def tp_dependence_residual(instr: QuantumInstrument) -> float | None:
    """Two-outcome instruments: max deviation of top1 from (delta_0j - top0)."""
    if len(instr) != 2:
        return None
    (_, first), (_, second) = instr.outcomes
    expected = -first.matrix[0].copy()
    expected[0] += 1.0
    return float(np.max(np.abs(second.matrix[0] - expected)))


# --- Readout ---


def readout_labels(instr: QuantumInstrument) -> list[str]:
    """Row order of the confusion matrix.

    Outcomes labelled by the n-bit strings are put in basis order, so the
    row for label b sits at basis index b. Any other labelling keeps the
    instrument's own order.
    """
    basis = _bitstrings(instr.n)
    if sorted(instr.labels) == basis:
        return basis
    return list(instr.labels)


def confusion_matrix(instr: QuantumInstrument) -> np.ndarray:
    """Entry (k, b) = p(outcome k | basis state b prepared), rows in readout_labels order."""
    columns = [
        outcome_probabilities(instr, vectorize(basis_state(b)))
        for b in _bitstrings(instr.n)
    ]
    rows = [instr.labels.index(label) for label in readout_labels(instr)]
    return np.stack(columns, axis=1)[rows]


def assignment_fidelity(m, labels: Sequence[str] | None = None) -> float:
    """Mean probability of reporting the prepared basis state.

    With labels, entry (k, b) counts only when row k is labelled by the
    bitstring of b; a basis state with no matching outcome contributes 0.
    """
    m = np.asarray(m, dtype=float)
    if labels is None:
        return float(np.mean(np.diag(m)))
    labels = list(labels)
    n = int(round(math.log2(m.shape[1])))
    hits = [
        m[labels.index(b), j] if b in labels else 0.0
        for j, b in enumerate(_bitstrings(n))
    ]
    return float(np.mean(hits))


def povm_effects(instr: QuantumInstrument) -> list[PovmEffect]:
    """E_i = sum_j Lambda^(i)_0j P_j, so that p(i|rho) = Tr[E_i rho]."""
    basis = pauli_basis(instr.n)
    effects = []
    for label, ptm in instr:
        coeffs = ptm.matrix[0].copy()
        effects.append(PovmEffect(label, np.einsum("p,pab->ab", coeffs, basis), coeffs))
    return effects


def measurement_axis(effect: PovmEffect) -> MeasurementAxis:
    """Bloch direction of a single-qubit effect and its angle from the nearer Z pole."""
    if effect.coefficients.shape != (4,):
        raise ValueError("measurement_axis is defined for single-qubit effects only")
    bloch = effect.coefficients[1:]
    norm = float(np.linalg.norm(bloch))
    if norm <= P_FLOOR:
        raise UndefinedStateError(
            f"Effect {effect.label!r} has no traceless part; its axis is undefined"
        )
    axis = bloch / norm
    tilt = math.degrees(math.atan2(math.hypot(axis[0], axis[1]), abs(axis[2])))
    return MeasurementAxis(axis, tilt)


# --- Back-action ---


def is_measure_and_prepare(instr: QuantumInstrument, tol: float = so.RANK_TOL) -> bool:
    return all(so.numerical_rank(ptm, tol) == 1 for _, ptm in instr)


def qnd_repeatability(instr: QuantumInstrument, v: PauliVector) -> float:
    """Probability that two back-to-back uses report the same outcome."""
    v = _check_vector(instr, v)
    return float(sum(ptm.matrix[0] @ (ptm.matrix @ v) for _, ptm in instr))


def post_basis_states(
    instr: QuantumInstrument, p_floor: float = P_FLOOR
) -> dict[str, PauliVector]:
    """State after outcome b given input |b>, for basis labels b that occur."""
    states = {}
    labels = set(instr.labels)
    for bits in _bitstrings(instr.n):
        if bits not in labels:
            continue
        try:
            states[bits] = post_measurement_state(
                instr, bits, vectorize(basis_state(bits)), p_floor
            )
        except UndefinedStateError:
            logger.debug("No post-basis state for outcome %r (p <= floor)", bits)
    return states


# --- Full report ---


def _findings(
    instr: QuantumInstrument,
    branches: list[BranchDiagnostics],
    fidelity: float,
    effects: list[PovmEffectReport],
    repeatability: dict[str, float],
    measure_and_prepare: bool,
) -> list[str]:
    findings = []
    if fidelity < 1.0 - FINDING_TOL:
        findings.append(f"assignment fidelity {fidelity:.4f} is below 1")
    for eff in effects:
        if eff.tilt_degrees is not None and eff.tilt_degrees > TILT_FINDING_DEGREES:
            findings.append(
                f"measurement axis of outcome {eff.label!r} tilted by "
                f"{eff.tilt_degrees:.2f} deg from Z"
            )
    basis_labels = set(_bitstrings(instr.n))
    for diag in branches:
        if diag.label in basis_labels:
            ideal_col = _ideal_branch(diag.label).matrix[:, 0]
            deviation = float(np.max(np.abs(np.array(diag.nonunital_col) - ideal_col)))
            if deviation > FINDING_TOL:
                findings.append(
                    f"first column of outcome {diag.label!r} deviates from ideal by "
                    f"{deviation:.3f} (non-unital error, e.g. T1 decay)"
                )
        if diag.unital_offdiagonal_max > FINDING_TOL:
            findings.append(
                f"unital block of outcome {diag.label!r} has off-diagonal entries up "
                f"to {diag.unital_offdiagonal_max:.3f} (coherent error)"
            )
    if instr.n == 1 and sorted(instr.labels) == ["0", "1"]:
        by_label = {diag.label: diag.pauli_fidelities[3] for diag in branches}
        zz = [by_label["0"], by_label["1"]]
        if zz[0] - zz[1] > ZZ_ASYMMETRY_FINDING:
            findings.append(
                f"Z polarization after outcome '1' ({zz[1]:.2f}) is below outcome "
                f"'0' ({zz[0]:.2f}), consistent with T1 decay during measurement"
            )
    if not measure_and_prepare:
        findings.append(
            "branches are not all rank-1: the post-measurement state depends on "
            "more than the outcome"
        )
    worst = min(repeatability.values())
    if worst < 1.0 - FINDING_TOL:
        findings.append(f"repeated measurement disagrees with probability up to {1 - worst:.3f}")
    return findings


def diagnose(
    instr: QuantumInstrument,
    tol: float = VALIDATE_TOL,
    rank_tol: float = so.RANK_TOL,
    p_floor: float = P_FLOOR,
) -> DiagnosticReport:
    """Run the full error analysis; a pure function of the instrument."""
    validation = validate(instr, tol)
    if not validation.passed:
        logger.warning("Diagnosing an instrument that fails validation: %s", validation.problems)

    basis_labels = set(_bitstrings(instr.n))
    branches = []
    for check, (label, ptm) in zip(validation.branches, instr):
        parts = so.blocks(ptm)
        ideal_fid = None
        if label in basis_labels:
            ideal_fid = so.entanglement_fidelity(ptm, _ideal_branch(label))
        branches.append(
            BranchDiagnostics(
                **check.model_dump(),
                tp_row=parts.tp_row.tolist(),
                nonunital_col=parts.nonunital_col.tolist(),
                pauli_fidelities=parts.diagonal.tolist(),
                numerical_rank=so.numerical_rank(ptm, rank_tol),
                unital_offdiagonal_max=so.unital_offdiagonal_max(ptm),
                entanglement_fidelity_to_ideal=ideal_fid,
            )
        )

    confusion = confusion_matrix(instr)
    rows = readout_labels(instr)
    fidelity = assignment_fidelity(confusion, rows)

    effects = []
    for effect in povm_effects(instr):
        axis = tilt = None
        if instr.n == 1:
            try:
                measured = measurement_axis(effect)
                axis, tilt = measured.axis.tolist(), measured.tilt_degrees
            except UndefinedStateError:
                pass
        effects.append(
            PovmEffectReport(
                label=effect.label,
                pauli_coefficients=effect.coefficients.tolist(),
                eigenvalues=np.linalg.eigvalsh(effect.matrix).tolist(),
                axis=axis,
                tilt_degrees=tilt,
            )
        )

    mp = is_measure_and_prepare(instr, rank_tol)
    repeatability = {
        b: qnd_repeatability(instr, vectorize(basis_state(b)))
        for b in _bitstrings(instr.n)
    }
    mixed = np.zeros(4**instr.n)
    mixed[0] = 1.0
    post_mixed = {
        branch.label: branch.state.tolist() for branch in apply(instr, mixed, p_floor)
    }
    post_basis = {b: s.tolist() for b, s in post_basis_states(instr, p_floor).items()}
    total = discard(instr)

    return DiagnosticReport(
        num_qubits=instr.n,
        labels=instr.labels,
        passed=validation.passed,
        tp_residual=validation.tp_residual,
        tp_dependence_residual=tp_dependence_residual(instr),
        branches=branches,
        confusion=confusion.tolist(),
        confusion_rows=rows,
        assignment_fidelity=fidelity,
        effects=effects,
        measure_and_prepare=mp,
        qnd_repeatability=repeatability,
        post_mixed_states=post_mixed,
        post_basis_states=post_basis,
        discard_pauli_fidelities=so.pauli_fidelities(total).tolist(),
        discard_nonunital_col=so.blocks(total).nonunital_col.tolist(),
        discard_is_unital=so.is_unital(total, tol).ok,
        findings=_findings(instr, branches, fidelity, effects, repeatability, mp),
        problems=validation.problems,
    )

