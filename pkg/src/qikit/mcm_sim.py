"""Simulation of small circuits with mid-circuit measurements and feedback.

States are Pauli vectors of the full register. run_exact enumerates every
classical record depth-first; run_sampled walks the circuit once per shot,
drawing outcomes from a per-shot random stream derived from (seed, shot).
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from qikit import superoperator as so
from qikit.instrument import VALIDATE_TOL, QuantumInstrument, validate
from qikit.pauli_algebra import Ptm, PauliVector, check_qubits, embed

logger = logging.getLogger(__name__)

P_MIN = 1e-12
CONSERVATION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Channel:
    ptm: Ptm
    targets: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Measure:
    instrument: QuantumInstrument
    targets: tuple[int, ...]
    register: str


@dataclass(frozen=True, eq=False)
class Conditional:
    """Apply ptm only when every register in `when` holds the given label."""

    ptm: Ptm
    targets: tuple[int, ...]
    when: Mapping[str, str]

    def matches(self, record: Mapping[str, str]) -> bool:
        return all(record.get(reg) == label for reg, label in self.when.items())


Instruction = Union[Channel, Measure, Conditional]


@dataclass(frozen=True, eq=False)
class Circuit:
    n: int
    instructions: tuple[Instruction, ...] = ()
    description: str | None = None

    def __post_init__(self) -> None:
        check_qubits(self.n)
        object.__setattr__(self, "instructions", tuple(self.instructions))

    @property
    def registers(self) -> list[str]:
        return [ins.register for ins in self.instructions if isinstance(ins, Measure)]

    def check_structure(self) -> None:
        """Targets in range, unique registers, predicates over earlier registers."""
        written: set[str] = set()
        for index, ins in enumerate(self.instructions):
            targets = list(ins.targets)
            if len(set(targets)) != len(targets):
                raise ValueError(f"Instruction {index}: duplicate targets {targets}")
            for t in targets:
                if not 0 <= t < self.n:
                    raise ValueError(
                        f"Instruction {index}: target {t} out of range for {self.n} qubit(s)"
                    )
            width = ins.instrument.n if isinstance(ins, Measure) else ins.ptm.n
            if width != len(targets):
                raise ValueError(
                    f"Instruction {index}: acts on {width} qubit(s) but "
                    f"{len(targets)} target(s) given"
                )
            if isinstance(ins, Measure):
                if ins.register in written:
                    raise ValueError(
                        f"Instruction {index}: register {ins.register!r} is already written"
                    )
                written.add(ins.register)
            elif isinstance(ins, Conditional):
                unknown = sorted(set(ins.when) - written)
                if unknown:
                    raise ValueError(
                        f"Instruction {index}: predicate references unwritten "
                        f"register(s) {unknown}"
                    )

    def validate(self, tol: float = VALIDATE_TOL) -> list[str]:
        """Structure errors raise; physicality problems are returned as strings."""
        self.check_structure()
        problems = []
        for index, ins in enumerate(self.instructions):
            if isinstance(ins, Measure):
                report = validate(ins.instrument, tol)
                problems += [f"instruction {index}: {p}" for p in report.problems]
            else:
                check = so.is_tp(ins.ptm, tol)
                if not check:
                    problems.append(
                        f"instruction {index}: channel is not TP "
                        f"(residual {check.value:.3g})"
                    )
        return problems


@dataclass
class BranchState:
    record: dict[str, str]
    probability: float
    state: PauliVector


@dataclass
class ExactResult:
    branches: list[BranchState]
    pruned_mass: float
    registers: list[str] = field(default_factory=list)

    @property
    def total_probability(self) -> float:
        return float(sum(b.probability for b in self.branches))


@dataclass(frozen=True)
class ShotRecord:
    shot_index: int
    record: dict[str, str]


# compiled forms: full-register PTM matrices
@dataclass(frozen=True, eq=False)
class _Op:
    kind: str
    matrix: np.ndarray | None = None
    branches: tuple[tuple[str, np.ndarray], ...] = ()
    register: str | None = None
    condition: Conditional | None = None


def _compile(circuit: Circuit) -> list[_Op]:
    circuit.check_structure()
    ops = []
    for ins in circuit.instructions:
        if isinstance(ins, Measure):
            branches = tuple(
                (label, embed(ptm, ins.targets, circuit.n).matrix)
                for label, ptm in ins.instrument
            )
            ops.append(_Op("measure", branches=branches, register=ins.register))
        else:
            matrix = embed(ins.ptm, ins.targets, circuit.n).matrix
            condition = ins if isinstance(ins, Conditional) else None
            ops.append(_Op("channel", matrix=matrix, condition=condition))
    return ops


def _initial(circuit: Circuit, v0) -> np.ndarray:
    v0 = np.asarray(v0, dtype=float)
    if v0.shape != (4**circuit.n,):
        raise ValueError(
            f"Initial Pauli vector of shape {v0.shape} does not match "
            f"{circuit.n} qubit(s) (length {4**circuit.n})"
        )
    return v0


def _advance(ops: list[_Op], index: int, record: dict[str, str], state: np.ndarray):
    """Apply channels until the next measurement (or the end)."""
    while index < len(ops) and ops[index].kind != "measure":
        op = ops[index]
        if op.condition is None or op.condition.matches(record):
            state = op.matrix @ state
        index += 1
    return index, state


def run_exact(circuit: Circuit, v0: PauliVector, p_min: float = P_MIN) -> ExactResult:
    """Enumerate every outcome record; records at or below p_min are pruned."""
    ops = _compile(circuit)
    branches: list[BranchState] = []
    pruned = 0.0
    stack = [(0, {}, 1.0, _initial(circuit, v0))]
    while stack:
        index, record, prob, state = stack.pop()
        index, state = _advance(ops, index, record, state)
        if index == len(ops):
            branches.append(BranchState(record, prob, state))
            continue
        op = ops[index]
        children = []
        for label, matrix in op.branches:
            out = matrix @ state
            child_prob = prob * out[0]
            if child_prob <= p_min:
                pruned += child_prob
                continue
            children.append((index + 1, {**record, op.register: label}, child_prob, out / out[0]))
        stack.extend(reversed(children))

    total = sum(b.probability for b in branches) + pruned
    if abs(total - 1.0) > CONSERVATION_TOL:
        logger.warning("Probability not conserved: branches + pruned = %.12g", total)
    logger.debug("run_exact: %d branch(es), pruned mass %.3g", len(branches), pruned)
    return ExactResult(branches, float(pruned), circuit.registers)


class _Sampler:
    """Per-shot walker; conditional distributions are cached by record prefix."""

    def __init__(self, circuit: Circuit, v0: np.ndarray, seed: int):
        self.ops = _compile(circuit)
        self.v0 = v0
        self.seed = seed
        self.n_measure = sum(op.kind == "measure" for op in self.ops)
        self._cache: dict[tuple, tuple] = {}

    def _distribution(self, index: int, record: dict[str, str], state: np.ndarray):
        key = (index, tuple(record.items()))
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        op = self.ops[index]
        labels, probs, states = [], [], []
        for label, matrix in op.branches:
            out = matrix @ state
            if out[0] > 0.0:
                labels.append(label)
                probs.append(out[0])
                states.append(out / out[0])
        total = float(sum(probs))
        if not labels:
            raise ValueError(f"Measurement {op.register!r} has no outcome with p > 0")
        if abs(total - 1.0) > 1e-6:
            logger.warning(
                "Outcome probabilities for %r sum to %.6g; renormalizing",
                op.register,
                total,
            )
        cdf = np.cumsum(np.array(probs) / total)
        cdf[-1] = 1.0
        self._cache[key] = cached = (labels, cdf, states)
        return cached

    def shot(self, shot_index: int) -> ShotRecord:
        rng = np.random.default_rng([self.seed, shot_index])
        draws = rng.random(self.n_measure)
        record: dict[str, str] = {}
        state = self.v0
        index, drawn = 0, 0
        while True:
            index, state = _advance(self.ops, index, record, state)
            if index == len(self.ops):
                return ShotRecord(shot_index, record)
            labels, cdf, states = self._distribution(index, record, state)
            k = min(int(np.searchsorted(cdf, draws[drawn], side="right")), len(labels) - 1)
            record = {**record, self.ops[index].register: labels[k]}
            state = states[k]
            index += 1
            drawn += 1


def run_sampled(
    circuit: Circuit,
    v0: PauliVector,
    shots: int,
    seed: int,
    workers: int = 1,
) -> list[ShotRecord]:
    """Monte Carlo shots; shot k uses the stream default_rng([seed, k])."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    sampler = _Sampler(circuit, _initial(circuit, v0), seed)
    if workers <= 1:
        return [sampler.shot(k) for k in range(shots)]
    bounds = np.linspace(0, shots, workers + 1).astype(int)
    chunks = [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda chunk: [sampler.shot(k) for k in chunk], chunks)
    return [record for part in parts for record in part]


def _check_registers(known: Sequence[str], registers: Sequence[str]) -> None:
    unknown = [r for r in registers if r not in known]
    if unknown:
        raise ValueError(f"Unknown register(s) {unknown}; known: {list(known)}")


def marginal_distribution(
    branches: Sequence[BranchState],
    registers: Sequence[str],
    known: Sequence[str] | None = None,
) -> dict[tuple[str, ...], float]:
    """Probability of each value tuple of the selected registers.

    `known` is the circuit's register list; without it the registers are
    read off the branch records. No branches gives an empty distribution.
    """
    if known is None:
        known = []
        for b in branches:
            known += [r for r in b.record if r not in known]
    _check_registers(known, registers)
    dist: dict[tuple[str, ...], float] = defaultdict(float)
    for b in branches:
        dist[tuple(b.record[r] for r in registers)] += b.probability
    if not registers and not dist:
        dist[()] = 0.0
    return dict(sorted(dist.items()))


def counts(
    shots: Sequence[ShotRecord], registers: Sequence[str] | None = None
) -> dict[tuple[str, ...], int]:
    """Shot counts per value tuple (all registers by default)."""
    if not shots:
        return {}
    known = list(shots[0].record)
    registers = known if registers is None else list(registers)
    _check_registers(known, registers)
    tally = Counter(tuple(s.record[r] for r in registers) for s in shots)
    return dict(sorted(tally.items()))
