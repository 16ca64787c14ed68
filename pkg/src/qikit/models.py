"""Pydantic models for instrument/circuit files and diagnostic reports."""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from qikit.pauli_algebra import PAULI_ORDER

FORMAT_VERSION = "1"


# --- Files ---


class OutcomeEntry(BaseModel):
    label: str
    ptm: list[float]


class InstrumentFile(BaseModel):
    format_version: Literal["1"] = FORMAT_VERSION
    num_qubits: int = Field(..., ge=1)
    pauli_order: Literal["IXYZ-lex"] = PAULI_ORDER
    description: str | None = None
    outcomes: list[OutcomeEntry] = Field(..., min_length=1)

    @model_validator(mode="after")
    def check_shapes(self) -> InstrumentFile:
        expected = 16**self.num_qubits
        labels = [o.label for o in self.outcomes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"Outcome labels must be unique, got {labels}")
        for o in self.outcomes:
            if len(o.ptm) != expected:
                raise ValueError(
                    f"Outcome {o.label!r}: PTM has {len(o.ptm)} entries, "
                    f"expected {expected} for {self.num_qubits} qubit(s)"
                )
        return self


class PtmFile(BaseModel):
    format_version: Literal["1"] = FORMAT_VERSION
    num_qubits: int = Field(..., ge=1)
    pauli_order: Literal["IXYZ-lex"] = PAULI_ORDER
    description: str | None = None
    ptm: list[float]

    @model_validator(mode="after")
    def check_length(self) -> PtmFile:
        expected = 16**self.num_qubits
        if len(self.ptm) != expected:
            raise ValueError(
                f"PTM has {len(self.ptm)} entries, expected {expected} "
                f"for {self.num_qubits} qubit(s)"
            )
        return self


class _GateSpec(BaseModel):
    targets: list[int] = Field(..., min_length=1)
    gate: str | None = None
    params: list[float] = Field(default_factory=list)
    ptm: list[float] | None = None

    @field_validator("targets")
    @classmethod
    def validate_targets(cls, v: list[int]) -> list[int]:
        if len(set(v)) != len(v):
            raise ValueError(f"Duplicate targets {v}")
        if any(t < 0 for t in v):
            raise ValueError(f"Targets must be non-negative, got {v}")
        return v

    @model_validator(mode="after")
    def gate_or_ptm(self):
        if (self.gate is None) == (self.ptm is None):
            raise ValueError("Exactly one of 'gate' or 'ptm' must be given")
        if self.ptm is not None and len(self.ptm) != 16 ** len(self.targets):
            raise ValueError(
                f"PTM has {len(self.ptm)} entries, expected "
                f"{16 ** len(self.targets)} for {len(self.targets)} target(s)"
            )
        return self


class ChannelInstruction(_GateSpec):
    op: Literal["channel"]


class ConditionalInstruction(_GateSpec):
    op: Literal["conditional"]
    when: dict[str, str] = Field(..., min_length=1)


class MeasureInstruction(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    op: Literal["measure"]
    targets: list[int] = Field(..., min_length=1)
    # "register" on disk; the name itself is taken by BaseModel
    register_name: str = Field(..., min_length=1, alias="register")
    # None -> ideal projective measurement; str -> path relative to the circuit file
    instrument: str | InstrumentFile | None = None

    @field_validator("targets")
    @classmethod
    def validate_targets(cls, v: list[int]) -> list[int]:
        if len(set(v)) != len(v):
            raise ValueError(f"Duplicate targets {v}")
        if any(t < 0 for t in v):
            raise ValueError(f"Targets must be non-negative, got {v}")
        return v


Instruction = Annotated[
    Union[ChannelInstruction, MeasureInstruction, ConditionalInstruction],
    Field(discriminator="op"),
]


class CircuitFile(BaseModel):
    format_version: Literal["1"] = FORMAT_VERSION
    num_qubits: int = Field(..., ge=1)
    description: str | None = None
    initial_state: str = "0"
    instructions: list[Instruction] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_targets_in_range(self) -> CircuitFile:
        for index, ins in enumerate(self.instructions):
            for t in ins.targets:
                if t >= self.num_qubits:
                    raise ValueError(
                        f"Instruction {index}: target {t} out of range for "
                        f"{self.num_qubits} qubit(s)"
                    )
        return self


# --- Reports ---


class BranchValidation(BaseModel):
    label: str
    cp_min_eigenvalue: float
    completely_positive: bool
    trace_nonincreasing: bool
    trace_margin: float  # min eigenvalue of I - Tr_out(J)


class ValidationReport(BaseModel):
    passed: bool
    tolerance: float
    tp_residual: float
    branches: list[BranchValidation]
    problems: list[str] = Field(default_factory=list)


class BranchDiagnostics(BranchValidation):
    tp_row: list[float]
    nonunital_col: list[float]
    pauli_fidelities: list[float]
    numerical_rank: int
    unital_offdiagonal_max: float
    entanglement_fidelity_to_ideal: float | None = None


class PovmEffectReport(BaseModel):
    label: str
    pauli_coefficients: list[float]  # E = sum_P c_P P, IXYZ-lex order
    eigenvalues: list[float]
    axis: list[float] | None = None  # single qubit only
    tilt_degrees: float | None = None


class DiagnosticReport(BaseModel):
    num_qubits: int
    labels: list[str]
    passed: bool
    tp_residual: float
    tp_dependence_residual: float | None = None
    branches: list[BranchDiagnostics]
    confusion: list[list[float]]  # rows: reported outcome, columns: prepared basis state
    confusion_rows: list[str] = Field(default_factory=list)
    assignment_fidelity: float
    effects: list[PovmEffectReport]
    measure_and_prepare: bool
    qnd_repeatability: dict[str, float]
    post_mixed_states: dict[str, list[float]]
    post_basis_states: dict[str, list[float]]
    discard_pauli_fidelities: list[float]
    discard_nonunital_col: list[float]
    discard_is_unital: bool
    findings: list[str] = Field(default_factory=list)
    problems: list[str] = Field(default_factory=list)


class ReportFile(BaseModel):
    format_version: Literal["1"] = FORMAT_VERSION
    tool_version: str
    input_sha256: str
    generated_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    tolerance: float
    forced: bool = False
    report: DiagnosticReport
