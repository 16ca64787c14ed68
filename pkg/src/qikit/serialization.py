"""Instrument, PTM and circuit files on disk.

Matrices are stored row-major as JSON numbers. The stdlib json module writes
floats with repr(), which is the shortest string that parses back to the same
64-bit value, so a save/load cycle reproduces every entry exactly.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel

from qikit import channels
from qikit.instrument import QuantumInstrument, ideal_projective_instrument
from qikit.mcm_sim import Channel, Circuit, Conditional, Measure
from qikit.models import (
    ChannelInstruction,
    CircuitFile,
    ConditionalInstruction,
    InstrumentFile,
    OutcomeEntry,
    PtmFile,
)
from qikit.pauli_algebra import Ptm, PauliVector, product_state

logger = logging.getLogger(__name__)

FIXTURES_DIR = Path(__file__).parent / "fixtures"


class LoadedCircuit(NamedTuple):
    circuit: Circuit
    initial_state: PauliVector


def _read_json(path: Path) -> dict:
    return json.loads(Path(path).read_text())


def write_model(model: BaseModel, path: Path) -> None:
    """Write a model as JSON via a temp file in the target directory."""
    path = Path(path)
    text = json.dumps(model.model_dump(mode="json", by_alias=True), indent=2) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    logger.debug("Wrote %s", path)


def _ptm_from_list(values: list[float]) -> Ptm:
    flat = np.asarray(values, dtype=float)
    side = int(round(np.sqrt(flat.size)))
    return Ptm.from_matrix(flat.reshape(side, side))


def file_to_instrument(model: InstrumentFile) -> QuantumInstrument:
    outcomes = tuple((o.label, _ptm_from_list(o.ptm)) for o in model.outcomes)
    return QuantumInstrument(model.num_qubits, outcomes)


def instrument_to_file(
    instr: QuantumInstrument, description: str | None = None
) -> InstrumentFile:
    return InstrumentFile(
        num_qubits=instr.n,
        description=description,
        outcomes=[
            OutcomeEntry(label=label, ptm=ptm.matrix.ravel().tolist())
            for label, ptm in instr
        ],
    )


def load_instrument_data(data: dict) -> QuantumInstrument:
    return file_to_instrument(InstrumentFile.model_validate(data))


def load_instrument(path: Path) -> QuantumInstrument:
    return load_instrument_data(_read_json(path))


def save_instrument(
    instr: QuantumInstrument, path: Path, description: str | None = None
) -> None:
    write_model(instrument_to_file(instr, description), path)


def load_ptm_or_instrument(path: Path) -> list[tuple[str, Ptm]]:
    """Named PTMs from an instrument file (one per outcome) or a single-PTM file."""
    data = _read_json(path)
    if "outcomes" in data:
        return list(load_instrument_data(data))
    model = PtmFile.model_validate(data)
    return [("ptm", _ptm_from_list(model.ptm))]


def parse_state(token: str, n: int) -> PauliVector:
    """State token -> Pauli vector on n qubits.

    Accepted: one named token (used on every qubit), n comma-separated named
    tokens (qubit 0 first), or 4^n comma-separated reals.
    """
    parts = [p.strip() for p in token.split(",")]
    if len(parts) == 4**n and len(parts) > 1:
        try:
            return np.array([float(p) for p in parts])
        except ValueError:
            pass
    if len(parts) == 1:
        return product_state([parts[0]] * n)
    if len(parts) == n:
        return product_state(parts)
    raise ValueError(
        f"State {token!r}: expected 1 or {n} named token(s) or {4**n} reals, "
        f"got {len(parts)} item(s)"
    )


def _gate_ptm(ins: ChannelInstruction | ConditionalInstruction) -> Ptm:
    if ins.ptm is not None:
        return _ptm_from_list(ins.ptm)
    return channels.gate_ptm(ins.gate, ins.params)


def load_circuit(path: Path) -> LoadedCircuit:
    """Circuit file -> runtime Circuit; instrument paths resolve against its directory."""
    path = Path(path)
    model = CircuitFile.model_validate(_read_json(path))
    instructions = []
    for ins in model.instructions:
        targets = tuple(ins.targets)
        if ins.op == "measure":
            if ins.instrument is None:
                instr = ideal_projective_instrument(len(targets))
            elif isinstance(ins.instrument, str):
                instr = load_instrument(path.parent / ins.instrument)
            else:
                instr = file_to_instrument(ins.instrument)
            instructions.append(Measure(instr, targets, ins.register_name))
        elif ins.op == "conditional":
            instructions.append(Conditional(_gate_ptm(ins), targets, dict(ins.when)))
        else:
            instructions.append(Channel(_gate_ptm(ins), targets))
    circuit = Circuit(model.num_qubits, tuple(instructions), model.description)
    circuit.check_structure()
    logger.debug("Loaded circuit %s: %d instruction(s)", path, len(instructions))
    return LoadedCircuit(circuit, parse_state(model.initial_state, model.num_qubits))
