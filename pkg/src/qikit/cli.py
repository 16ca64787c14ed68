"""CLI entry point -- the `qikit` command.

Exit codes: 0 success, 1 semantic failure (validation, dimension mismatch),
2 parse or schema failure (bad JSON, schema violation, missing file, bad state).
"""

import contextlib
import hashlib
import importlib.metadata
import json
import logging
import os
import sys
from pathlib import Path

import click
from pydantic import ValidationError

from qikit import __version__
from qikit import instrument as qi
from qikit.config import load_config, max_qubits

logger = logging.getLogger(__name__)

CONTEXT_SETTINGS = dict(help_option_names=["-h", "--help"])

_VALID_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}

EXIT_FAILED = 1
EXIT_PARSE = 2


def _configure_logging() -> None:
    name = os.environ.get("LOG_LEVEL", "WARNING").upper()
    level = getattr(logging, name) if name in _VALID_LOG_LEVELS else logging.WARNING
    logging.basicConfig(level=level)


def _fail(message: str, code: int = EXIT_FAILED) -> None:
    click.echo(click.style("ERROR: ", fg="red") + message, err=True)
    sys.exit(code)


@contextlib.contextmanager
def _parsing(path):
    """Map file and schema errors to exit code 2."""
    try:
        yield
    except FileNotFoundError as e:
        _fail(f"{path}: file not found ({e.filename})", EXIT_PARSE)
    except json.JSONDecodeError as e:
        _fail(f"{path}: invalid JSON ({e})", EXIT_PARSE)
    except ValidationError as e:
        _fail(f"{path}: schema violation\n{e}", EXIT_PARSE)
    except (OSError, ValueError) as e:
        _fail(f"{path}: {e}", EXIT_PARSE)


def _tolerance(tol):
    return load_config()["tol"] if tol is None else tol


def _fmt_vector(v) -> str:
    return "(" + ", ".join(f"{x:.4f}" for x in v) + ")"


@click.group(context_settings=CONTEXT_SETTINGS)
@click.version_option(version=__version__, prog_name="qikit")
def cli():
    """qikit -- quantum instruments as outcome-indexed Pauli transfer matrices."""
    _configure_logging()


@cli.command()
@click.argument("path", type=click.Path(path_type=Path))
@click.option("--tol", type=float, default=None, help="Validation tolerance (default from config).")
@click.option("--json", "as_json", is_flag=True, help="Print the full report as JSON.")
def validate(path, tol, as_json):
    """Check that every branch is CP and trace-nonincreasing and the sum is TP."""
    from qikit.serialization import load_instrument

    tol = _tolerance(tol)
    with _parsing(path):
        instr = load_instrument(path)
    report = qi.validate(instr, tol)

    if as_json:
        click.echo(report.model_dump_json(indent=2))
    else:
        status = click.style("PASS", fg="green") if report.passed else click.style("FAIL", fg="red")
        click.echo(f"{status}  {path}  ({instr.n} qubit(s), {len(instr)} outcome(s), tol {tol:g})")
        click.echo(f"  TP residual: {report.tp_residual:.3g}")
        for b in report.branches:
            click.echo(
                f"  [{b.label}] min Choi eigenvalue {b.cp_min_eigenvalue:.3g}, "
                f"trace margin {b.trace_margin:.3g}"
            )
        for problem in report.problems:
            click.echo(f"  - {problem}")
    if not report.passed:
        sys.exit(EXIT_FAILED)


@cli.command()
@click.argument("path", type=click.Path(path_type=Path))
@click.option("--tol", type=float, default=None, help="Validation tolerance (default from config).")
@click.option("--force", is_flag=True, help="Diagnose even if validation fails.")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Write the report here.")
def diagnose(path, tol, force, out):
    """Full error analysis of an instrument, as a JSON report."""
    from qikit.models import ReportFile
    from qikit.serialization import load_instrument, write_model

    config = load_config()
    tol = _tolerance(tol)
    with _parsing(path):
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        instr = load_instrument(path)

    validation = qi.validate(instr, tol)
    if not validation.passed and not force:
        for problem in validation.problems:
            click.echo(f"  - {problem}", err=True)
        _fail(f"{path} failed validation at tol {tol:g} (use --force to diagnose anyway)")

    report = qi.diagnose(
        instr, tol=tol, rank_tol=config["rank_tol"], p_floor=config["p_floor"]
    )
    result = ReportFile(
        tool_version=__version__,
        input_sha256=digest,
        tolerance=tol,
        forced=not validation.passed,
        report=report,
    )
    if out is None:
        click.echo(result.model_dump_json(indent=2))
        return
    try:
        write_model(result, out)
    except OSError as e:
        _fail(f"Cannot write {out}: {e}")
    click.echo(f"Report written to {out}")
    click.echo(f"  assignment fidelity: {report.assignment_fidelity:.4f}")
    for finding in report.findings:
        click.echo(f"  - {finding}")


@cli.command()
@click.argument("path", type=click.Path(path_type=Path))
@click.option("--state", "token", required=True, help='Named state ("0", "1", "+", "-", "i", "-i", "mixed") or Pauli components.')
@click.option("--json", "as_json", is_flag=True, help="Print JSON instead of a table.")
def apply(path, token, as_json):
    """Outcome probabilities and post-measurement states for one input."""
    from qikit.serialization import load_instrument, parse_state

    with _parsing(path):
        instr = load_instrument(path)
    with _parsing("--state"):
        v = parse_state(token, instr.n)

    probabilities = qi.outcome_probabilities(instr, v)
    rows = {}
    for label, p in zip(instr.labels, probabilities):
        try:
            state = qi.post_measurement_state(instr, label, v).tolist()
        except qi.UndefinedStateError:
            state = None
        rows[label] = {"probability": float(p), "state": state}

    if as_json:
        click.echo(json.dumps(rows, indent=2))
        return
    for label, row in rows.items():
        state = "undefined" if row["state"] is None else _fmt_vector(row["state"])
        click.echo(f"p({label}) = {row['probability']:.6f}  post-state {state}")


@cli.command()
@click.argument("first", type=click.Path(path_type=Path))
@click.argument("second", type=click.Path(path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Output instrument file.")
@click.option("--tol", type=float, default=None, help="Validation tolerance (default from config).")
def compose(first, second, out, tol):
    """Sequential composition: FIRST, then SECOND; labels joined with ','."""
    from qikit.serialization import load_instrument, save_instrument

    tol = _tolerance(tol)
    loaded = []
    for path in (first, second):
        with _parsing(path):
            instr = load_instrument(path)
        report = qi.validate(instr, tol)
        if not report.passed:
            _fail(f"{path} failed validation: {'; '.join(report.problems)}")
        loaded.append(instr)

    try:
        combined = qi.compose(loaded[1], loaded[0])
    except ValueError as e:
        _fail(str(e))
    try:
        save_instrument(combined, out, description=f"{first.name} then {second.name}")
    except OSError as e:
        _fail(f"Cannot write {out}: {e}")
    click.echo(f"Wrote {len(combined)} outcome(s) to {out}")


@cli.command()
@click.argument("path", type=click.Path(path_type=Path))
@click.option("--mode", type=click.Choice(["exact", "sample"]), default="exact", show_default=True)
@click.option("--shots", type=int, default=None, help="Shots in sample mode (default from config).")
@click.option("--seed", type=int, default=None, help="Sampling seed (default from config).")
@click.option("--state", "token", default=None, help="Override the circuit's initial state.")
@click.option("--p-min", type=float, default=None, help="Prune records at or below this probability.")
@click.option("--workers", type=int, default=1, show_default=True, help="Sampling threads.")
@click.option("--json", "as_json", is_flag=True, help="Print JSON instead of tables.")
@click.option("--force", is_flag=True, help="Simulate even if a channel or instrument is unphysical.")
def simulate(path, mode, shots, seed, token, p_min, workers, as_json, force):
    """Run a circuit with mid-circuit measurements and feedback."""
    from qikit import mcm_sim
    from qikit.serialization import load_circuit, parse_state

    config = load_config()
    with _parsing(path):
        circuit, v0 = load_circuit(path)
    if token is not None:
        with _parsing("--state"):
            v0 = parse_state(token, circuit.n)
    problems = circuit.validate(config["tol"])
    if problems and not force:
        for problem in problems:
            click.echo(f"  - {problem}", err=True)
        _fail(f"{path} failed validation at tol {config['tol']:g} (use --force to simulate anyway)")
    for problem in problems:
        logger.warning("%s: %s", path, problem)

    registers = circuit.registers
    if mode == "sample":
        shots = config["shots"] if shots is None else shots
        seed = config["seed"] if seed is None else seed
        try:
            records = mcm_sim.run_sampled(circuit, v0, shots, seed, workers=workers)
        except ValueError as e:
            _fail(str(e))
        tally = mcm_sim.counts(records, registers)
        if as_json:
            payload = {
                "registers": registers,
                "shots": shots,
                "seed": seed,
                "counts": [{"values": list(k), "count": c} for k, c in tally.items()],
            }
            click.echo(json.dumps(payload, indent=2))
            return
        click.echo(f"{shots} shot(s), seed {seed}")
        click.echo("  " + " ".join(registers) + "  count")
        for values, count in tally.items():
            click.echo("  " + " ".join(values) + f"  {count}")
        return

    p_min = config["p_min"] if p_min is None else p_min
    try:
        result = mcm_sim.run_exact(circuit, v0, p_min=p_min)
    except ValueError as e:
        _fail(str(e))
    marginals = {
        r: mcm_sim.marginal_distribution(result.branches, [r], known=result.registers)
        for r in registers
    }
    if as_json:
        payload = {
            "registers": registers,
            "pruned_mass": result.pruned_mass,
            "branches": [
                {"record": b.record, "probability": b.probability, "state": b.state.tolist()}
                for b in result.branches
            ],
            "marginals": {
                r: {k[0]: p for k, p in dist.items()} for r, dist in marginals.items()
            },
        }
        click.echo(json.dumps(payload, indent=2))
        return
    click.echo("Joint distribution")
    for b in result.branches:
        values = " ".join(b.record[r] for r in registers)
        click.echo(f"  {values}  p={b.probability:.6f}  state {_fmt_vector(b.state)}")
    for r, dist in marginals.items():
        shown = ", ".join(f"{k[0]}: {p:.6f}" for k, p in dist.items()) or "(all pruned)"
        click.echo(f"Marginal {r}: {shown}")
    click.echo(f"Pruned mass: {result.pruned_mass:.3g}")


SYNTH_KINDS = ["ideal", "damped", "dephased", "rotated", "bitflip"]


def build_synthetic(kind: str, qubits: int, gamma: float, p: float, theta: float):
    """Synthetic instrument: ideal projective measurement plus one error model."""
    from qikit import channels

    ideal = qi.ideal_projective_instrument(qubits)
    if kind == "ideal":
        return ideal
    if kind == "damped":
        post = channels.local_ptm(channels.amplitude_damping(gamma), qubits)
        return qi.wrap(ideal, post_by_outcome={label: post for label in ideal.labels})
    if kind == "bitflip":
        return qi.wrap(ideal, pre=channels.local_ptm(channels.bit_flip(p), qubits))
    if kind == "rotated":
        return qi.wrap(ideal, pre=channels.local_ptm(channels.rotation("y", theta), qubits))
    if kind == "dephased":
        return qi.mix(ideal, qi.uninformative_instrument(qubits, ideal.labels), p)
    raise ValueError(f"Unknown kind {kind!r}")


@cli.command()
@click.option("--kind", type=click.Choice(SYNTH_KINDS), required=True)
@click.option("--qubits", type=int, default=1, show_default=True)
@click.option("--gamma", type=float, default=0.0, show_default=True, help="Damping rate (damped).")
@click.option("--p", type=float, default=0.0, show_default=True, help="Flip or mixing probability (bitflip, dephased).")
@click.option("--theta", type=float, default=0.0, show_default=True, help="Axis tilt in radians (rotated).")
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Output instrument file.")
def synth(kind, qubits, gamma, p, theta, out):
    """Write a synthetic instrument file."""
    from qikit.serialization import save_instrument

    try:
        instr = build_synthetic(kind, qubits, gamma, p, theta)
    except ValueError as e:
        _fail(str(e), EXIT_PARSE)
    report = qi.validate(instr, _tolerance(None))
    if not report.passed:
        _fail(f"Synthetic instrument failed validation: {'; '.join(report.problems)}")
    description = f"synthetic {kind}: qubits={qubits} gamma={gamma} p={p} theta={theta}"
    try:
        save_instrument(instr, out, description=description)
    except OSError as e:
        _fail(f"Cannot write {out}: {e}")
    click.echo(f"Wrote {kind} instrument ({qubits} qubit(s)) to {out}")


@cli.command()
@click.argument("path", type=click.Path(path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Output SVG file.")
def render(path, out):
    """Heatmap of every branch PTM (or of a single PTM file) as SVG."""
    from qikit.render import render_instrument
    from qikit.serialization import load_ptm_or_instrument

    with _parsing(path):
        named = load_ptm_or_instrument(path)
    try:
        render_instrument(named, out)
    except OSError as e:
        _fail(f"Cannot write {out}: {e}")
    click.echo(f"Rendered {len(named)} heatmap(s) to {out}")


@cli.command()
def doctor():
    """Check dependencies and the qubit guard."""
    all_ok = True
    for pkg in ["numpy", "matplotlib", "pydantic", "click"]:
        try:
            __import__(pkg)
            version = importlib.metadata.version(pkg)
            click.echo(click.style("  ✓ ", fg="green") + f"{pkg} {version}")
        except (ImportError, importlib.metadata.PackageNotFoundError):
            click.echo(click.style("  ✗ ", fg="red") + f"{pkg} (pip install {pkg})")
            all_ok = False
    click.echo(f"  max qubits: {max_qubits()}")
    if all_ok:
        click.echo()
        click.echo(click.style("All dependencies satisfied!", fg="green"))
