"""Batch command-line front end.

Every command reads JSON inputs, prints either a fixed-width human report or
canonical JSON (``--output json``, the stable contract: same inputs and seed
give identical bytes), and exits with 0 on success, 2 on input/parse
problems, 3 on validation failures and 4 on dimension or config mismatches.

The ambient dimension cap (4096) can be overridden with the
``STATESPACE_MAX_DIM`` environment variable.
"""

from __future__ import annotations

import json
import math
import sys
from contextlib import contextmanager

import click
import numpy as np

from . import linalg, measurement, preparation, properties, states
from .errors import DimensionMismatchError, MatrixFormatError, ValidationError

EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_DIMENSION = 4

DEFAULT_DEMO_SAMPLES = 100_000
DEFAULT_DEMO_SEED = 42


def _dump(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _die(code: int, message: str, output: str = "human", extra: dict | None = None):
    if output == "json":
        body = {"exit": code, "message": message}
        if extra:
            body.update({k: v for k, v in extra.items() if v is not None})
        click.echo(_dump({"error": body}))
    else:
        click.echo(f"error: {message}", err=True)
    sys.exit(code)


@contextmanager
def _guard(output: str):
    """Map library errors to the documented exit codes."""
    try:
        yield
    except MatrixFormatError as exc:
        _die(EXIT_PARSE, str(exc), output)
    except ValidationError as exc:
        _die(EXIT_VALIDATION, str(exc), output, extra={"code": exc.code, "amount": exc.amount})
    except DimensionMismatchError as exc:
        _die(EXIT_DIMENSION, str(exc), output)


def _load_json(path: str, output: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        _die(
            EXIT_PARSE,
            f"{path}: JSON parse error at line {exc.lineno} column {exc.colno} (char {exc.pos}): {exc.msg}",
            output,
        )
    except OSError as exc:
        _die(EXIT_PARSE, f"{path}: {exc}", output)


def _load_state(path: str, tol: float | None, output: str) -> states.StateOperator:
    obj = _load_json(path, output)
    if tol is not None and isinstance(obj, dict):
        obj = dict(obj)
        obj["tol"] = tol
    with _guard(output):
        return states.state_from_json(obj)


def _load_chsh_config(path: str | None, n: int | None, seed: int | None, output: str) -> measurement.CHSHConfig:
    if path is None:
        base = {
            "a": [0.0, 0.0, 1.0],
            "a_prime": [1.0, 0.0, 0.0],
            "b": [-1.0 / math.sqrt(2.0), 0.0, -1.0 / math.sqrt(2.0)],
            "b_prime": [-1.0 / math.sqrt(2.0), 0.0, 1.0 / math.sqrt(2.0)],
            "n_samples": DEFAULT_DEMO_SAMPLES,
            "seed": DEFAULT_DEMO_SEED,
        }
    else:
        base = _load_json(path, output)
        if not isinstance(base, dict):
            _die(EXIT_PARSE, f"{path}: CHSH config must be a JSON object", output)
    missing = [key for key in ("a", "a_prime", "b", "b_prime") if key not in base]
    if missing:
        _die(EXIT_PARSE, f"CHSH config is missing direction(s): {', '.join(missing)}", output)
    try:
        return measurement.chsh_config(
            base["a"],
            base["a_prime"],
            base["b"],
            base["b_prime"],
            n_samples=n if n is not None else base.get("n_samples", 0),
            seed=seed if seed is not None else base.get("seed", 0),
        )
    except ValidationError as exc:
        _die(EXIT_DIMENSION, f"bad CHSH config: {exc}", output)


def _emit(payload: dict, lines: list[str], output: str):
    if output == "json":
        click.echo(_dump(payload))
    else:
        for line in lines:
            click.echo(line)


output_option = click.option(
    "--output",
    type=click.Choice(["human", "json"]),
    default="human",
    show_default=True,
    help="Report format; json is the stable, byte-reproducible contract.",
)
tol_option = click.option("--tol", type=float, default=None, help="Override the state validation tolerance.")


@click.group()
def main():
    """Finite-dimensional quantum state-space toolkit."""


@main.command()
@click.argument("state_file", type=click.Path())
@tol_option
@click.option("--repair", is_flag=True, help="Clip negative eigenvalues and renormalize, reporting the correction.")
@output_option
def validate(state_file, tol, repair, output):
    """Check a matrix file against the state-operator invariants."""
    if repair:
        obj = _load_json(state_file, output)
        with _guard(output):
            matrix = linalg.matrix_from_json(obj)
            state, report = states.repair_state(matrix, tol if tol is not None else states.DEFAULT_STATE_TOL)
        payload = {
            "command": "validate",
            "valid": True,
            "repaired": report.was_repaired,
            "hermitian_defect": report.hermitian_defect,
            "clipped_weight": report.clipped_weight,
            "trace_scale": report.trace_scale,
            "state": states.state_to_json(state),
        }
        lines = [
            "valid: yes (after repair)" if report.was_repaired else "valid: yes",
            f"clipped negative weight: {report.clipped_weight:.3e}",
            f"trace scale applied:     {report.trace_scale:.12g}",
        ]
        _emit(payload, lines, output)
        return
    state = _load_state(state_file, tol, output)
    min_eig = float(np.linalg.eigvalsh(state.matrix)[0])
    payload = {
        "command": "validate",
        "valid": True,
        "dim": state.dim,
        "tol": state.tol,
        "trace": float(np.trace(state.matrix).real),
        "min_eigenvalue": min_eig,
    }
    lines = [f"valid: yes", f"dim: {state.dim}", f"min eigenvalue: {min_eig:.6g}"]
    _emit(payload, lines, output)


@main.command()
@click.argument("state_file", type=click.Path())
@tol_option
@output_option
def analyze(state_file, tol, output):
    """Validity, spectrum, rank, extremality, support projection and purity."""
    state = _load_state(state_file, tol, output)
    with _guard(output):
        vals = np.linalg.eigvalsh(state.matrix)
        handle = states.support_projection(state)
        extremal = states.is_extremal(state)
        purity = float(np.real(np.trace(state.matrix @ state.matrix)))
    payload = {
        "command": "analyze",
        "valid": True,
        "dim": state.dim,
        "trace": float(np.trace(state.matrix).real),
        "eigenvalues": [float(v) for v in vals],
        "rank": handle.rank,
        "extremal": extremal,
        "purity": purity,
        "support_projection": linalg.matrix_to_json(handle.projection),
    }
    lines = [
        "valid: yes",
        f"dim:       {state.dim}",
        f"rank:      {handle.rank}",
        f"extremal:  {'yes' if extremal else 'no'}",
        f"purity:    {purity:.12g}",
        "eigenvalues: " + ", ".join(f"{v:.6g}" for v in vals),
    ]
    _emit(payload, lines, output)


@main.command()
@click.argument("state_files", type=click.Path(), nargs=-1)
@tol_option
@output_option
def face(state_files, tol, output):
    """Support projections; with two states, their face ordering and meet."""
    if not 1 <= len(state_files) <= 2:
        _die(EXIT_DIMENSION, "face takes one or two state files", output)
    loaded = [_load_state(path, tol, output) for path in state_files]
    with _guard(output):
        handles = [states.support_projection(s) for s in loaded]
    if len(handles) == 1:
        payload = {
            "command": "face",
            "rank": handles[0].rank,
            "projection": linalg.matrix_to_json(handles[0].projection),
        }
        _emit(payload, [f"support rank: {handles[0].rank}"], output)
        return
    with _guard(output):
        leq12 = states.face_leq(handles[0], handles[1])
        leq21 = states.face_leq(handles[1], handles[0])
        meet = states.face_meet(handles[0], handles[1])
    payload = {
        "command": "face",
        "rank_1": handles[0].rank,
        "rank_2": handles[1].rank,
        "leq_12": leq12,
        "leq_21": leq21,
        "meet_rank": meet.rank,
        "meet_projection": linalg.matrix_to_json(meet.projection),
    }
    lines = [
        f"face 1 rank: {handles[0].rank}",
        f"face 2 rank: {handles[1].rank}",
        f"face1 <= face2: {'yes' if leq12 else 'no'}",
        f"face2 <= face1: {'yes' if leq21 else 'no'}",
        f"meet rank: {meet.rank}",
    ]
    _emit(payload, lines, output)


@main.command()
@click.argument("t1_file", type=click.Path())
@click.argument("t2_file", type=click.Path())
@tol_option
@click.option("--basis", type=click.Choice(["eigen", "file"]), default="eigen", show_default=True,
              help="Basis for the diagonal-ratio diagnostic.")
@click.option("--basis-file", type=click.Path(), default=None, help="JSON {'vectors': [...]} when --basis file.")
@output_option
def component(t1_file, t2_file, tol, basis, basis_file, output):
    """Largest weight of T1 inside T2 and the diagonal-ratio obstruction."""
    t1 = _load_state(t1_file, tol, output)
    t2 = _load_state(t2_file, tol, output)
    vectors = None
    if basis == "file":
        if basis_file is None:
            _die(EXIT_DIMENSION, "--basis file requires --basis-file PATH", output)
        obj = _load_json(basis_file, output)
        if not isinstance(obj, dict) or "vectors" not in obj or not isinstance(obj["vectors"], list):
            _die(EXIT_PARSE, f"{basis_file}: basis file must be {{'vectors': [...]}}", output)
        with _guard(output):
            vectors = [linalg.vector_from_json(v) for v in obj["vectors"]]
    with _guard(output):
        report = states.component_report(t1, t2, vectors)
    ratio = "infinity" if math.isinf(report.sup_ratio) else report.sup_ratio
    verdict = "is a convex component" if report.is_component() else "is not a convex component"
    payload = {
        "command": "component",
        "max_weight": report.max_weight,
        "sup_ratio": ratio,
        "basis_used": report.basis_used,
        "is_component": report.is_component(),
        "verdict": verdict,
    }
    lines = [
        f"max weight: {report.max_weight:.12g}",
        f"sup ratio:  {ratio if isinstance(ratio, str) else format(ratio, '.12g')}",
        f"verdict:    T1 {verdict} of T2",
    ]
    _emit(payload, lines, output)


@main.command()
@click.argument("state_file", type=click.Path())
@click.option("--dims", required=True, help="Factor dimensions as dA,dB.")
@click.option("--over", type=click.Choice(["A", "B"], case_sensitive=False), required=True,
              help="Subsystem to trace out.")
@tol_option
@output_option
def ptrace(state_file, dims, over, tol, output):
    """Partial trace of a composite state over one factor."""
    state = _load_state(state_file, tol, output)
    try:
        parts = tuple(int(x) for x in dims.split(","))
        if len(parts) != 2:
            raise ValueError
    except ValueError:
        _die(EXIT_DIMENSION, f"--dims must be two comma-separated integers, got {dims!r}", output)
    with _guard(output):
        reduced = linalg.partial_trace(state.matrix, parts, over)
        reduced_state = states.new_state(reduced, state.tol)
    payload = {
        "command": "ptrace",
        "dims": list(parts),
        "over": over.upper(),
        "result": states.state_to_json(reduced_state),
    }
    lines = [f"traced out subsystem {over.upper()}; result dim {reduced_state.dim}"]
    for row in np.asarray(reduced_state.matrix):
        lines.append("  " + "  ".join(f"{x.real:+.6f}{x.imag:+.6f}j" for x in row))
    _emit(payload, lines, output)


@main.command()
@click.argument("state_file", type=click.Path())
@click.option("--config", "config_file", type=click.Path(), default=None,
              help="CHSH config JSON; defaults to the Tsirelson directions.")
@tol_option
@output_option
def chsh(state_file, config_file, tol, output):
    """Exact CHSH value of a two-qubit state at the configured directions."""
    state = _load_state(state_file, tol, output)
    cfg = _load_chsh_config(config_file, None, None, output)
    with _guard(output):
        correlators = measurement.chsh_correlators(state, cfg)
        value = measurement.chsh_value(state, cfg)
    payload = {
        "command": "chsh",
        "config": cfg.to_json(),
        "correlators": correlators,
        "value": value,
    }
    lines = [f"S = {value:.12g}"] + [f"  {k} = {v:+.12g}" for k, v in correlators.items()]
    _emit(payload, lines, output)


@main.command()
@click.argument("prep_file", type=click.Path())
@click.argument("observable_file", type=click.Path())
@click.option("--n", "n_samples", type=int, required=True, help="Number of registrations.")
@click.option("--seed", type=int, required=True, help="64-bit RNG seed.")
@click.option("--workers", type=int, default=1, show_default=True)
@output_option
def ensemble(prep_file, observable_file, n_samples, seed, workers, output):
    """Sample an observable on a gemenge preparation and report statistics."""
    prep_obj = _load_json(prep_file, output)
    obs_obj = _load_json(observable_file, output)
    with _guard(output):
        prep = preparation.node_from_json(prep_obj)
        obs = measurement.observable(linalg.matrix_from_json(obs_obj))
        report = measurement.run_ensemble(prep, obs, n_samples, seed, workers)
    payload = {"command": "ensemble", **report.to_json()}
    lines = [
        f"samples:        {report.n_samples}",
        f"empirical mean: {report.empirical_mean:+.9g}",
        f"exact mean:     {report.exact_mean:+.9g}",
        f"std error:      {report.std_error:.3e}",
        "counts: " + ", ".join(f"{v:+.6g}: {c}" for v, c in report.outcome_counts),
    ]
    _emit(payload, lines, output)


@main.command(name="lattice-demo")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for the sampled Boolean-law check.")
@click.option("--n-states", type=int, default=100, show_default=True)
@output_option
def lattice_demo(seed, n_states, output):
    """Boolean laws for simple properties next to the projection counterexample."""
    rng = np.random.default_rng(seed)
    sample_states = [_random_qubit_state(rng) for _ in range(n_states)]
    atoms = []
    for _ in range(3):
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        herm = (g + g.conj().T) / 2
        anchor = sample_states[int(rng.integers(len(sample_states)))]
        target = float(np.real(np.trace(herm @ anchor.matrix)))
        atoms.append(properties.average_property(herm, target, tol=0.25))
    with _guard(output):
        laws = properties.check_boolean_laws(atoms, sample_states)
        witness = properties.distributivity_witness()
    payload = {
        "command": "lattice-demo",
        "seed": seed,
        "n_states": n_states,
        "boolean_laws": laws,
        "boolean_laws_all_hold": all(laws.values()),
        "projection_witness": {
            "lhs_rank": witness.lhs_rank,
            "rhs_rank": witness.rhs_rank,
            "distributive": witness.distributive,
            "lhs": linalg.matrix_to_json(witness.lhs),
            "rhs": linalg.matrix_to_json(witness.rhs),
        },
    }
    lines = ["Boolean laws on simple properties:"]
    lines += [f"  {name}: {'holds' if ok else 'FAILS'}" for name, ok in laws.items()]
    lines += [
        "Projection lattice witness (C^2):",
        f"  rank meet(P, join(Q,R)) = {witness.lhs_rank}",
        f"  rank join(meet(P,Q), meet(P,R)) = {witness.rhs_rank}",
        f"  distributive: {'yes' if witness.distributive else 'no'}",
    ]
    _emit(payload, lines, output)


@main.command()
@click.option("--config", "config_file", type=click.Path(), default=None,
              help="CHSH config JSON; defaults to Tsirelson directions, n=100000, seed=42.")
@click.option("--n", "n_samples", type=int, default=None, help="Override the sample count (0 = exact only).")
@click.option("--seed", type=int, default=None, help="Override the RNG seed.")
@click.option("--workers", type=int, default=1, show_default=True)
@output_option
def distinguish(config_file, n_samples, seed, workers, output):
    """Proper vs improper mixture: local marginals agree, composite CHSH differs."""
    cfg = _load_chsh_config(config_file, n_samples, seed, output)
    with _guard(output):
        report = measurement.distinguishability_demo(cfg, workers)
    payload = {"command": "distinguish", **report.to_json()}
    exact = report.exact_values()
    lines = ["Local subsystem-1 marginals (singlet-reduced vs gemenge):"]
    for name, s_val, g_val, diff in report.marginals:
        lines.append(f"  sigma_{name}: {s_val:+.12f}  vs  {g_val:+.12f}   |diff| = {diff:.3e}")
    lines += [
        f"max marginal difference: {report.max_marginal_diff:.3e}",
        "decomposable: "
        + ", ".join(f"{name}={'yes' if flag else 'no'}" for name, flag in report.decomposable),
        f"exact CHSH  singlet: {exact['singlet']:+.9g}",
        f"exact CHSH  gemenge: {exact['gemenge']:+.9g}",
    ]
    if report.sampled is not None:
        for name, sample in report.sampled:
            lines.append(
                f"sampled CHSH {name}: {sample.value:+.6g} (exact {sample.exact_value:+.6g}, se {sample.std_error:.2e})"
            )
    lines.append(report.conclusion)
    _emit(payload, lines, output)


def _random_qubit_state(rng) -> states.StateOperator:
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    w = g @ g.conj().T
    return states.new_state(w / np.trace(w).real)


if __name__ == "__main__":
    main()
