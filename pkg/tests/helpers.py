"""Shared test utilities: independent brute-force oracles and random generators.

The oracles here deliberately avoid the library's own computation paths so
that tests compare two genuinely different routes to the same value.
"""

from __future__ import annotations

import numpy as np

from statespace import linalg, new_state, psd_check
from statespace.properties import And, Atom, Not, Or, and_, atom as atom_, not_, or_


def kron_oracle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Four-index definition of the tensor product."""
    da, db = a.shape[0], b.shape[0]
    out = np.zeros((da * db, da * db), dtype=complex)
    for i in range(da):
        for j in range(da):
            for k in range(db):
                for l in range(db):
                    out[i * db + k, j * db + l] = a[i, j] * b[k, l]
    return out


def ptrace_oracle(m: np.ndarray, dims: tuple[int, int], over: str) -> np.ndarray:
    """Explicit double-index-sum partial trace."""
    da, db = dims
    if over.upper() == "B":
        out = np.zeros((da, da), dtype=complex)
        for i in range(da):
            for j in range(da):
                for k in range(db):
                    out[i, j] += m[i * db + k, j * db + k]
    else:
        out = np.zeros((db, db), dtype=complex)
        for k in range(db):
            for l in range(db):
                for i in range(da):
                    out[k, l] += m[i * db + k, i * db + l]
    return out


def bisect_weight_oracle(t1, t2, tol: float = 1e-9, iters: int = 60) -> float:
    """Largest w in [0, 1] keeping t2 - w*t1 PSD, by bisection on psd_check."""

    def ok(w: float) -> bool:
        return psd_check(t2.matrix - w * t1.matrix, tol).is_psd

    if not ok(0.0):
        return 0.0
    if ok(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


def random_density(d: int, rng: np.random.Generator, floor: float = 0.0):
    """Random full-rank-ish state; ``floor`` mixes in floor * I/d for a spectral floor."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    w = g @ g.conj().T
    w = w / np.trace(w).real
    if floor > 0.0:
        w = (1.0 - floor) * w + floor * np.eye(d) / d
    return new_state(w)


def random_pure(d: int, rng: np.random.Generator):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v = v / np.linalg.norm(v)
    return new_state(np.outer(v, v.conj()))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_projection(d: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Projection onto a Haar-ish random subspace of the given rank."""
    if rank == 0:
        return np.zeros((d, d), dtype=complex)
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    q, _ = np.linalg.qr(g)
    return q @ q.conj().T


def random_state_in_projection(p: np.ndarray, rank: int, rng: np.random.Generator):
    """Random state supported inside the range of the projection."""
    vals, vecs = np.linalg.eigh(p)
    cols = vecs[:, vals > 0.5]
    assert cols.shape[1] == rank
    g = rng.normal(size=(rank, rank)) + 1j * rng.normal(size=(rank, rank))
    w = g @ g.conj().T
    w = w / np.trace(w).real
    return new_state(cols @ w @ cols.conj().T)


def random_unit3(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


# Truth-table machinery for property expressions: the expression is compiled
# to a Python boolean source string and evaluated with eval(), a different
# code path from the library's recursive eval_expr.

def expression_atoms(expr) -> list:
    found = []
    def walk(e):
        if isinstance(e, Atom):
            if all(e.prop is not other for other in found):
                found.append(e.prop)
        elif isinstance(e, (And, Or)):
            for item in e.items:
                walk(item)
        elif isinstance(e, Not):
            walk(e.item)
    walk(expr)
    return found


def expression_source(expr, names: dict) -> str:
    if isinstance(expr, Atom):
        return names[id(expr.prop)]
    if isinstance(expr, And):
        return "(" + " and ".join(expression_source(e, names) for e in expr.items) + ")"
    if isinstance(expr, Or):
        return "(" + " or ".join(expression_source(e, names) for e in expr.items) + ")"
    if isinstance(expr, Not):
        return "(not " + expression_source(expr.item, names) + ")"
    raise TypeError(expr)


def atom_truth_direct(prop, t) -> bool:
    """Recompute an 'average' atom's truth straight from the trace."""
    assert prop.evaluator == "average"
    value = float(np.real(np.trace(prop.observable @ t.matrix)))
    return abs(value - prop.target) <= prop.tol


def truth_table_eval(expr, t) -> bool:
    props = expression_atoms(expr)
    names = {id(p): f"v{i}" for i, p in enumerate(props)}
    source = expression_source(expr, names)
    env = {names[id(p)]: atom_truth_direct(p, t) for p in props}
    return bool(eval(source, {"__builtins__": {}}, env))


def random_expression(atoms, rng: np.random.Generator, depth: int = 3):
    """Random AND/OR/NOT tree over the given atoms."""
    if depth == 0 or rng.random() < 0.3:
        return atom_(atoms[int(rng.integers(len(atoms)))])
    kind = rng.integers(3)
    if kind == 0:
        return not_(random_expression(atoms, rng, depth - 1))
    k = int(rng.integers(2, 4))
    parts = [random_expression(atoms, rng, depth - 1) for _ in range(k)]
    return and_(*parts) if kind == 1 else or_(*parts)
