"""Simple objective properties and their Boolean lattice.

A simple property is the proposition "f has value a" for a real function f
on the state space, tested with an explicit tolerance.  Properties are
equivalent to subsets of the state space, so expressions built from AND, OR
and NOT obey ordinary Boolean laws pointwise, distributivity included.

Projections behave differently: with meet = range intersection and join =
range span they form a non-distributive lattice, and
:func:`distributivity_witness` produces the standard two-dimensional
counterexample.

Evaluators come from a registered catalog (average and variance of an
observable, an eigenvalue of the state, purity) so that expressions stay
serializable and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import linalg
from .errors import MatrixFormatError, ValidationError
from .states import FaceHandle, StateOperator, face_from_projection

EVALUATOR_NAMES = ("average", "variance", "eigenvalue", "purity")


@dataclass(frozen=True, eq=False)
class SimpleProperty:
    """Proposition "evaluator(T) equals target" up to ``tol``."""

    evaluator: str
    target: float
    tol: float
    observable: np.ndarray | None = None
    index: int | None = None

    def value(self, t: StateOperator) -> float:
        return _evaluate(self, t)

    def holds(self, t: StateOperator) -> bool:
        return abs(self.value(t) - self.target) <= self.tol


def _evaluate(prop: SimpleProperty, t: StateOperator) -> float:
    if prop.evaluator == "average":
        return float(np.real(np.trace(prop.observable @ t.matrix)))
    if prop.evaluator == "variance":
        a = prop.observable
        mean = float(np.real(np.trace(a @ t.matrix)))
        second = float(np.real(np.trace(a @ a @ t.matrix)))
        return second - mean * mean
    if prop.evaluator == "eigenvalue":
        vals = np.linalg.eigvalsh(t.matrix)
        k = prop.index
        if k is None or not (-t.dim <= k < t.dim):
            raise ValidationError("bad_index", f"eigenvalue index {k!r} out of range for dim {t.dim}")
        return float(vals[k])
    if prop.evaluator == "purity":
        return float(np.real(np.trace(t.matrix @ t.matrix)))
    raise ValidationError("bad_evaluator", f"unknown evaluator {prop.evaluator!r}")


def _positive_tol(tol: float) -> float:
    tol = float(tol)
    if tol <= 0:
        raise ValidationError("bad_tolerance", f"property tolerance must be positive, got {tol}")
    return tol


def average_property(observable, target: float, tol: float = 1e-9) -> SimpleProperty:
    """Property "the average of the observable in T equals target"."""
    obs = linalg.require_hermitian(observable)
    return SimpleProperty("average", float(target), _positive_tol(tol), observable=obs)


def variance_property(observable, target: float, tol: float = 1e-9) -> SimpleProperty:
    obs = linalg.require_hermitian(observable)
    return SimpleProperty("variance", float(target), _positive_tol(tol), observable=obs)


def eigenvalue_property(index: int, target: float, tol: float = 1e-9) -> SimpleProperty:
    """Property on the index-th eigenvalue of the state, ascending order."""
    return SimpleProperty("eigenvalue", float(target), _positive_tol(tol), index=int(index))


def purity_property(target: float, tol: float = 1e-9) -> SimpleProperty:
    return SimpleProperty("purity", float(target), _positive_tol(tol))


@dataclass(frozen=True)
class Atom:
    prop: SimpleProperty


@dataclass(frozen=True)
class And:
    items: tuple["PropertyExpr", ...]


@dataclass(frozen=True)
class Or:
    items: tuple["PropertyExpr", ...]


@dataclass(frozen=True)
class Not:
    item: "PropertyExpr"


PropertyExpr = Union[Atom, And, Or, Not]


def atom(prop: SimpleProperty) -> Atom:
    return Atom(prop)


def and_(*items: PropertyExpr) -> And:
    return And(tuple(items))


def or_(*items: PropertyExpr) -> Or:
    return Or(tuple(items))


def not_(item: PropertyExpr) -> Not:
    return Not(item)


def eval_expr(expr: PropertyExpr, t: StateOperator) -> bool:
    """Standard Boolean semantics over atom truth values."""
    if isinstance(expr, Atom):
        return expr.prop.holds(t)
    if isinstance(expr, And):
        return all(eval_expr(item, t) for item in expr.items)
    if isinstance(expr, Or):
        return any(eval_expr(item, t) for item in expr.items)
    if isinstance(expr, Not):
        return not eval_expr(expr.item, t)
    raise TypeError(f"not a property expression: {expr!r}")


BOOLEAN_LAWS = (
    "commutativity_and",
    "commutativity_or",
    "associativity_and",
    "associativity_or",
    "distributivity_and_over_or",
    "distributivity_or_over_and",
    "de_morgan_and",
    "de_morgan_or",
    "double_negation",
)


def check_boolean_laws(atoms, sample_states) -> dict[str, bool]:
    """Verify the Boolean lattice laws pointwise on the given states.

    Uses the first three atoms; each law holds when both sides of the
    identity evaluate identically on every state.
    """
    if len(atoms) < 3:
        raise ValidationError("bad_atoms", "law check needs at least three atoms")
    p, q, r = (Atom(a) for a in atoms[:3])
    pairs = {
        "commutativity_and": (and_(p, q), and_(q, p)),
        "commutativity_or": (or_(p, q), or_(q, p)),
        "associativity_and": (and_(and_(p, q), r), and_(p, and_(q, r))),
        "associativity_or": (or_(or_(p, q), r), or_(p, or_(q, r))),
        "distributivity_and_over_or": (and_(p, or_(q, r)), or_(and_(p, q), and_(p, r))),
        "distributivity_or_over_and": (or_(p, and_(q, r)), and_(or_(p, q), or_(p, r))),
        "de_morgan_and": (not_(and_(p, q)), or_(not_(p), not_(q))),
        "de_morgan_or": (not_(or_(p, q)), and_(not_(p), not_(q))),
        "double_negation": (not_(not_(p)), p),
    }
    return {
        name: all(eval_expr(lhs, t) == eval_expr(rhs, t) for t in sample_states)
        for name, (lhs, rhs) in pairs.items()
    }


def projection_meet(p, q, tol: float = linalg.SUBSPACE_TOL) -> np.ndarray:
    """Projection onto the intersection of the two ranges."""
    return linalg.range_intersection_projection(_proj_matrix(p), _proj_matrix(q), tol)


def projection_join(p, q, tol: float = linalg.SUBSPACE_TOL) -> np.ndarray:
    """Projection onto the span of the two ranges."""
    return linalg.range_span_projection(_proj_matrix(p), _proj_matrix(q), tol)


def _proj_matrix(p) -> np.ndarray:
    if isinstance(p, FaceHandle):
        return p.projection
    return face_from_projection(p).projection


def projection_rank(p) -> int:
    return face_from_projection(np.asarray(p)).rank


@dataclass(frozen=True)
class DistributivityWitness:
    """The two-qubit-free counterexample: three lines in C2.

    For P onto |0>, Q onto |+> and R onto |->, the span of Q and R is the
    whole plane, so meeting it with P gives back P (rank 1).  But P meets
    each of Q and R only in the origin, so the join of the meets is the
    zero projection (rank 0).  The distributive law fails by a full rank.
    """

    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    lhs: np.ndarray  # meet(P, join(Q, R))
    rhs: np.ndarray  # join(meet(P, Q), meet(P, R))
    lhs_rank: int
    rhs_rank: int

    @property
    def distributive(self) -> bool:
        return self.lhs_rank == self.rhs_rank and linalg.max_entry_distance(self.lhs, self.rhs) <= 1e-9


def distributivity_witness() -> DistributivityWitness:
    """Build the C2 witness triple and evaluate both sides of the law."""
    zero = np.array([1.0, 0.0], dtype=np.complex128)
    plus = np.array([1.0, 1.0], dtype=np.complex128) / np.sqrt(2.0)
    minus = np.array([1.0, -1.0], dtype=np.complex128) / np.sqrt(2.0)
    p = np.outer(zero, zero.conj())
    q = np.outer(plus, plus.conj())
    r = np.outer(minus, minus.conj())
    lhs = projection_meet(p, projection_join(q, r))
    rhs = projection_join(projection_meet(p, q), projection_meet(p, r))
    return DistributivityWitness(
        p=p,
        q=q,
        r=r,
        lhs=lhs,
        rhs=rhs,
        lhs_rank=projection_rank(lhs),
        rhs_rank=projection_rank(rhs),
    )


def expr_to_json(expr: PropertyExpr) -> dict:
    if isinstance(expr, Atom):
        prop = expr.prop
        body: dict = {"evaluator": prop.evaluator, "target": prop.target, "tol": prop.tol}
        if prop.observable is not None:
            body["observable"] = linalg.matrix_to_json(prop.observable)
        if prop.index is not None:
            body["index"] = prop.index
        return {"atom": body}
    if isinstance(expr, And):
        return {"and": [expr_to_json(item) for item in expr.items]}
    if isinstance(expr, Or):
        return {"or": [expr_to_json(item) for item in expr.items]}
    if isinstance(expr, Not):
        return {"not": expr_to_json(expr.item)}
    raise TypeError(f"not a property expression: {expr!r}")


def expr_from_json(obj) -> PropertyExpr:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise MatrixFormatError("property expression JSON must have exactly one of 'and', 'or', 'not', 'atom'")
    if "and" in obj:
        return And(tuple(expr_from_json(item) for item in obj["and"]))
    if "or" in obj:
        return Or(tuple(expr_from_json(item) for item in obj["or"]))
    if "not" in obj:
        return Not(expr_from_json(obj["not"]))
    if "atom" in obj:
        body = obj["atom"]
        if not isinstance(body, dict) or "evaluator" not in body:
            raise MatrixFormatError("atom JSON needs an 'evaluator'")
        name = body["evaluator"]
        if name not in EVALUATOR_NAMES:
            raise MatrixFormatError(f"unknown evaluator {name!r}, expected one of {EVALUATOR_NAMES}")
        try:
            target = float(body["target"])
            tol = float(body["tol"])
        except (KeyError, TypeError, ValueError):
            raise MatrixFormatError("atom JSON needs numeric 'target' and 'tol'") from None
        if name in ("average", "variance"):
            if "observable" not in body:
                raise MatrixFormatError(f"evaluator {name!r} needs an 'observable'")
            obs = linalg.matrix_from_json(body["observable"])
            ctor = average_property if name == "average" else variance_property
            return Atom(ctor(obs, target, tol))
        if name == "eigenvalue":
            if "index" not in body:
                raise MatrixFormatError("evaluator 'eigenvalue' needs an 'index'")
            return Atom(eigenvalue_property(int(body["index"]), target, tol))
        return Atom(purity_property(target, tol))
    raise MatrixFormatError("property expression JSON must have one of 'and', 'or', 'not', 'atom'")
