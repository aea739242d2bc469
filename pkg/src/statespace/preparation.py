"""Gemenge trees: preparation records carrying statistical decompositions.

A preparation is either a single procedure (``Leaf``) or a random choice
among sub-preparations with fixed probabilities (``Mix``).  The tree records
the actual procedure; two preparations with the same resolved state operator
can still be different preparations, and the toolkit keeps them distinct.
Mixing is commutative and associative at the level of the flattened,
canonically ordered leaf decomposition, which is what
:func:`leaf_decomposition` computes.

Trees are immutable; every operation returns a new tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from . import linalg
from .errors import (
    CODE_EMPTY_MIX,
    CODE_NON_UNITARY,
    CODE_WEIGHT_SUM,
    DimensionMismatchError,
    MatrixFormatError,
    ValidationError,
)
from .states import StateOperator, new_state, state_from_json, state_to_json

#: weights of a mix must sum to 1 within this tolerance
MIX_WEIGHT_ATOL = 1e-12
#: merged decomposition weights must sum to 1 within this tolerance
DECOMP_WEIGHT_ATOL = 1e-10
#: leaves merge only below this max-entry distance (and with equal labels)
MERGE_STATE_TOL = 1e-12


@dataclass(frozen=True)
class Leaf:
    state: StateOperator
    label: str

    @property
    def dim(self) -> int:
        return self.state.dim


@dataclass(frozen=True)
class Mix:
    children: tuple[tuple[float, "PreparationNode"], ...]

    @property
    def dim(self) -> int:
        return self.children[0][1].dim


PreparationNode = Union[Leaf, Mix]


def leaf(state: StateOperator, label: str) -> Leaf:
    return Leaf(state, str(label))


def mix(children: Iterable[tuple[float, PreparationNode]]) -> PreparationNode:
    """Random choice among child preparations with the given probabilities.

    Weights must lie in (0, 1] and sum to 1 within 1e-12; zero-weight
    children are rejected rather than dropped.  A single child of weight 1
    collapses to the child itself.  Nested mixes are kept as given, the tree
    records the actual procedure.
    """
    entries = [(float(w), child) for w, child in children]
    if not entries:
        raise ValidationError(CODE_EMPTY_MIX, "mix needs at least one child")
    for w, _ in entries:
        if not (0.0 < w <= 1.0):
            raise ValidationError(CODE_WEIGHT_SUM, f"mix weight {w!r} outside (0, 1]")
    total = math.fsum(w for w, _ in entries)
    if abs(total - 1.0) > MIX_WEIGHT_ATOL:
        raise ValidationError(
            CODE_WEIGHT_SUM,
            f"mix weights sum to {total!r}, off by {abs(total - 1.0):.3e}",
            amount=abs(total - 1.0),
        )
    dim = entries[0][1].dim
    for _, child in entries:
        if child.dim != dim:
            raise DimensionMismatchError("mix children must share a dimension")
    if len(entries) == 1:
        return entries[0][1]
    return Mix(tuple(entries))


def resolve_state(node: PreparationNode) -> StateOperator:
    """The state operator prepared by the tree: the weighted sum of its leaves."""
    acc = np.zeros((node.dim, node.dim), dtype=np.complex128)
    tol = 0.0
    for w, state, _ in _flatten(node):
        acc = acc + w * state.matrix
        tol = max(tol, state.tol)
    return new_state(acc, tol or 1e-9)


def _flatten(node: PreparationNode, weight: float = 1.0):
    """Leaves in tree order with product weights, no merging."""
    if isinstance(node, Leaf):
        yield weight, node.state, node.label
    else:
        for w, child in node.children:
            yield from _flatten(child, weight * w)


@dataclass(frozen=True)
class LeafDecomposition:
    """Flattened, canonically ordered statistical decomposition.

    Entries are (weight, state, label), sorted so that reassociated or
    permuted trees of the same procedure mix produce equal decompositions.
    Exact duplicates (same label, states within 1e-12) are merged.
    """

    entries: tuple[tuple[float, StateOperator, str], ...]

    def __len__(self) -> int:
        return len(self.entries)

    def weights(self) -> tuple[float, ...]:
        return tuple(w for w, _, _ in self.entries)

    def labels(self) -> tuple[str, ...]:
        return tuple(label for _, _, label in self.entries)


def leaf_decomposition(node: PreparationNode) -> LeafDecomposition:
    groups: list[list] = []  # [label, state, weight]
    for w, state, label in _flatten(node):
        for group in groups:
            if group[0] == label and linalg.max_entry_distance(group[1].matrix, state.matrix) <= MERGE_STATE_TOL:
                group[2] += w
                break
        else:
            groups.append([label, state, w])

    def order_key(group):
        label, state, weight = group
        fingerprint = np.round(np.asarray(state.matrix), 12).tobytes()
        return (label, round(weight, 12), fingerprint)

    groups.sort(key=order_key)
    return LeafDecomposition(tuple((g[2], g[1], g[0]) for g in groups))


def decompositions_equal(
    a: LeafDecomposition,
    b: LeafDecomposition,
    weight_tol: float = DECOMP_WEIGHT_ATOL,
    state_tol: float = MERGE_STATE_TOL,
) -> bool:
    """Canonical-form equality of two decompositions."""
    if len(a) != len(b):
        return False
    for (wa, sa, la), (wb, sb, lb) in zip(a.entries, b.entries):
        if la != lb or abs(wa - wb) > weight_tol:
            return False
        if linalg.max_entry_distance(sa.matrix, sb.matrix) > state_tol:
            return False
    return True


def is_decomposable(node: PreparationNode) -> bool:
    """Whether the preparation is a nontrivial statistical mixture.

    True exactly when the merged decomposition has at least two entries
    with genuinely distinct states, each of weight strictly inside (0, 1).
    A bare leaf is never decomposable, whatever its state operator looks
    like; in particular a reduced entangled state prepared as a leaf stays
    indecomposable even though it is not extremal.
    """
    decomp = leaf_decomposition(node)
    if len(decomp) < 2:
        return False
    if any(not (0.0 < w < 1.0) for w in decomp.weights()):
        return False
    first = decomp.entries[0][1]
    return any(
        linalg.max_entry_distance(first.matrix, state.matrix) > MERGE_STATE_TOL
        for _, state, _ in decomp.entries[1:]
    )


def evolve(node: PreparationNode, u) -> PreparationNode:
    """Apply a unitary leafwise: each leaf state T becomes U T U†.

    Tree shape, weights and labels are unchanged, which is the invariance of
    statistical decompositions under unitary evolution.
    """
    mat = linalg.as_matrix(u)
    defect = linalg.max_entry_distance(mat.conj().T @ mat, np.eye(mat.shape[0]))
    if defect > 1e-9:
        raise ValidationError(
            CODE_NON_UNITARY,
            f"not unitary: max |U†U - I| = {defect:.3e}",
            amount=defect,
        )
    return _map_leaves(node, lambda s, label: (new_state(mat @ s.matrix @ mat.conj().T, s.tol), label))


def compose(a: PreparationNode, b: PreparationNode) -> PreparationNode:
    """Joint preparation of two independent systems.

    Every pair of leaves is tensored and branch weights multiply, so the
    resolved state of the composition is the tensor product of the resolved
    states.
    """
    if isinstance(a, Mix):
        return Mix(tuple((w, compose(child, b)) for w, child in a.children))
    if isinstance(b, Mix):
        return Mix(tuple((w, compose(a, child)) for w, child in b.children))
    product = linalg.tensor_product(a.state.matrix, b.state.matrix)
    tol = max(a.state.tol, b.state.tol)
    return Leaf(new_state(product, tol), f"{a.label}(x){b.label}")


def reduce_subsystem(node: PreparationNode, dims: tuple[int, int], over: str) -> PreparationNode:
    """Partial trace applied leafwise; weights and labels are preserved.

    Reducing a composite preparation is itself a preparation of the
    subsystem, so the tree structure carries over unchanged.
    """
    return _map_leaves(
        node,
        lambda s, label: (new_state(linalg.partial_trace(s.matrix, dims, over), s.tol), label),
    )


def _map_leaves(node: PreparationNode, fn) -> PreparationNode:
    if isinstance(node, Leaf):
        state, label = fn(node.state, node.label)
        return Leaf(state, label)
    return Mix(tuple((w, _map_leaves(child, fn)) for w, child in node.children))


def sample_leaf(node: PreparationNode, rng: np.random.Generator) -> tuple[str, StateOperator]:
    """Draw one leaf, branching with the recorded probabilities.

    The caller supplies the generator, whose state advances in place; use
    independently seeded generators for parallel streams.
    """
    while isinstance(node, Mix):
        u = rng.random()
        acc = 0.0
        chosen = node.children[-1][1]
        for w, child in node.children:
            acc += w
            if u < acc:
                chosen = child
                break
        node = chosen
    return node.label, node.state


def node_to_json(node: PreparationNode) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": {"label": node.label, "state": state_to_json(node.state)}}
    return {"mix": [[w, node_to_json(child)] for w, child in node.children]}


def node_from_json(obj, *, max_dim: int | None = None) -> PreparationNode:
    if not isinstance(obj, dict):
        raise MatrixFormatError("preparation JSON must be an object")
    if "leaf" in obj:
        body = obj["leaf"]
        if not isinstance(body, dict) or "label" not in body or "state" not in body:
            raise MatrixFormatError("leaf JSON needs 'label' and 'state'")
        return Leaf(state_from_json(body["state"], max_dim=max_dim), str(body["label"]))
    if "mix" in obj:
        body = obj["mix"]
        if not isinstance(body, list):
            raise MatrixFormatError("mix JSON must be a list of [weight, node] pairs")
        children = []
        for item in body:
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise MatrixFormatError("mix entries must be [weight, node] pairs")
            try:
                w = float(item[0])
            except (TypeError, ValueError):
                raise MatrixFormatError(f"mix weight {item[0]!r} is not a number") from None
            children.append((w, node_from_json(item[1], max_dim=max_dim)))
        return mix(children)
    raise MatrixFormatError("preparation JSON must have a 'leaf' or 'mix' key")
