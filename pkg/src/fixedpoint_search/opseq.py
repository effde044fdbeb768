"""Operator trees for the recursive phase-shift search.

A tree is read like an operator product: ``Seq(A, B, C)`` is ``A B C`` and is
applied to a state right to left (``C`` first).  Trees built by
:func:`build_phase_search` share subtrees, so a level-12 tree is a small DAG
even though it expands to ``~2 * 3**12`` leaves; application walks it lazily.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from fixedpoint_search.corevec import (
    PureState,
    TargetSet,
    UnitarySpec,
    apply_selective_phase,
    apply_unitary,
)
from fixedpoint_search.errors import LevelTooLargeError

MAX_LEVEL = 12
PI3 = np.pi / 3


@dataclass(frozen=True)
class LeafU:
    dagger: bool = False


@dataclass(frozen=True)
class PhaseSource:
    theta: float


@dataclass(frozen=True)
class PhaseTarget:
    """Selective phase on the marked subspace; one oracle query."""

    phi: float


@dataclass(frozen=True)
class Seq:
    children: tuple

    def __init__(self, *children):
        object.__setattr__(self, "children", tuple(children))


@dataclass(frozen=True)
class Adjoint:
    child: "OpTree"


OpTree = Union[LeafU, PhaseSource, PhaseTarget, Seq, Adjoint]


def adjoint(tree: OpTree, _memo: dict | None = None) -> OpTree:
    """Reverse a product and conjugate every factor.

    ``U`` becomes the symbolic ``U^dagger``, phase leaves flip the sign of
    their angle and ``Adjoint(x)`` collapses to ``x``.
    """
    memo = {} if _memo is None else _memo
    key = id(tree)
    if key in memo:
        return memo[key][1]
    if isinstance(tree, LeafU):
        out = LeafU(not tree.dagger)
    elif isinstance(tree, PhaseSource):
        out = PhaseSource(-tree.theta)
    elif isinstance(tree, PhaseTarget):
        out = PhaseTarget(-tree.phi)
    elif isinstance(tree, Adjoint):
        out = tree.child
    elif isinstance(tree, Seq):
        out = Seq(*(adjoint(c, memo) for c in reversed(tree.children)))
    else:
        raise TypeError(f"not an operator tree: {tree!r}")
    # keep `tree` alive so its id cannot be recycled during this call
    memo[key] = (tree, out)
    return out


def build_phase_search(level: int, theta: float = PI3, phi: float = PI3) -> OpTree:
    """``U_{i+1} = U_i R_s^theta U_i^dagger R_t^phi U_i`` with ``U_0 = U``."""
    if level < 0:
        raise ValueError("level must be non-negative")
    if level > MAX_LEVEL:
        raise LevelTooLargeError(f"level {level} exceeds the cap of {MAX_LEVEL}")
    u = LeafU()
    rs, rt = PhaseSource(theta), PhaseTarget(phi)
    for _ in range(level):
        u = Seq(u, rs, adjoint(u), rt, u)
    return u


def build_amplitude_amplification(eta: int) -> OpTree:
    """``U (I_s U^dagger I_t U)^eta``: ``eta`` standard amplification steps."""
    step = Seq(PhaseSource(np.pi), LeafU(True), PhaseTarget(np.pi), LeafU())
    return Seq(*([LeafU()] + [step] * eta))


def leaves(tree: OpTree, dagger: bool = False) -> Iterator[OpTree]:
    """Leaves in written (left-to-right) order, with adjoints pushed down."""
    if isinstance(tree, Adjoint):
        yield from leaves(tree.child, not dagger)
    elif isinstance(tree, Seq):
        kids = reversed(tree.children) if dagger else tree.children
        for c in kids:
            yield from leaves(c, dagger)
    else:
        yield adjoint(tree) if dagger else tree


def flatten(tree: OpTree) -> Seq:
    return Seq(*leaves(tree))


def _leaf_text(leaf) -> str:
    if isinstance(leaf, LeafU):
        return "U†" if leaf.dagger else "U"
    if isinstance(leaf, PhaseSource):
        return "Rs†" if leaf.theta < 0 else "Rs"
    return "Rt†" if leaf.phi < 0 else "Rt"


def to_text(tree: OpTree) -> str:
    """Flattened sequence such as ``U Rs U† Rt U``; negative angles print as daggers."""
    return " ".join(_leaf_text(l) for l in leaves(tree))


def count_queries(level: int) -> int:
    if level < 0:
        raise ValueError("level must be non-negative")
    return (3**level - 1) // 2


def level_for_queries(q: int) -> int | None:
    """Recursion level using exactly ``q`` queries, or None if ``q`` is not ``(3^i-1)/2``."""
    level = 0
    while count_queries(level) < q:
        level += 1
    return level if count_queries(level) == q else None


def apply_tree(
    tree: OpTree,
    u: UnitarySpec,
    s: PureState,
    t: TargetSet,
    state: PureState,
) -> tuple[PureState, int]:
    """Apply ``tree`` to ``state`` leaf by leaf; returns the new state and the query count.

    ``s`` is the source state whose selective phase ``PhaseSource`` leaves apply.
    """
    queries = 0

    def walk(node, psi, dagger):
        nonlocal queries
        if isinstance(node, Seq):
            kids = node.children if dagger else reversed(node.children)
            for c in kids:
                psi = walk(c, psi, dagger)
            return psi
        if isinstance(node, Adjoint):
            return walk(node.child, psi, not dagger)
        if isinstance(node, LeafU):
            return apply_unitary(psi, u, adjoint=node.dagger != dagger)
        if isinstance(node, PhaseSource):
            return apply_selective_phase(psi, s, -node.theta if dagger else node.theta)
        if isinstance(node, PhaseTarget):
            queries += 1
            return apply_selective_phase(psi, t, -node.phi if dagger else node.phi)
        raise TypeError(f"not an operator tree: {node!r}")

    return walk(tree, state, False), queries
