"""Dense state vectors and the elementary operations the search algorithms use.

Basis ordering
--------------
A state over a :class:`RegisterLayout` with ``n`` register qubits, an optional
ancilla-1 and ``k`` ancilla-2 qubits is stored as a flat complex vector. The
flat index of a basis state is::

    a1 * 2**(n + k) + reg * 2**k + sum(b_j * 2**(k - 1 - j) for j in range(k))

so ancilla-1 is the most significant bit, the register comes next, and the
ancilla-2 qubits are the least significant bits with ancilla-2 number 0 (the
one used by the first iteration) the most significant among them.

Phase convention: ``R^phi = I + (e^{i phi} - 1) P``, so the selected subspace
acquires ``e^{i phi}``.  A selective inversion ``I_x`` is ``R_x^pi``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from fixedpoint_search.errors import (
    DegenerateSelectionError,
    DimensionMismatchError,
    LayoutMismatchError,
    NotUnitaryError,
    ZeroBranchError,
)

UNITARITY_TOL = 1e-10
NORM_TOL = 1e-12
ZERO_BRANCH_TOL = 1e-15

MAX_QUBITS = 24


@dataclass(frozen=True)
class RegisterLayout:
    register_qubits: int
    ancilla1_present: bool = False
    ancilla2_count: int = 0

    def __post_init__(self):
        if self.register_qubits < 1:
            raise ValueError("register_qubits must be positive")
        if self.ancilla2_count < 0:
            raise ValueError("ancilla2_count must be non-negative")
        if self.total_qubits > MAX_QUBITS:
            raise ValueError(
                f"layout needs {self.total_qubits} qubits, cap is {MAX_QUBITS}"
            )

    @property
    def total_qubits(self) -> int:
        return self.register_qubits + int(self.ancilla1_present) + self.ancilla2_count

    @property
    def dim(self) -> int:
        return 1 << self.total_qubits

    @property
    def register_dim(self) -> int:
        return 1 << self.register_qubits

    @property
    def shape(self) -> tuple[int, ...]:
        """Tensor shape ``(a1, register, b_0, ..., b_{k-1})``."""
        return (2 if self.ancilla1_present else 1, self.register_dim) + (2,) * self.ancilla2_count

    def register_only(self) -> "RegisterLayout":
        return RegisterLayout(self.register_qubits)


@dataclass(frozen=True, eq=False)
class PureState:
    layout: RegisterLayout
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.shape[0] != self.layout.dim:
            raise DimensionMismatchError(
                f"{amps.shape[0]} amplitudes for a layout of dimension {self.layout.dim}"
            )
        object.__setattr__(self, "amps", amps)

    @property
    def tensor(self) -> np.ndarray:
        return self.amps.reshape(self.layout.shape)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def with_tensor(self, tensor: np.ndarray) -> "PureState":
        return PureState(self.layout, tensor.reshape(-1))

    def register_probabilities(self) -> np.ndarray:
        """Born probabilities of the register basis states, ancillas traced out."""
        p = np.abs(self.tensor) ** 2
        axes = (0,) + tuple(range(2, p.ndim))
        return p.sum(axis=axes)


def basis_state(layout: RegisterLayout, register_index: int = 0) -> PureState:
    """``|0>|register_index>|0...0>``."""
    amps = np.zeros(layout.dim, dtype=complex)
    amps[register_index << layout.ancilla2_count] = 1.0
    return PureState(layout, amps)


def embed(register_state: PureState, layout: RegisterLayout) -> PureState:
    """Place a register-only state into ``layout`` with all ancillas in |0>."""
    if register_state.layout != layout.register_only():
        raise LayoutMismatchError("embed expects a register-only state of matching size")
    tensor = np.zeros(layout.shape, dtype=complex)
    idx = (0, slice(None)) + (0,) * layout.ancilla2_count
    tensor[idx] = register_state.amps
    return PureState(layout, tensor.reshape(-1))


@dataclass(frozen=True)
class TargetSet:
    register_qubits: int
    marked: tuple[int, ...]

    def __init__(self, register_qubits: int, marked: Sequence[int], allow_empty: bool = False):
        marked = tuple(sorted(set(int(m) for m in marked)))
        size = 1 << register_qubits
        if any(m < 0 or m >= size for m in marked):
            raise ValueError(f"marked indices must lie in [0, {size})")
        if not marked and not allow_empty:
            raise DegenerateSelectionError("target set is empty")
        object.__setattr__(self, "register_qubits", register_qubits)
        object.__setattr__(self, "marked", marked)

    @property
    def fraction(self) -> float:
        return len(self.marked) / (1 << self.register_qubits)

    def mask(self) -> np.ndarray:
        m = np.zeros(1 << self.register_qubits, dtype=bool)
        m[list(self.marked)] = True
        return m

    def complement(self) -> "TargetSet":
        rest = [i for i in range(1 << self.register_qubits) if i not in set(self.marked)]
        return TargetSet(self.register_qubits, rest, allow_empty=True)


@dataclass(frozen=True, eq=False)
class UnitarySpec:
    """A register unitary: Walsh-Hadamard, an explicit matrix, or seeded Haar-random."""

    kind: str
    n_qubits: int
    matrix: np.ndarray | None = None
    seed: int | None = field(default=None)

    def __post_init__(self):
        if self.kind not in ("walsh_hadamard", "dense_matrix", "random_haar"):
            raise ValueError(f"unknown unitary kind {self.kind!r}")
        if self.kind == "walsh_hadamard":
            return
        m = np.asarray(self.matrix, dtype=complex)
        d = 1 << self.n_qubits
        if m.shape != (d, d):
            raise DimensionMismatchError(f"matrix shape {m.shape}, expected {(d, d)}")
        dev = np.max(np.abs(m.conj().T @ m - np.eye(d)))
        if dev > UNITARITY_TOL:
            raise NotUnitaryError(f"U^dagger U deviates from identity by {dev:.3e}")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def walsh_hadamard(cls, n_qubits: int) -> "UnitarySpec":
        return cls("walsh_hadamard", n_qubits)

    @classmethod
    def dense(cls, matrix) -> "UnitarySpec":
        m = np.asarray(matrix, dtype=complex)
        n = int(round(np.log2(m.shape[0])))
        if m.ndim != 2 or (1 << n) != m.shape[0]:
            raise DimensionMismatchError("dense unitary must be 2^n x 2^n")
        return cls("dense_matrix", n, m)

    @classmethod
    def random_haar(cls, n_qubits: int, seed: int) -> "UnitarySpec":
        rng = np.random.default_rng(seed)
        return cls("random_haar", n_qubits, haar_unitary(1 << n_qubits, rng), seed)

    def to_matrix(self) -> np.ndarray:
        if self.kind == "walsh_hadamard":
            h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
            m = np.ones((1, 1), dtype=complex)
            for _ in range(self.n_qubits):
                m = np.kron(m, h)
            return m
        return self.matrix


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed d x d unitary from QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def unitary_with_error(
    n_qubits: int,
    target: TargetSet,
    eps: float,
    rng: np.random.Generator,
    source_index: int = 0,
) -> UnitarySpec:
    """Random unitary whose image of ``|source_index>`` has non-target weight exactly ``eps``.

    The image is a random complex direction inside the marked subspace mixed
    with a random complex direction in its complement; the remaining columns
    are filled in from a Ginibre matrix by QR.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    d = 1 << n_qubits
    mask = target.mask()
    if eps < 1 and not mask.any():
        raise DegenerateSelectionError("no marked states to put weight on")
    if eps > 0 and mask.all():
        raise DegenerateSelectionError("no unmarked states to put weight on")

    def random_direction(sel):
        v = np.zeros(d, dtype=complex)
        k = int(sel.sum())
        if k:
            w = rng.standard_normal(k) + 1j * rng.standard_normal(k)
            v[sel] = w / np.linalg.norm(w)
        return v

    psi = np.sqrt(1.0 - eps) * random_direction(mask) + np.sqrt(eps) * random_direction(~mask)
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    z[:, 0] = psi
    q, _ = np.linalg.qr(z)
    # QR keeps the first column only up to a phase.
    q[:, 0] = psi
    perm = list(range(d))
    perm[0], perm[source_index] = perm[source_index], perm[0]
    return UnitarySpec.dense(q[:, perm])


def two_level_unitary(eps: float) -> UnitarySpec:
    """Real rotation on one qubit sending |0> to sqrt(1-eps)|1> + sqrt(eps)|0>.

    Pair with ``TargetSet(1, [1])``: the smallest instance with error ``eps``.
    """
    c, s = np.sqrt(eps), np.sqrt(1.0 - eps)
    return UnitarySpec.dense([[c, -s], [s, c]])


def _fwht(x: np.ndarray, axis: int, n: int) -> np.ndarray:
    """Walsh-Hadamard transform over ``axis`` (length 2**n), tensor-structured."""
    shape = x.shape
    front, back = shape[:axis], shape[axis + 1:]
    y = x.reshape(front + (2,) * n + back)
    inv = 1 / np.sqrt(2)
    for q in range(n):
        ax = len(front) + q
        a = np.take(y, 0, axis=ax)
        b = np.take(y, 1, axis=ax)
        y = np.stack(((a + b) * inv, (a - b) * inv), axis=ax)
    return y.reshape(shape)


def _apply_on_axis(tensor: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    shape = tensor.shape
    lead = int(np.prod(shape[:axis], dtype=int))
    t3 = tensor.reshape(lead, shape[axis], -1)
    return (matrix @ t3).reshape(shape)


def apply_unitary(
    state: PureState, u: UnitarySpec, subspace: str = "register", adjoint: bool = False
) -> PureState:
    """Apply ``u`` (or its adjoint) to the register, or to ancilla-1 x register.

    ``subspace="joint"`` expects ``u`` on ``n + 1`` qubits with ancilla-1 as its
    most significant qubit.
    """
    layout = state.layout
    t = state.tensor
    if subspace == "register":
        if u.n_qubits != layout.register_qubits:
            raise DimensionMismatchError(
                f"unitary on {u.n_qubits} qubits, register has {layout.register_qubits}"
            )
        if u.kind == "walsh_hadamard":
            return state.with_tensor(_fwht(t, 1, u.n_qubits))
        m = u.matrix.conj().T if adjoint else u.matrix
        return state.with_tensor(_apply_on_axis(t, m, 1))
    if subspace == "joint":
        if not layout.ancilla1_present:
            raise LayoutMismatchError("joint subspace needs ancilla-1")
        if u.n_qubits != layout.register_qubits + 1:
            raise DimensionMismatchError(
                f"joint unitary on {u.n_qubits} qubits, joint space has {layout.register_qubits + 1}"
            )
        joint_shape = (2 * layout.register_dim,) + t.shape[2:]
        flat = t.reshape(joint_shape)
        if u.kind == "walsh_hadamard":
            out = _fwht(flat, 0, u.n_qubits)
        else:
            m = u.matrix.conj().T if adjoint else u.matrix
            out = _apply_on_axis(flat, m, 0)
        return state.with_tensor(out.reshape(t.shape))
    raise ValueError(f"unknown subspace {subspace!r}")


def apply_hadamard_ancilla1(state: PureState) -> PureState:
    if not state.layout.ancilla1_present:
        raise LayoutMismatchError("layout has no ancilla-1")
    t = state.tensor
    inv = 1 / np.sqrt(2)
    out = np.empty_like(t)
    np.add(t[0], t[1], out=out[0])
    np.subtract(t[0], t[1], out=out[1])
    out *= inv
    return state.with_tensor(out)


def apply_selective_phase(
    state: PureState, sel: TargetSet | PureState, phi: float, strict: bool = False
) -> PureState:
    """``R^phi = I + (e^{i phi} - 1) P`` for the projector ``P`` selected by ``sel``.

    A :class:`TargetSet` selects the marked register basis states, with every
    ancilla value.  A :class:`PureState` selects ``|x><x|``: over the full
    layout when its layout matches, otherwise on the register factor only.
    """
    if not np.isfinite(phi):
        raise ValueError("phi must be finite")
    factor = np.exp(1j * phi) - 1.0
    t = state.tensor
    if isinstance(sel, TargetSet):
        if sel.register_qubits != state.layout.register_qubits:
            raise LayoutMismatchError("target set size does not match the register")
        if strict and not sel.marked:
            raise DegenerateSelectionError("phase shift on an empty selection")
        out = t.copy()
        idx = list(sel.marked)
        out[:, idx] = out[:, idx] * (1.0 + factor)
        return state.with_tensor(out)
    if sel.layout == state.layout:
        x = sel.amps
        return PureState(state.layout, state.amps + factor * x * np.vdot(x, state.amps))
    if sel.layout == state.layout.register_only():
        x = sel.amps
        moved = np.moveaxis(t, 1, -1)
        proj = (moved @ x.conj())[..., None] * x
        return state.with_tensor(np.moveaxis(moved + factor * proj, -1, 1))
    if state.layout.ancilla1_present and sel.layout == RegisterLayout(
        state.layout.register_qubits, True, 0
    ):
        # ancilla-1 x register selector, identity on the ancilla-2 qubits
        x = sel.amps
        flat = t.reshape(x.shape[0], -1)
        out = flat + factor * np.outer(x, x.conj() @ flat)
        return state.with_tensor(out.reshape(t.shape))
    raise LayoutMismatchError("selector state layout does not fit the state")


def overlap(state: PureState, other: PureState) -> complex:
    """``<other|state>``."""
    if state.layout != other.layout:
        raise LayoutMismatchError("overlap of states with different layouts")
    return complex(np.vdot(other.amps, state.amps))


def target_probability(state: PureState, target: TargetSet) -> float:
    if target.register_qubits != state.layout.register_qubits:
        raise LayoutMismatchError("target set size does not match the register")
    return float(state.register_probabilities()[list(target.marked)].sum())


class Measurement(NamedTuple):
    outcome: int
    probability: float
    state: PureState | None


_LABEL = re.compile(r"^(ancilla1|ancilla2\[(\d+)\]|register\[(\d+)\])$")


def _qubit_axis(layout: RegisterLayout, which: str) -> tuple[int, int | None]:
    """Tensor axis of a qubit label, plus the register bit for register qubits."""
    m = _LABEL.match(which)
    if not m:
        raise ValueError(f"bad qubit label {which!r}; use ancilla1, ancilla2[j] or register[i]")
    if which == "ancilla1":
        if not layout.ancilla1_present:
            raise LayoutMismatchError("layout has no ancilla-1")
        return 0, None
    if m.group(2) is not None:
        j = int(m.group(2))
        if j >= layout.ancilla2_count:
            raise LayoutMismatchError(f"layout has {layout.ancilla2_count} ancilla-2 qubits")
        return 2 + j, None
    i = int(m.group(3))
    if i >= layout.register_qubits:
        raise LayoutMismatchError(f"register has {layout.register_qubits} qubits")
    return 1, i


def _project(state: PureState, which: str, outcome: int) -> tuple[float, np.ndarray]:
    axis, bit = _qubit_axis(state.layout, which)
    t = state.tensor
    out = np.zeros_like(t)
    if bit is None:
        idx = [slice(None)] * t.ndim
        idx[axis] = outcome
        out[tuple(idx)] = t[tuple(idx)]
    else:
        regs = (np.arange(state.layout.register_dim) >> bit) & 1 == outcome
        out[:, regs] = t[:, regs]
    # relative to the actual norm so round-off drift does not leak into Born weights
    p = float(np.vdot(out, out).real) / float(np.vdot(t, t).real)
    return p, out


def _normalized(t: np.ndarray) -> np.ndarray:
    return t / np.sqrt(np.vdot(t, t).real)


def measure_qubit(
    state: PureState,
    which: str,
    rng: np.random.Generator | None = None,
    *,
    outcome: int | None = None,
    branches: bool = False,
):
    """Projective Z measurement of one qubit.

    Exactly one mode: ``rng`` samples an outcome, ``outcome`` post-selects a
    given result, ``branches=True`` returns both :class:`Measurement` records
    (a branch below the zero-branch tolerance carries ``state=None``).
    Requesting a branch whose probability is below the tolerance raises
    :class:`ZeroBranchError`.
    """
    if sum((rng is not None, outcome is not None, branches)) != 1:
        raise ValueError("pass exactly one of rng, outcome, branches=True")
    if branches:
        out = []
        for b in (0, 1):
            p, t = _project(state, which, b)
            post = state.with_tensor(_normalized(t)) if p >= ZERO_BRANCH_TOL else None
            out.append(Measurement(b, p, post))
        return out
    if outcome is None:
        p0, t0 = _project(state, which, 0)
        outcome = 0 if rng.random() < p0 else 1
        if outcome == 0:
            p, t = p0, t0
        else:
            p, t = _project(state, which, 1)
    else:
        p, t = _project(state, which, outcome)
    if p < ZERO_BRANCH_TOL:
        raise ZeroBranchError(f"outcome {outcome} of {which} has probability {p:.3e}")
    return Measurement(outcome, p, state.with_tensor(_normalized(t)))


def sample_register(state: PureState, rng: np.random.Generator) -> int:
    cdf = np.cumsum(state.register_probabilities())
    return int(min(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"), cdf.shape[0] - 1))
