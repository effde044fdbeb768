"""Measurement-driven fixed-point search with two ancillas.

Ancilla-1 starts in ``|+>`` and gates the oracle, so only ``|1>|t>`` counts as
the joint target.  Each iteration queries the oracle into an ancilla-2 qubit
and measures it.  Outcome 1 ends the run with the register in the target
subspace.  Outcome 0 triggers the joint diffusion ``(H x U) I_{0s} (H x U)^dagger``.

Three execution modes share the same operations:

* ``branch_exact`` propagates both measurement outcomes with their Born
  weights and is the reference the other modes are tested against;
* ``interactive_mc`` samples one trajectory per call, reusing one ancilla-2;
* ``deferred_unitary`` allocates ``q`` ancilla-2 qubits, controls iteration
  ``k`` on qubits ``0..k-1`` being ``|0>`` and reads the record at the end.
  The first 1 in iteration order is the exit iteration.

Trajectory logs use one line per iteration, ``iter,outcome,queries_so_far``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from fixedpoint_search.corevec import (
    NORM_TOL,
    PureState,
    RegisterLayout,
    TargetSet,
    UnitarySpec,
    apply_hadamard_ancilla1,
    apply_selective_phase,
    apply_unitary,
    basis_state,
    embed,
    measure_qubit,
    sample_register,
    target_probability,
    two_level_unitary,
)
from fixedpoint_search.errors import ConfigError

MODES = ("interactive_mc", "branch_exact", "deferred_unitary")
COMPLETED = "completed"


@dataclass(frozen=True)
class JointState:
    """State over ancilla-1 x register x ancilla-2 plus the oracle's bookkeeping."""

    state: PureState
    target: TargetSet
    source: PureState
    queries: int = 0

    def joint_source(self) -> PureState:
        """``|s_j> = |0>|s>`` on ancilla-1 x register."""
        lay = RegisterLayout(self.state.layout.register_qubits, True, 0)
        amps = np.zeros(lay.dim, dtype=complex)
        amps[: lay.register_dim] = self.source.amps
        return PureState(lay, amps)


@dataclass(frozen=True)
class RunConfig:
    q: int
    mode: str = "branch_exact"
    seed: int | None = None
    avoid_mode: bool = False

    def __post_init__(self):
        if self.q < 1:
            raise ConfigError("q must be at least 1")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.mode == "interactive_mc" and self.seed is None:
            raise ConfigError("Monte-Carlo mode needs an explicit seed")
        if self.mode != "interactive_mc" and self.seed is not None:
            raise ConfigError("a seed is only meaningful in interactive_mc mode")


@dataclass
class Branch:
    exit_iteration: int | str
    probability: float
    register_probs: np.ndarray


@dataclass
class BranchDistribution:
    q: int
    target: TargetSet
    branches: list[Branch] = field(default_factory=list)

    def queries_of(self, branch: Branch) -> int:
        return self.q if branch.exit_iteration == COMPLETED else branch.exit_iteration

    @property
    def total_probability(self) -> float:
        return sum(b.probability for b in self.branches)

    @property
    def expected_queries(self) -> float:
        return sum(b.probability * self.queries_of(b) for b in self.branches)

    def target_probability(self) -> float:
        idx = list(self.target.marked)
        return sum(b.probability * float(b.register_probs[idx].sum()) for b in self.branches)

    def error_probability(self) -> float:
        return 1.0 - self.target_probability()

    def exit_probabilities(self) -> dict:
        out = {k: 0.0 for k in list(range(1, self.q + 1)) + [COMPLETED]}
        for b in self.branches:
            out[b.exit_iteration] += b.probability
        return out

    def joint(self) -> np.ndarray:
        """``(q + 1, 2^n)`` array of P(exit, register outcome); last row is ``completed``."""
        out = np.zeros((self.q + 1, 1 << self.target.register_qubits))
        for b in self.branches:
            row = self.q if b.exit_iteration == COMPLETED else b.exit_iteration - 1
            out[row] += b.probability * b.register_probs
        return out


@dataclass
class TrajectoryResult:
    exit_iteration: int | str
    register_outcome: int
    queries: int
    log: list[str]

    def log_text(self) -> str:
        return "".join(line + "\n" for line in self.log)


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for trajectory ``index``; does not depend on run order."""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def _default_source(n: int) -> PureState:
    return basis_state(RegisterLayout(n))


def prepare_initial(
    u: UnitarySpec,
    t: TargetSet,
    s: PureState | None = None,
    ancilla2_count: int = 1,
) -> JointState:
    """``(H x U x I) |0>|s>|0...0>``."""
    if ancilla2_count < 1:
        raise ConfigError("at least one ancilla-2 qubit is needed")
    n = u.n_qubits
    s = _default_source(n) if s is None else s
    layout = RegisterLayout(n, True, ancilla2_count)
    psi = embed(s, layout)
    psi = apply_unitary(apply_hadamard_ancilla1(psi), u)
    return JointState(psi, t, s)


def _bit_condition(shape, controls) -> np.ndarray:
    """Boolean array, broadcastable to ``shape``, true where every control ancilla-2 is 0."""
    cond = np.ones([1] * len(shape), dtype=bool)
    for c in controls:
        sel = np.array([True, False]).reshape([2 if ax == 2 + c else 1 for ax in range(len(shape))])
        cond = cond & sel
    return cond


def controlled_oracle(
    js: JointState, which: int = 0, controls: tuple[int, ...] = (), avoid: bool = False
) -> JointState:
    """Flip ancilla-2 qubit ``which`` on ``|1>|t>`` (``|1>|t_perp>`` when ``avoid``).

    In deferred mode ``controls`` lists earlier ancilla-2 qubits that must all
    read 0.  Always costs one query.
    """
    t = js.state.tensor
    shape = t.shape
    marked = js.target.mask()
    if avoid:
        marked = ~marked
    cond = np.array([False, True]).reshape((2,) + (1,) * (len(shape) - 1))
    cond = cond & marked.reshape((1, -1) + (1,) * (len(shape) - 2))
    cond = cond & _bit_condition(shape, controls)
    out = np.where(cond, np.flip(t, axis=2 + which), t)
    return replace(js, state=js.state.with_tensor(out), queries=js.queries + 1)


def joint_diffusion(
    js: JointState, u: UnitarySpec, controls: tuple[int, ...] = ()
) -> JointState:
    """Reflect about ``(H x U)|0>|s>`` where the ``controls`` ancilla-2 qubits read 0."""
    psi = apply_unitary(js.state, u, adjoint=True)
    psi = apply_hadamard_ancilla1(psi)
    psi = apply_selective_phase(psi, js.joint_source(), np.pi)
    psi = apply_hadamard_ancilla1(psi)
    psi = apply_unitary(psi, u)
    if controls:
        t = js.state.tensor
        cond = _bit_condition(t.shape, controls)
        psi = psi.with_tensor(np.where(cond, psi.tensor, t))
    return replace(js, state=psi)


def _exit_set(t: TargetSet, avoid: bool) -> TargetSet:
    return t.complement() if avoid else t


def run_branch_exact(
    u: UnitarySpec, t: TargetSet, q: int, s: PureState | None = None, avoid: bool = False
) -> BranchDistribution:
    dist = BranchDistribution(q, t)
    exit_set = _exit_set(t, avoid)
    # (path probability, joint state); at most one live path survives each step
    live = [(1.0, prepare_initial(u, t, s))]
    for k in range(1, q + 1):
        nxt = []
        for p_path, js in live:
            js = controlled_oracle(js, avoid=avoid)
            zero, one = measure_qubit(js.state, "ancilla2[0]", branches=True)
            if one.state is not None:
                hit = target_probability(one.state, exit_set)
                if abs(hit - 1.0) > 1e-10:
                    raise AssertionError(f"exit branch not inside the flagged subspace ({hit})")
                dist.branches.append(
                    Branch(k, p_path * one.probability, one.state.register_probabilities())
                )
            if zero.state is not None:
                nxt.append((p_path * zero.probability, joint_diffusion(replace(js, state=zero.state), u)))
        live = nxt
    for p_path, js in live:
        dist.branches.append(Branch(COMPLETED, p_path, js.state.register_probabilities()))
    return dist


def run_deferred(
    u: UnitarySpec, t: TargetSet, q: int, s: PureState | None = None, avoid: bool = False
) -> BranchDistribution:
    """All-unitary run with ``q`` ancilla-2 qubits, measured once at the end."""
    js = prepare_initial(u, t, s, ancilla2_count=q)
    for j in range(q):
        js = controlled_oracle(js, which=j, controls=tuple(range(j)), avoid=avoid)
        js = joint_diffusion(js, u, controls=tuple(range(j + 1)))
    n = u.n_qubits
    probs = (np.abs(js.state.tensor) ** 2).sum(axis=0).reshape(1 << n, 1 << q)
    # ancilla-2 qubit j sits at bit q-1-j, so the first 1 is the top set bit
    first = np.array([q - r.bit_length() + 1 if r else 0 for r in range(1 << q)])
    dist = BranchDistribution(q, t)
    for k in list(range(1, q + 1)) + [0]:
        reg = probs[:, first == k].sum(axis=1)
        p = float(reg.sum())
        if p < 1e-15:
            continue
        dist.branches.append(Branch(k if k else COMPLETED, p, reg / p))
    return dist


def run_trajectory(
    u: UnitarySpec,
    t: TargetSet,
    q: int,
    rng: np.random.Generator,
    s: PureState | None = None,
    avoid: bool = False,
) -> TrajectoryResult:
    js = prepare_initial(u, t, s)
    log = []
    psi = None
    exit_iteration: int | str = COMPLETED
    for k in range(1, q + 1):
        js = controlled_oracle(js, avoid=avoid)
        m = measure_qubit(js.state, "ancilla2[0]", rng)
        log.append(f"{k},{m.outcome},{js.queries}")
        if m.outcome == 1:
            exit_iteration, psi = k, m.state
            break
        js = joint_diffusion(replace(js, state=m.state), u)
    if psi is None:
        psi = js.state
    return TrajectoryResult(exit_iteration, sample_register(psi, rng), js.queries, log)


def run(
    config: RunConfig,
    u: UnitarySpec,
    t: TargetSet,
    s: PureState | None = None,
    trajectory_index: int = 0,
):
    """Dispatch on ``config.mode``; Monte-Carlo returns one :class:`TrajectoryResult`."""
    if config.mode == "branch_exact":
        return run_branch_exact(u, t, config.q, s, config.avoid_mode)
    if config.mode == "deferred_unitary":
        return run_deferred(u, t, config.q, s, config.avoid_mode)
    rng = trajectory_rng(config.seed, trajectory_index)
    return run_trajectory(u, t, config.q, rng, s, config.avoid_mode)


def sample_trajectories(
    config: RunConfig,
    u: UnitarySpec,
    t: TargetSet,
    count: int,
    s: PureState | None = None,
) -> list[TrajectoryResult]:
    if config.mode != "interactive_mc":
        raise ConfigError("sample_trajectories needs interactive_mc mode")
    return [run(config, u, t, s, i) for i in range(count)]


def expected_queries(eps: float, q: int) -> float:
    """Mean query count of the branch-exact run at initial error ``eps``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    if q < 1:
        raise ValueError("q must be at least 1")
    dist = run_branch_exact(two_level_unitary(eps), TargetSet(1, [1]), q)
    return dist.expected_queries


def run_one_ancilla(
    u: UnitarySpec, t: TargetSet, n_iter: int, s: PureState | None = None
) -> BranchDistribution:
    """Single-ancilla variant: query, measure, diffuse with ``U I_s U^dagger`` on outcome 0."""
    n = u.n_qubits
    s = _default_source(n) if s is None else s
    layout = RegisterLayout(n, False, 1)
    psi = apply_unitary(embed(s, layout), u)
    dist = BranchDistribution(n_iter, t)
    marked = t.mask().reshape(1, -1, 1)
    p_path = 1.0
    for k in range(1, n_iter + 1):
        tt = psi.tensor
        psi = psi.with_tensor(np.where(marked, np.flip(tt, axis=2), tt))
        zero, one = measure_qubit(psi, "ancilla2[0]", branches=True)
        if one.state is not None:
            dist.branches.append(Branch(k, p_path * one.probability, one.state.register_probabilities()))
        if zero.state is None:
            return dist
        p_path *= zero.probability
        psi = apply_unitary(zero.state, u, adjoint=True)
        psi = apply_selective_phase(psi, s, np.pi)
        psi = apply_unitary(psi, u)
    dist.branches.append(Branch(COMPLETED, p_path, psi.register_probabilities()))
    return dist


def check_normalized(dist: BranchDistribution) -> None:
    total = dist.total_probability
    if abs(total - 1.0) > NORM_TOL:
        raise AssertionError(f"branch probabilities sum to {total!r}")
