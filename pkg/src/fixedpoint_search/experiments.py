"""Head-to-head scenarios: averaged error over an uncertain marked fraction,
success curves versus ``f``, and full state-vector demos on small databases."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Chebyshev
from numpy.polynomial.legendre import leggauss

from fixedpoint_search import analytic
from fixedpoint_search.corevec import (
    RegisterLayout,
    TargetSet,
    UnitarySpec,
    basis_state,
    target_probability,
)
from fixedpoint_search.errors import ConfigError, QuadratureError
from fixedpoint_search.measured import (
    RunConfig,
    run_branch_exact,
    run_one_ancilla,
    sample_trajectories,
    trajectory_rng,
)
from fixedpoint_search.opseq import (
    apply_tree,
    build_amplitude_amplification,
    build_phase_search,
    count_queries,
    level_for_queries,
)

ALGORITHMS = ("classical", "younes", "pi3", "measured", "grover", "one_ancilla")

QUAD_NODES = 64
QUAD_TOL = 1e-10
CLOSED_FORM_TOL = 1e-12


@dataclass(frozen=True)
class FractionDistribution:
    kind: str
    lo: float
    hi: float

    @classmethod
    def point(cls, f: float) -> "FractionDistribution":
        return cls("point", f, f)

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "FractionDistribution":
        return cls("uniform", lo, hi)

    def __post_init__(self):
        if self.kind not in ("point", "uniform"):
            raise ConfigError(f"unknown distribution kind {self.kind!r}")
        if not 0.0 <= self.lo <= self.hi <= 1.0:
            raise ConfigError("need 0 <= lo <= hi <= 1")


def validate_queries(algorithm: str, q: int) -> None:
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    if q < 0:
        raise ConfigError("q must be non-negative")
    if algorithm == "pi3" and level_for_queries(q) is None:
        allowed = ", ".join(str(count_queries(i)) for i in range(6))
        raise ConfigError(
            f"pi3 runs a whole recursion level, so q must be (3^i - 1)/2 ({allowed}, ...); "
            f"got {q}. The measured algorithm accepts any q."
        )


def success_law(algorithm: str, q: int) -> Callable[[float], float]:
    """Success probability as a function of the marked fraction ``f``."""
    validate_queries(algorithm, q)
    if algorithm == "classical":
        return lambda f: 1.0 - analytic.classical_error(1.0 - f, q)
    if algorithm == "younes":
        return lambda f: analytic.younes_success(f, q)
    if algorithm == "pi3":
        level = level_for_queries(q)
        return lambda f: 1.0 - analytic.recursion_error(1.0 - f, level)
    if algorithm == "measured":
        return lambda f: 1.0 - analytic.measured_error(1.0 - f, q)
    if algorithm == "grover":
        return lambda f: analytic.grover_success(f, q)
    return lambda f: 1.0 - analytic.one_ancilla_error(1.0 - f, q)


def error_polynomial(algorithm: str, q: int) -> Chebyshev | None:
    """Error as a polynomial in ``eps = 1 - f`` when it is one (everything but grover).

    Held in the Chebyshev basis: the power basis loses about seven digits to
    cancellation once the degree reaches the high twenties.
    """
    validate_queries(algorithm, q)
    eps = Chebyshev([0.0, 1.0])
    if algorithm == "classical":
        return eps ** (q + 1)
    if algorithm in ("pi3", "measured"):
        return eps ** (2 * q + 1)
    if algorithm == "one_ancilla":
        return eps * (2 * eps - 1) ** (2 * q)
    if algorithm == "younes":
        # U_k(eps) by the three-term recurrence
        u_prev, u_cur = Chebyshev([0.0]), Chebyshev([1.0])
        for _ in range(q):
            u_prev, u_cur = u_cur, 2 * eps * u_cur - u_prev
        return 1 - (1 - eps) * (u_cur**2 + u_prev**2)
    return None


def _gauss_mean(fn: Callable[[float], float], lo: float, hi: float, nodes: int) -> float:
    x, w = leggauss(nodes)
    f = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    vals = np.array([fn(v) for v in f])
    return float(0.5 * np.dot(w, vals))


def overall_error(algorithm: str, q: int, dist: FractionDistribution, nodes: int = QUAD_NODES) -> float:
    """Expected error over ``dist``: Gauss-Legendre, checked against 2x nodes and,
    for polynomial laws, the exact antiderivative."""
    succ = success_law(algorithm, q)
    if dist.kind == "point" or dist.lo == dist.hi:
        return 1.0 - succ(dist.lo)
    err = lambda f: 1.0 - succ(f)  # noqa: E731
    est = _gauss_mean(err, dist.lo, dist.hi, nodes)
    check = _gauss_mean(err, dist.lo, dist.hi, 2 * nodes)
    if abs(est - check) > QUAD_TOL:
        raise QuadratureError(f"{nodes} vs {2 * nodes} nodes differ by {abs(est - check):.3e}")
    exact = closed_form_overall_error(algorithm, q, dist)
    if exact is not None and abs(est - exact) > CLOSED_FORM_TOL:
        raise QuadratureError(f"quadrature {est!r} disagrees with closed form {exact!r}")
    return est


def closed_form_overall_error(algorithm: str, q: int, dist: FractionDistribution) -> float | None:
    poly = error_polynomial(algorithm, q)
    if poly is None:
        return None
    eps_lo, eps_hi = 1.0 - dist.hi, 1.0 - dist.lo
    if dist.lo == dist.hi:
        return float(poly(eps_lo))
    anti = poly.integ()
    return float((anti(eps_hi) - anti(eps_lo)) / (eps_hi - eps_lo))


SECTION4_DIST = FractionDistribution.uniform(0.75, 1.0)


def section4_errors() -> dict[str, float]:
    """One-query overall errors for f uniform on [0.75, 1]."""
    return {
        name: overall_error(name, 1, SECTION4_DIST)
        for name in ("classical", "younes", "pi3")
    }


@dataclass
class ComparisonRow:
    f: float
    success: dict[str, float] = field(default_factory=dict)


def sweep_curves(algorithms: Sequence[str], q: int, grid: int) -> list[ComparisonRow]:
    """Success of each algorithm on ``grid`` evenly spaced ``f`` in [0, 1], ascending."""
    if grid < 2:
        raise ConfigError("grid resolution must be at least 2")
    laws = {a: success_law(a, q) for a in algorithms}
    rows = []
    for f in np.linspace(0.0, 1.0, grid):
        f = float(f)
        rows.append(ComparisonRow(f, {a: min(1.0, max(0.0, law(f))) for a, law in laws.items()}))
    return rows


def dominates(rows: list[ComparisonRow], better: str, worse: str, f_min: float = 0.75) -> bool:
    return all(r.success[better] >= r.success[worse] for r in rows if r.f >= f_min)


def rows_to_csv(rows: list[ComparisonRow], algorithms: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["f"] + [f"{a}_success" for a in algorithms])
    for r in rows:
        w.writerow([format(r.f, ".17g")] + [format(r.success[a], ".17g") for a in algorithms])
    return buf.getvalue()


def write_csv(rows: list[ComparisonRow], algorithms: Sequence[str], path: str | Path) -> None:
    Path(path).write_bytes(rows_to_csv(rows, algorithms).encode("ascii"))


def format_report(values: dict) -> str:
    return "".join(f"{k}={_fmt(v)}\n" for k, v in values.items())


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


@dataclass
class DemoReport:
    algorithm: str
    n_qubits: int
    marked: tuple[int, ...]
    q: int
    seed: int
    f: float
    analytic_success: float
    simulated_success: float | None
    empirical_success: float | None = None
    ci_halfwidth: float | None = None
    shots: int | None = None
    expected_queries: float | None = None

    def as_dict(self) -> dict:
        out = {
            "algorithm": self.algorithm,
            "qubits": self.n_qubits,
            "marked": ",".join(map(str, self.marked)),
            "q": self.q,
            "seed": self.seed,
            "f": self.f,
            "analytic_success": self.analytic_success,
            "simulated_success": "n/a" if self.simulated_success is None else self.simulated_success,
        }
        if self.empirical_success is not None:
            out["empirical_success"] = self.empirical_success
            out["ci95_halfwidth"] = self.ci_halfwidth
            out["shots"] = self.shots
        if self.expected_queries is not None:
            out["expected_queries"] = self.expected_queries
        return out


def _binomial_ci(hits: int, shots: int) -> tuple[float, float]:
    p = hits / shots
    return p, 1.96 * math.sqrt(max(p * (1 - p), 1e-300) / shots)


def demo_database(
    n_qubits: int,
    marked: Sequence[int],
    algorithm: str,
    q: int,
    seed: int,
    shots: int = 10_000,
) -> DemoReport:
    """Run ``algorithm`` on a Walsh-Hadamard search over ``2**n_qubits`` items.

    Younes et al.'s circuit is not simulated; its row reports the formula only.
    """
    if n_qubits < 1 or n_qubits > 12:
        raise ConfigError("demo supports 1..12 qubits")
    validate_queries(algorithm, q)
    t = TargetSet(n_qubits, marked)
    f = t.fraction
    u = UnitarySpec.walsh_hadamard(n_qubits)
    s = basis_state(RegisterLayout(n_qubits))
    report = DemoReport(algorithm, n_qubits, t.marked, q, seed, f, success_law(algorithm, q)(f), None)
    if algorithm in ("pi3", "grover"):
        tree = build_phase_search(level_for_queries(q)) if algorithm == "pi3" else build_amplitude_amplification(q)
        out, _ = apply_tree(tree, u, s, t, s)
        report.simulated_success = target_probability(out, t)
    elif algorithm == "measured":
        dist = run_branch_exact(u, t, q)
        report.simulated_success = dist.target_probability()
        report.expected_queries = dist.expected_queries
        trajs = sample_trajectories(RunConfig(q, "interactive_mc", seed), u, t, shots)
        hits = sum(1 for tr in trajs if tr.register_outcome in t.marked)
        report.empirical_success, report.ci_halfwidth = _binomial_ci(hits, shots)
        report.shots = shots
    elif algorithm == "one_ancilla":
        report.simulated_success = run_one_ancilla(u, t, q).target_probability()
    elif algorithm == "classical":
        # exact: every pick misses with probability 1 - f
        n_items = 1 << n_qubits
        report.simulated_success = 1.0 - ((n_items - len(t.marked)) / n_items) ** (q + 1)
        hits = 0
        for i in range(shots):
            rng = trajectory_rng(seed, i)
            picks = rng.integers(0, n_items, size=q + 1)
            # the first q picks are checked by the oracle; the last one is returned unchecked
            hits += any(int(p) in t.marked for p in picks)
        report.empirical_success, report.ci_halfwidth = _binomial_ci(hits, shots)
        report.shots = shots
    return report
