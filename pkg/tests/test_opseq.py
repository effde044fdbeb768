from pathlib import Path

import numpy as np
import pytest

from fixedpoint_search.corevec import (
    PureState,
    RegisterLayout,
    TargetSet,
    UnitarySpec,
    apply_selective_phase,
    apply_unitary,
    basis_state,
    target_probability,
)
from fixedpoint_search.errors import LevelTooLargeError
from fixedpoint_search.opseq import (
    Adjoint,
    LeafU,
    PhaseSource,
    PhaseTarget,
    Seq,
    adjoint,
    apply_tree,
    build_amplitude_amplification,
    build_phase_search,
    count_queries,
    flatten,
    level_for_queries,
    to_text,
)

from conftest import random_instance

GOLDEN = Path(__file__).parent / "golden"
PI3 = np.pi / 3


def test_level0_is_u():
    assert build_phase_search(0) == LeafU()


def test_level1_sequence():
    assert flatten(build_phase_search(1)) == Seq(LeafU(), PhaseSource(PI3), LeafU(True), PhaseTarget(PI3), LeafU())
    assert to_text(build_phase_search(1)) == "U Rs U† Rt U"


def test_level2_golden_text():
    golden = (GOLDEN / "phase_search_level2.txt").read_text().strip()
    assert to_text(build_phase_search(2)) == golden
    phases = [w for w in golden.split() if w.startswith("R")]
    assert phases == ["Rs", "Rt", "Rs", "Rt†", "Rs†", "Rt", "Rs", "Rt"]


def test_level_cap():
    build_phase_search(12)
    with pytest.raises(LevelTooLargeError):
        build_phase_search(13)


def test_adjoint_rules():
    assert adjoint(PhaseTarget(PI3)) == PhaseTarget(-PI3)
    assert adjoint(PhaseSource(0.2)) == PhaseSource(-0.2)
    a, b = PhaseSource(0.1), LeafU()
    assert adjoint(Seq(a, b)) == Seq(adjoint(b), adjoint(a))
    assert adjoint(LeafU()) == LeafU(True)
    assert adjoint(adjoint(LeafU())) == LeafU()
    assert adjoint(Adjoint(Seq(a, b))) == Seq(a, b)


def test_adjoint_of_level1_printed_form():
    assert to_text(adjoint(build_phase_search(1))) == "U† Rt† U Rs† U†"


@pytest.mark.parametrize("level", [1, 2])
def test_adjoint_round_trip_on_random_states(rng, level):
    n = 3
    u = UnitarySpec.random_haar(n, seed=4)
    t = TargetSet(n, [2, 3])
    s = basis_state(RegisterLayout(n))
    tree = build_phase_search(level)
    for _ in range(5):
        v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        psi = PureState(RegisterLayout(n), v / np.linalg.norm(v))
        mid, _ = apply_tree(tree, u, s, t, psi)
        back, _ = apply_tree(adjoint(tree), u, s, t, mid)
        assert np.max(np.abs(back.amps - psi.amps)) < 1e-12


def test_symbolic_adjoint_node_applies_like_expanded(rng):
    u = UnitarySpec.random_haar(2, seed=8)
    t = TargetSet(2, [1])
    s = basis_state(RegisterLayout(2))
    tree = build_phase_search(2)
    a, qa = apply_tree(Adjoint(tree), u, s, t, s)
    b, qb = apply_tree(adjoint(tree), u, s, t, s)
    assert qa == qb == 4
    np.testing.assert_allclose(a.amps, b.amps, atol=1e-13)


@pytest.mark.parametrize("level", [0, 1, 2, 3])
def test_query_count(level):
    tree = build_phase_search(level)
    u = UnitarySpec.walsh_hadamard(2)
    s = basis_state(RegisterLayout(2))
    _, q = apply_tree(tree, u, s, TargetSet(2, [1]), s)
    assert q == count_queries(level) == (3**level - 1) // 2


def test_count_queries_values():
    assert [count_queries(i) for i in range(5)] == [0, 1, 4, 13, 40]
    for i in range(8):
        assert count_queries(i + 1) == 3 * count_queries(i) + 1
    assert level_for_queries(13) == 3
    assert level_for_queries(2) is None


@pytest.mark.parametrize("level", [1, 2, 3])
def test_tree_and_flat_expansion_agree(rng, level):
    for n in (2, 4):
        u, s, t = random_instance(rng, n, float(rng.uniform(0.05, 0.95)))
        tree = build_phase_search(level)
        a, _ = apply_tree(tree, u, s, t, s)
        b, _ = apply_tree(flatten(tree), u, s, t, s)
        assert np.max(np.abs(a.amps - b.amps)) < 1e-12


@pytest.mark.parametrize("eps", [0.0, 0.05, 0.3, 0.5, 0.8, 0.99, 1.0])
def test_fixed_point_contraction(rng, eps):
    for n in (1, 3, 5):
        u, s, t = random_instance(rng, n, eps)
        for level in range(4):
            out, _ = apply_tree(build_phase_search(level), u, s, t, s)
            assert 1 - target_probability(out, t) == pytest.approx(eps ** (3**level), abs=1e-10)


def test_level1_with_pi_is_one_amplification_step(rng):
    u, s, t = random_instance(rng, 3, 0.6)
    out, q = apply_tree(build_phase_search(1, np.pi, np.pi), u, s, t, s)
    # U I_s U^dagger I_t U |s>, written out by hand
    psi = apply_unitary(s, u)
    psi = apply_selective_phase(psi, t, np.pi)
    psi = apply_unitary(psi, u, adjoint=True)
    psi = apply_selective_phase(psi, s, np.pi)
    psi = apply_unitary(psi, u)
    assert q == 1
    assert np.max(np.abs(out.amps - psi.amps)) < 1e-12
    amp, _ = apply_tree(build_amplitude_amplification(1), u, s, t, s)
    assert np.max(np.abs(out.amps - amp.amps)) < 1e-12


@pytest.mark.parametrize("eta", [0, 1, 2, 3, 5])
def test_amplitude_amplification_rotation(eta):
    n, t = 4, TargetSet(4, [6])
    u = UnitarySpec.walsh_hadamard(n)
    s = basis_state(RegisterLayout(n))
    out, q = apply_tree(build_amplitude_amplification(eta), u, s, t, s)
    assert q == eta
    alpha = np.arcsin(0.25)
    assert target_probability(out, t) == pytest.approx(np.sin((2 * eta + 1) * alpha) ** 2, abs=1e-12)


def test_negative_phases_flip_fixed_point(rng):
    eps = 0.3
    u, s, t = random_instance(rng, 3, eps)
    out, _ = apply_tree(build_phase_search(1, PI3, -PI3), u, s, t, s)
    assert target_probability(out, t) == pytest.approx((1 - eps) ** 3, abs=1e-12)


def test_level12_tree_is_shared():
    tree = build_phase_search(12)
    # the same U_11 object appears three times (twice directly, once under the adjoint)
    assert tree.children[0] is tree.children[4]
