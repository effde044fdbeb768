import numpy as np
import pytest

from fixedpoint_search import analytic
from fixedpoint_search.errors import ConfigError
from fixedpoint_search.experiments import (
    ALGORITHMS,
    SECTION4_DIST,
    FractionDistribution,
    closed_form_overall_error,
    demo_database,
    dominates,
    overall_error,
    rows_to_csv,
    section4_errors,
    sweep_curves,
    validate_queries,
    write_csv,
)


def test_distribution_validation():
    FractionDistribution.uniform(0.75, 1.0)
    with pytest.raises(ConfigError):
        FractionDistribution.uniform(0.8, 0.7)
    with pytest.raises(ConfigError):
        FractionDistribution("beta", 0, 1)


def test_section4_closed_forms():
    # mean of eps^2, eps - 4eps^2 + 4eps^3 and eps^3 over eps uniform on [0, 1/4]
    assert overall_error("classical", 1, SECTION4_DIST) == pytest.approx(1 / 48, abs=1e-12)
    younes = (0.25**2 / 2 - 4 * 0.25**3 / 3 + 0.25**4) / 0.25
    assert overall_error("younes", 1, SECTION4_DIST) == pytest.approx(younes, abs=1e-12)
    assert younes == pytest.approx(0.057292, abs=1e-6)
    assert overall_error("pi3", 1, SECTION4_DIST) == pytest.approx(0.25**3 / 4, abs=1e-12)


def test_section4_errors_keys():
    errs = section4_errors()
    assert list(errs) == ["classical", "younes", "pi3"]


@pytest.mark.parametrize("algo,q", [("classical", 3), ("younes", 13), ("pi3", 13), ("measured", 5), ("one_ancilla", 2)])
def test_quadrature_vs_antiderivative(algo, q):
    dist = FractionDistribution.uniform(0.3, 0.95)
    assert overall_error(algo, q, dist) == pytest.approx(closed_form_overall_error(algo, q, dist), abs=1e-12)


def test_quadrature_64_vs_128_nodes():
    for algo in ALGORITHMS:
        q = 4 if algo == "pi3" else 3
        a = overall_error(algo, q, SECTION4_DIST, nodes=64)
        b = overall_error(algo, q, SECTION4_DIST, nodes=128)
        assert abs(a - b) < 1e-10


def test_point_distribution():
    assert overall_error("measured", 2, FractionDistribution.point(0.5)) == pytest.approx(0.5**5)


def test_pi3_query_restriction_message():
    with pytest.raises(ConfigError, match=r"\(3\^i - 1\)/2.*measured"):
        validate_queries("pi3", 2)
    with pytest.raises(ConfigError):
        validate_queries("quantum_magic", 1)


def test_sweep_q1_values():
    rows = sweep_curves(["pi3", "younes"], 1, 5)
    assert [r.f for r in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]
    at = {r.f: r.success for r in rows}
    assert at[0.75]["pi3"] == pytest.approx(0.984375, abs=1e-15)
    assert at[0.75]["younes"] == pytest.approx(0.9375, abs=1e-15)


def test_sweep_all_one_at_full_marking():
    rows = sweep_curves(list(ALGORITHMS), 1, 3)
    assert all(v == pytest.approx(1.0, abs=1e-14) for v in rows[-1].success.values())
    for r in rows:
        assert all(0.0 <= v <= 1.0 for v in r.success.values())


def test_sweep_q13():
    rows = sweep_curves(["pi3", "younes"], 13, 5)
    row = rows[3]
    assert row.success["pi3"] == 1 - 0.25**27
    assert row.success["younes"] == pytest.approx(analytic.younes_success(0.75, 13), abs=1e-15)
    with pytest.raises(ConfigError):
        sweep_curves(["pi3"], 12, 5)
    with pytest.raises(ConfigError):
        sweep_curves(["pi3"], 13, 1)


@pytest.mark.parametrize("q", [1, 13])
def test_dominance_on_fine_grid(q):
    rows = sweep_curves(["pi3", "younes"], q, 4001)
    assert dominates(rows, "pi3", "younes", 0.75)


def test_csv_schema_and_determinism(tmp_path):
    rows = sweep_curves(["classical", "pi3"], 1, 3)
    text = rows_to_csv(rows, ["classical", "pi3"])
    assert text.splitlines()[0] == "f,classical_success,pi3_success"
    assert "\r" not in text
    assert text.splitlines()[2] == "0.5,0.75,0.875"
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(rows, ["classical", "pi3"], a)
    write_csv(sweep_curves(["classical", "pi3"], 1, 3), ["classical", "pi3"], b)
    assert a.read_bytes() == b.read_bytes()


def test_csv_17_significant_digits():
    rows = sweep_curves(["younes"], 1, 4)
    line = rows_to_csv(rows, ["younes"]).splitlines()[2]
    f, val = line.split(",")
    assert float(val) == rows[1].success["younes"]
    assert f == format(1 / 3, ".17g")


def test_demo_pi3_quarter():
    rep = demo_database(2, [0, 1, 2], "pi3", 1, seed=0)
    assert 1 - rep.simulated_success == pytest.approx(0.015625, abs=1e-12)
    assert rep.analytic_success == pytest.approx(rep.simulated_success, abs=1e-10)


@pytest.mark.parametrize("algo,q", [("classical", 1), ("younes", 1), ("pi3", 4), ("measured", 3), ("grover", 2), ("one_ancilla", 2)])
def test_demo_full_marking(algo, q):
    rep = demo_database(2, [0, 1, 2, 3], algo, q, seed=1, shots=200)
    assert rep.analytic_success == pytest.approx(1.0, abs=1e-12)
    if rep.simulated_success is not None:
        assert rep.simulated_success == pytest.approx(1.0, abs=1e-12)
    if rep.empirical_success is not None:
        assert rep.empirical_success == 1.0


def test_demo_grover_n4():
    rep = demo_database(4, [9], "grover", 3, seed=2)
    alpha = np.arcsin(0.25)
    assert rep.simulated_success == pytest.approx(np.sin(7 * alpha) ** 2, abs=1e-12)


@pytest.mark.parametrize("algo,q", [("measured", 4), ("classical", 2)])
def test_demo_monte_carlo_within_3_sigma(algo, q):
    rep = demo_database(3, [2, 6], algo, q, seed=11, shots=3000)
    assert rep.simulated_success == pytest.approx(rep.analytic_success, abs=1e-10)
    sigma = rep.ci_halfwidth / 1.96
    assert abs(rep.empirical_success - rep.analytic_success) <= 3 * sigma


def test_demo_one_ancilla_matches_law():
    rep = demo_database(3, [1, 2, 5], "one_ancilla", 3, seed=0)
    assert rep.simulated_success == pytest.approx(rep.analytic_success, abs=1e-10)


def test_demo_rejects_empty_and_bad_sizes():
    with pytest.raises(ValueError):
        demo_database(2, [], "pi3", 1, seed=0)
    with pytest.raises(ConfigError):
        demo_database(13, [0], "pi3", 1, seed=0)
