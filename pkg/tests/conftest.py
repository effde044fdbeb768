import numpy as np
import pytest

from fixedpoint_search.corevec import RegisterLayout, TargetSet, basis_state, unitary_with_error


def random_instance(rng, n, eps, size=None):
    """Random (u, s, t) on n qubits whose initial error is exactly eps."""
    d = 1 << n
    if size is None:
        size = int(rng.integers(1, d)) if d > 2 else 1
    t = TargetSet(n, rng.choice(d, size=size, replace=False).tolist())
    u = unitary_with_error(n, t, eps, rng)
    return u, basis_state(RegisterLayout(n)), t


def two_by_two_phase_search(eps, theta, phi):
    """Independent 2-d model: s = |0>, t = |1>, returns <t_perp| U Rs U^+ Rt U |s> weight."""
    c, s = np.sqrt(eps), np.sqrt(1 - eps)
    u = np.array([[c, -s], [s, c]], dtype=complex)
    rs = np.diag([np.exp(1j * theta), 1.0])
    rt = np.diag([1.0, np.exp(1j * phi)])
    out = u @ rs @ u.conj().T @ rt @ u @ np.array([1.0, 0.0])
    return abs(out[0]) ** 2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
