"""Closed-form error and success probabilities for every algorithm compared here.

Notation: ``eps`` is the initial error probability ``1 - |U_ts|^2`` and
``f = 1 - eps`` the marked fraction.  Every law is continuous on its closed
domain, endpoints included.
"""
from __future__ import annotations

import math

import numpy as np

from fixedpoint_search.errors import UnreachableThresholdError


def _check_unit(name: str, x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def pi3_error(eps: float) -> float:
    """Non-target probability after one ``O(pi/3, pi/3)``: ``eps**3``."""
    _check_unit("eps", eps)
    return eps**3


def scale_factor(theta: float, phi: float, p: float) -> float:
    """Factor on the non-target amplitude after one ``O(theta, phi)``, ``p = |U_ts|^2``.

    The error probability afterwards is ``(1 - p) * scale_factor(...)**2``.
    """
    _check_unit("p", p)
    z = np.exp(0.5j * (theta - phi)) - 4.0 * np.sin(theta / 2) * np.sin(phi / 2) * p
    return float(abs(z))


def recursion_error(eps: float, level: int) -> float:
    _check_unit("eps", eps)
    if level < 0:
        raise ValueError("level must be non-negative")
    return eps ** (3**level)


def measured_error(eps: float, q: int) -> float:
    _check_unit("eps", eps)
    if q < 0:
        raise ValueError("q must be non-negative")
    return eps ** (2 * q + 1)


def one_ancilla_error(eps: float, n: int) -> float:
    """Single-ancilla measure-and-diffuse loop after ``n`` iterations."""
    _check_unit("eps", eps)
    return eps * (2 * eps - 1) ** (2 * n)


def grover_success(f: float, eta: int) -> float:
    """Exact success of ``eta`` amplitude-amplification steps: ``sin^2((2 eta + 1) alpha)``."""
    _check_unit("f", f)
    alpha = math.asin(math.sqrt(f))
    return math.sin((2 * eta + 1) * alpha) ** 2


def _chebyshev_u(k: int, x: float) -> float:
    """Chebyshev polynomial of the second kind, ``U_k(cos b) = sin((k+1) b) / sin b``."""
    if k < 0:
        return 0.0
    prev, cur = 1.0, 2.0 * x
    if k == 0:
        return prev
    for _ in range(k - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def younes_success(f: float, q: int) -> float:
    """``f (sin^2((q+1) b) + sin^2(q b)) / sin^2 b`` with ``cos b = 1 - f``.

    Evaluated through Chebyshev polynomials of the second kind, which removes
    the quotient and its ``0/0`` at ``f = 0``.
    """
    _check_unit("f", f)
    if q < 0:
        raise ValueError("q must be non-negative")
    if f == 0.0:
        return 0.0
    eps = 1.0 - f
    return f * (_chebyshev_u(q, eps) ** 2 + _chebyshev_u(q - 1, eps) ** 2)


def classical_error(eps: float, q: int) -> float:
    """Query ``q`` random picks, return the last unchecked one: ``eps**(q+1)``."""
    _check_unit("eps", eps)
    if q < 0:
        raise ValueError("q must be non-negative")
    return eps ** (q + 1)


def queries_to_threshold(
    eps_th: float, eps_up: float | None = None, f: float | None = None
) -> int:
    """Smallest ``q`` with ``eps_up**(2q+1) <= eps_th``.

    Give either the error bound ``eps_up`` or the marked fraction ``f``
    (then ``eps_up = 1 - f``).
    """
    if (eps_up is None) == (f is None):
        raise ValueError("give exactly one of eps_up and f")
    if eps_up is None:
        eps_up = 1.0 - f
    if not 0.0 < eps_th < 1.0:
        raise ValueError("eps_th must lie in (0, 1)")
    _check_unit("eps_up", eps_up)
    if eps_up >= 1.0:
        raise UnreachableThresholdError("eps_up = 1 is a fixed point; no q reaches the threshold")
    if eps_up <= eps_th:
        return 0
    # log estimate, then settle the integer against the exact inequality
    q = max(0, math.ceil((math.log(eps_th) / math.log(eps_up) - 1) / 2))
    while q > 0 and eps_up ** (2 * q - 1) <= eps_th:
        q -= 1
    while eps_up ** (2 * q + 1) > eps_th:
        q += 1
    return q
