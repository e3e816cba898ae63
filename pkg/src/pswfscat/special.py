"""Scalar special functions: normalized Jacobi polynomials, Bessel/Hankel
kernels, and the circular harmonics used for separation of variables.

The Jacobi family here is the one-parameter ``(0, m)`` family normalized so
that ``r^m P_j(2 r^2 - 1) Y_{m,l}(theta)`` has unit L2 norm on the unit disk,
i.e. orthonormal against the weight ``(1 + x)^m / 2^(m + 2)`` on (-1, 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as sp


@dataclass(frozen=True)
class JacobiParams:
    """Parameters of the normalized Jacobi family: angular order m and
    maximum polynomial degree J."""

    m: int
    max_degree: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"m must be >= 0, got {self.m}")
        if self.max_degree < 0:
            raise ValueError(f"max_degree must be >= 0, got {self.max_degree}")


def _recurrence_a(m: int, n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    return (2.0 * (n + 1) * (n + m + 1)) / (
        (2 * n + m + 2) * np.sqrt((2 * n + m + 1) * (2 * n + m + 3))
    )


def _recurrence_b(m: int, n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if m == 0:
        # m^2 / ((2n)(2n+2)) -> 0 for every n, including the 0/0 case n=0.
        return np.zeros_like(n)
    return (m * m) / ((2 * n + m) * (2 * n + m + 2))


def jacobi_table(m: int, max_degree: int, x) -> np.ndarray:
    """Values of P_0 .. P_J at the points x, shape (J+1,) + x.shape.

    No domain check: internal callers evaluate at quadrature nodes that may
    include the endpoints, where the recurrence is still well defined.
    """
    x = np.asarray(x, dtype=float)
    J = max_degree
    out = np.empty((J + 1,) + x.shape, dtype=float)
    h0 = 1.0 / np.sqrt(2.0 * (m + 1))
    out[0] = 1.0 / h0
    if J == 0:
        return out
    h1 = 1.0 / np.sqrt(2.0 * (m + 3))
    out[1] = ((m + 2) * x - m) / (2.0 * h1)
    for n in range(1, J):
        a_n = _recurrence_a(m, n)
        a_nm1 = _recurrence_a(m, n - 1)
        b_n = _recurrence_b(m, n)
        out[n + 1] = ((x - b_n) * out[n] - a_nm1 * out[n - 1]) / a_n
    return out


def jacobi_derivative_tables(m: int, max_degree: int, x):
    """(P, P', P'') tables obtained by differentiating the recurrence.

    Each is shaped (J+1,) + x.shape; used by the Sturm-Liouville assembly.
    """
    x = np.asarray(x, dtype=float)
    J = max_degree
    p = jacobi_table(m, J, x)
    dp = np.zeros_like(p)
    ddp = np.zeros_like(p)
    if J >= 1:
        h1 = 1.0 / np.sqrt(2.0 * (m + 3))
        dp[1] = (m + 2) / (2.0 * h1)
    for n in range(1, J):
        a_n = _recurrence_a(m, n)
        a_nm1 = _recurrence_a(m, n - 1)
        b_n = _recurrence_b(m, n)
        dp[n + 1] = ((x - b_n) * dp[n] + p[n] - a_nm1 * dp[n - 1]) / a_n
        ddp[n + 1] = ((x - b_n) * ddp[n] + 2.0 * dp[n] - a_nm1 * ddp[n - 1]) / a_n
    return p, dp, ddp


def jacobi_normalized(params: JacobiParams, x: float) -> np.ndarray:
    """[P_0(x), ..., P_J(x)] for the normalized (0, m) Jacobi family.

    Raises ValueError for |x| >= 1 (the polynomials themselves extend past
    the interval, but the weight and all uses live on (-1, 1)).
    """
    if not abs(x) < 1.0:
        raise ValueError(f"x must satisfy |x| < 1, got {x}")
    return jacobi_table(params.m, params.max_degree, np.asarray(float(x)))


def jacobi_weight(m: int, x) -> np.ndarray:
    """Orthonormality weight (1 + x)^m / 2^(m + 2) on (-1, 1)."""
    x = np.asarray(x, dtype=float)
    return (1.0 + x) ** m / 2.0 ** (m + 2)


def bessel_j(order: int, x) -> np.ndarray:
    """J_order(x) for integer order >= 0 and x >= 0."""
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    return sp.jv(order, np.asarray(x, dtype=float))


def hankel1_0(x) -> np.ndarray:
    """H_0^(1)(x) = J_0(x) + i Y_0(x) for x > 0.

    Diverges logarithmically as x -> 0; callers must handle the singular
    self-cell separately and never pass x = 0.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("hankel1_0 requires x > 0")
    return sp.hankel1(0, x)


def spherical_harmonic(m: int, l: int, theta) -> np.ndarray:
    """Circular harmonics Y_{m,l}: 1/sqrt(2 pi) for (0,1); cos/sin(m theta)
    over sqrt(pi) for l = 1 / l = 2 with m >= 1."""
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if l not in index_set(m):
        raise ValueError(f"invalid harmonic index (m={m}, l={l})")
    theta = np.asarray(theta, dtype=float)
    if m == 0:
        return np.full_like(theta, 1.0 / np.sqrt(2.0 * np.pi))
    if l == 1:
        return np.cos(m * theta) / np.sqrt(np.pi)
    return np.sin(m * theta) / np.sqrt(np.pi)


def index_set(m: int) -> tuple[int, ...]:
    """Allowed harmonic labels: {1} when m = 0, {1, 2} when m >= 1."""
    return (1,) if m == 0 else (1, 2)
