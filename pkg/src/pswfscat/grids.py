"""Data containers shared across the toolkit: Cartesian contrast grids,
direction sets, far-field matrices, the polar quadrature grid of the unit
disk, and processed data living on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FULL_APERTURE = float("inf")  # sentinel for "no aperture restriction"


@dataclass
class ContrastGrid:
    """Real contrast q sampled at the cell centers of a uniform N x N grid
    on [-1, 1]^2.  values[i, j] is q at (x = centers[j], y = centers[i])."""

    values: np.ndarray
    N: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError("contrast values must be a square 2-D array")
        if self.N == 0:
            self.N = self.values.shape[0]
        if self.values.shape != (self.N, self.N):
            raise ValueError("N does not match the value array")
        if self.N < 32:
            raise ValueError(f"grid size must be >= 32, got {self.N}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("contrast contains non-finite values")

    @property
    def spacing(self) -> float:
        return 2.0 / self.N

    @property
    def centers(self) -> np.ndarray:
        return -1.0 + (np.arange(self.N) + 0.5) * self.spacing

    def meshgrid(self):
        """(X, Y) arrays matching the value layout."""
        c = self.centers
        return np.meshgrid(c, c)  # X varies along axis 1, Y along axis 0

    def sample(self, x, y) -> np.ndarray:
        """Bilinear interpolation of q at arbitrary points; zero outside the
        grid's convex hull of cell centers."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        h = self.spacing
        # fractional index of the lower-left cell center
        fx = (x + 1.0) / h - 0.5
        fy = (y + 1.0) / h - 0.5
        ix = np.floor(fx).astype(int)
        iy = np.floor(fy).astype(int)
        tx = fx - ix
        ty = fy - iy
        out = np.zeros(np.broadcast(x, y).shape, dtype=float)
        for di, wy in ((0, 1.0 - ty), (1, ty)):
            for dj, wx in ((0, 1.0 - tx), (1, tx)):
                ii = iy + di
                jj = ix + dj
                ok = (ii >= 0) & (ii < self.N) & (jj >= 0) & (jj < self.N)
                vals = np.zeros_like(out)
                vals[ok] = self.values[ii[ok], jj[ok]]
                out += wy * wx * vals
        return out


@dataclass
class DirectionSet:
    """Angles on the unit circle, strictly increasing in [0, 2 pi)."""

    angles: np.ndarray

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        if self.angles.ndim != 1 or self.angles.size < 1:
            raise ValueError("need at least one direction")
        if np.any(np.diff(self.angles) <= 0):
            raise ValueError("angles must be strictly increasing")
        if self.angles[0] < 0 or self.angles[-1] >= 2 * np.pi:
            raise ValueError("angles must lie in [0, 2 pi)")

    @classmethod
    def uniform(cls, n: int) -> "DirectionSet":
        return cls(2.0 * np.pi * np.arange(n) / n)

    @property
    def n(self) -> int:
        return self.angles.size

    @property
    def vectors(self) -> np.ndarray:
        """(n, 2) unit vectors."""
        return np.stack([np.cos(self.angles), np.sin(self.angles)], axis=1)


@dataclass
class FarFieldMatrix:
    """Multistatic far-field samples u_inf(x_hat_i; theta_hat_j)."""

    entries: np.ndarray  # complex (N_obs, N_inc)
    k: float
    obs: DirectionSet
    inc: DirectionSet

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.shape != (self.obs.n, self.inc.n):
            raise ValueError("far-field entries do not match direction counts")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("far field contains non-finite entries")
        if self.k <= 0:
            raise ValueError("wavenumber must be positive")


def _interpolatory_eta_weights(n2: int) -> np.ndarray:
    """Quadrature weights on the nodes eta_m = cos(m pi / N2), m = 0..N2-1,
    exact for polynomials of degree N2-1: w = V^{-T} mu with V the Chebyshev
    Vandermonde matrix and mu the Chebyshev moments over (-1, 1)."""
    m = np.arange(n2)
    j = np.arange(n2)
    V = np.cos(np.outer(j, m) * np.pi / n2)  # V[j, m] = T_j(eta_m)
    mu = np.zeros(n2)
    even = j % 2 == 0
    mu[even] = 2.0 / (1.0 - j[even].astype(float) ** 2)
    return np.linalg.solve(V, mu)


@dataclass
class PolarGrid:
    """Polar quadrature grid of the unit disk: transformed Clenshaw-Curtis
    radii r_m = sqrt((cos(m pi / N2) + 1) / 2) and uniform angles
    theta_n = 2 pi (n - 1) / N1, with interpolatory weights for L2(B)."""

    N1: int
    N2: int
    r: np.ndarray = field(init=False)
    theta: np.ndarray = field(init=False)
    eta: np.ndarray = field(init=False)
    eta_weights: np.ndarray = field(init=False)
    weights: np.ndarray = field(init=False)  # (N2, N1) disk weights

    def __post_init__(self):
        if self.N1 < 1 or self.N2 < 2:
            raise ValueError("need N1 >= 1 and N2 >= 2")
        m = np.arange(self.N2)
        self.eta = np.cos(m * np.pi / self.N2)
        self.r = np.sqrt((self.eta + 1.0) / 2.0)
        self.theta = 2.0 * np.pi * np.arange(self.N1) / self.N1
        self.eta_weights = _interpolatory_eta_weights(self.N2)
        # The rim node eta = 1 carries exactly zero weight (the rule reduces
        # to Fejer-2 on the interior nodes); snap roundoff and keep the rest
        # strictly positive.
        self.eta_weights[np.abs(self.eta_weights) < 1e-13] = 0.0
        if np.any(self.eta_weights < 0) or np.any(self.eta_weights[1:] <= 0):
            raise ValueError("invalid radial quadrature weights")
        # dA = r dr dtheta = (1/4) d eta dtheta
        self.weights = np.outer(self.eta_weights / 4.0, np.full(self.N1, 2.0 * np.pi / self.N1))
        if abs(self.weights.sum() - np.pi) > 1e-10:
            raise ValueError("disk weights fail to integrate 1 to pi")

    @property
    def points(self) -> np.ndarray:
        """(N2, N1, 2) Cartesian coordinates of the nodes p_{m,n}."""
        x = self.r[:, None] * np.cos(self.theta)[None, :]
        y = self.r[:, None] * np.sin(self.theta)[None, :]
        return np.stack([x, y], axis=-1)

    def integrate(self, values: np.ndarray) -> complex:
        """Quadrature of a function sampled at the nodes over the disk."""
        return np.sum(self.weights * values)

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """L2(B) inner product <f, g> with the convention conj on g."""
        return np.sum(self.weights * f * np.conj(g))

    def norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.abs(np.sum(self.weights * np.abs(f) ** 2))))


@dataclass
class ProcessedData:
    """Processed datum u(p_{m,n}; c) on a polar grid, complex (N2, N1).
    aperture is the half-angle of a limited-aperture mask, or FULL_APERTURE."""

    values: np.ndarray
    c: float
    grid: PolarGrid
    aperture: float = FULL_APERTURE

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.N2, self.grid.N1):
            raise ValueError("processed values do not match the grid shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("processed data contains non-finite entries")
        if self.c <= 0:
            raise ValueError("bandwidth c must be positive")
