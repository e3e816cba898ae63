"""Far-field data processing.

The reciprocity relation u_inf(x_hat; theta_hat) = u_inf(-theta_hat; -x_hat)
makes u_inf a function of p = (theta_hat - x_hat)/2 alone (almost everywhere
on the unit disk), so a multistatic matrix collapses to one disk-supported
"processed datum" u(p; c) with bandwidth c = 2k.  On the discrete polar grid
the value at each node p_{m,n} is taken from the nearest realizable
direction pair, with ties broken by smallest observation index, then
smallest incidence index.
"""

from __future__ import annotations

import numpy as np

from .grids import (
    FULL_APERTURE,
    ContrastGrid,
    DirectionSet,
    FarFieldMatrix,
    PolarGrid,
    ProcessedData,
)

_PAIR_CACHE: dict = {}


def nearest_pair_indices(grid: PolarGrid, obs: DirectionSet, inc: DirectionSet) -> np.ndarray:
    """(N2, N1) flat indices i * N_inc + j of the direction pair whose
    midpoint (theta_hat_j - x_hat_i)/2 is closest to each grid node.
    np.argmin over the i-major flattening realizes the (i, then j) tie-break."""
    key = (grid.N1, grid.N2, obs.angles.tobytes(), inc.angles.tobytes())
    if key in _PAIR_CACHE:
        return _PAIR_CACHE[key]
    pairs = 0.5 * (inc.vectors[None, :, :] - obs.vectors[:, None, :])  # (N_obs, N_inc, 2)
    flat = pairs.reshape(-1, 2)
    nodes = grid.points.reshape(-1, 2)
    idx = np.empty(nodes.shape[0], dtype=np.int64)
    chunk = max(1, int(4e6 / flat.shape[0]))
    for lo in range(0, nodes.shape[0], chunk):
        sub = nodes[lo : lo + chunk]
        d2 = ((sub[:, None, :] - flat[None, :, :]) ** 2).sum(axis=2)
        idx[lo : lo + len(sub)] = np.argmin(d2, axis=1)
    result = idx.reshape(grid.N2, grid.N1)
    _PAIR_CACHE[key] = result
    return result


def process_far_field(ff: FarFieldMatrix, grid: PolarGrid) -> ProcessedData:
    """u(p_{m,n}) = u_inf(x_hat_{i*}; theta_hat_{j*}) / k^2 at the nearest
    realizable pair; records c = 2k."""
    idx = nearest_pair_indices(grid, ff.obs, ff.inc)
    values = ff.entries.ravel()[idx] / (ff.k * ff.k)
    return ProcessedData(values=values, c=2.0 * ff.k, grid=grid)


def add_noise(ff: FarFieldMatrix, delta: float, seed: int) -> FarFieldMatrix:
    """Multiplicative complex Gaussian noise u (1 + delta xi) with
    Re xi, Im xi ~ N(0, 1/2) independent.  Deterministic per seed: the PCG64
    generator draws the real parts first, then the imaginary parts."""
    if delta < 0:
        raise ValueError("noise level must be >= 0")
    if delta == 0:
        return FarFieldMatrix(entries=ff.entries.copy(), k=ff.k, obs=ff.obs, inc=ff.inc)
    rng = np.random.default_rng(seed)
    scale = np.sqrt(0.5)
    xi = rng.standard_normal(ff.entries.shape) * scale
    xi = xi + 1j * rng.standard_normal(ff.entries.shape) * scale
    return FarFieldMatrix(entries=ff.entries * (1.0 + delta * xi), k=ff.k, obs=ff.obs, inc=ff.inc)


def rotate_contrast(q: ContrastGrid, phi: float) -> ContrastGrid:
    """R_phi q(x) = q(R_{-phi} x): exact index permutation at multiples of
    pi/2, bilinear resampling otherwise."""
    quarter = phi / (np.pi / 2.0)
    if abs(quarter - round(quarter)) < 1e-14:
        turns = int(round(quarter)) % 4
        # value layout has y along axis 0, so a counterclockwise rotation of
        # the function is a clockwise rotation of the array
        return ContrastGrid(np.rot90(q.values, k=-turns).copy())
    X, Y = q.meshgrid()
    cphi, sphi = np.cos(phi), np.sin(phi)
    # R_{-phi} (x, y)
    xs = cphi * X + sphi * Y
    ys = -sphi * X + cphi * Y
    return ContrastGrid(q.sample(xs, ys))


def rotate_processed(u: ProcessedData, steps: int) -> ProcessedData:
    """Cyclic shift along the angular axis; exact, no interpolation."""
    return ProcessedData(
        values=np.roll(u.values, steps % u.grid.N1, axis=1),
        c=u.c, grid=u.grid, aperture=u.aperture,
    )


def _wrap_angle(a: np.ndarray) -> np.ndarray:
    """Wrap to the branch (-pi, pi]."""
    w = np.mod(a + np.pi, 2.0 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


def apply_limited_aperture(ff: FarFieldMatrix, theta_max: float) -> FarFieldMatrix:
    """Zero every entry whose observation or incidence direction falls
    outside arg in [-Theta, Theta] (angles wrapped to (-pi, pi])."""
    if not 0.0 < theta_max < np.pi:
        raise ValueError("aperture half-angle must lie in (0, pi)")
    obs_in = np.abs(_wrap_angle(ff.obs.angles)) <= theta_max
    inc_in = np.abs(_wrap_angle(ff.inc.angles)) <= theta_max
    entries = ff.entries * (obs_in[:, None] & inc_in[None, :])
    return FarFieldMatrix(entries=entries, k=ff.k, obs=ff.obs, inc=ff.inc)


def process_limited(ff_masked: FarFieldMatrix, grid: PolarGrid, theta_max: float) -> ProcessedData:
    """Process an aperture-masked matrix, recording the aperture so the
    zero-extension outside D_L is explicit in the metadata."""
    u = process_far_field(ff_masked, grid)
    return ProcessedData(values=u.values, c=u.c, grid=grid, aperture=theta_max)


def contrast_to_polar_image(q: ContrastGrid, grid: PolarGrid) -> np.ndarray:
    """Bilinear samples of q at the polar nodes, shape (N2, N1)."""
    pts = grid.points
    return q.sample(pts[..., 0], pts[..., 1])


def polar_image_to_cartesian(image: np.ndarray, grid: PolarGrid, N: int) -> ContrastGrid:
    """Companion resampling of a polar-grid image back to a Cartesian grid
    (bilinear in (eta, theta); zero outside the unit disk)."""
    image = np.asarray(image, dtype=float)
    centers = -1.0 + (np.arange(N) + 0.5) * (2.0 / N)
    X, Y = np.meshgrid(centers, centers)
    r = np.hypot(X, Y)
    theta = np.mod(np.arctan2(Y, X), 2.0 * np.pi)
    eta = 2.0 * np.clip(r, 0.0, 1.0) ** 2 - 1.0
    # radial index: eta decreases with m, interpolate on the reversed axis
    eta_nodes = grid.eta[::-1]
    fe = np.interp(eta, eta_nodes, np.arange(grid.N2)[::-1].astype(float))
    ft = theta / (2.0 * np.pi / grid.N1)
    m0 = np.clip(np.floor(fe).astype(int), 0, grid.N2 - 2)
    tm = fe - m0
    n0 = np.floor(ft).astype(int) % grid.N1
    n1 = (n0 + 1) % grid.N1
    tn = ft - np.floor(ft)
    vals = (
        (1 - tm) * ((1 - tn) * image[m0, n0] + tn * image[m0, n1])
        + tm * ((1 - tn) * image[m0 + 1, n0] + tn * image[m0 + 1, n1])
    )
    vals[r > 1.0] = 0.0
    return ContrastGrid(vals)
