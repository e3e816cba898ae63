"""Training-free encoder-decoder: project processed data onto the disk-PSWF
basis, divide by the prolate eigenvalues under a spectral cutoff, and
resynthesize the contrast.

Two cutoff rules are provided: `invert_eta` keeps entries with |alpha| > eta
and `invert_sl` keeps entries with chi < 1/alpha_reg.  Both reconstruct on the
polar grid natively; Cartesian resampling is a presentation step.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .grids import ContrastGrid, PolarGrid, ProcessedData
from .pipeline import polar_image_to_cartesian
from .pswf import PswfBasis


class BandwidthMismatchError(ValueError):
    """Processed data and basis disagree on bandwidth c or grid shape."""


class EmptyCutoffError(ValueError):
    """No basis entry survives the requested spectral cutoff."""


@dataclass
class SpectralCoefficients:
    """Retained spectral content of one inversion: per entry the data
    coefficient <u, psi> and the contrast coefficient <u, psi>/alpha."""

    entries: list[tuple[int, int, int, complex, complex]]
    cutoff_kind: str  # "eta" | "alpha_inv"
    cutoff_value: float
    basis: PswfBasis = field(repr=False)

    def to_csv(self, path) -> None:
        lookup = {(e.m, e.n, e.l): e for e in self.basis.entries}
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["m", "n", "l", "re_u", "im_u", "abs_alpha", "chi", "re_q", "im_q"])
            for m, n, l, u_c, q_c in self.entries:
                e = lookup[(m, n, l)]
                writer.writerow([m, n, l, u_c.real, u_c.imag,
                                 abs(e.alpha), e.pair.chi, q_c.real, q_c.imag])


def _check_compatible(u: ProcessedData, basis: PswfBasis) -> None:
    if abs(u.c - basis.c) > 1e-12 * max(1.0, abs(basis.c)):
        raise BandwidthMismatchError(
            f"data bandwidth c={u.c} does not match basis bandwidth c={basis.c}")
    if (u.grid.N1, u.grid.N2) != (basis.grid.N1, basis.grid.N2):
        raise BandwidthMismatchError(
            "data and basis use different polar quadrature grids")


def project(u: ProcessedData, basis: PswfBasis) -> np.ndarray:
    """L2(B) inner products <u, psi_{m,n,l}> for every basis entry, evaluated
    with the shared polar quadrature.  Returns a complex vector ordered like
    ``basis.entries``."""
    _check_compatible(u, basis)
    w = basis.grid.weights.ravel()
    return basis.node_matrix() @ (w * u.values.ravel())


def _synthesize(basis: PswfBasis, keep: np.ndarray, q_coeffs: np.ndarray,
                grid_n: int) -> tuple[np.ndarray, ContrastGrid]:
    polar = (q_coeffs[keep] @ basis.node_matrix()[keep]).reshape(
        basis.grid.N2, basis.grid.N1)
    cart = polar_image_to_cartesian(polar.real, basis.grid, grid_n)
    return polar, cart


def invert_eta(u: ProcessedData, basis: PswfBasis, eta: float,
               grid_n: int = 64) -> tuple[ContrastGrid, SpectralCoefficients]:
    """Low-rank inversion with the prolate cutoff: keep entries with
    |alpha| > eta and set q-coefficients to <u, psi>/alpha."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    _check_compatible(u, basis)
    alphas = np.array([e.alpha for e in basis.entries])
    keep = np.abs(alphas) > eta
    if not np.any(keep):
        raise EmptyCutoffError(f"no |alpha| exceeds eta={eta}")
    u_coeffs = project(u, basis)
    q_coeffs = np.where(keep, u_coeffs / alphas, 0.0)
    _, cart = _synthesize(basis, keep, q_coeffs, grid_n)
    entries = [(e.m, e.n, e.l, complex(u_coeffs[i]), complex(q_coeffs[i]))
               for i, e in enumerate(basis.entries) if keep[i]]
    return cart, SpectralCoefficients(entries=entries, cutoff_kind="eta",
                                      cutoff_value=float(eta), basis=basis)


def invert_eta_polar(u: ProcessedData, basis: PswfBasis,
                     eta: float) -> tuple[np.ndarray, SpectralCoefficients]:
    """As `invert_eta` but returning the native polar-grid reconstruction
    (complex N2 x N1 array), the form used for quadrature-space error norms."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    _check_compatible(u, basis)
    alphas = np.array([e.alpha for e in basis.entries])
    keep = np.abs(alphas) > eta
    if not np.any(keep):
        raise EmptyCutoffError(f"no |alpha| exceeds eta={eta}")
    u_coeffs = project(u, basis)
    q_coeffs = np.where(keep, u_coeffs / alphas, 0.0)
    polar = (q_coeffs[keep] @ basis.node_matrix()[keep]).reshape(
        basis.grid.N2, basis.grid.N1)
    entries = [(e.m, e.n, e.l, complex(u_coeffs[i]), complex(q_coeffs[i]))
               for i, e in enumerate(basis.entries) if keep[i]]
    return polar, SpectralCoefficients(entries=entries, cutoff_kind="eta",
                                       cutoff_value=float(eta), basis=basis)


def _sl_solve(u: ProcessedData, basis: PswfBasis, alpha_reg: float):
    if alpha_reg <= 0:
        raise ValueError("alpha_reg must be positive")
    _check_compatible(u, basis)
    chis = np.array([e.pair.chi for e in basis.entries])
    alphas = np.array([e.alpha for e in basis.entries])
    keep = chis < 1.0 / alpha_reg
    if not np.any(keep):
        raise EmptyCutoffError(f"no chi lies below 1/alpha_reg={1.0 / alpha_reg}")
    beta = float(np.min(np.abs(alphas[keep])))
    u_coeffs = project(u, basis)
    q_coeffs = np.where(keep, u_coeffs / alphas, 0.0)
    entries = [(e.m, e.n, e.l, complex(u_coeffs[i]), complex(q_coeffs[i]))
               for i, e in enumerate(basis.entries) if keep[i]]
    coeffs = SpectralCoefficients(entries=entries, cutoff_kind="alpha_inv",
                                  cutoff_value=float(alpha_reg), basis=basis)
    return keep, q_coeffs, beta, coeffs


def invert_sl(u: ProcessedData, basis: PswfBasis, alpha_reg: float,
              grid_n: int = 64) -> tuple[ContrastGrid, float, SpectralCoefficients]:
    """Low-rank inversion with the Sturm-Liouville cutoff chi < 1/alpha_reg.
    Also returns beta = min over the retained set of |alpha|, the stability
    constant of the reconstruction."""
    keep, q_coeffs, beta, coeffs = _sl_solve(u, basis, alpha_reg)
    _, cart = _synthesize(basis, keep, q_coeffs, grid_n)
    return cart, beta, coeffs


def invert_sl_polar(u: ProcessedData, basis: PswfBasis,
                    alpha_reg: float) -> tuple[np.ndarray, float, SpectralCoefficients]:
    """As `invert_sl` but returning the native polar-grid reconstruction."""
    keep, q_coeffs, beta, coeffs = _sl_solve(u, basis, alpha_reg)
    polar = (q_coeffs[keep] @ basis.node_matrix()[keep]).reshape(
        basis.grid.N2, basis.grid.N1)
    return polar, beta, coeffs


def filter_profile(basis: PswfBasis, eta: float) -> list[dict]:
    """Retained index set for a prolate cutoff eta: one record per surviving
    entry with (m, n, l), |alpha| and chi.  Used to visualize the low-rank
    space and pick eta."""
    report = []
    for e in basis.entries:
        if abs(e.alpha) > eta:
            report.append({"m": e.m, "n": e.n, "l": e.l,
                           "abs_alpha": abs(e.alpha), "chi": e.pair.chi})
    return report


def filter_profile_csv(basis: PswfBasis, eta: float, path) -> None:
    rows = filter_profile(basis, eta)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["m", "n", "l", "abs_alpha", "chi"])
        writer.writeheader()
        writer.writerows(rows)


def default_eta(basis: PswfBasis) -> float:
    """Default prolate cutoff: one percent of the largest |alpha|."""
    return 0.01 * max(abs(e.alpha) for e in basis.entries)


def synthesize_processed(basis: PswfBasis, coeffs: dict[tuple[int, int, int], complex],
                         grid: PolarGrid | None = None) -> ProcessedData:
    """Build processed data lying exactly in the basis span: each entry (m,n,l)
    with contrast coefficient q contributes alpha * q * psi at the grid nodes.
    This is the image of the in-span contrast under the Born data map."""
    grid = grid or basis.grid
    values = np.zeros((grid.N2, grid.N1), dtype=complex)
    lookup = {(e.m, e.n, e.l): i for i, e in enumerate(basis.entries)}
    M = basis.node_matrix()
    for key, q_c in coeffs.items():
        i = lookup[key]
        e = basis.entries[i]
        values += (e.alpha * q_c) * M[i].reshape(grid.N2, grid.N1)
    return ProcessedData(values=values, c=basis.c, grid=grid)
