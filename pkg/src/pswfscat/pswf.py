"""Disk prolate spheroidal wave functions.

The PSWFs psi_{m,n,l}(x; c) = r^m phi_{m,n}(2 r^2 - 1) Y_{m,l}(theta) are
eigenfunctions of both the restricted Fourier transform on the unit disk
(eigenvalue alpha_{m,n}) and of the radial Sturm-Liouville operator

    D = -(1 - r^2) d_rr - (1/r) d_r + 3 r d_r - (1/r^2) d_theta^2 + c^2 r^2

(eigenvalue chi_{m,n}).  The radial factor is expanded in the normalized
Jacobi polynomials of `special`; in that basis D is symmetric tridiagonal,
which is what makes the computation stable.  The matrix is assembled by
dense Gauss quadrature and its tridiagonal structure is asserted rather
than hard-coded.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special as sp
from scipy.linalg import eigh_tridiagonal

from .grids import PolarGrid
from .special import index_set, jacobi_derivative_tables, jacobi_table, spherical_harmonic

OFFBAND_TOL = 1e-8
EIGEN_RESIDUAL_TOL = 1e-6
MAGIC = b"PSWF1"


class AssemblyError(RuntimeError):
    """The projected operator failed its tridiagonal structure check."""


class TruncationError(RuntimeError):
    """Eigenvalues moved when the Jacobi truncation was doubled."""


class EigenResidualError(RuntimeError):
    """The restricted-Fourier eigen-relation residual is too large."""


def default_truncation(m: int, c: float) -> int:
    # PSWF Jacobi coefficients decay superexponentially past the bandwidth;
    # 2c plus a floor keeps every retained eigenpair fully resolved.
    return int(max(2.0 * c, 30.0)) + m


@dataclass
class RadialEigenpair:
    """One radial eigenfunction phi_{m,n}(eta) = sum_j beta_j P_j^{(m)}(eta),
    with Sturm-Liouville eigenvalue chi."""

    m: int
    n: int
    chi: float
    beta: np.ndarray
    truncation: int

    def radial_values(self, r) -> np.ndarray:
        """r^m phi_{m,n}(2 r^2 - 1), the radial factor of the PSWF."""
        r = np.asarray(r, dtype=float)
        eta = 2.0 * r * r - 1.0
        table = jacobi_table(self.m, self.truncation, eta)
        phi = np.tensordot(self.beta, table, axes=(0, 0))
        return r**self.m * phi if self.m else phi


def _radial_operator_dense(m: int, c: float, J: int) -> np.ndarray:
    """Matrix of D restricted to span{r^m P_j(2r^2-1) Y_{m,l}}, by applying D
    analytically to each basis function and projecting with Gauss quadrature.

    With f_j = r^m P_j(eta), eta = 2 r^2 - 1 and s = r^2:

        D f_j = r^m     [ m(m+2) P_j - 8(m+1) P_j' ]
              + r^(m+2) [ c^2 P_j + 8(m+2) P_j' - 16 P_j'' ]
              + r^(m+4) [ 16 P_j'' ]

    and <D f_j, f_k>_B = (1/4) integral over eta of the integrand times P_k,
    which is a polynomial, so the quadrature below is exact.
    """
    nq = 2 * J + m + 8
    xg, wg = leggauss(nq)
    s = (1.0 + xg) / 2.0
    P, dP, ddP = jacobi_derivative_tables(m, J, xg)
    t1 = m * (m + 2) * P - 8.0 * (m + 1) * dP
    t2 = c * c * P + 8.0 * (m + 2) * dP - 16.0 * ddP
    t3 = 16.0 * ddP
    integrand = s**m * t1 + s ** (m + 1) * t2 + s ** (m + 2) * t3
    return 0.25 * (integrand * wg) @ P.T


def assemble_radial_operator(m: int, c: float, J: int) -> np.ndarray:
    """Symmetric tridiagonal matrix of the Sturm-Liouville operator in the
    weighted Jacobi basis; raises AssemblyError if off-band entries survive."""
    if c <= 0:
        raise ValueError("bandwidth c must be positive")
    if J < 2 + int(np.ceil(c)) + m:
        raise ValueError(f"truncation J={J} too small for m={m}, c={c}")
    A = _radial_operator_dense(m, c, J)
    offband = A - np.tril(np.triu(A, -1), 1)
    worst = np.max(np.abs(offband))
    if worst > OFFBAND_TOL:
        raise AssemblyError(
            f"off-tridiagonal entry {worst:.3e} exceeds {OFFBAND_TOL:.1e} (m={m}, c={c}, J={J})"
        )
    return 0.5 * (A + A.T)


def _radial_eta_rule(n2: int):
    """Radial quadrature shared with the polar grid: integrates f(r) r dr
    as (1/4) sum of eta weights at r_m = sqrt((eta_m + 1)/2)."""
    grid = PolarGrid(1, n2)
    return grid.r, grid.eta_weights / 4.0


def compute_radial_eigenpairs(
    m: int,
    c: float,
    count: int,
    J: int | None = None,
    quad_n2: int = 56,
    check_truncation: bool = False,
) -> list[RadialEigenpair]:
    """The `count` smallest Sturm-Liouville eigenpairs for angular order m,
    sorted ascending in chi and renormalized to unit L2(B) norm under the
    shared disk quadrature."""
    if J is None:
        J = default_truncation(m, c)
    if count > J - 5:
        raise ValueError("count too large for truncation J (need count <= J - 5)")
    A = assemble_radial_operator(m, c, J)
    d = np.diag(A)
    e = np.diag(A, 1)
    chi, vec = eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1))

    if check_truncation:
        # Off-band roundoff grows with J; the doubled operator is only used
        # for its eigenvalues, so skip the structural gate and symmetrize.
        A2 = _radial_operator_dense(m, c, 2 * J)
        A2 = 0.5 * (A2 + A2.T)
        chi2 = eigh_tridiagonal(
            np.diag(A2), np.diag(A2, 1), select="i", select_range=(0, count - 1),
            eigvals_only=True,
        )
        drift = np.max(np.abs(chi2 - chi) / np.abs(chi))
        if drift > 1e-8:
            raise TruncationError(f"chi moved by {drift:.3e} when doubling J (m={m}, c={c})")

    p_at_one = jacobi_table(m, J, np.asarray(1.0))
    r_quad, w_quad = _radial_eta_rule(quad_n2)
    pairs = []
    for idx in range(count):
        beta = vec[:, idx].copy()
        if float(beta @ p_at_one) < 0:  # sign: phi positive at the rim
            beta = -beta
        pair = RadialEigenpair(m=m, n=idx, chi=float(chi[idx]), beta=beta, truncation=J)
        f = pair.radial_values(r_quad)
        nrm = np.sqrt(np.sum(w_quad * f * f))
        pair.beta = beta / nrm
        pairs.append(pair)
    return pairs


def compute_prolate_eigenvalue(pair: RadialEigenpair, c: float, nq: int = 400) -> complex:
    """alpha_{m,n} = <F_b psi, psi>_{L2(B)} via the exact angular reduction:
    F_b psi = 2 pi i^m Y_{m,l}(theta) * integral_0^1 J_m(c r s) f(s) s ds,
    so alpha = i^m times a real 1-D double quadrature.  The eigen-relation
    residual is checked and must stay below EIGEN_RESIDUAL_TOL."""
    m = pair.m
    xg, wg = leggauss(nq)
    r = np.sqrt((xg + 1.0) / 2.0)
    w = wg / 4.0
    f = pair.radial_values(r)
    kernel = sp.jv(m, c * np.outer(r, r))
    g = kernel @ (w * f)
    a = 2.0 * np.pi * float(np.sum(w * g * f))
    residual = np.sqrt(np.sum(w * (2.0 * np.pi * g - a * f) ** 2))
    norm = np.sqrt(np.sum(w * f * f))
    if residual > EIGEN_RESIDUAL_TOL * norm:
        raise EigenResidualError(
            f"eigen-relation residual {residual:.3e} for (m={m}, n={pair.n}, c={c})"
        )
    return (1j) ** m * a


@dataclass
class BasisEntry:
    m: int
    n: int
    l: int
    pair: RadialEigenpair
    alpha: complex


@dataclass
class PswfBasis:
    """All PSWF basis entries up to (max_m, max_n) at bandwidth c = 2k,
    carrying the polar quadrature grid shared with the data pipeline."""

    c: float
    max_m: int
    max_n: int
    entries: list[BasisEntry]
    grid: PolarGrid
    _node_matrix: np.ndarray | None = field(default=None, repr=False)

    def entry(self, m: int, n: int, l: int) -> BasisEntry:
        for e in self.entries:
            if (e.m, e.n, e.l) == (m, n, l):
                return e
        raise KeyError(f"no basis entry ({m}, {n}, {l})")

    def evaluate_entry(self, e: BasisEntry, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        x, y = points[..., 0], points[..., 1]
        r = np.hypot(x, y)
        if np.any(r > 1.0 + 1e-12):
            raise ValueError("points must lie inside the closed unit disk")
        theta = np.arctan2(y, x)
        return e.pair.radial_values(np.minimum(r, 1.0)) * spherical_harmonic(e.m, e.l, theta)

    def node_matrix(self) -> np.ndarray:
        """(n_entries, N2 * N1) values of each entry at the grid nodes."""
        if self._node_matrix is None:
            Y = {}
            for e in self.entries:
                key = (e.m, e.l)
                if key not in Y:
                    Y[key] = spherical_harmonic(e.m, e.l, self.grid.theta)
            rows = []
            radial_cache = {}
            for e in self.entries:
                rkey = (e.m, e.n)
                if rkey not in radial_cache:
                    radial_cache[rkey] = e.pair.radial_values(self.grid.r)
                rows.append(np.outer(radial_cache[rkey], Y[(e.m, e.l)]).ravel())
            self._node_matrix = np.asarray(rows)
        return self._node_matrix


def evaluate_pswf(basis: PswfBasis, m: int, n: int, l: int, points) -> np.ndarray:
    """Pointwise values of psi_{m,n,l} at disk points, shape points[..., :2]."""
    return basis.evaluate_entry(basis.entry(m, n, l), np.asarray(points, dtype=float))


def build_basis(
    c: float,
    max_m: int,
    max_n: int,
    N1: int = 104,
    N2: int = 56,
    J: int | None = None,
    check_truncation: bool = False,
) -> PswfBasis:
    """Compute every entry (m <= max_m, n <= max_n, l in I(m)) and verify the
    ordering laws: chi strictly increasing and |alpha| strictly decreasing
    in n for fixed m."""
    if c <= 0:
        raise ValueError("bandwidth c must be positive")
    if max_m < 0 or max_n < 0:
        raise ValueError("max_m and max_n must be >= 0")
    grid = PolarGrid(N1, N2)
    entries: list[BasisEntry] = []
    for m in range(max_m + 1):
        pairs = compute_radial_eigenpairs(
            m, c, max_n + 1, J=None if J is None else J + m,
            quad_n2=N2, check_truncation=check_truncation,
        )
        chis = [p.chi for p in pairs]
        if np.any(np.diff(chis) <= 0) or chis[0] <= 0:
            raise RuntimeError(f"Sturm-Liouville eigenvalues not increasing at m={m}")
        alphas = [compute_prolate_eigenvalue(p, c) for p in pairs]
        lams = np.abs(alphas)
        # The leading magnitudes coincide to machine precision, so "strictly
        # decreasing" is asserted up to roundoff.
        if np.any(np.diff(lams) >= 1e-12) or np.any(lams == 0):
            raise RuntimeError(f"prolate magnitudes not decreasing at m={m}")
        for pair, alpha in zip(pairs, alphas):
            for l in index_set(m):
                entries.append(BasisEntry(m=m, n=pair.n, l=l, pair=pair, alpha=alpha))
    return PswfBasis(c=c, max_m=max_m, max_n=max_n, entries=entries, grid=grid)


def save_basis(basis: PswfBasis, path) -> None:
    """Self-describing binary cache: magic 'PSWF1'; c (f64), max_m, max_n, J
    (int64 LE); then per entry in (m, n, l) order: chi (f64), alpha (2 x f64),
    beta as int64 length + f64 array."""
    base_J = basis.entries[0].pair.truncation - basis.entries[0].m
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<dqqq", basis.c, basis.max_m, basis.max_n, base_J))
        for e in basis.entries:
            fh.write(struct.pack("<ddd", e.pair.chi, e.alpha.real, e.alpha.imag))
            beta = np.ascontiguousarray(e.pair.beta, dtype="<f8")
            fh.write(struct.pack("<q", beta.size))
            fh.write(beta.tobytes())


def load_basis(path, N1: int = 104, N2: int = 56) -> PswfBasis:
    with open(path, "rb") as fh:
        if fh.read(5) != MAGIC:
            raise ValueError(f"{path}: not a PSWF1 basis cache")
        c, max_m, max_n, _base_J = struct.unpack("<dqqq", fh.read(32))
        entries = []
        for m in range(max_m + 1):
            for n in range(max_n + 1):
                for l in index_set(m):
                    chi, are, aim = struct.unpack("<ddd", fh.read(24))
                    (nbeta,) = struct.unpack("<q", fh.read(8))
                    beta = np.frombuffer(fh.read(8 * nbeta), dtype="<f8").copy()
                    pair = RadialEigenpair(m=m, n=n, chi=chi, beta=beta, truncation=nbeta - 1)
                    entries.append(BasisEntry(m=m, n=n, l=l, pair=pair, alpha=complex(are, aim)))
    return PswfBasis(c=c, max_m=max_m, max_n=max_n, entries=entries, grid=PolarGrid(N1, N2))
