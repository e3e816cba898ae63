"""Direct scattering solver.

The scattered field solves the Lippmann-Schwinger equation

    u_s = K[(u_i + u_s) q],   K v(x) = k^2 int (i/4) H_0^(1)(k |x - y|) v(y) dy

discretized by midpoint collocation on a uniform N x N grid over [-1, 1]^2.
The kernel convolution is applied through a circulant embedding and FFTs,
and the singular self-cell is replaced by the exact integral of the kernel
over the disk of equal area (radius h / sqrt(pi)):

    int_{|y|<a} (i/4) H_0(k|y|) dy = (i pi / (2 k^2)) [k a H_1^(1)(k a) + 2i/pi].

The linear system (I - K q) u_s = K(q u_i) is solved by restarted GMRES
batched across incident directions, so all per-direction solves share each
FFT application.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .grids import ContrastGrid, DirectionSet, FarFieldMatrix

DEFAULT_TOL = 1e-8
DEFAULT_RESTART = 50
DEFAULT_MAXITER = 500


class SolverConvergenceError(RuntimeError):
    """GMRES failed to reach tolerance; the contrast is too strong for the
    discretization (or maxiter too small)."""

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"Lippmann-Schwinger solve stalled at relative residual "
            f"{residual:.3e} after {iterations} iterations"
        )


@dataclass
class ScatteredField:
    """Scattered field for one incidence on the contrast grid."""

    values: np.ndarray  # complex (N, N)
    residual: float
    k: float
    theta: float


def batched_gmres(matvec, B, tol=DEFAULT_TOL, restart=DEFAULT_RESTART, maxiter=DEFAULT_MAXITER):
    """Restarted GMRES for many right-hand sides sharing one operator.

    matvec maps (p, n) -> (p, n); B is (p, n).  Every column runs its own
    Krylov recursion but the operator applications are batched.  Returns
    (X, relative residuals, total iterations).
    """
    B = np.atleast_2d(B)
    p, n = B.shape
    bnorm = np.linalg.norm(B, axis=1)
    bnorm = np.where(bnorm == 0, 1.0, bnorm)
    X = np.zeros_like(B)
    total = 0
    res = np.ones(p)
    while total < maxiter:
        R = B - matvec(X)
        beta = np.linalg.norm(R, axis=1)
        res = beta / bnorm
        if np.all(res <= tol):
            return X, res, total
        m = min(restart, maxiter - total)
        V = np.zeros((m + 1, p, n), dtype=complex)
        H = np.zeros((p, m + 1, m), dtype=complex)
        V[0] = R / np.where(beta == 0, 1.0, beta)[:, None]
        g0 = np.zeros((p, m + 1), dtype=complex)
        g0[:, 0] = beta
        j_done = 0
        for j in range(m):
            W = matvec(V[j])
            for i in range(j + 1):  # modified Gram-Schmidt
                hij = np.sum(np.conj(V[i]) * W, axis=1)
                W -= hij[:, None] * V[i]
                H[:, i, j] = hij
            hh = np.linalg.norm(W, axis=1)
            H[:, j + 1, j] = hh
            V[j + 1] = W / np.where(hh == 0, 1.0, hh)[:, None]
            total += 1
            j_done = j + 1
            # least-squares residual of every column via normal equations
            Hj = H[:, : j + 2, : j + 1]
            G = np.einsum("pij,pik->pjk", np.conj(Hj), Hj)
            rhs = np.einsum("pij,pi->pj", np.conj(Hj), g0[:, : j + 2])
            y = np.linalg.solve(G, rhs[..., None])[..., 0]
            rnew = np.linalg.norm(g0[:, : j + 2] - np.einsum("pij,pj->pi", Hj, y), axis=1)
            res = rnew / bnorm
            if np.all(res <= tol):
                break
        Hj = H[:, : j_done + 1, :j_done]
        G = np.einsum("pij,pik->pjk", np.conj(Hj), Hj)
        rhs = np.einsum("pij,pi->pj", np.conj(Hj), g0[:, : j_done + 1])
        y = np.linalg.solve(G, rhs[..., None])[..., 0]
        X = X + np.einsum("jpn,pj->pn", V[:j_done], y)
        if np.all(res <= tol):
            R = B - matvec(X)
            res = np.linalg.norm(R, axis=1) / bnorm
            return X, res, total
    R = B - matvec(X)
    res = np.linalg.norm(R, axis=1) / bnorm
    return X, res, total


class LippmannSchwingerSolver:
    """FFT-accelerated volume-integral solver for one (N, k)."""

    def __init__(self, N: int, k: float):
        if k <= 0:
            raise ValueError("wavenumber must be positive")
        self.N = N
        self.k = k
        self.h = 2.0 / N
        self.centers = -1.0 + (np.arange(N) + 0.5) * self.h
        X, Y = np.meshgrid(self.centers, self.centers)
        self.points = np.stack([X.ravel(), Y.ravel()], axis=1)  # (N^2, 2)
        d = ((np.arange(2 * N) + N) % (2 * N)) - N  # offsets -N .. N-1, wrapped
        DX, DY = np.meshgrid(d * self.h, d * self.h)
        dist = np.hypot(DX, DY)
        G = np.zeros_like(dist, dtype=complex)
        nz = dist > 0
        G[nz] = k * k * (0.25j) * sp.hankel1(0, k * dist[nz]) * self.h * self.h
        a = self.h / np.sqrt(np.pi)  # equal-area disk radius for the self cell
        G[0, 0] = (0.5j * np.pi) * (k * a) * sp.hankel1(1, k * a) - 1.0
        self._ghat = np.fft.fft2(G)

    def apply_K(self, v: np.ndarray) -> np.ndarray:
        """Kernel convolution for fields shaped (..., N^2)."""
        v = np.asarray(v, dtype=complex)
        shape = v.shape
        fields = v.reshape(-1, self.N, self.N)
        pad = np.zeros((fields.shape[0], 2 * self.N, 2 * self.N), dtype=complex)
        pad[:, : self.N, : self.N] = fields
        out = np.fft.ifft2(np.fft.fft2(pad) * self._ghat)[:, : self.N, : self.N]
        return out.reshape(shape)

    def incident(self, angles: np.ndarray) -> np.ndarray:
        """Plane waves e^{i k theta_hat . y}, shape (p, N^2)."""
        angles = np.atleast_1d(np.asarray(angles, dtype=float))
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        return np.exp(1j * self.k * (dirs @ self.points.T))

    def solve_batch(
        self, q: ContrastGrid, angles, tol=DEFAULT_TOL,
        restart=DEFAULT_RESTART, maxiter=DEFAULT_MAXITER, max_batch_bytes=2.5e8,
    ):
        """Scattered fields for a batch of incident angles, shape (p, N^2)."""
        if q.N != self.N:
            raise ValueError("contrast grid does not match the solver grid")
        qv = q.values.ravel()
        angles = np.atleast_1d(np.asarray(angles, dtype=float))
        n = self.N * self.N
        chunk = max(1, int(max_batch_bytes / ((restart + 1) * n * 16)))
        out = np.empty((angles.size, n), dtype=complex)
        res_all = np.empty(angles.size)

        def op(x):
            return x - self.apply_K(qv[None, :] * x)

        for lo in range(0, angles.size, chunk):
            sub = angles[lo : lo + chunk]
            ui = self.incident(sub)
            rhs = self.apply_K(qv[None, :] * ui)
            X, res, _ = batched_gmres(op, rhs, tol=tol, restart=restart, maxiter=maxiter)
            if np.any(res > tol):
                raise SolverConvergenceError(float(res.max()), maxiter)
            out[lo : lo + len(sub)] = X
            res_all[lo : lo + len(sub)] = res
        return out, res_all

    def born_scattered(self, q: ContrastGrid, angles) -> np.ndarray:
        """Born approximation of the scattered fields, K(q u_i)."""
        qv = q.values.ravel()
        return self.apply_K(qv[None, :] * self.incident(angles))


def solve_scattered(q: ContrastGrid, k: float, theta: float, tol=DEFAULT_TOL) -> ScatteredField:
    """Scattered field for a single incident direction."""
    solver = LippmannSchwingerSolver(q.N, k)
    fields, res = solver.solve_batch(q, [theta], tol=tol)
    return ScatteredField(
        values=fields[0].reshape(q.N, q.N), residual=float(res[0]), k=k, theta=float(theta)
    )


def far_field(q: ContrastGrid, field: ScatteredField, k: float, theta: float,
              obs: DirectionSet) -> np.ndarray:
    """u_inf(x_hat; theta_hat) = k^2 int e^{-i k x_hat . y} (u_s + u_i) q dy
    by midpoint quadrature, for every observation direction."""
    solver = LippmannSchwingerSolver(q.N, k)
    ui = solver.incident([theta])[0]
    total = field.values.ravel() + ui
    e_obs = np.exp(-1j * k * (obs.vectors @ solver.points.T))
    return k * k * solver.h**2 * (e_obs @ (q.values.ravel() * total))


def full_far_field(
    q: ContrastGrid, k: float, inc: DirectionSet, obs: DirectionSet,
    tol=DEFAULT_TOL, solver: LippmannSchwingerSolver | None = None,
) -> FarFieldMatrix:
    """Multistatic far-field matrix from full Lippmann-Schwinger solves."""
    if solver is None:
        solver = LippmannSchwingerSolver(q.N, k)
    fields, _ = solver.solve_batch(q, inc.angles, tol=tol)
    totals = fields + solver.incident(inc.angles)
    e_obs = np.exp(-1j * k * (obs.vectors @ solver.points.T))
    entries = k * k * solver.h**2 * (e_obs @ (q.values.ravel()[:, None] * totals.T))
    return FarFieldMatrix(entries=entries, k=k, obs=obs, inc=inc)


def born_far_field(q: ContrastGrid, k: float, inc: DirectionSet, obs: DirectionSet) -> FarFieldMatrix:
    """Born far field k^2 int e^{i k (theta_hat - x_hat) . y} q dy; a direct
    quadrature (restricted Fourier transform of q), no solve."""
    solver = LippmannSchwingerSolver(q.N, k)
    e_obs = np.exp(-1j * k * (obs.vectors @ solver.points.T))
    e_inc = np.exp(1j * k * (solver.points @ inc.vectors.T))
    entries = k * k * solver.h**2 * (e_obs @ (q.values.ravel()[:, None] * e_inc))
    return FarFieldMatrix(entries=entries, k=k, obs=obs, inc=inc)


def degree_of_nonlinearity(
    q: ContrastGrid, k: float, inc: DirectionSet | None = None, tol=DEFAULT_TOL,
) -> float:
    """rel(k) = ||U_s - U_b_s||_F / ||U_s||_F over the grid-sampled scattered
    fields for all incidences."""
    if inc is None:
        inc = DirectionSet.uniform(104)
    solver = LippmannSchwingerSolver(q.N, k)
    full, _ = solver.solve_batch(q, inc.angles, tol=tol)
    born = solver.born_scattered(q, inc.angles)
    denom = np.linalg.norm(full)
    if denom == 0:
        raise ZeroDivisionError("scattered field is identically zero")
    return float(np.linalg.norm(full - born) / denom)
