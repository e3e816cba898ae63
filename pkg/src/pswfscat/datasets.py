"""Random contrast generators (disks, Gaussians, spectral combinations, raster
imports) and sample-archive assembly for training and evaluation.

Every generator is a pure function of (seed, parameters) using the PCG64
generator; the draw order inside each sample is documented per generator so
archives reproduce across platforms.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import fileio, forward, pipeline
from .grids import ContrastGrid, DirectionSet, PolarGrid

DEFAULT_GRID_N = 64


def rasterize_disks(centers: np.ndarray, radii: np.ndarray, amplitudes: np.ndarray,
                    N: int = DEFAULT_GRID_N, supersample: int = 8) -> ContrastGrid:
    """Coverage-weighted rasterization of a union of constant disks: each cell
    takes the mean over supersample^2 sub-points, so partially covered cells
    get fractional values and quadrature against the raster converges at the
    rate of the cell area rather than the cell diameter."""
    s = supersample
    fine = -1.0 + (np.arange(N * s) + 0.5) * (2.0 / (N * s))
    X, Y = np.meshgrid(fine, fine)
    q = np.zeros_like(X)
    for (cx, cy), rad, amp in zip(centers, radii, amplitudes):
        inside = (X - cx) ** 2 + (Y - cy) ** 2 < rad ** 2
        q = np.where(inside, amp, q)  # later disks overwrite earlier ones
    coarse = q.reshape(N, s, N, s).mean(axis=(1, 3))
    return ContrastGrid(coarse)


def gen_disks(seed: int, count: int, N: int = DEFAULT_GRID_N) -> list[ContrastGrid]:
    """Piecewise-constant disk contrasts.  Per sample the draw order is:
    n ~ U{1,2,3}; then per disk radius ~ U(0.1, 0.3), center x ~ U(-0.4, 0.4),
    center y ~ U(-0.4, 0.4), amplitude ~ U(0.2, 1); finally the target peak
    max|q| ~ U(0.1, 0.8) and the whole field is rescaled to it."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(count):
        n = int(rng.integers(1, 4))
        radii = np.empty(n)
        centers = np.empty((n, 2))
        amps = np.empty(n)
        for i in range(n):
            radii[i] = rng.uniform(0.1, 0.3)
            centers[i, 0] = rng.uniform(-0.4, 0.4)
            centers[i, 1] = rng.uniform(-0.4, 0.4)
            amps[i] = rng.uniform(0.2, 1.0)
        peak = rng.uniform(0.1, 0.8)
        q = rasterize_disks(centers, radii, amps, N)
        q = ContrastGrid(q.values * (peak / np.max(np.abs(q.values))))
        samples.append(q)
    return samples


def gen_gaussians(seed: int, count: int, N: int = DEFAULT_GRID_N) -> list[ContrastGrid]:
    """Smooth sums of anisotropic Gaussians.  Per sample the draw order is:
    n ~ U{1,2,3}; per bump a ~ U(16, 66), b ~ U(16, 66), x ~ U(-0.4, 0.4),
    y ~ U(-0.4, 0.4), weight r ~ U(-1, 1); then the target sup-norm
    ~ U(0.5, 0.8) and a global rescale to it."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    c = -1.0 + (np.arange(N) + 0.5) * (2.0 / N)
    X, Y = np.meshgrid(c, c)
    samples = []
    for _ in range(count):
        n = int(rng.integers(1, 4))
        q = np.zeros_like(X)
        for _ in range(n):
            a = rng.uniform(16.0, 66.0)
            b = rng.uniform(16.0, 66.0)
            x0 = rng.uniform(-0.4, 0.4)
            y0 = rng.uniform(-0.4, 0.4)
            r = rng.uniform(-1.0, 1.0)
            q += r * np.exp(-a * (X - x0) ** 2 - b * (Y - y0) ** 2)
        sup = rng.uniform(0.5, 0.8)
        scale = sup / np.max(np.abs(q)) if np.max(np.abs(q)) > 0 else 0.0
        samples.append(ContrastGrid(q * scale))
    return samples


def _combo_setup(max_index: int, basis, N: int):
    if max_index not in (5, 10):
        raise ValueError("max_index must be 5 or 10")
    if basis.max_m < max_index - 1 or basis.max_n < max_index - 1:
        raise ValueError(f"basis does not cover m, n < {max_index}")
    idx = [i for i, e in enumerate(basis.entries)
           if e.m < max_index and e.n < max_index]
    c = -1.0 + (np.arange(N) + 0.5) * (2.0 / N)
    X, Y = np.meshgrid(c, c)
    inside = np.hypot(X, Y) <= 1.0
    pts = np.stack([np.where(inside, X, 0.0), np.where(inside, Y, 0.0)], axis=-1)
    columns = np.stack([
        basis.evaluate_entry(basis.entries[i], pts) * inside for i in idx])
    weights = np.array([basis.entries[i].pair.chi ** -0.5 for i in idx])
    return idx, columns, weights


def gen_pswf_combo(seed: int, count: int, max_index: int, basis,
                   N: int = DEFAULT_GRID_N,
                   return_coefficients: bool = False):
    """In-span contrasts: q = R sum xi_{m,n,l} chi_{m,n}^{-1/2} psi_{m,n,l}
    over m, n < max_index.  Per sample the draw order is: one standard-normal
    xi per entry in basis order; then the target sup-norm ~ U(0.5, 0.8).
    The chi^{-1/2} weights damp high indices so samples stay smooth.

    With return_coefficients=True, also returns per sample the exact spectral
    coefficients {(m, n, l): R xi chi^{-1/2}} of each contrast."""
    if count < 1:
        raise ValueError("count must be >= 1")
    idx, columns, weights = _combo_setup(max_index, basis, N)
    rng = np.random.default_rng(seed)
    samples = []
    coefficient_dicts = []
    for _ in range(count):
        xi = rng.standard_normal(len(idx))
        q = np.tensordot(xi * weights, columns, axes=1)
        sup = rng.uniform(0.5, 0.8)
        scale = sup / np.max(np.abs(q))
        samples.append(ContrastGrid(q * scale))
        coefficient_dicts.append({
            (basis.entries[i].m, basis.entries[i].n, basis.entries[i].l):
                complex(scale * x * w)
            for i, x, w in zip(idx, xi, weights)})
    if return_coefficients:
        return samples, coefficient_dicts
    return samples


def import_raster(path, max_amplitude: float = 0.5,
                  N: int = DEFAULT_GRID_N) -> ContrastGrid:
    """Load a grayscale raster image as a contrast: values normalized to
    [0, max_amplitude], resampled to N x N and centered in the unit disk
    (the image square is embedded in [-s, s]^2 with s = 1/sqrt(2))."""
    from PIL import Image

    try:
        img = Image.open(path).convert("L")
    except (OSError, ValueError) as exc:
        raise ValueError(f"cannot read raster file {path}: {exc}") from exc
    if img.width < 1 or img.height < 1 or img.width != img.height:
        raise ValueError(f"raster must be square, got {img.width}x{img.height}")
    side = int(round(N / np.sqrt(2.0)))
    img = img.resize((side, side), Image.BILINEAR)
    values = np.asarray(img, dtype=float) / 255.0 * max_amplitude
    values = values[::-1]  # raster row 0 is the top; grid row 0 is y = -1
    q = np.zeros((N, N))
    off = (N - side) // 2
    q[off:off + side, off:off + side] = values
    return ContrastGrid(q)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def build_samples(contrasts: list[ContrastGrid], k: float,
                  inc: DirectionSet, obs: DirectionSet, grid: PolarGrid,
                  out_dir, recipe: str = "custom", seed: int = 0,
                  delta: float = 0.0, noise_seed: int = 0) -> dict:
    """Assemble a sample archive: per contrast the full and Born far fields,
    their processed forms, and the polar image of q, written as FFM1 / PRC1 /
    CGR1 records with a JSON manifest listing IDs, recipe, seed, k, rel(k)
    and per-file checksums.  When delta > 0 a noisy copy of the full far
    field and its processed form are added per sample."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for i, q in enumerate(contrasts):
        sid = f"{i:05d}"
        try:
            ff = forward.full_far_field(q, k, inc, obs)
        except forward.SolverConvergenceError as exc:
            raise forward.SolverConvergenceError(
                exc.residual, exc.iterations,
                f"forward solve failed on sample {sid}") from exc
        ffb = forward.born_far_field(q, k, inc, obs)
        u = pipeline.process_far_field(ff, grid)
        ub = pipeline.process_far_field(ffb, grid)
        polar_q = pipeline.contrast_to_polar_image(q, grid)
        relk = float(np.linalg.norm(ff.entries - ffb.entries)
                     / np.linalg.norm(ff.entries))
        files = {
            "contrast": f"{sid}_q.cgr",
            "contrast_polar": f"{sid}_qpolar.cgr",
            "far_field": f"{sid}_full.ffm",
            "far_field_born": f"{sid}_born.ffm",
            "processed": f"{sid}_u.prc",
            "processed_born": f"{sid}_ub.prc",
        }
        fileio.save_contrast(q, out / files["contrast"])
        fileio.save_image(polar_q, out / files["contrast_polar"])
        fileio.save_far_field(ff, out / files["far_field"])
        fileio.save_far_field(ffb, out / files["far_field_born"])
        fileio.save_processed(u, out / files["processed"])
        fileio.save_processed(ub, out / files["processed_born"])
        if delta > 0:
            ff_noisy = pipeline.add_noise(ff, delta, noise_seed + i)
            u_noisy = pipeline.process_far_field(ff_noisy, grid)
            files["far_field_noisy"] = f"{sid}_noisy.ffm"
            files["processed_noisy"] = f"{sid}_unoisy.prc"
            fileio.save_far_field(ff_noisy, out / files["far_field_noisy"])
            fileio.save_processed(u_noisy, out / files["processed_noisy"])
        checksums = {name: _sha256(out / fname) for name, fname in files.items()}
        records.append({"id": sid, "rel_k": relk, "files": files,
                        "checksums": checksums})
    manifest = {
        "recipe": recipe,
        "seed": seed,
        "k": k,
        "c": 2.0 * k,
        "N1": grid.N1,
        "N2": grid.N2,
        "n_inc": inc.n,
        "n_obs": obs.n,
        "delta": delta,
        "noise_seed": noise_seed if delta > 0 else None,
        "count": len(records),
        "records": records,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    return manifest


def load_manifest(archive_dir) -> dict:
    path = Path(archive_dir) / "manifest.json"
    with open(path) as fh:
        manifest = json.load(fh)
    return manifest


def verify_manifest(archive_dir) -> None:
    """Check that every referenced record exists and its checksum matches."""
    root = Path(archive_dir)
    manifest = load_manifest(root)
    for rec in manifest["records"]:
        for name, fname in rec["files"].items():
            path = root / fname
            if not path.exists():
                raise FileNotFoundError(f"missing record {rec['id']}/{name}: {fname}")
            if _sha256(path) != rec["checksums"][name]:
                raise ValueError(f"checksum mismatch for {fname}")
