"""Contrast generators, raster import, and the sample archive."""
import json

import numpy as np
import pytest
from PIL import Image

from pswfscat import datasets, fileio, inverse
from pswfscat.grids import DirectionSet, PolarGrid


def test_disks_amplitude_and_support():
    samples = datasets.gen_disks(3, 20)
    for q in samples:
        peak = np.max(np.abs(q.values))
        assert 0.1 <= peak <= 0.8
        X, Y = q.meshgrid()
        assert np.all(q.values[np.hypot(X, Y) > 0.72] == 0)


def test_disks_deterministic():
    a = datasets.gen_disks(7, 5)
    b = datasets.gen_disks(7, 5)
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))
    c = datasets.gen_disks(8, 5)
    assert not np.array_equal(a[0].values, c[0].values)


def test_gaussians_amplitude_and_smoothness():
    samples = datasets.gen_gaussians(5, 10)
    for q in samples:
        sup = np.max(np.abs(q.values))
        assert 0.5 - 1e-12 <= sup <= 0.8 + 1e-12
        lap = (np.roll(q.values, 1, 0) + np.roll(q.values, -1, 0)
               + np.roll(q.values, 1, 1) + np.roll(q.values, -1, 1)
               - 4 * q.values) / q.spacing**2
        # curvature bounded by the sharpest admissible Gaussian (a, b <= 66)
        assert np.max(np.abs(lap)) < 1000.0 * sup


def test_gaussians_deterministic():
    a = datasets.gen_gaussians(1, 3)
    b = datasets.gen_gaussians(1, 3)
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))


def test_pswf_combo_bounds_and_validation(basis_small):
    with pytest.raises(ValueError):
        datasets.gen_pswf_combo(0, 1, 7, basis_small)
    with pytest.raises(ValueError):
        datasets.gen_pswf_combo(0, 1, 10, basis_small)  # basis too small
    samples = datasets.gen_pswf_combo(0, 5, 5, basis_small)
    for q in samples:
        sup = np.max(np.abs(q.values))
        assert 0.5 - 1e-12 <= sup <= 0.8 + 1e-12


def test_pswf_combo_in_span_round_trip(basis_small):
    """Synthesizing Born-type data from a combo contrast's exact spectral
    coefficients and inverting below the smallest retained |alpha| recovers
    the contrast."""
    samples, coeff_dicts = datasets.gen_pswf_combo(
        4, 1, 5, basis_small, return_coefficients=True)
    grid = basis_small.grid
    u = inverse.synthesize_processed(basis_small, coeff_dicts[0])
    min_lam = min(abs(e.alpha) for e in basis_small.entries)
    polar, _ = inverse.invert_eta_polar(u, basis_small, eta=0.9 * min_lam)
    M = basis_small.node_matrix()
    lookup = {(e.m, e.n, e.l): i for i, e in enumerate(basis_small.entries)}
    q_polar = sum(qc * M[lookup[key]].reshape(grid.N2, grid.N1)
                  for key, qc in coeff_dicts[0].items())
    assert grid.norm(polar - q_polar) / grid.norm(q_polar) < 1e-4


def test_pswf_combo_coefficients_decay(basis_small):
    _, coeff_dicts = datasets.gen_pswf_combo(2, 8, 5, basis_small,
                                             return_coefficients=True)
    by_n = {n: [] for n in range(5)}
    for coeffs in coeff_dicts:
        for (m, n, l), qc in coeffs.items():
            by_n[n].append(abs(qc))
    means = [np.mean(by_n[n]) for n in range(5)]
    assert means[-1] < means[0]  # chi^{-1/2} damps high radial indices


def test_import_raster(tmp_path):
    path = tmp_path / "img.png"
    Image.fromarray(np.zeros((28, 28), dtype=np.uint8)).save(path)
    q = datasets.import_raster(path, max_amplitude=0.5)
    assert np.all(q.values == 0)
    Image.fromarray(np.full((28, 28), 255, dtype=np.uint8)).save(path)
    q = datasets.import_raster(path, max_amplitude=0.5)
    side = int(round(64 / np.sqrt(2)))
    off = (64 - side) // 2
    inner = q.values[off:off + side, off:off + side]
    assert np.allclose(inner, 0.5)
    assert np.max(np.abs(q.values)) <= 0.5
    with pytest.raises(ValueError):
        datasets.import_raster(tmp_path / "missing.png")


def test_import_raster_quantization_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    raw = rng.integers(0, 256, size=(28, 28), dtype=np.uint8)
    path = tmp_path / "r.png"
    Image.fromarray(raw).save(path)
    q = datasets.import_raster(path, max_amplitude=1.0, N=64)
    # values derive from 8-bit data: all on the 1/255 lattice within resampling
    assert np.max(q.values) <= 1.0 and np.min(q.values) >= 0.0


def test_archive_build_verify_and_reproducibility(tmp_path):
    contrasts = datasets.gen_disks(3, 2)
    grid = PolarGrid(104, 56)
    dirs = DirectionSet.uniform(104)
    man1 = datasets.build_samples(contrasts, 16.0, dirs, dirs, grid,
                                  tmp_path / "a", recipe="disks", seed=3,
                                  delta=0.2, noise_seed=3)
    assert man1["count"] == 2
    assert all(0 < r["rel_k"] < 10 for r in man1["records"])
    datasets.verify_manifest(tmp_path / "a")
    man2 = datasets.build_samples(contrasts, 16.0, dirs, dirs, grid,
                                  tmp_path / "b", recipe="disks", seed=3,
                                  delta=0.2, noise_seed=3)
    for r1, r2 in zip(man1["records"], man2["records"]):
        assert r1["checksums"] == r2["checksums"]
    # loading a record back gives consistent data
    rec = man1["records"][0]
    u = fileio.load_processed(tmp_path / "a" / rec["files"]["processed"])
    assert u.c == 32.0
    # corrupt one file: verification must fail
    target = tmp_path / "a" / rec["files"]["contrast"]
    blob = bytearray(target.read_bytes())
    blob[30] ^= 0xFF
    target.write_bytes(bytes(blob))
    with pytest.raises(ValueError):
        datasets.verify_manifest(tmp_path / "a")


def test_manifest_is_json(tmp_path):
    contrasts = datasets.gen_disks(1, 1)
    grid = PolarGrid(104, 56)
    dirs = DirectionSet.uniform(104)
    datasets.build_samples(contrasts, 16.0, dirs, dirs, grid, tmp_path / "m",
                           recipe="disks", seed=1)
    manifest = json.loads((tmp_path / "m" / "manifest.json").read_text())
    assert manifest["recipe"] == "disks"
    assert manifest["k"] == 16.0


def test_generator_count_validation():
    with pytest.raises(ValueError):
        datasets.gen_disks(0, 0)
    with pytest.raises(ValueError):
        datasets.gen_gaussians(0, -1)
