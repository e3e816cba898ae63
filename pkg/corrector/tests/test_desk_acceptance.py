"""Desk-scale acceptance: training on a 2,000-sample disks archive.

Requires a pre-built archive (directory of far-field / processed-data /
contrast files plus manifest.json) pointed to by SCATCORRECT_ARCHIVE
(default /root/data/disks2000), e.g. built with:

    pswfscat dataset --recipe disks --count 2000 --seed 0 --k 16 --out <dir>
"""
import os
from pathlib import Path

import numpy as np
import pytest
import torch
from pswfscat import fileio

from scatcorrect import data, infer, train

ARCHIVE = Path(os.environ.get("SCATCORRECT_ARCHIVE", "/root/data/disks2000"))
EPOCHS = int(os.environ.get("SCATCORRECT_EPOCHS", "8"))

pytestmark = pytest.mark.skipif(
    not (ARCHIVE / "manifest.json").exists(),
    reason=f"desk-scale archive not found at {ARCHIVE} "
           "(set SCATCORRECT_ARCHIVE)")


@pytest.fixture(scope="module")
def u1_model(tmp_path_factory):
    out = tmp_path_factory.mktemp("u1")
    config = train.TrainingConfig(epochs=EPOCHS, seed=0)
    curve = train.train(ARCHIVE, "u1", out, config, log=lambda s: None)
    return out, curve


@pytest.fixture(scope="module")
def u2_model(tmp_path_factory):
    out = tmp_path_factory.mktemp("u2")
    config = train.TrainingConfig(epochs=EPOCHS, seed=0)
    curve = train.train(ARCHIVE, "u2", out, config, log=lambda s: None)
    return out, curve


def test_u1_validation_mse_decreases(u1_model):
    _, curve = u1_model
    val = [c["val_mse"] for c in curve[:5]]
    assert all(b < a for a, b in zip(val, val[1:])), val


def test_u2_validation_mse_decreases(u2_model):
    _, curve = u2_model
    val = [c["val_mse"] for c in curve[:5]]
    assert all(b < a for a, b in zip(val, val[1:])), val


def test_u1_memorization_sanity(u1_model):
    """On a training sample the corrector's output is far closer to the Born
    target than a zero predictor (MSE below the mean squared target)."""
    model_dir, _ = u1_model
    model, _ = train.load_artifact(model_dir)
    inputs, targets, _ = data.load_task(ARCHIVE, "u1", limit=8)
    with torch.no_grad():
        pred = model(inputs)
    mse = float(torch.mean((pred - targets) ** 2))
    assert mse < float(torch.mean(targets**2))


def test_u2_relative_error_on_clean_born_data(u2_model):
    """Pixelwise relative L2 error of the learned Born-data-to-contrast map
    on in-distribution samples."""
    model_dir, _ = u2_model
    model, _ = train.load_artifact(model_dir)
    inputs, targets, _ = data.load_task(ARCHIVE, "u2", limit=32)
    with torch.no_grad():
        pred = model(inputs)
    rel = (torch.linalg.vector_norm(pred - targets)
           / torch.linalg.vector_norm(targets))
    assert float(rel) < 0.3, f"relative L2 error {float(rel):.3f}"


def test_ulr_improves_on_strongly_scattering_sample(u1_model, tmp_path):
    """End-to-end direction of improvement: correcting the full (nonlinear)
    processed data before low-rank inversion beats inverting it raw, on a
    held-out two-disk sample in the strongly scattering regime."""
    from pswfscat import datasets, forward, inverse, pipeline, pswf
    from pswfscat.grids import DirectionSet, PolarGrid

    q = datasets.rasterize_disks([[-0.22, 0.1], [0.25, -0.15]], [0.25, 0.22],
                                 [0.85, 0.8], 64)
    k = 16.0
    relk = forward.degree_of_nonlinearity(q, k)
    assert relk > 1.0, f"sample not strongly scattering: rel(k) = {relk:.2f}"

    dirs = DirectionSet.uniform(104)
    grid = PolarGrid(104, 56)
    ff = forward.full_far_field(q, k, dirs, dirs)
    u = pipeline.process_far_field(ff, grid)
    fileio.save_processed(u, tmp_path / "u.prc")
    infer.correct(u1_model[0], tmp_path / "u.prc", tmp_path / "u_corr.prc")
    u_corr = fileio.load_processed(tmp_path / "u_corr.prc")

    cache = Path(os.environ.get("SCATCORRECT_BASIS_CACHE",
                                "/root/data/basis_c32_m10_n10.pswf"))
    if cache.exists():
        basis = pswf.load_basis(cache)
    else:
        basis = pswf.build_basis(32.0, 10, 10)
        pswf.save_basis(basis, cache)

    q_true = pipeline.contrast_to_polar_image(q, grid)
    eta = inverse.default_eta(basis)
    raw, _ = inverse.invert_eta_polar(u, basis, eta)
    corrected, _ = inverse.invert_eta_polar(u_corr, basis, eta)
    err_raw = grid.norm(raw - q_true)
    err_corr = grid.norm(corrected - q_true)
    assert err_corr < err_raw, (
        f"corrected {err_corr:.4f} vs raw {err_raw:.4f} (rel(k) {relk:.2f})")
