"""Inference: apply a trained corrector to processed-data files.

Data-to-data correctors read and write PRC1 files (bandwidth and aperture
metadata copied through); the data-to-contrast corrector writes its polar
image as a CGR1 file.  Network arithmetic is f32; files stay f64.
"""
from __future__ import annotations

import numpy as np
import torch
from pswfscat import fileio
from pswfscat.grids import ProcessedData

from .data import channels_to_complex, complex_to_channels
from .train import load_artifact


def correct(model_dir, in_path, out_path) -> None:
    model, config = load_artifact(model_dir)
    u = fileio.load_processed(in_path)
    expected = (config["archive"]["N2"], config["archive"]["N1"])
    if u.values.shape != expected:
        raise fileio.FormatError(
            f"{in_path}: shape {u.values.shape} does not match the model's "
            f"training shape {expected}")
    x = complex_to_channels(u.values)[None]
    with torch.no_grad():
        y = model(x)[0]
    if model.out_channels == 2:
        corrected = ProcessedData(values=channels_to_complex(y), c=u.c,
                                  grid=u.grid, aperture=u.aperture)
        fileio.save_processed(corrected, out_path)
    else:
        fileio.save_image(y[0].numpy().astype(np.float64), out_path)
