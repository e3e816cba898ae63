"""Archive loading: turns the scattering toolkit's file archive into training
tensors.

The corrector consumes the toolkit only through its documented file formats
(PRC1 processed data, CGR1 images, JSON manifest); complex f64 data become
(re, im) f32 channel pairs at this boundary.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
from pswfscat import fileio

# task -> (manifest input key, manifest target key, target channels,
#          residual: whether the corrector learns a correction on top of
#          the identity map, which only makes sense data-to-data)
TASKS = {
    "u1": ("processed", "processed_born", 2, True),
    "u1_limited": ("processed_limited", "processed_born", 2, True),
    "u2": ("processed_born", "contrast_polar", 1, False),
}


class ArchiveError(RuntimeError):
    pass


def complex_to_channels(values: np.ndarray) -> torch.Tensor:
    """(N2, N1) complex -> (2, N2, N1) float32, channels ordered (re, im)."""
    return torch.from_numpy(
        np.stack([values.real, values.imag]).astype(np.float32))


def channels_to_complex(t: torch.Tensor) -> np.ndarray:
    """(2, N2, N1) float32 -> (N2, N1) complex128."""
    arr = t.detach().cpu().numpy().astype(np.float64)
    return arr[0] + 1j * arr[1]


def load_manifest(archive_dir) -> dict:
    path = Path(archive_dir) / "manifest.json"
    if not path.exists():
        raise ArchiveError(f"no manifest.json in {archive_dir}")
    with open(path) as fh:
        return json.load(fh)


def _load_tensor(path: Path, n_channels: int, shape: tuple[int, int]) -> torch.Tensor:
    if n_channels == 2:
        u = fileio.load_processed(path)
        values = u.values
    else:
        values = fileio.load_image(path)[None]
    got = values.shape[-2:]
    if got != shape:
        raise ArchiveError(f"{path}: shape {got} does not match manifest {shape}")
    if n_channels == 2:
        return complex_to_channels(values)
    return torch.from_numpy(np.asarray(values, dtype=np.float32))


def load_task(archive_dir, task: str,
              limit: int | None = None) -> tuple[torch.Tensor, torch.Tensor, dict]:
    """Load (inputs, targets, manifest) for one correction task.

    inputs: (N, 2, N2, N1); targets: (N, 2, N2, N1) for data-to-data tasks or
    (N, 1, N2, N1) for the data-to-contrast task.
    """
    if task not in TASKS:
        raise ArchiveError(f"unknown task {task!r}; choose from {sorted(TASKS)}")
    in_key, out_key, out_ch, _ = TASKS[task]
    root = Path(archive_dir)
    manifest = load_manifest(root)
    shape = (manifest["N2"], manifest["N1"])
    records = manifest["records"][:limit]
    if not records:
        raise ArchiveError("archive has no records")
    inputs, targets = [], []
    for rec in records:
        files = rec["files"]
        if in_key not in files or out_key not in files:
            raise ArchiveError(
                f"sample {rec['id']} lacks the {in_key!r}/{out_key!r} files "
                f"needed for task {task!r}")
        inputs.append(_load_tensor(root / files[in_key], 2, shape))
        targets.append(_load_tensor(root / files[out_key], out_ch, shape))
    return torch.stack(inputs), torch.stack(targets), manifest
