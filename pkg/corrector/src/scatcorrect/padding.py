"""Disk-aware padding for convolutions on polar-grid tensors.

Tensors are (batch, channels, radial, angular).  The angular axis is periodic,
so it is padded circularly; the radial axis is not, so it is zero-padded.
"""
from __future__ import annotations

import torch
import torch.nn.functional as F

RADIAL_AXIS = 2
ANGULAR_AXIS = 3


def circular_pad(x: torch.Tensor, pad: int = 1) -> torch.Tensor:
    """Pad by `pad` cells: circular wrap along the angular axis, zeros along
    the radial axis.  Applied before every 3x3 convolution so that the
    network never breaks angular periodicity."""
    if x.dim() != 4:
        raise ValueError(
            f"expected a (batch, channel, radial, angular) tensor, got {x.dim()} axes")
    # F.pad's last-dim pair is the angular axis (wrap), next pair radial (zeros)
    x = F.pad(x, (pad, pad, 0, 0), mode="circular")
    return F.pad(x, (0, 0, pad, pad), mode="constant", value=0.0)
