"""U-Net over polar-grid tensors with circular angular padding.

Architecture: `levels` resolution levels with channel count doubling per
level, two 3x3 convolutions (circular angular / zero radial padding) with
group normalization and a pointwise nonlinearity per block, 2x2 max pooling
between levels, 2x2 transposed convolutions on the way up, and skip
connections.  Every spatial operation commutes with angular cyclic shifts
that are multiples of the total downsampling factor 2**(levels-1).
"""
from __future__ import annotations

import torch
from torch import nn

from .padding import circular_pad


class PadConv(nn.Module):
    """3x3 convolution preceded by circular-angular / zero-radial padding."""

    def __init__(self, c_in: int, c_out: int):
        super().__init__()
        self.conv = nn.Conv2d(c_in, c_out, kernel_size=3, padding=0)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.conv(circular_pad(x, 1))


class ConvBlock(nn.Module):
    """Two (pad -> conv -> batch norm -> nonlinearity) stages."""

    def __init__(self, c_in: int, c_out: int, leaky: bool):
        super().__init__()
        act = nn.LeakyReLU(0.01) if leaky else nn.ReLU()
        norm = lambda c: nn.GroupNorm(min(8, c), c)  # batch-size independent
        self.net = nn.Sequential(
            PadConv(c_in, c_out), norm(c_out), act,
            PadConv(c_out, c_out), norm(c_out), act,
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


class PolarUNet(nn.Module):
    def __init__(self, in_channels: int, out_channels: int,
                 base_channels: int = 16, levels: int = 4,
                 leaky: bool = False):
        super().__init__()
        if levels < 2:
            raise ValueError("levels must be >= 2")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.base_channels = base_channels
        self.levels = levels
        self.leaky = leaky
        self.downsampling = 2 ** (levels - 1)

        widths = [base_channels * 2**i for i in range(levels)]
        self.down = nn.ModuleList()
        c = in_channels
        for w in widths:
            self.down.append(ConvBlock(c, w, leaky))
            c = w
        self.pool = nn.MaxPool2d(2)
        self.up = nn.ModuleList()
        self.up_blocks = nn.ModuleList()
        for w_skip, w_deep in zip(widths[-2::-1], widths[:0:-1]):
            self.up.append(nn.ConvTranspose2d(w_deep, w_skip, 2, stride=2))
            self.up_blocks.append(ConvBlock(2 * w_skip, w_skip, leaky))
        self.head = nn.Conv2d(widths[0], out_channels, kernel_size=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h, w = x.shape[2], x.shape[3]
        if h % self.downsampling or w % self.downsampling:
            raise ValueError(
                f"spatial shape ({h}, {w}) not divisible by the total "
                f"downsampling factor {self.downsampling}")
        skips = []
        for i, block in enumerate(self.down):
            if i:
                x = self.pool(x)
            x = block(x)
            skips.append(x)
        for upconv, block, skip in zip(self.up, self.up_blocks, skips[-2::-1]):
            x = block(torch.cat([skip, upconv(x)], dim=1))
        return self.head(x)

    def config(self) -> dict:
        return {"in_channels": self.in_channels,
                "out_channels": self.out_channels,
                "base_channels": self.base_channels,
                "levels": self.levels,
                "leaky": self.leaky}


class Corrector(nn.Module):
    """A U-Net wrapped with fixed input/target normalization and, for
    data-to-data tasks, a global residual skip: the wrapper is the identity
    map at initialization and learns the correction on top of it."""

    def __init__(self, net: PolarUNet, input_scale: float,
                 target_scale: float, residual: bool):
        super().__init__()
        if residual and net.in_channels != net.out_channels:
            raise ValueError("residual correctors need matching channel counts")
        self.net = net
        self.input_scale = input_scale
        self.target_scale = target_scale
        self.residual = residual
        # start from the identity (residual) or zero map: the 1x1 head is
        # zero-initialized so early training cannot be worse than no model
        nn.init.zeros_(net.head.weight)
        nn.init.zeros_(net.head.bias)

    @property
    def out_channels(self) -> int:
        return self.net.out_channels

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        y = self.target_scale * self.net(x / self.input_scale)
        return x + y if self.residual else y

    def config(self) -> dict:
        return {"net": self.net.config(),
                "input_scale": self.input_scale,
                "target_scale": self.target_scale,
                "residual": self.residual}


def build_model(config: dict) -> Corrector:
    return Corrector(PolarUNet(**config["net"]),
                     input_scale=config["input_scale"],
                     target_scale=config["target_scale"],
                     residual=config["residual"])
