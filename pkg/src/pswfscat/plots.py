"""Figure emission: PNG heatmaps with a fixed colormap plus a sidecar text
file recording each figure's data range, so figures stay comparable across
runs without digitized colorbars.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

COLORMAP = "viridis"


def save_heatmap(values: np.ndarray, path, title: str = "",
                 extent=None) -> None:
    """Render a real 2-D array as a PNG heatmap and write '<path>.range.txt'
    with its min/max."""
    values = np.asarray(values, dtype=float)
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(values, cmap=COLORMAP, origin="lower", extent=extent,
                   aspect="auto" if extent is None else "equal")
    fig.colorbar(im, ax=ax)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    sidecar = path.with_suffix(path.suffix + ".range.txt")
    sidecar.write_text(f"min={values.min():.17g}\nmax={values.max():.17g}\n")


def save_contrast_heatmap(q, path, title: str = "contrast") -> None:
    save_heatmap(q.values, path, title=title, extent=(-1, 1, -1, 1))


def save_processed_heatmaps(u, stem, title: str = "processed data") -> None:
    """Real and imaginary parts as '<stem>_re.png' / '<stem>_im.png'."""
    stem = Path(stem)
    save_heatmap(u.values.real, stem.parent / (stem.name + "_re.png"),
                 title=f"{title} (re)")
    save_heatmap(u.values.imag, stem.parent / (stem.name + "_im.png"),
                 title=f"{title} (im)")


def save_spectrum_plot(basis, path) -> None:
    """|alpha| versus entry rank per angular order m, log scale."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5, 4))
    for m in range(basis.max_m + 1):
        lams = [abs(e.alpha) for e in basis.entries if e.m == m and e.l == 1]
        ax.semilogy(lams, label=f"m={m}")
    ax.set_xlabel("radial index n")
    ax.set_ylabel("|alpha|")
    ax.legend(fontsize=6, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
