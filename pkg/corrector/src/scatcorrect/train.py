"""Training loop for the polar U-Net data correctors."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

import torch
from torch.utils.data import DataLoader, TensorDataset

from .data import TASKS, load_task
from .model import Corrector, PolarUNet, build_model


@dataclasses.dataclass
class TrainingConfig:
    learning_rate: float = 1e-3
    weight_decay: float = 1e-5
    batch_size: int = 40
    epochs: int = 100
    lr_factor: float = 0.5
    lr_patience: int = 4
    seed: int = 0
    val_fraction: float = 0.1
    base_channels: int = 16
    levels: int = 4
    leaky: bool = False
    limit: int | None = None


#: 2,000 samples / 20 epochs is tractable on a workstation CPU; the full
#: preset is sized for server-class runs.
PRESETS = {
    "desk": {"epochs": 20, "limit": 2000},
    "full": {"epochs": 100, "limit": 20000},
}


class DivergenceError(RuntimeError):
    pass


def _epoch(model, loader, loss_fn, optimizer=None) -> float:
    total, count = 0.0, 0
    for x, y in loader:
        pred = model(x)
        loss = loss_fn(pred, y)
        if optimizer is not None:
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
        total += loss.item() * x.shape[0]
        count += x.shape[0]
    return total / count


def train(archive_dir, task: str, out_dir,
          config: TrainingConfig | None = None,
          log=print) -> list[dict]:
    """Train one corrector and save the model artifact.

    Writes to out_dir: weights.pt, config.json (architecture + training
    settings + a snapshot of the archive metadata), loss_curve.csv
    (epoch, train_mse, val_mse).  Returns the loss curve as a list of dicts.
    Deterministic given config.seed (single-threaded CPU kernels permitting).
    """
    config = config or TrainingConfig()
    torch.manual_seed(config.seed)
    inputs, targets, manifest = load_task(archive_dir, task, config.limit)
    n = inputs.shape[0]
    n_val = max(1, int(round(config.val_fraction * n)))
    if n_val >= n:
        raise ValueError(f"validation split leaves no training data (n={n})")
    perm = torch.randperm(n, generator=torch.Generator().manual_seed(config.seed))
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    train_loader = DataLoader(TensorDataset(inputs[train_idx], targets[train_idx]),
                              batch_size=config.batch_size, shuffle=True,
                              generator=torch.Generator().manual_seed(config.seed))
    val_loader = DataLoader(TensorDataset(inputs[val_idx], targets[val_idx]),
                            batch_size=config.batch_size)

    net = PolarUNet(in_channels=2, out_channels=TASKS[task][2],
                    base_channels=config.base_channels,
                    levels=config.levels, leaky=config.leaky)
    model = Corrector(net,
                      input_scale=float(inputs[train_idx].std()),
                      target_scale=float(targets[train_idx].std()),
                      residual=TASKS[task][3])
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate,
                                  weight_decay=config.weight_decay)
    scheduler = torch.optim.lr_scheduler.ReduceLROnPlateau(
        optimizer, factor=config.lr_factor, patience=config.lr_patience)
    loss_fn = torch.nn.MSELoss()

    curve = []
    for epoch in range(1, config.epochs + 1):
        model.train()
        train_mse = _epoch(model, train_loader, loss_fn, optimizer)
        model.eval()
        with torch.no_grad():
            val_mse = _epoch(model, val_loader, loss_fn)
        if not (math.isfinite(train_mse) and math.isfinite(val_mse)):
            raise DivergenceError(
                f"non-finite loss at epoch {epoch}: train {train_mse}, "
                f"val {val_mse} (lr {optimizer.param_groups[0]['lr']:.2e})")
        scheduler.step(val_mse)
        curve.append({"epoch": epoch, "train_mse": train_mse, "val_mse": val_mse})
        log(f"epoch {epoch:3d}  train mse {train_mse:.6e}  val mse {val_mse:.6e}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), out / "weights.pt")
    with open(out / "config.json", "w") as fh:
        json.dump({"task": task,
                   "model": model.config(),
                   "training": dataclasses.asdict(config),
                   "archive": {k: manifest[k] for k in
                               ("recipe", "seed", "k", "c", "N1", "N2",
                                "count")}},
                  fh, indent=1, sort_keys=True)
    with open(out / "loss_curve.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["epoch", "train_mse", "val_mse"])
        writer.writeheader()
        writer.writerows(curve)
    return curve


def load_artifact(model_dir) -> tuple[PolarUNet, dict]:
    """Load a saved model artifact; returns (model in eval mode, config)."""
    root = Path(model_dir)
    with open(root / "config.json") as fh:
        config = json.load(fh)
    model = build_model(config["model"])
    model.load_state_dict(torch.load(root / "weights.pt", weights_only=True))
    model.eval()
    return model, config
