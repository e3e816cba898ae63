"""Command-line interface: train and run the processed-data correctors."""
from __future__ import annotations

import dataclasses
import sys
from pathlib import Path

import click

from . import data, infer
from .train import (PRESETS, DivergenceError, TrainingConfig, load_artifact,
                    train as run_train)

EXIT_USER = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Neural correctors for processed scattering data."""


@main.command("train")
@click.argument("archive", type=click.Path(exists=True, file_okay=False))
@click.option("--task", type=click.Choice(sorted(data.TASKS)), required=True,
              help="u1: full data -> Born data; u1_limited: limited-aperture "
                   "data -> Born data; u2: Born data -> polar contrast image.")
@click.option("--out", required=True, type=click.Path(),
              help="Model artifact directory.")
@click.option("--preset", type=click.Choice(sorted(PRESETS)),
              default=None, help="Sample-count/epoch preset.")
@click.option("--epochs", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--weight-decay", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--val-fraction", type=float, default=None)
@click.option("--base-channels", type=int, default=None)
@click.option("--leaky", is_flag=True, default=False,
              help="Use leaky ReLU nonlinearities.")
@click.option("--limit", type=int, default=None,
              help="Use only the first N archive samples.")
def cmd_train(archive, task, out, preset, **overrides):
    config = TrainingConfig()
    if preset:
        for key, value in PRESETS[preset].items():
            setattr(config, key, value)
    for key, value in overrides.items():
        if value not in (None, False):
            setattr(config, key, value)
    try:
        run_train(archive, task, out, config, log=click.echo)
    except data.ArchiveError as exc:
        _fail(EXIT_DATA, str(exc))
    except DivergenceError as exc:
        _fail(EXIT_NUMERIC, str(exc))
    except ValueError as exc:
        _fail(EXIT_USER, str(exc))
    click.echo(f"model saved to {out}")


@main.command("infer")
@click.argument("model_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("inputs", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--suffix", default="_corrected",
              help="Appended to each input stem to form the output name.")
def cmd_infer(model_dir, inputs, out_dir, suffix):
    out_root = Path(out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    model, _ = load_artifact(model_dir)
    ext = ".prc" if model.out_channels == 2 else ".cgr"
    for path in inputs:
        src = Path(path)
        dst = out_root / f"{src.stem}{suffix}{ext}"
        try:
            infer.correct(model_dir, src, dst)
        except Exception as exc:  # format/shape violations
            _fail(EXIT_DATA, f"{src}: {exc}")
        click.echo(f"{src} -> {dst}")


if __name__ == "__main__":
    main()
