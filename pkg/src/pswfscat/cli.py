"""Command-line surface: basis building, simulation, processing, inversion,
dataset generation, evaluation, and figure emission.

Exit codes: 2 = user error (bad flags/paths), 3 = data error (malformed or
inconsistent files), 4 = numerical failure (solver non-convergence or empty
cutoff).  Flags override values from an optional key=value config file.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import datasets, fileio, forward, inverse, pipeline, plots, pswf
from .grids import FULL_APERTURE, ContrastGrid, DirectionSet, PolarGrid

EXIT_USER = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def read_config(path) -> dict[str, str]:
    """Flat key=value file; blank lines and '#' comments ignored."""
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line without '=': {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


class ConfigGroup(click.Group):
    """Injects values from --config as per-command defaults."""

    def invoke(self, ctx):
        config = ctx.params.get("config")
        if config:
            try:
                ctx.default_map = {cmd: read_config(config)
                                   for cmd in self.commands}
            except (OSError, ValueError) as exc:
                _fail(EXIT_USER, f"bad config file: {exc}")
        return super().invoke(ctx)


@click.group(cls=ConfigGroup)
@click.option("--config", type=click.Path(exists=True), default=None,
              help="key=value file providing flag defaults")
def main(config):
    """Inverse medium scattering toolkit: disk-PSWF spectral basis, far-field
    simulation, reciprocity processing, and low-rank inversion."""


def _load_basis_file(path, n1: int, n2: int):
    try:
        return pswf.load_basis(path, N1=n1, N2=n2)
    except FileNotFoundError:
        _fail(EXIT_USER, f"basis cache not found: {path}")
    except (ValueError, OSError) as exc:
        _fail(EXIT_DATA, f"bad basis cache {path}: {exc}")


@main.command()
@click.option("--k", type=float, default=16.0, show_default=True)
@click.option("--max-m", type=int, default=10, show_default=True)
@click.option("--max-n", type=int, default=10, show_default=True)
@click.option("--n1", type=int, default=104, show_default=True)
@click.option("--n2", type=int, default=56, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def basis(k, max_m, max_n, n1, n2, out):
    """Build the disk-PSWF basis at bandwidth c = 2k and cache it."""
    if k <= 0 or max_m < 0 or max_n < 0:
        _fail(EXIT_USER, "k must be positive and index bounds non-negative")
    c = 2.0 * k
    out = Path(out)
    if out.exists():
        try:
            cached = pswf.load_basis(out, N1=n1, N2=n2)
            if (cached.c, cached.max_m, cached.max_n) == (c, max_m, max_n):
                click.echo(f"cache up to date: {out}")
                _print_basis_tables(cached)
                return
        except (ValueError, OSError):
            pass  # stale or foreign file: rebuild
    try:
        b = pswf.build_basis(c, max_m, max_n, N1=n1, N2=n2)
    except (pswf.AssemblyError, pswf.EigenResidualError, RuntimeError) as exc:
        _fail(EXIT_NUMERIC, f"basis construction failed: {exc}")
    pswf.save_basis(b, out)
    click.echo(f"wrote {out}")
    _print_basis_tables(b)


def _print_basis_tables(b):
    click.echo("m\tn\t|alpha|\tchi")
    for e in b.entries:
        if e.l == 1:
            click.echo(f"{e.m}\t{e.n}\t{abs(e.alpha):.6e}\t{e.pair.chi:.6e}")


def _load_contrast(path) -> ContrastGrid:
    try:
        if str(path).endswith(".csv"):
            return fileio.contrast_from_csv(path)
        return fileio.load_contrast(path)
    except FileNotFoundError:
        _fail(EXIT_USER, f"contrast file not found: {path}")
    except (fileio.FormatError, ValueError) as exc:
        _fail(EXIT_DATA, f"bad contrast file {path}: {exc}")


@main.command()
@click.argument("contrast", type=click.Path())
@click.option("--k", type=float, default=16.0, show_default=True)
@click.option("--ninc", type=int, default=104, show_default=True)
@click.option("--nobs", type=int, default=104, show_default=True)
@click.option("--noise", type=float, default=0.0, show_default=True,
              help="relative noise level delta; > 0 appends a noisy copy")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True,
              help="output directory for FFM1 files")
def simulate(contrast, k, ninc, nobs, noise, seed, out):
    """Simulate full and Born far fields of a contrast; report rel(k)."""
    q = _load_contrast(contrast)
    if not np.any(q.values):
        _fail(EXIT_DATA, "zero contrast: far field vanishes, rel(k) undefined")
    if k <= 0 or ninc < 1 or nobs < 1 or noise < 0:
        _fail(EXIT_USER, "invalid simulation parameters")
    inc = DirectionSet.uniform(ninc)
    obs = DirectionSet.uniform(nobs)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        ff = forward.full_far_field(q, k, inc, obs)
    except forward.SolverConvergenceError as exc:
        _fail(EXIT_NUMERIC, f"forward solver did not converge: {exc}")
    ffb = forward.born_far_field(q, k, inc, obs)
    fileio.save_far_field(ff, out / "full.ffm")
    fileio.save_far_field(ffb, out / "born.ffm")
    relk = np.linalg.norm(ff.entries - ffb.entries) / np.linalg.norm(ff.entries)
    click.echo(f"rel(k) = {relk:.6f}")
    if noise > 0:
        ff_noisy = pipeline.add_noise(ff, noise, seed)
        fileio.save_far_field(ff_noisy, out / "noisy.ffm")
        click.echo(f"wrote noisy copy at delta = {noise}")
    click.echo(f"wrote {out}/full.ffm and {out}/born.ffm")


@main.command()
@click.argument("farfield", type=click.Path())
@click.option("--n1", type=int, default=104, show_default=True)
@click.option("--n2", type=int, default=56, show_default=True)
@click.option("--aperture", type=float, default=None,
              help="half-angle of a limited aperture in (0, pi)")
@click.option("--out", type=click.Path(), required=True)
def process(farfield, n1, n2, aperture, out):
    """Process a far-field matrix into disk-supported data (PRC1)."""
    try:
        ff = fileio.load_far_field(farfield)
    except FileNotFoundError:
        _fail(EXIT_USER, f"far-field file not found: {farfield}")
    except (fileio.FormatError, ValueError) as exc:
        _fail(EXIT_DATA, f"bad far-field file {farfield}: {exc}")
    grid = PolarGrid(n1, n2)
    if aperture is not None:
        if not 0 < aperture < np.pi:
            _fail(EXIT_USER, "aperture must lie in (0, pi)")
        ff = pipeline.apply_limited_aperture(ff, aperture)
        u = pipeline.process_limited(ff, grid, aperture)
    else:
        u = pipeline.process_far_field(ff, grid)
    fileio.save_processed(u, out)
    plots.save_processed_heatmaps(u, Path(out).with_suffix(""))
    click.echo(f"wrote {out}")


def _run_inversion(u, b, eta, alpha_reg, grid_n):
    try:
        if alpha_reg is not None:
            cart, beta, coeffs = inverse.invert_sl(u, b, alpha_reg, grid_n=grid_n)
            click.echo(f"beta(alpha_reg) = {beta:.6e}")
        else:
            eta = eta if eta is not None else inverse.default_eta(b)
            cart, coeffs = inverse.invert_eta(u, b, eta, grid_n=grid_n)
            click.echo(f"eta = {eta:.6e}, retained {len(coeffs.entries)} entries")
    except inverse.EmptyCutoffError as exc:
        _fail(EXIT_NUMERIC, f"empty spectral cutoff: {exc}")
    except inverse.BandwidthMismatchError as exc:
        _fail(EXIT_DATA, str(exc))
    return cart, coeffs


@main.command()
@click.argument("processed", type=click.Path())
@click.option("--basis", "basis_path", type=click.Path(), required=True)
@click.option("--eta", type=float, default=None,
              help="prolate cutoff; default 1e-2 * max|alpha|")
@click.option("--alpha-reg", type=float, default=None,
              help="use the Sturm-Liouville cutoff chi < 1/alpha_reg instead")
@click.option("--grid", "grid_n", type=int, default=64, show_default=True)
@click.option("--out", type=click.Path(), required=True,
              help="output stem; writes <out>.cgr, <out>.png, <out>_coeffs.csv")
def invert(processed, basis_path, eta, alpha_reg, grid_n, out):
    """Low-rank inversion of processed data in the PSWF basis."""
    try:
        u = fileio.load_processed(processed)
    except FileNotFoundError:
        _fail(EXIT_USER, f"processed file not found: {processed}")
    except (fileio.FormatError, ValueError) as exc:
        _fail(EXIT_DATA, f"bad processed file {processed}: {exc}")
    b = _load_basis_file(basis_path, u.grid.N1, u.grid.N2)
    cart, coeffs = _run_inversion(u, b, eta, alpha_reg, grid_n)
    out = Path(out)
    fileio.save_contrast(cart, out.with_suffix(".cgr"))
    coeffs.to_csv(out.parent / (out.stem + "_coeffs.csv"))
    plots.save_contrast_heatmap(cart, out.with_suffix(".png"), "reconstruction")
    click.echo(f"wrote {out.with_suffix('.cgr')}")


@main.command()
@click.option("--recipe", type=click.Choice(["disks", "gaussians", "pswf5", "pswf10"]),
              default="disks", show_default=True)
@click.option("--count", type=int, default=2000, show_default=True,
              help="desk-scale default; full scale is 20000+")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--k", type=float, default=16.0, show_default=True)
@click.option("--grid", "grid_n", type=int, default=64, show_default=True)
@click.option("--ninc", type=int, default=104, show_default=True)
@click.option("--nobs", type=int, default=104, show_default=True)
@click.option("--n1", type=int, default=104, show_default=True)
@click.option("--n2", type=int, default=56, show_default=True)
@click.option("--noise", type=float, default=0.0, show_default=True)
@click.option("--basis", "basis_path", type=click.Path(), default=None,
              help="basis cache (required for pswf recipes)")
@click.option("--out", type=click.Path(), required=True)
def dataset(recipe, count, seed, k, grid_n, ninc, nobs, n1, n2, noise,
            basis_path, out):
    """Generate a contrast dataset and build its sample archive."""
    if count < 1:
        _fail(EXIT_USER, "count must be >= 1")
    if recipe == "disks":
        contrasts = datasets.gen_disks(seed, count, N=grid_n)
    elif recipe == "gaussians":
        contrasts = datasets.gen_gaussians(seed, count, N=grid_n)
    else:
        if basis_path is None:
            _fail(EXIT_USER, f"recipe {recipe} requires --basis")
        b = _load_basis_file(basis_path, n1, n2)
        max_index = 5 if recipe == "pswf5" else 10
        try:
            contrasts = datasets.gen_pswf_combo(seed, count, max_index, b, N=grid_n)
        except ValueError as exc:
            _fail(EXIT_USER, str(exc))
    grid = PolarGrid(n1, n2)
    inc = DirectionSet.uniform(ninc)
    obs = DirectionSet.uniform(nobs)
    try:
        manifest = datasets.build_samples(
            contrasts, k, inc, obs, grid, out, recipe=recipe, seed=seed,
            delta=noise, noise_seed=seed)
    except forward.SolverConvergenceError as exc:
        _fail(EXIT_NUMERIC, str(exc))
    rels = [r["rel_k"] for r in manifest["records"]]
    click.echo(f"wrote {manifest['count']} samples to {out}; "
               f"rel(k) median {np.median(rels):.3f}")


@main.command(name="eval")
@click.argument("archive", type=click.Path())
@click.option("--basis", "basis_path", type=click.Path(), required=True)
@click.option("--eta", type=float, default=None)
@click.option("--alpha-reg", type=float, default=None)
@click.option("--use-born/--use-full", default=False, show_default=True,
              help="invert the Born-processed data instead of the full data")
@click.option("--figures", type=int, default=3, show_default=True,
              help="number of samples to render as PNG heatmaps")
@click.option("--out", type=click.Path(), required=True,
              help="output directory for the CSV summary and figures")
def eval_cmd(archive, basis_path, eta, alpha_reg, use_born, figures, out):
    """Invert every sample of an archive; write per-sample errors as CSV."""
    try:
        manifest = datasets.load_manifest(archive)
        datasets.verify_manifest(archive)
    except FileNotFoundError as exc:
        _fail(EXIT_USER, str(exc))
    except (ValueError, KeyError) as exc:
        _fail(EXIT_DATA, f"bad archive: {exc}")
    b = _load_basis_file(basis_path, manifest["N1"], manifest["N2"])
    root = Path(archive)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    rows = ["id,rel_k,error"]
    key = "processed_born" if use_born else "processed"
    for i, rec in enumerate(manifest["records"]):
        u = fileio.load_processed(root / rec["files"][key])
        q_true = fileio.load_contrast(root / rec["files"]["contrast"])
        cart, coeffs = _run_inversion(u, b, eta, alpha_reg, q_true.N)
        err = (np.linalg.norm(cart.values - q_true.values)
               / np.linalg.norm(q_true.values))
        rows.append(f"{rec['id']},{rec['rel_k']:.6f},{err:.6f}")
        if i < figures:
            plots.save_contrast_heatmap(q_true, out / f"{rec['id']}_true.png",
                                        "contrast")
            plots.save_contrast_heatmap(cart, out / f"{rec['id']}_recon.png",
                                        "reconstruction")
            plots.save_processed_heatmaps(u, out / f"{rec['id']}_data")
    (out / "summary.csv").write_text("\n".join(rows) + "\n")
    click.echo(f"wrote {out}/summary.csv ({len(rows) - 1} rows)")


@main.command()
@click.argument("corrected", type=click.Path())
@click.option("--reference", type=click.Path(), required=True,
              help="the PRC1 input that was corrected; shapes must agree")
@click.option("--basis", "basis_path", type=click.Path(), required=True)
@click.option("--eta", type=float, default=None)
@click.option("--alpha-reg", type=float, default=None)
@click.option("--grid", "grid_n", type=int, default=64, show_default=True)
@click.option("--identity", is_flag=True,
              help="skip validation of a separate corrected file and invert "
                   "the reference itself (plain low-rank pipeline)")
@click.option("--out", type=click.Path(), required=True)
def correct(corrected, reference, basis_path, eta, alpha_reg, grid_n,
            identity, out):
    """Invert externally corrected data after validating it against its
    reference input; the correction network itself runs elsewhere."""
    try:
        ref = fileio.load_processed(reference)
    except FileNotFoundError:
        _fail(EXIT_USER, f"reference file not found: {reference}")
    except (fileio.FormatError, ValueError) as exc:
        _fail(EXIT_DATA, f"bad reference file {reference}: {exc}")
    if identity:
        u = ref
    else:
        try:
            u = fileio.load_processed(corrected)
        except FileNotFoundError:
            _fail(EXIT_USER, f"corrected file not found: {corrected}")
        except (fileio.FormatError, ValueError) as exc:
            _fail(EXIT_DATA, f"bad corrected file {corrected}: {exc}")
        if u.values.shape != ref.values.shape:
            _fail(EXIT_DATA, "corrected data shape does not match reference")
        if abs(u.c - ref.c) > 1e-12 * max(1.0, ref.c):
            _fail(EXIT_DATA, "corrected data bandwidth does not match reference")
    b = _load_basis_file(basis_path, u.grid.N1, u.grid.N2)
    cart, coeffs = _run_inversion(u, b, eta, alpha_reg, grid_n)
    out = Path(out)
    fileio.save_contrast(cart, out.with_suffix(".cgr"))
    plots.save_contrast_heatmap(cart, out.with_suffix(".png"), "reconstruction")
    click.echo(f"wrote {out.with_suffix('.cgr')}")


if __name__ == "__main__":
    main()
