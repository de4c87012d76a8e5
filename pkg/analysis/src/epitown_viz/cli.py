"""Plot CLI over exported batches: band | compare | panel."""

from __future__ import annotations

import os

import click

from .loading import (DEFAULT_DARK_FIGURE, EMPIRICAL_KINDS, BatchError,
                      load_batch, load_empirical)
from . import plots


@click.group()
def main():
    """Render figures from exported simulation batches."""


def _load(batch_dir):
    try:
        return load_batch(batch_dir)
    except BatchError as exc:
        raise click.ClickException(str(exc))


@main.command()
@click.option("--batch", "batch_dir", required=True, type=click.Path(exists=True))
@click.option("--metric", default="cum_deaths", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--quantiles", default="10,50,90", show_default=True)
@click.option("--empirical", type=click.Path(exists=True), default=None,
              help="date,value CSV overlay.")
@click.option("--empirical-kind", type=click.Choice(EMPIRICAL_KINDS),
              default="reported-deaths", show_default=True)
@click.option("--dark-figure", type=float, default=DEFAULT_DARK_FIGURE,
              show_default=True, help="Undetected-to-total multiplier for "
              "nowcast overlays.")
@click.option("--start-date", default=None,
              help="Date of day 0 for the overlay (default: first row).")
def band(batch_dir, metric, out_path, quantiles, empirical, empirical_kind,
         dark_figure, start_date):
    """Quantile band of one metric, optionally against observed data."""
    batch = _load(batch_dir)
    qs = [int(q) / 100 for q in quantiles.split(",")]
    emp = None
    if empirical:
        try:
            emp = load_empirical(empirical, empirical_kind, dark_figure,
                                 start=start_date)
        except BatchError as exc:
            raise click.ClickException(str(exc))
    try:
        path = plots.band_plot(batch, metric, out_path, quantiles=tuple(qs),
                               empirical=emp, empirical_label=empirical_kind)
    except BatchError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote {path}")


@main.command()
@click.option("--batch", "batch_dirs", required=True, multiple=True,
              type=click.Path(exists=True), help="Repeat per scenario batch.")
@click.option("--metric", default="output", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--split-day", type=int, default=None,
              help="Render before/after panels split at this day.")
def compare(batch_dirs, metric, out_path, split_day):
    """Overlaid scenario medians with quantile bands."""
    batches = [_load(d) for d in batch_dirs]
    try:
        path = plots.compare_plot(batches, metric, out_path,
                                  split_day=split_day)
    except BatchError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote {path}")


@main.command()
@click.option("--sweep-dir", required=True, type=click.Path(exists=True),
              help="Directory of per-value batch subdirectories.")
@click.option("--metric", default="cum_deaths", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--day", type=int, default=None)
def panel(sweep_dir, metric, out_path, day):
    """Sensitivity panel over a parameter sweep's batches."""
    subdirs = sorted(
        os.path.join(sweep_dir, d) for d in os.listdir(sweep_dir)
        if os.path.isdir(os.path.join(sweep_dir, d))
        and os.path.exists(os.path.join(sweep_dir, d, "manifest.json")))
    if not subdirs:
        raise click.ClickException(f"no batch subdirectories in {sweep_dir}")
    batches = [_load(d) for d in subdirs]
    try:
        path = plots.sweep_panel(batches, metric, out_path, day=day)
    except BatchError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote {path}")


if __name__ == "__main__":
    main(prog_name="epitown-viz")
