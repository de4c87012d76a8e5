"""Command-line interface: run | mc | sweep | summarize."""

from __future__ import annotations

import json
import os

import click

from .config import ConfigError, default_config, load_config
from .harness import (FILTERS, SWEEPABLE, export_batch, run_monte_carlo,
                      sweep)
from .policy import PRESETS, scenario_schedule
from .stats import format_summary, summarize


def _load_cfg(path):
    try:
        return default_config() if path is None else load_config(path)
    except ConfigError as exc:
        raise click.ClickException(f"invalid configuration: {exc}")


def _load_schedule(name):
    try:
        return scenario_schedule(name)
    except ConfigError as exc:
        raise click.ClickException(str(exc))


common = [
    click.option("--config", "config_path", type=click.Path(exists=True),
                 default=None, help="Town configuration YAML (default: packaged)."),
    click.option("--scenario", default="baseline",
                 help=f"Preset ({', '.join(PRESETS)}) or a schedule YAML path."),
    click.option("--fiscal", type=click.Choice(["zero-deficit", "fixed"]),
                 default="zero-deficit", show_default=True),
    click.option("--days", type=int, default=100, show_default=True),
    click.option("--out", "out_dir", type=click.Path(), default="out",
                 show_default=True, help="Output directory."),
]


def add_options(opts):
    def wrap(fn):
        for opt in reversed(opts):
            fn = opt(fn)
        return fn
    return wrap


@click.group()
def main():
    """Epidemic + economy town simulator."""


@main.command()
@add_options(common)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--debug-events", is_flag=True,
              help="Also dump the exposure log as line-delimited JSON.")
def run(config_path, scenario, fiscal, days, out_dir, seed, debug_events):
    """One deterministic seeded run, exported as CSV."""
    from epitown.engine import Simulation
    cfg = _load_cfg(config_path)
    schedule = _load_schedule(scenario)
    event_log = [] if debug_events else None
    sim = Simulation(cfg, schedule, fiscal=fiscal, seed=seed, days=days,
                     event_log=event_log)
    metrics = sim.run()
    path = export_batch([metrics], [], out_dir, schedule)
    if debug_events:
        epath = os.path.join(out_dir, f"events_{seed}.jsonl")
        with open(epath, "w", encoding="utf-8") as fh:
            for ev in event_log:
                fh.write(json.dumps(ev) + "\n")
        click.echo(f"wrote {epath} ({len(event_log)} exposures)")
    deaths = metrics.final("cum_deaths")
    click.echo(f"seed {seed}: deaths {deaths:.0f}, "
               f"output lost {metrics.final('cum_output_lost_pct'):.2f} %, "
               f"eliminated day {metrics.eliminated_day}")
    click.echo(f"wrote {path}")


@main.command()
@add_options(common)
@click.option("--seed-start", type=int, default=0, show_default=True)
@click.option("--seeds", "n_seeds", type=int, default=50, show_default=True)
@click.option("--filter", "run_filter", type=click.Choice(FILTERS),
              default="none", show_default=True)
@click.option("--jobs", type=int, default=None,
              help="Worker processes (default: CPU count).")
def mc(config_path, scenario, fiscal, days, out_dir, seed_start, n_seeds,
       run_filter, jobs):
    """Monte Carlo batch over consecutive seeds."""
    cfg = _load_cfg(config_path)
    schedule = _load_schedule(scenario)
    kept, dropped = run_monte_carlo(cfg, schedule, seed_start, n_seeds, days,
                                    fiscal, run_filter, jobs)
    if not kept:
        click.echo("warning: no runs pass the filter", err=True)
    path = export_batch(kept, dropped, out_dir, schedule, run_filter)
    click.echo(f"{len(kept)}/{len(kept) + len(dropped)} runs kept "
               f"(filter {run_filter}); wrote {path}")
    if kept:
        s = summarize({schedule.name: kept}, scale=cfg.scale)
        click.echo(format_summary(s))


@main.command(name="sweep")
@add_options(common)
@click.option("--parameter", required=True,
              type=click.Choice(sorted(SWEEPABLE)))
@click.option("--values", required=True,
              help="Comma-separated parameter values.")
@click.option("--seed-start", type=int, default=0, show_default=True)
@click.option("--seeds", "n_seeds", type=int, default=20, show_default=True)
@click.option("--filter", "run_filter", type=click.Choice(FILTERS),
              default="none", show_default=True)
@click.option("--jobs", type=int, default=None)
def sweep_cmd(config_path, scenario, fiscal, days, out_dir, parameter, values,
              seed_start, n_seeds, run_filter, jobs):
    """One batch per parameter value over a shared seed range."""
    cfg = _load_cfg(config_path)
    schedule = _load_schedule(scenario)
    try:
        vals = [float(v) for v in values.split(",")]
    except ValueError:
        raise click.ClickException(f"cannot parse values: {values}")
    try:
        results = sweep(cfg, parameter, vals, schedule, seed_start, n_seeds,
                        days, fiscal, run_filter, jobs)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    for v, (kept, dropped) in results.items():
        tag = f"{parameter}={v:g}"
        sub = os.path.join(out_dir, f"{parameter}_{v:g}")
        export_batch(kept, dropped, sub, schedule, run_filter, tag=tag)
        if kept:
            s = summarize({tag: kept}, scale=cfg.scale)
            click.echo(format_summary(s))
        else:
            click.echo(f"{tag}: no runs kept")
    click.echo(f"wrote sweep batches under {out_dir}")


@main.command(name="summarize")
@click.argument("manifests", nargs=-1, required=True,
                type=click.Path(exists=True))
@click.option("--day", type=int, default=None,
              help="Evaluation day (default: each run's final day).")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def summarize_cmd(manifests, day, as_json):
    """Summary statistics and Welch tests across saved batches."""
    import numpy as np

    from .metrics import RunMetrics

    runs_by_label: dict[str, list] = {}
    before: dict[str, int] = {}
    for mpath in manifests:
        with open(mpath, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        base = os.path.dirname(mpath)
        label = manifest["scenario"]
        for entry in manifest["runs"]:
            if entry.get("tag"):
                label = entry["tag"]
            before[label] = before.get(label, 0) + 1
            if not entry["kept"]:
                continue
            rows = np.loadtxt(os.path.join(base, entry["file"]),
                              delimiter=",", skiprows=1)
            rm = RunMetrics(seed=entry["seed"], scenario=entry["scenario"],
                            fiscal=entry["fiscal"], days=entry["days"],
                            rows=np.atleast_2d(rows),
                            eliminated_day=entry["eliminated_day"],
                            baseline_output=entry["baseline_output"],
                            total_infections=entry["total_infections"],
                            total_detected=entry["total_detected"])
            runs_by_label.setdefault(label, []).append(rm)
    if not runs_by_label:
        raise click.ClickException("no kept runs in the given manifests")
    s = summarize(runs_by_label, day=day, before_filter=before)
    if as_json:
        out = {
            "scenarios": {k: vars(v) for k, v in s.scenarios.items()},
            "comparisons": {f"{a}|{b}": {m: (vars(r) if r else None)
                                         for m, r in pair.items()}
                            for (a, b), pair in s.comparisons.items()},
            "notes": s.notes,
        }
        click.echo(json.dumps(out, indent=1))
    else:
        click.echo(format_summary(s))


if __name__ == "__main__":
    main(prog_name="epitown")
