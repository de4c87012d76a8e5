"""Run orchestration: single seeded runs, Monte Carlo batches, run filters,
parameter sweeps and CSV batch export."""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor

from .config import ConfigError, TownConfig
from .engine import Simulation
from .metrics import CSV_SCHEMA_VERSION, RunMetrics
from .policy import ScenarioSchedule

FILTERS = ("none", "extant300", "eliminated100")


def run_simulation(cfg: TownConfig, schedule: ScenarioSchedule, seed: int,
                   days: int, fiscal: str = "zero-deficit") -> RunMetrics:
    """One deterministic seeded run."""
    return Simulation(cfg, schedule, fiscal=fiscal, seed=seed, days=days).run()


def passes_filter(run: RunMetrics, name: str) -> bool:
    if name == "none":
        return True
    if name == "extant300":
        if run.days < 100:
            raise ValueError("extant300 needs runs of at least 100 days")
        return run.extant_at(100)
    if name == "eliminated100":
        return run.eliminated_day is not None and run.eliminated_day <= 100
    raise ValueError(f"unknown filter: {name} (choose from {FILTERS})")


def _run_one(args):
    cfg, schedule, seed, days, fiscal = args
    return run_simulation(cfg, schedule, seed, days, fiscal)


def run_monte_carlo(cfg: TownConfig, schedule: ScenarioSchedule,
                    seed_start: int, n_seeds: int, days: int,
                    fiscal: str = "zero-deficit", run_filter: str = "none",
                    jobs: int | None = None):
    """Monte Carlo batch over consecutive seeds.

    Runs execute in parallel across processes; results always come back
    ordered by seed, so the batch is reproducible for any worker count.
    Returns (kept runs, dropped runs).
    """
    if n_seeds < 1:
        raise ValueError("need at least one seed")
    if run_filter not in FILTERS:
        raise ValueError(f"unknown filter: {run_filter}")
    seeds = list(range(seed_start, seed_start + n_seeds))
    tasks = [(cfg, schedule, s, days, fiscal) for s in seeds]
    if jobs is None:
        jobs = max(1, min(os.cpu_count() or 1, n_seeds))
    if jobs == 1 or n_seeds == 1:
        runs = [_run_one(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_one, tasks))
    kept = [r for r in runs if passes_filter(r, run_filter)]
    dropped = [r for r in runs if not passes_filter(r, run_filter)]
    return kept, dropped


SWEEPABLE = {
    "beta": ("epidemic", "infection_probability"),
    "profit_buffer": ("economy", "profit_rate_buffer"),
    "splash": ("economy", "leisure_splash_fraction"),
    "commercial_multiplier": ("leisure", "commercial_multiplier"),
    "attractiveness_mean": ("leisure", "attractiveness_mean"),
    "preference_sigma": ("leisure", "weight_sigma_fraction"),
    "population": (None, "population"),
}


def sweep_config(cfg: TownConfig, parameter: str, value) -> TownConfig:
    if parameter not in SWEEPABLE:
        raise ConfigError(f"parameter '{parameter}' is not sweepable; "
                          f"choose from {sorted(SWEEPABLE)}")
    section, field = SWEEPABLE[parameter]
    if section is None:
        return cfg.replace(**{field: int(value)})
    group = getattr(cfg, section)
    return cfg.replace(**{section: dataclasses.replace(group, **{field: float(value)})})


def sweep(cfg: TownConfig, parameter: str, values, schedule: ScenarioSchedule,
          seed_start: int, n_seeds: int, days: int,
          fiscal: str = "zero-deficit", run_filter: str = "none",
          jobs: int | None = None) -> dict:
    """One Monte Carlo batch per parameter value, sharing the seed range."""
    out = {}
    for v in values:
        swept = sweep_config(cfg, parameter, v)
        kept, dropped = run_monte_carlo(swept, schedule, seed_start, n_seeds,
                                        days, fiscal, run_filter, jobs)
        out[v] = (kept, dropped)
    return out


# ---------------------------------------------------------------------------
# batch export
# ---------------------------------------------------------------------------

def config_to_doc(cfg: TownConfig) -> dict:
    """Round-trippable plain-dict form of a TownConfig."""
    def plain(x):
        if dataclasses.is_dataclass(x):
            return {f.name: plain(getattr(x, f.name)) for f in dataclasses.fields(x)}
        if isinstance(x, tuple):
            return [plain(v) for v in x]
        if isinstance(x, dict):
            return {k: plain(v) for k, v in x.items()}
        return x

    doc = {"schema_version": cfg.schema_version,
           "population": cfg.population,
           "scale": cfg.scale,
           "initial_infected_fraction": cfg.initial_infected_fraction,
           "demography": {"age_group_shares": list(cfg.age_group_shares)},
           "medical": plain(cfg.medical),
           "epidemic": plain(cfg.epidemic),
           "economy": plain(cfg.economy),
           "locations": plain(cfg.locations),
           "households": plain(cfg.households),
           "leisure": plain(cfg.leisure)}
    doc["professions"] = {}
    from .config import PROFESSION_NAMES
    for i, name in enumerate(PROFESSION_NAMES):
        doc["professions"][name] = {
            "share": cfg.professions.shares[i],
            "unemployment": cfg.professions.unemployment[i],
            "gross_wage": cfg.professions.gross_wages[i],
            "net_wage": cfg.professions.net_wages[i]}
    return doc


def export_batch(runs: list[RunMetrics], dropped: list[RunMetrics], out_dir,
                 schedule: ScenarioSchedule, run_filter: str = "none",
                 tag: str | None = None) -> str:
    """Write one CSV per run plus a batch manifest; returns the manifest path.

    Exports are deterministic: identical runs produce byte-identical files.
    """
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for r in sorted(runs + dropped, key=lambda r: r.seed):
        name = f"run_{r.scenario}_{r.fiscal}_{r.seed}.csv"
        if tag is not None:
            name = f"run_{tag}_{r.scenario}_{r.fiscal}_{r.seed}.csv"
        r.to_csv(os.path.join(out_dir, name))
        entries.append({
            "seed": r.seed, "file": name, "scenario": r.scenario,
            "fiscal": r.fiscal, "days": r.days,
            "eliminated_day": r.eliminated_day,
            "kept": any(r is k for k in runs),
            "total_infections": r.total_infections,
            "total_detected": r.total_detected,
            "baseline_output": r.baseline_output,
            "tag": tag,
        })
    manifest = {
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "scenario": schedule.name,
        "policy_days": schedule.activation_days(),
        "lift_all_day": schedule.lift_all_day,
        "filter": run_filter,
        "runs": entries,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path
