import json
import subprocess
import sys

import numpy as np
import pytest

COLUMNS = ("day", "new_infections", "new_detected", "cum_infections",
           "cum_deaths", "hospital_beds_occupied", "icu_occupied", "output",
           "cum_output_lost_pct", "unemployment_private", "thwarted",
           "government_funds", "leisure_savings_total",
           "inf_household", "inf_retirement_home", "inf_factory",
           "inf_office", "inf_school", "inf_hospital", "inf_commercial",
           "inf_noncommercial")


def write_batch(path, scenario="baseline", seeds=(0, 1, 2), days=20,
                fiscal="fixed", tag=None, rng_seed=5, policy_days=None):
    """Write a schema-conformant synthetic batch for plot tests."""
    path.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(rng_seed)
    entries = []
    for seed in seeds:
        rows = []
        cum_inf = cum_dead = 0.0
        for d in range(days + 1):
            new_inf = float(rng.poisson(2 + d))
            cum_inf += new_inf
            cum_dead += float(rng.random() < 0.2)
            row = {
                "day": d, "new_infections": new_inf,
                "new_detected": round(new_inf / 3),
                "cum_infections": cum_inf, "cum_deaths": cum_dead,
                "hospital_beds_occupied": float(rng.integers(0, 5)),
                "icu_occupied": float(rng.integers(0, 2)),
                "output": 100.0 + rng.normal(0, 2),
                "cum_output_lost_pct": max(0.0, rng.normal(1 + seed, 0.1)),
                "unemployment_private": 8.0 + rng.normal(0, 0.3),
                "thwarted": float(rng.integers(50, 150)),
                "government_funds": 1000 - 5 * d,
                "leisure_savings_total": 400 + rng.normal(0, 10),
            }
            for k in COLUMNS[13:]:
                row[k] = float(rng.integers(0, 3))
            rows.append(row)
        name = f"run_{scenario}_{fiscal}_{seed}.csv"
        with open(path / name, "w") as fh:
            fh.write(",".join(COLUMNS) + "\n")
            for row in rows:
                fh.write(",".join(str(row[c]) for c in COLUMNS) + "\n")
        entries.append({"seed": seed, "file": name, "scenario": scenario,
                        "fiscal": fiscal, "days": days, "eliminated_day": None,
                        "kept": True, "total_infections": int(cum_inf),
                        "total_detected": int(cum_inf / 3),
                        "baseline_output": 100.0, "tag": tag})
    manifest = {"csv_schema_version": 1, "scenario": scenario,
                "policy_days": policy_days or {"case_isolation": 0,
                                               "schools_closed": 14},
                "lift_all_day": None, "filter": "none", "runs": entries}
    with open(path / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)
    return path


@pytest.fixture()
def synth_batch(tmp_path):
    return write_batch(tmp_path / "batch")


@pytest.fixture(scope="session")
def tiny_config_path(tmp_path_factory):
    """A small-town config file for CLI-driven runs."""
    import yaml
    from importlib.resources import files
    path = tmp_path_factory.mktemp("cfg") / "town.yaml"
    doc = yaml.safe_load(
        files("epitown.data").joinpath("default_town.yaml").read_text())
    doc["population"] = 3000
    doc["initial_infected_fraction"] = 0.004
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh)
    return path


@pytest.fixture(scope="session")
def real_batch(tmp_path_factory, tiny_config_path):
    """A genuine batch produced through the simulator's CLI."""
    out = tmp_path_factory.mktemp("real") / "batch"
    cmd = [sys.executable, "-m", "epitown.cli", "mc",
           "--config", str(tiny_config_path),
           "--scenario", "baseline", "--seeds", "3", "--days", "21",
           "--out", str(out), "--jobs", "1"]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out
