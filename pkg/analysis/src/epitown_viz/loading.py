"""Load exported simulation batches into tidy long-format tables."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import pandas as pd

REQUIRED_COLUMNS = (
    "day", "new_infections", "new_detected", "cum_infections", "cum_deaths",
    "hospital_beds_occupied", "icu_occupied", "output", "cum_output_lost_pct",
    "unemployment_private", "thwarted", "government_funds",
    "leisure_savings_total",
)

EMPIRICAL_KINDS = ("nowcast-infections", "reported-deaths")
DEFAULT_DARK_FIGURE = 2.0


class BatchError(ValueError):
    """A batch directory is missing files or violates the CSV schema."""


@dataclass
class Batch:
    table: pd.DataFrame          # long: seed, scenario, fiscal, tag, day, metric, value
    manifest: dict

    @property
    def label(self) -> str:
        tags = {e.get("tag") for e in self.manifest["runs"] if e.get("tag")}
        if len(tags) == 1:
            return next(iter(tags))
        return self.manifest["scenario"]

    @property
    def policy_days(self) -> dict[str, int]:
        return self.manifest.get("policy_days", {})

    @property
    def lift_day(self):
        return self.manifest.get("lift_all_day")

    def metrics(self) -> list[str]:
        return sorted(self.table["metric"].unique())

    def series(self, metric: str) -> pd.DataFrame:
        """Wide per-day frame: one column per seed, for one metric."""
        if metric not in set(self.table["metric"]):
            raise BatchError(f"metric '{metric}' not in batch; available: "
                             + ", ".join(self.metrics()))
        sub = self.table[self.table["metric"] == metric]
        return sub.pivot_table(index="day", columns="seed", values="value")


def load_batch(batch_dir) -> Batch:
    """Read a manifest plus its per-run CSVs into one long table.

    Dropped (filtered-out) runs in the manifest are skipped.  Any missing
    required column raises :class:`BatchError` naming the column.
    """
    mpath = os.path.join(batch_dir, "manifest.json")
    if not os.path.exists(mpath):
        raise BatchError(f"no manifest.json in {batch_dir}")
    with open(mpath, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    frames = []
    for entry in manifest.get("runs", []):
        if not entry.get("kept", True):
            continue
        path = os.path.join(batch_dir, entry["file"])
        if not os.path.exists(path):
            raise BatchError(f"run file listed in manifest is missing: {entry['file']}")
        df = pd.read_csv(path)
        for col in REQUIRED_COLUMNS:
            if col not in df.columns:
                raise BatchError(f"{entry['file']}: missing column '{col}'")
        long = df.melt(id_vars=["day"], var_name="metric", value_name="value")
        long["seed"] = entry["seed"]
        long["scenario"] = entry["scenario"]
        long["fiscal"] = entry["fiscal"]
        long["tag"] = entry.get("tag") or ""
        frames.append(long)
    if not frames:
        raise BatchError(f"no kept runs in {batch_dir}")
    table = pd.concat(frames, ignore_index=True)
    return Batch(table=table, manifest=manifest)


def load_empirical(path, kind: str, dark_figure: float = DEFAULT_DARK_FIGURE,
                   start=None) -> pd.DataFrame:
    """Two-column date,value CSV of an observed series.

    Nowcast infection counts are scaled by the dark-figure multiplier so they
    compare against total (not just detected) simulated infections.  ``start``
    anchors day 0 (default: first date in the file).
    """
    if kind not in EMPIRICAL_KINDS:
        raise BatchError(f"unknown empirical kind '{kind}'; "
                         f"choose from {EMPIRICAL_KINDS}")
    df = pd.read_csv(path)
    if df.shape[1] < 2:
        raise BatchError("empirical file needs date,value columns")
    df = df.iloc[:, :2].copy()
    df.columns = ["date", "value"]
    df["date"] = pd.to_datetime(df["date"])
    if not df["date"].is_monotonic_increasing or df["date"].duplicated().any():
        raise BatchError("empirical dates must be strictly increasing")
    if (df["value"] < 0).any():
        raise BatchError("empirical values must be nonnegative")
    anchor = pd.to_datetime(start) if start else df["date"].iloc[0]
    df["day"] = (df["date"] - anchor).dt.days
    if kind == "nowcast-infections":
        df["value"] = df["value"] * dark_figure
    return df[["day", "value"]]
