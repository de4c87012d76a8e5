"""Per-run metric collection and delimited export.

One row per elapsed day: row 0 is the setup snapshot, row ``d`` aggregates
the three phases of the d-th simulated day (so a 100-day run exports 101
rows and "day 100" is the state after period 300).
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .synth import LOC_KIND_NAMES, N_LOC_KINDS

CSV_SCHEMA_VERSION = 1

COLUMNS = (
    "day", "new_infections", "new_detected", "cum_infections", "cum_deaths",
    "hospital_beds_occupied", "icu_occupied", "output", "cum_output_lost_pct",
    "unemployment_private", "thwarted", "government_funds",
    "leisure_savings_total",
) + tuple(f"inf_{k}" for k in LOC_KIND_NAMES)


@dataclass
class RunMetrics:
    seed: int
    scenario: str
    fiscal: str
    days: int
    rows: np.ndarray          # shape (days+1, len(COLUMNS))
    eliminated_day: int | None
    baseline_output: float
    total_infections: int
    total_detected: int

    @property
    def cum_deaths(self) -> np.ndarray:
        return self.rows[:, COLUMNS.index("cum_deaths")]

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, COLUMNS.index(name)]

    def final(self, name: str) -> float:
        return float(self.rows[-1, COLUMNS.index(name)])

    def at_day(self, day: int, name: str) -> float:
        return float(self.rows[day, COLUMNS.index(name)])

    def extant_at(self, day: int) -> bool:
        """True if the virus had not been eliminated by the end of ``day``."""
        return self.eliminated_day is None or self.eliminated_day > day

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv_text())

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(COLUMNS) + "\n")
        for row in self.rows:
            cells = [f"{int(row[0])}"]
            for v in row[1:]:
                if v == int(v):
                    cells.append(str(int(v)))
                else:
                    cells.append(repr(float(v)))
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


class MetricsCollector:
    """Accumulates per-phase events into day rows during a run."""

    def __init__(self, days: int):
        self.rows = np.zeros((days + 1, len(COLUMNS)))
        self.rows[:, 0] = np.arange(days + 1)
        self.cum_deaths = 0
        self.cum_infections = 0
        self.cum_detected = 0
        self.cum_output = 0.0
        self.workdays = 0
        self.eliminated_day: int | None = None
        self._reset_day()

    def _reset_day(self):
        self.day_infections = 0
        self.day_detected = 0
        self.day_output = 0.0
        self.day_thwarts = 0
        self.day_kind_counts = np.zeros(N_LOC_KINDS)

    def on_death(self, t: int) -> None:
        self.cum_deaths += 1

    def add_exposures(self, n_new: int, n_detected: int, kind_counts) -> None:
        self.day_infections += n_new
        self.day_detected += n_detected
        self.cum_infections += n_new
        self.cum_detected += n_detected
        self.day_kind_counts += kind_counts

    def add_output(self, y: float) -> None:
        self.day_output += y
        self.cum_output += y

    def add_thwarts(self, k: int) -> None:
        self.day_thwarts += k

    def close_day(self, d: int, town, baseline_output: float,
                  day_index: int | None) -> None:
        """Write row ``d``; ``day_index`` is the calendar index (None: setup)."""
        from . import economy
        if day_index is not None and day_index % 7 < 5:
            self.workdays += 1
        expected = baseline_output * self.workdays
        lost = 0.0
        if expected > 0:
            lost = 100.0 * (expected - self.cum_output) / expected
        row = [d, self.day_infections, self.day_detected, self.cum_infections,
               self.cum_deaths, town.beds_used, town.icu_used, self.day_output,
               lost, 100.0 * economy.unemployment_rate_private(town),
               self.day_thwarts, town.gov.savings, float(np.sum(town.m_l))]
        row.extend(self.day_kind_counts)
        self.rows[d] = row
        if self.eliminated_day is None and town.infected_count() == 0:
            self.eliminated_day = d
        self._reset_day()

    def finalize(self, seed, scenario, fiscal, days, baseline_output) -> RunMetrics:
        return RunMetrics(
            seed=seed, scenario=scenario, fiscal=fiscal, days=days,
            rows=self.rows, eliminated_day=self.eliminated_day,
            baseline_output=baseline_output,
            total_infections=self.cum_infections,
            total_detected=self.cum_detected)
