"""Summary statistics over Monte Carlo batches, including Welch's t-test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps


@dataclass(frozen=True)
class WelchResult:
    t: float
    dof: float
    p: float


def welch_test(a, b) -> WelchResult:
    """Welch's unequal-variance t-test with Welch-Satterthwaite dof.

    Raises ValueError for samples of fewer than two values or when both
    samples have zero variance.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("welch_test needs at least two values per sample")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va == 0.0 and vb == 0.0:
        raise ValueError("welch_test undefined: both samples have zero variance")
    qa, qb = va / a.size, vb / b.size
    se = np.sqrt(qa + qb)
    t = (a.mean() - b.mean()) / se
    dof = (qa + qb) ** 2 / (qa ** 2 / (a.size - 1) + qb ** 2 / (b.size - 1))
    p = 2.0 * sps.t.sf(abs(t), dof)
    return WelchResult(t=float(t), dof=float(dof), p=float(p))


@dataclass
class ScenarioSummary:
    label: str
    n_runs: int
    n_before_filter: int
    deaths_mean: float
    deaths_sd: float | None
    output_lost_mean: float
    output_lost_sd: float | None


@dataclass
class SummaryStats:
    scenarios: dict[str, ScenarioSummary]
    comparisons: dict[tuple[str, str], dict[str, WelchResult | None]]
    notes: list[str]


def summarize(runs_by_scenario: dict[str, list], day: int | None = None,
              scale: int = 1000, before_filter: dict[str, int] | None = None) -> SummaryStats:
    """Means, SDs and pairwise Welch tests of deaths and output lost.

    ``day`` selects the evaluation row (defaults to each run's final day).
    Deaths are reported in thousands of represented persons.
    """
    notes: list[str] = []
    summaries: dict[str, ScenarioSummary] = {}
    samples: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for label, runs in runs_by_scenario.items():
        deaths, lost = [], []
        for r in runs:
            d = day if day is not None else r.days
            deaths.append(r.at_day(d, "cum_deaths") * scale / 1000.0)
            lost.append(r.at_day(d, "cum_output_lost_pct"))
        deaths = np.asarray(deaths)
        lost = np.asarray(lost)
        samples[label] = (deaths, lost)
        nb = (before_filter or {}).get(label, len(runs))
        if len(runs) == 0:
            summaries[label] = ScenarioSummary(label, 0, nb, float("nan"), None,
                                               float("nan"), None)
            notes.append(f"{label}: no runs after filtering")
            continue
        summaries[label] = ScenarioSummary(
            label, len(runs), nb,
            float(deaths.mean()), float(deaths.std(ddof=1)) if len(runs) > 1 else None,
            float(lost.mean()), float(lost.std(ddof=1)) if len(runs) > 1 else None)

    comparisons = {}
    labels = [lb for lb in runs_by_scenario if len(runs_by_scenario[lb]) >= 2]
    for i, la in enumerate(labels):
        for lb in labels[i + 1:]:
            pair: dict[str, WelchResult | None] = {}
            for metric, k in (("deaths", 0), ("output_lost", 1)):
                try:
                    pair[metric] = welch_test(samples[la][k], samples[lb][k])
                except ValueError as exc:
                    pair[metric] = None
                    notes.append(f"welch {la} vs {lb} ({metric}) omitted: {exc}")
            comparisons[(la, lb)] = pair
    return SummaryStats(scenarios=summaries, comparisons=comparisons, notes=notes)


def format_summary(s: SummaryStats) -> str:
    lines = []
    for sc in s.scenarios.values():
        sd_d = f" ({sc.deaths_sd:.3f})" if sc.deaths_sd is not None else ""
        sd_o = f" ({sc.output_lost_sd:.2f})" if sc.output_lost_sd is not None else ""
        lines.append(f"{sc.label}: runs {sc.n_runs}/{sc.n_before_filter}  "
                     f"deaths[k] {sc.deaths_mean:.3f}{sd_d}  "
                     f"output lost % {sc.output_lost_mean:.2f}{sd_o}")
    for (la, lb), pair in s.comparisons.items():
        for metric, res in pair.items():
            if res is None:
                lines.append(f"{la} vs {lb} [{metric}]: test omitted")
            else:
                lines.append(f"{la} vs {lb} [{metric}]: t={res.t:.3f} "
                             f"dof={res.dof:.1f} p={res.p:.4g}")
    lines.extend(s.notes)
    return "\n".join(lines)
