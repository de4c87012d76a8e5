"""Quantile-band and scenario-comparison figures from simulation batches.

Rendering is deterministic: SVG hash salts are pinned and timestamp metadata
suppressed, so regenerating a figure from the same batch reproduces the same
bytes.
"""

from __future__ import annotations

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from statsmodels.nonparametric.smoothers_lowess import lowess

from .loading import Batch, BatchError

matplotlib.rcParams["svg.hashsalt"] = "epitown-viz"

DEFAULT_QUANTILES = (0.10, 0.50, 0.90)
LOESS_FRAC = 0.15

_COLORS = ("#2E6FB7", "#C44E52", "#55A868", "#8172B2", "#CCB974", "#64B5CD")


def _save(fig, path) -> str:
    path = str(path)
    if path.endswith(".svg"):
        fig.savefig(path, metadata={"Date": None})
    elif path.endswith(".pdf"):
        fig.savefig(path, metadata={"CreationDate": None})
    else:
        fig.savefig(path, metadata={"Software": "epitown-viz"})
    plt.close(fig)
    return path


def _quantile_frame(batch: Batch, metric: str, quantiles):
    wide = batch.series(metric)
    if wide.shape[1] < 2:
        raise BatchError("band plots need at least two runs")
    qs = wide.quantile(list(quantiles), axis=1).T
    qs.columns = [f"q{int(100 * q)}" for q in quantiles]
    return qs


def _mark_policy_days(ax, batch: Batch) -> None:
    seen = {}
    for name, day in sorted(batch.policy_days.items(), key=lambda kv: kv[1]):
        seen.setdefault(day, []).append(name)
    for day, names in seen.items():
        ax.axvline(day, color="0.55", lw=0.8, ls=":")
    if batch.lift_day is not None:
        ax.axvline(batch.lift_day, color="0.3", lw=1.0, ls="--")


def band_plot(batch: Batch, metric: str, out_path,
              quantiles=DEFAULT_QUANTILES, empirical=None,
              empirical_label="observed", title=None, mark_policies=True) -> str:
    """Per-day quantile band with a LOESS-smoothed median.

    ``empirical`` is an optional day/value frame drawn on top (already
    dark-figure adjusted where applicable).
    """
    qs = _quantile_frame(batch, metric, quantiles)
    lo, mid, hi = qs.columns[0], qs.columns[len(quantiles) // 2], qs.columns[-1]
    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    ax.fill_between(qs.index, qs[lo], qs[hi], alpha=0.25, color=_COLORS[0],
                    lw=0, label=f"{lo}-{hi}")
    ax.plot(qs.index, qs[mid], color=_COLORS[0], lw=1.2, alpha=0.7,
            label="median")
    smooth = lowess(qs[mid].to_numpy(), qs.index.to_numpy(),
                    frac=LOESS_FRAC, return_sorted=True)
    ax.plot(smooth[:, 0], smooth[:, 1], color=_COLORS[1], lw=1.8,
            label="median (loess)")
    if empirical is not None:
        ax.plot(empirical["day"], empirical["value"], color="0.15", lw=1.4,
                ls="--", label=empirical_label)
    if mark_policies:
        _mark_policy_days(ax, batch)
    ax.set_xlabel("day")
    ax.set_ylabel(metric)
    ax.set_title(title or f"{metric} - {batch.label}")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return _save(fig, out_path)


def compare_plot(batches: list[Batch], metric: str, out_path,
                 quantiles=DEFAULT_QUANTILES, split_day=None, title=None) -> str:
    """Overlaid median curves with bands for several batches.

    ``split_day`` renders two side-by-side panels (before/after), the layout
    used for the thwarted-activities comparison.
    """
    if len(batches) < 2:
        raise BatchError("compare plots need at least two batches")
    labels = [b.label for b in batches]
    if len(set(labels)) != len(labels):
        raise BatchError(f"batches must carry distinct labels, got {labels}")
    if split_day is None:
        fig, axes = plt.subplots(figsize=(7.2, 4.2))
        axes = [axes]
        ranges = [None]
    else:
        fig, axes = plt.subplots(1, 2, figsize=(10.0, 4.2), sharey=False)
        ranges = [(0, split_day), (split_day, None)]
    for k, (ax, rng) in enumerate(zip(axes, ranges)):
        for i, b in enumerate(batches):
            qs = _quantile_frame(b, metric, quantiles)
            if rng is not None:
                lo_d, hi_d = rng
                qs = qs.loc[(qs.index >= lo_d)
                            & (qs.index <= (hi_d if hi_d else qs.index.max()))]
            lo, mid, hi = qs.columns[0], qs.columns[len(quantiles) // 2], qs.columns[-1]
            c = _COLORS[i % len(_COLORS)]
            ax.fill_between(qs.index, qs[lo], qs[hi], alpha=0.18, color=c, lw=0)
            ax.plot(qs.index, qs[mid], color=c, lw=1.6,
                    label=b.label if k == 0 else None)
        if k == 0:
            _mark_policy_days(ax, batches[0])
        ax.set_xlabel("day")
        ax.set_ylabel(metric)
    axes[0].legend(frameon=False, fontsize=8)
    fig.suptitle(title or metric)
    fig.tight_layout()
    return _save(fig, out_path)


def sweep_panel(batches: list[Batch], metric: str, out_path, day=None,
                title=None) -> str:
    """Sensitivity panel: one curve per parameter value (batch tag)."""
    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    for i, b in enumerate(batches):
        wide = b.series(metric)
        mean = wide.mean(axis=1)
        ax.plot(mean.index, mean.to_numpy(), color=_COLORS[i % len(_COLORS)],
                lw=1.6, label=b.label)
    if day is not None:
        ax.axvline(day, color="0.55", lw=0.8, ls=":")
    ax.set_xlabel("day")
    ax.set_ylabel(f"mean {metric}")
    ax.set_title(title or f"{metric} sensitivity")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return _save(fig, out_path)
