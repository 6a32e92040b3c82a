"""Drawing figures from loaded traces.

Rendering is read-only over the CSVs and deterministic: the same input
bytes produce the same PNG bytes (the embedded software tag is pinned so
library version strings cannot leak into the file).
"""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .figspec import FigureSpec, FigureSpecError
from .traces import load_trace

PANEL_YLABEL = {
    "suboptimality": "f - f*",
    "grad_norm": "gradient norm",
    "stepsize": "stepsize",
}


def resolve_fstar(spec, traces):
    """The f* used by the suboptimality panel: the figure description's
    value when given, otherwise the best objective value seen across the
    inputs minus a relative margin that keeps every plotted gap positive."""
    if spec.f_star is not None:
        return spec.f_star
    values = [v for t in traces for v in t["f"] if math.isfinite(v)]
    if not values:
        raise FigureSpecError("no finite objective values in inputs; cannot place f*")
    best = min(values)
    return best - 1e-12 * (1.0 + abs(best))


def panel_series(columns, panel, f_star=None):
    """(x, y) arrays for one panel from one loaded trace.

    The stepsize series keeps only rows with a finite stepsize: the
    trailing record of every trace is the final iterate and carries no
    step. The suboptimality series needs f_star.
    """
    if panel == "suboptimality":
        if f_star is None:
            raise ValueError("suboptimality series needs f_star")
        return columns["iter"], columns["f"] - f_star
    if panel == "grad_norm":
        return columns["iter"], columns["grad_norm_l2"]
    if panel == "stepsize":
        mask = np.isfinite(columns["stepsize"])
        return columns["iter"][mask], columns["stepsize"][mask]
    raise ValueError(f"unknown panel {panel!r}")


def mean_std_band(series):
    """Mean and standard deviation across runs, aligned by iteration index
    and truncated to the shortest series."""
    if not series:
        raise ValueError("no series to aggregate")
    n = min(len(s) for s in series)
    stacked = np.vstack([np.asarray(s, dtype=float)[:n] for s in series])
    return stacked.mean(axis=0), stacked.std(axis=0)


def band_bounds(panel, series):
    """(x, mean, lower, upper) for a mean_std band; the stepsize band's
    lower edge is clipped at 0 since negative steps are not meaningful."""
    mean, std = mean_std_band(series)
    lower, upper = mean - std, mean + std
    if panel == "stepsize":
        lower = np.maximum(lower, 0.0)
    return np.arange(len(mean)), mean, lower, upper


def render(spec: FigureSpec) -> str:
    """Draw the figure described by ``spec`` and write it as a PNG.

    Returns the output path. Any trace that fails schema validation
    aborts the render with an error naming that file.
    """
    traces = [load_trace(entry.path) for entry in spec.inputs]
    f_star = resolve_fstar(spec, traces) if "suboptimality" in spec.panels else None

    n_panels = len(spec.panels)
    fig, axes = plt.subplots(1, n_panels, figsize=(4.5 * n_panels, 3.6), squeeze=False)
    for ax, panel in zip(axes[0], spec.panels):
        if spec.aggregate == "single":
            for entry, columns in zip(spec.inputs, traces):
                x, y = panel_series(columns, panel, f_star)
                ax.plot(x, y, linewidth=1.4, label=entry.label)
        else:
            runs = [panel_series(columns, panel, f_star)[1] for columns in traces]
            x, mean, lower, upper = band_bounds(panel, runs)
            ax.plot(x, mean, linewidth=1.6, color="C0", label="mean")
            ax.fill_between(x, lower, upper, color="C0", alpha=0.25,
                            linewidth=0, label="mean +/- std")
        ax.set_xlabel("iteration")
        ax.set_ylabel(PANEL_YLABEL[panel])
        if spec.log_x:
            ax.set_xscale("log")
        if spec.log_y:
            ax.set_yscale("log")
        ax.grid(True, alpha=0.3)
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=110, metadata={"Software": "plotkit"})
    plt.close(fig)
    return spec.output
