"""Figure rendering for sweep grids.

The heatmap contract: cell intensity is the mean of log10(MSE_corr) mapped
linearly to grayscale with black at -10 and below (perfect reconstruction)
and white at 0 and above (failure).  Overlay lines are drawn on top with a
legend.  Rendering is a pure function of (CSV, spec): pixel content is
stable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvio import aggregate, read_rows

PLOT_KINDS = ("alpha_rho_heatmap", "transition_profile", "iterations_profile", "sigma_p_heatmap")

GRAY_BLACK_AT = -10.0   # log10 MSE at (and below) which cells render black
GRAY_WHITE_AT = 0.0


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    kind: str
    out_path: str
    overlays: tuple = field(default_factory=tuple)   # ("alpha_min",) or (label, value) pairs
    success_threshold: float = 1e-8
    gray_black_at: float = GRAY_BLACK_AT
    gray_white_at: float = GRAY_WHITE_AT

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r}, expected one of {PLOT_KINDS}")


def gray_level(mean_log10_mse, black_at=GRAY_BLACK_AT, white_at=GRAY_WHITE_AT):
    """Map mean log10 MSE to [0, 1] grayscale (0 = black = perfect)."""
    span = white_at - black_at
    return float(np.clip((mean_log10_mse - black_at) / span, 0.0, 1.0))


def _unique_sorted(values):
    return sorted(set(values))


def _cell_grid(cells, x_attr, y_attr, value_fn):
    xs = _unique_sorted(getattr(c, x_attr) for c in cells)
    ys = _unique_sorted(getattr(c, y_attr) for c in cells)
    grid = np.full((len(ys), len(xs)), np.nan)
    for c in cells:
        grid[ys.index(getattr(c, y_attr)), xs.index(getattr(c, x_attr))] = value_fn(c)
    if np.any(np.isnan(grid)):
        raise ValueError(f"grid over ({x_attr}, {y_attr}) has holes; not a full product grid")
    return np.asarray(xs), np.asarray(ys), grid


def _extent(xs, ys):
    def pad(v):
        step = (v[-1] - v[0]) / (len(v) - 1) if len(v) > 1 else max(abs(v[0]), 1.0) * 0.1
        return v[0] - step / 2.0, v[-1] + step / 2.0
    x0, x1 = pad(xs)
    y0, y1 = pad(ys)
    return (x0, x1, y0, y1)


def _alpha_rho_heatmap(cells, spec, ax):
    rhos, alphas, grid = _cell_grid(
        cells, "rho", "alpha",
        lambda c: gray_level(c.mean_log10_mse, spec.gray_black_at, spec.gray_white_at),
    )
    ax.imshow(
        grid, cmap="gray", vmin=0.0, vmax=1.0, origin="lower",
        extent=_extent(rhos, alphas), aspect="auto", interpolation="nearest",
    )
    P_values = {c.P for c in cells}
    for overlay in spec.overlays:
        if overlay == "alpha_min":
            if len(P_values) != 1:
                raise ValueError("alpha_min overlay needs a single P in the grid")
            P = next(iter(P_values))
            if P > 1:
                line_rho = np.linspace(rhos[0], rhos[-1], 200)
                ax.plot(line_rho, P * line_rho / (P - 1), "r-", lw=1.2,
                        label=f"alpha_min = {P}rho/{P - 1}")
        else:
            label, value = overlay
            ax.axhline(float(value), lw=1.2, ls="--", label=label)
    ax.set_xlabel("density rho")
    ax.set_ylabel("measurement rate alpha")
    ax.set_title("mean log10 corrected MSE (black = perfect)")
    if spec.overlays:
        ax.legend(loc="upper left", fontsize=8)
    return grid


def _sigma_p_heatmap(cells, spec, ax):
    sigmas, Ps, grid = _cell_grid(
        cells, "sigma2", "P",
        lambda c: gray_level(c.mean_log10_mse, spec.gray_black_at, spec.gray_white_at),
    )
    # sigma2 spans decades: plot on index axes with value tick labels
    ax.imshow(grid, cmap="gray", vmin=0.0, vmax=1.0, origin="lower",
              aspect="auto", interpolation="nearest")
    ax.set_xticks(range(len(sigmas)), [f"{s:g}" for s in sigmas], rotation=45, fontsize=8)
    ax.set_yticks(range(len(Ps)), [str(int(p)) for p in Ps])
    for overlay in spec.overlays:
        if overlay == "alpha_min":
            continue  # not meaningful on these axes
        label, value = overlay
        ax.axhline(float(value), lw=1.2, ls="--", label=label)
        ax.legend(loc="upper left", fontsize=8)
    ax.set_xlabel("gain variance sigma2")
    ax.set_ylabel("number of signals P")
    ax.set_title("mean log10 corrected MSE (black = perfect)")
    return grid


def _profiles(cells, spec, ax, value_fn, ylabel):
    Ns = _unique_sorted(c.N for c in cells)
    for N in Ns:
        members = sorted((c for c in cells if c.N == N), key=lambda c: c.alpha)
        xs = [c.alpha for c in members]
        ys = [value_fn(c) for c in members]
        ax.plot(xs, ys, "o-", ms=3, label=f"N = {N}")
    for overlay in spec.overlays:
        if overlay == "alpha_min":
            continue
        label, value = overlay
        ax.axvline(float(value), lw=1.2, ls="--", label=label)
    ax.set_xlabel("measurement rate alpha")
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    return None


def render_figure(spec):
    """Build the figure; returns (fig, ax, grid) where grid is the grayscale
    cell matrix for heatmap kinds (None for profiles)."""
    rows = read_rows(spec.csv_path)
    cells = aggregate(rows, spec.success_threshold)
    fig, ax = plt.subplots(figsize=(6.0, 4.5), dpi=120)
    if spec.kind == "alpha_rho_heatmap":
        grid = _alpha_rho_heatmap(cells, spec, ax)
    elif spec.kind == "sigma_p_heatmap":
        grid = _sigma_p_heatmap(cells, spec, ax)
    elif spec.kind == "transition_profile":
        grid = _profiles(cells, spec, ax, lambda c: c.mean_log10_mse, "mean log10 MSE_corr")
    else:
        grid = _profiles(
            cells, spec, ax,
            lambda c: c.mean_iterations_success, "mean iterations on success",
        )
    fig.tight_layout()
    return fig, ax, grid


def render(spec):
    """Render to spec.out_path; returns the grayscale grid for heatmaps."""
    fig, _, grid = render_figure(spec)
    try:
        fig.savefig(spec.out_path, metadata={"Software": "plotkit"})
    finally:
        plt.close(fig)
    return grid
