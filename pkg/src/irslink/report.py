"""Render sweep results to a figure file next to the CSV output.

One panel per curve value: mean rate versus the sweep coordinate for every
solver, with the upper bound dashed.  Purely additive reporting; the CSV
stays the canonical output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_AXIS_LABELS = {
    "bandwidth": "bandwidth (GHz)",
    "ue_angle": "UE angle (deg)",
    "irs_size": "IRS side count",
}

_STYLE = {
    "figure.figsize": (7.0, 4.4),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.fontsize": 8,
}


def _mean_rows(rows):
    picked = [r for r in rows if r.realization == "mean"]
    return picked if picked else list(rows)


def render_figure(rows, path, title: str = "") -> None:
    """Write a PNG summary of a result table produced by run_experiment."""
    rows = _mean_rows(rows)
    if not rows:
        raise ValueError("no rows to plot")
    curve_values = sorted({r.curve_value for r in rows},
                          key=lambda v: (v is None, v))
    solvers = list(dict.fromkeys(r.solver for r in rows))
    axis = rows[0].sweep_axis

    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(1, len(curve_values), squeeze=False, sharey=True)
        for panel, cv in enumerate(curve_values):
            ax = axes[0][panel]
            sub = [r for r in rows if r.curve_value == cv]
            for solver in solvers:
                pts = sorted((r.sweep_value, r.rate_bps) for r in sub
                             if r.solver == solver)
                if pts:
                    ax.plot([p[0] for p in pts], [p[1] / 1e9 for p in pts],
                            marker="o", markersize=3, label=solver)
            ub_pts = {}
            for r in sub:
                ub_pts.setdefault(r.sweep_value, r.ub_bps)
            xs = sorted(ub_pts)
            ax.plot(xs, [ub_pts[x] / 1e9 for x in xs], "k--", label="upper bound")
            ax.set_xlabel(_AXIS_LABELS.get(axis, axis))
            if cv is not None:
                ax.set_title(f"{rows[0].curve_param} = {cv:g}")
        axes[0][0].set_ylabel("rate (Gb/s)")
        axes[0][0].legend(loc="best")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
