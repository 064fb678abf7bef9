"""Matplotlib figure rendering for the CLI report paths.

Every CLI verb that emits tabular results can also render the same data as a
PNG next to it (``--plot out.png``).  Figures are deliberately plain: bars
for breakdowns and ratios, scatter plus fitted line for the regressions.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _finish(fig, path: str):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_breakdown_figure(per_trace: dict[str, list[tuple[str, float]]], path: str):
    """Stacked per-category energy bars, one bar per trace."""
    traces = list(per_trace)
    categories = [name for name, _ in per_trace[traces[0]] if name != "total"]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(traces) + 2.5), 4.0))
    bottoms = [0.0] * len(traces)
    for cat in categories:
        values = [dict(per_trace[t]).get(cat, 0.0) for t in traces]
        ax.bar(traces, values, bottom=bottoms, label=cat)
        bottoms = [b + v for b, v in zip(bottoms, values)]
    ax.set_ylabel("energy (nJ)")
    ax.legend(fontsize=8)
    ax.tick_params(axis="x", rotation=20)
    _finish(fig, path)


def save_compare_figure(rows: list[tuple[str, str, float, float, float]], path: str):
    """Grouped bars of average power per (trace, model)."""
    traces = list(dict.fromkeys(r[0] for r in rows))
    models = list(dict.fromkeys(r[1] for r in rows))
    power = {(r[0], r[1]): r[3] for r in rows}
    width = 0.8 / len(models)
    fig, ax = plt.subplots(figsize=(max(4.0, 1.5 * len(traces) + 2.5), 4.0))
    for mi, model in enumerate(models):
        xs = [ti + mi * width for ti in range(len(traces))]
        ax.bar(xs, [power.get((t, model), 0.0) for t in traces],
               width=width, label=model)
    ax.set_xticks([ti + 0.4 - width / 2 for ti in range(len(traces))])
    ax.set_xticklabels(traces, rotation=20)
    ax.set_ylabel("average power (mW)")
    ax.legend(fontsize=8)
    _finish(fig, path)


def save_study_figure(rows: list[tuple[str, float, float]], path: str):
    """Encoding-study ratios normalized to the baseline scheme."""
    schemes = [r[0] for r in rows]
    ratios = [r[2] for r in rows]
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.bar(schemes, ratios)
    ax.axhline(1.0, color="black", linewidth=0.8, linestyle="--")
    ax.set_ylabel("energy vs. baseline")
    _finish(fig, path)


def save_extrapolation_figure(
    points: list[tuple[float, float]],
    target: float,
    value: float,
    path: str,
):
    """IDD-vs-frequency points, the fitted line, and the extrapolated value."""
    import numpy as np

    pts = np.asarray(points, dtype=float)
    coef = np.polyfit(pts[:, 0], pts[:, 1], 1)
    xs = np.linspace(min(target, pts[:, 0].min()), pts[:, 0].max(), 50)
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.plot(xs, np.polyval(coef, xs), color="tab:gray", linewidth=1)
    ax.plot(pts[:, 0], pts[:, 1], "o", label="datasheet points")
    ax.plot([target], [value], "s", color="tab:red", label=f"{target:g} MT/s")
    ax.set_xlabel("channel frequency (MT/s)")
    ax.set_ylabel("current (mA)")
    ax.legend(fontsize=8)
    _finish(fig, path)


def save_fit_figure(samples, params, path: str):
    """Calibration samples against the fitted line at zero toggles."""
    ones = [s[0] for s in samples]
    measured = [s[2] for s in samples]
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.plot(ones, measured, ".", alpha=0.6, label="samples")
    span = sorted({0, max(ones)})
    ax.plot(
        span,
        [params.i_zero_ma + params.d_one_ma * x for x in span],
        color="tab:red",
        label="fit (zero toggles)",
    )
    ax.set_xlabel("ones per line")
    ax.set_ylabel("current (mA)")
    ax.legend(fontsize=8)
    _finish(fig, path)
