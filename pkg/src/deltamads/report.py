"""Convergence-curve rendering: deterministic SVG and matplotlib PNG."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

WIDTH, HEIGHT = 720, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 30, 30, 50

PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


def _finite(values):
    return [v for v in values if math.isfinite(v)]


def _ranges(series_set):
    xmax = max((len(s) for s in series_set), default=1)
    ys = [v for s in series_set for v in _finite(s)]
    if not ys:
        ys = [0.0, 1.0]
    ymin, ymax = min(ys), max(ys)
    if ymin == ymax:
        ymin, ymax = ymin - 0.5, ymax + 0.5
    return max(xmax, 1), ymin, ymax


def render_svg(series_set: list[list[float]], labels: list[str]) -> str:
    """Self-contained SVG with one best-so-far polyline per labeled series.

    Deterministic: identical inputs yield byte-identical output.
    """
    if not series_set:
        raise ValueError("need at least one series")
    if len(labels) != len(series_set):
        raise ValueError("labels must match series")
    xmax, ymin, ymax = _ranges(series_set)

    def sx(i):
        return MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) * i / xmax

    def sy(v):
        frac = (v - ymin) / (ymax - ymin)
        return HEIGHT - MARGIN_B - (HEIGHT - MARGIN_T - MARGIN_B) * frac

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN_L}" y1="{HEIGHT - MARGIN_B}" x2="{WIDTH - MARGIN_R}" '
        f'y2="{HEIGHT - MARGIN_B}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
        f'y2="{HEIGHT - MARGIN_B}" stroke="black"/>',
    ]
    for t in range(5):
        xv = xmax * t / 4
        yv = ymin + (ymax - ymin) * t / 4
        out.append(
            f'<text x="{sx(xv):.2f}" y="{HEIGHT - MARGIN_B + 18}" '
            f'font-size="11" text-anchor="middle">{xv:.4g}</text>'
        )
        out.append(
            f'<text x="{MARGIN_L - 6}" y="{sy(yv) + 4:.2f}" '
            f'font-size="11" text-anchor="end">{yv:.4g}</text>'
        )
    out.append(
        f'<text x="{(MARGIN_L + WIDTH - MARGIN_R) / 2:.2f}" y="{HEIGHT - 12}" '
        f'font-size="13" text-anchor="middle">evaluations</text>'
    )
    out.append(
        f'<text x="16" y="{(MARGIN_T + HEIGHT - MARGIN_B) / 2:.2f}" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 16 '
        f'{(MARGIN_T + HEIGHT - MARGIN_B) / 2:.2f})">best objective</text>'
    )
    for si, (series, label) in enumerate(zip(series_set, labels)):
        color = PALETTE[si % len(PALETTE)]
        pts = [
            f"{sx(i + 1):.2f},{sy(v):.2f}"
            for i, v in enumerate(series)
            if math.isfinite(v)
        ]
        if pts:
            out.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                f'points="{" ".join(pts)}"/>'
            )
        ly = MARGIN_T + 16 + 16 * si
        out.append(
            f'<line x1="{WIDTH - MARGIN_R - 150}" y1="{ly}" '
            f'x2="{WIDTH - MARGIN_R - 120}" y2="{ly}" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{WIDTH - MARGIN_R - 114}" y="{ly + 4}" '
            f'font-size="12">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_png(series_set: list[list[float]], labels: list[str], path: str) -> None:
    """Matplotlib rendering of the same curves, written to `path`."""
    fig, ax = plt.subplots(figsize=(7.2, 4.8), dpi=100)
    for si, (series, label) in enumerate(zip(series_set, labels)):
        xs = [i + 1 for i, v in enumerate(series) if math.isfinite(v)]
        ys = _finite(series)
        ax.plot(xs, ys, label=label, color=PALETTE[si % len(PALETTE)], lw=1.5)
    ax.set_xlabel("evaluations")
    ax.set_ylabel("best objective")
    ax.legend(loc="upper right", fontsize=9)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
