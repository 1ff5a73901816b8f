"""Deterministic SVG line plots of optimality gap against cost.

The y axis is log10 of the f-gap; gaps at or below ``GAP_FLOOR`` are
clamped to it. Output bytes depend only on the input traces.
"""

from __future__ import annotations

import math
from pathlib import Path

from .trace import read_trace_csv

PLOT_AXES = ("grad_evals", "comm_rounds")
GAP_FLOOR = 1e-16
WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 130, 20, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _f(v: float) -> str:
    return f"{v:.2f}"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def render_svg(traces: dict, axis: str) -> str:
    """Render ``{label: trace}`` as an SVG document (log f-gap vs. ``axis``)."""
    if axis not in PLOT_AXES:
        raise ValueError(f"unknown axis {axis!r}; expected one of {PLOT_AXES}")
    if not traces:
        raise ValueError("nothing to plot: no traces given")
    series = {}
    for label, trace in traces.items():
        if not trace:
            raise ValueError(f"trace {label!r} is empty")
        pts = [
            (float(getattr(r, axis)), math.log10(max(r.f_gap, GAP_FLOOR)))
            for r in trace
            if math.isfinite(r.f_gap)
        ]
        if not pts:
            raise ValueError(f"trace {label!r} has no finite optimality gaps")
        series[label] = pts

    xs = [p[0] for pts in series.values() for p in pts]
    ys = [p[1] for pts in series.values() for p in pts]
    x_max = max(max(xs), 1.0)
    y_lo, y_hi = math.floor(min(ys)), math.ceil(max(ys))
    if y_hi == y_lo:
        y_hi += 1
    pw, ph = WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + pw * x / x_max

    def sy(y):
        return MARGIN_T + ph * (y_hi - y) / (y_hi - y_lo)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    step = max(1, (y_hi - y_lo) // 8)
    for e in range(y_lo, y_hi + 1, step):
        y = sy(e)
        out.append(f'<line x1="{MARGIN_L - 4}" y1="{_f(y)}" x2="{MARGIN_L}" y2="{_f(y)}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{_f(y + 4)}" font-size="11" text-anchor="end">1e{e}</text>')
    for k in range(5):
        xv = x_max * k / 4
        x = sx(xv)
        out.append(f'<line x1="{_f(x)}" y1="{MARGIN_T + ph}" x2="{_f(x)}" y2="{MARGIN_T + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{_f(x)}" y="{MARGIN_T + ph + 18}" font-size="11" text-anchor="middle">{xv:g}</text>')
    out.append(f'<text x="{MARGIN_L + pw / 2:.2f}" y="{HEIGHT - 10}" font-size="12" text-anchor="middle">{axis}</text>')
    out.append(f'<text x="14" y="{MARGIN_T + ph / 2:.2f}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {MARGIN_T + ph / 2:.2f})">f-gap</text>')

    for idx, label in enumerate(sorted(series)):
        color = PALETTE[idx % len(PALETTE)]
        pts = " ".join(f"{_f(sx(x))},{_f(sy(y))}" for x, y in series[label])
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = MARGIN_T + 16 * (idx + 1)
        lx = WIDTH - MARGIN_R + 10
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}" font-size="11">{_escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(trace_files, axis: str, out_path) -> Path:
    """Read trace CSVs (labelled by file stem) and write one SVG."""
    files = sorted(Path(p) for p in trace_files)
    if not files:
        raise ValueError("no trace files to plot")
    traces = {f.stem: read_trace_csv(f) for f in files}
    out_path = Path(out_path)
    out_path.write_text(render_svg(traces, axis))
    return out_path


def plot_directory(directory, axis: str, out_path=None) -> Path:
    """Plot every ``*.csv`` trace in ``directory`` except sweep summaries."""
    directory = Path(directory)
    files = [p for p in sorted(directory.glob("*.csv")) if p.name != "summary.csv"]
    if not files:
        raise ValueError(f"no trace files in {directory}")
    return emit_plot(files, axis, out_path or directory / f"fgap_vs_{axis}.svg")
