"""Self-contained SVG line plots: vertically stacked panels of polylines."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    color: str = COLORS[0]
    dotted: bool = False


@dataclass
class Panel:
    ylabel: str
    series: list = field(default_factory=list)


def _nice_ticks(lo, hi, n=5):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    return [first + i * step for i in range(int((hi - first) / step + 1e-9) + 1)]


def _segments(x, y):
    """Split at non-finite samples so crisis-truncated or sparse series draw cleanly."""
    ok = np.isfinite(x) & np.isfinite(y)
    seg = []
    for xi, yi, good in zip(x, y, ok):
        if good:
            seg.append((xi, yi))
        elif seg:
            yield seg
            seg = []
    if seg:
        yield seg


def render(panels: list[Panel], title: str = "", width: int = 900, panel_height: int = 220,
           xlabel: str = "t (years)") -> str:
    left, right, top, gap = 70, 150, 40 if title else 15, 45
    plot_w = width - left - right
    height = top + len(panels) * (panel_height + gap) + 10
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    if title:
        out.append(f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')

    for pi, panel in enumerate(panels):
        y0 = top + pi * (panel_height + gap)
        xs = np.concatenate([s.x for s in panel.series]) if panel.series else np.array([0.0, 1.0])
        ys = np.concatenate([s.y for s in panel.series]) if panel.series else np.array([0.0, 1.0])
        fin_x, fin_y = xs[np.isfinite(xs)], ys[np.isfinite(ys)]
        xlo, xhi = (float(fin_x.min()), float(fin_x.max())) if fin_x.size else (0.0, 1.0)
        ylo, yhi = (float(fin_y.min()), float(fin_y.max())) if fin_y.size else (0.0, 1.0)
        if xhi <= xlo:
            xhi = xlo + 1.0
        if yhi - ylo < 1e-12:
            ylo, yhi = ylo - 0.5 * max(abs(ylo), 1e-3), yhi + 0.5 * max(abs(yhi), 1e-3)
        pad = 0.05 * (yhi - ylo)
        ylo, yhi = ylo - pad, yhi + pad

        def sx(v):
            return left + (v - xlo) / (xhi - xlo) * plot_w

        def sy(v):
            return y0 + panel_height - (v - ylo) / (yhi - ylo) * panel_height

        out.append(f'<rect x="{left}" y="{y0}" width="{plot_w}" height="{panel_height}" '
                   f'fill="none" stroke="#444" stroke-width="1"/>')
        for tv in _nice_ticks(ylo, yhi):
            yy = sy(tv)
            out.append(f'<line x1="{left - 4}" y1="{yy:.2f}" x2="{left}" y2="{yy:.2f}" stroke="#444"/>')
            out.append(f'<text x="{left - 7}" y="{yy + 4:.2f}" text-anchor="end">{tv:.4g}</text>')
        for tv in _nice_ticks(xlo, xhi):
            xx = sx(tv)
            out.append(f'<line x1="{xx:.2f}" y1="{y0 + panel_height}" x2="{xx:.2f}" '
                       f'y2="{y0 + panel_height + 4}" stroke="#444"/>')
            out.append(f'<text x="{xx:.2f}" y="{y0 + panel_height + 16}" text-anchor="middle">{tv:.4g}</text>')
        out.append(f'<text x="18" y="{y0 + panel_height / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 18 {y0 + panel_height / 2})">{escape(panel.ylabel)}</text>')
        if pi == len(panels) - 1:
            out.append(f'<text x="{left + plot_w / 2}" y="{y0 + panel_height + 32}" '
                       f'text-anchor="middle">{escape(xlabel)}</text>')

        legend_y = y0 + 12
        for s in panel.series:
            dash = ' stroke-dasharray="2,3"' if s.dotted else ""
            for seg in _segments(np.asarray(s.x, float), np.asarray(s.y, float)):
                pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in seg)
                out.append(f'<polyline points="{pts}" fill="none" stroke="{s.color}" stroke-width="1.2"{dash}/>')
            if s.label:
                lx = left + plot_w + 10
                out.append(f'<line x1="{lx}" y1="{legend_y - 4}" x2="{lx + 18}" y2="{legend_y - 4}" '
                           f'stroke="{s.color}" stroke-width="1.5"{dash}/>')
                out.append(f'<text x="{lx + 24}" y="{legend_y}">{escape(s.label)}</text>')
                legend_y += 15
    out.append("</svg>")
    return "\n".join(out) + "\n"


def trajectory_svg(traj, title: str = "") -> str:
    """Shares panel on top (employment, wages share, profit share), then growth, then debt."""
    t = traj.times
    panels = [
        Panel("shares", [Series("employment", t, traj.employment, COLORS[0]),
                         Series("wages share", t, traj.wage_share, COLORS[1]),
                         Series("profit share", t, traj.profit_share, COLORS[2])]),
        Panel("growth", [Series("growth g", t, traj.growth, COLORS[3]),
                         Series("productivity growth", t, traj.alpha, COLORS[4], dotted=True)]),
        Panel("debt / output", [Series("debt d", t, traj.debt, COLORS[0]),
                                Series("target debt", t, traj.d_target, COLORS[1], dotted=True)]),
    ]
    return render(panels, title or f"{traj.termination}")


def ensemble_svg(summary, title: str = "") -> str:
    """Across-run means with dotted mean +/- one standard deviation envelopes."""
    t = summary.times

    def band(field_name, label, color):
        m, s = summary.mean[field_name], summary.std[field_name]
        return [Series(label, t, m, color), Series("", t, m + s, color, dotted=True),
                Series("", t, m - s, color, dotted=True)]

    panels = [
        Panel("shares", band("employment", "employment", COLORS[0]) + band("wage_share", "wages share", COLORS[1])
              + band("profit_share", "profit share", COLORS[2])),
        Panel("growth", band("growth", "growth g", COLORS[3])),
        Panel("debt / output", band("debt", "debt d", COLORS[0])),
    ]
    return render(panels, title or f"mean of {summary.n_runs} runs")
