"""Deterministic SVG charts for evaluation reports.

Plain text SVG, no plotting dependency: reruns are byte-identical. Inputs
are parsed report.json dicts (one per method); methods are drawn in input
order with a fixed palette.
"""

from __future__ import annotations

WIDTH, HEIGHT = 640, 480
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 24, 36, 56
PLOT_W = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
PLOT_H = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
GOLD = "#b8860b"


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _x(unit: float) -> float:
    return MARGIN_LEFT + unit * PLOT_W


def _y(unit: float) -> float:
    return MARGIN_TOP + (1.0 - unit) * PLOT_H


def _polyline(points: list[tuple[float, float]], color: str, dash: str | None = None) -> str:
    coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline fill="none" stroke="{color}" stroke-width="1.5"'
            f'{dash_attr} points="{coords}" />')


def _text(x: float, y: float, s: str, anchor: str = "middle", size: int = 12) -> str:
    return (f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" '
            f'font-size="{size}" text-anchor="{anchor}">{s}</text>')


def _frame(title: str, x_label: str, y_label: str, y_max: float = 1.0,
           y_tick_step: float = 0.1) -> list[str]:
    parts = [
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{PLOT_W}" height="{PLOT_H}" '
        'fill="none" stroke="#444444" stroke-width="1" />',
        _text(WIDTH / 2, 20, title, size=14),
        _text(WIDTH / 2, HEIGHT - 12, x_label),
        (f'<text x="16" y="{_fmt(HEIGHT / 2)}" font-family="sans-serif" font-size="12" '
         f'text-anchor="middle" transform="rotate(-90 16 {_fmt(HEIGHT / 2)})">{y_label}</text>'),
    ]
    ticks = 10
    for i in range(ticks + 1):
        u = i / ticks
        parts.append(f'<line x1="{_fmt(_x(u))}" y1="{_fmt(_y(0) + 4)}" '
                     f'x2="{_fmt(_x(u))}" y2="{_fmt(_y(0))}" stroke="#444444" />')
        parts.append(_text(_x(u), _y(0) + 18, _fmt(u), size=10))
        value = u * y_max
        parts.append(f'<line x1="{_fmt(_x(0) - 4)}" y1="{_fmt(_y(u))}" '
                     f'x2="{_fmt(_x(0))}" y2="{_fmt(_y(u))}" stroke="#444444" />')
        parts.append(_text(_x(0) - 8, _y(u) + 4, _fmt(value), anchor="end", size=10))
    return parts


def _legend(labels: list[str]) -> list[str]:
    parts = []
    for i, label in enumerate(labels):
        y = MARGIN_TOP + 16 + 18 * i
        x = MARGIN_LEFT + 12
        color = PALETTE[i % len(PALETTE)]
        parts.append(f'<line x1="{x}" y1="{y}" x2="{x + 24}" y2="{y}" '
                     f'stroke="{color}" stroke-width="2" />')
        parts.append(_text(x + 30, y + 4, label, anchor="start", size=11))
    return parts


def _document(parts: list[str]) -> str:
    body = "\n".join(parts)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">\n{body}\n</svg>\n')


def render_calibration(reports: list[dict]) -> str:
    """Per-method calibration polylines; undefined bins are gaps."""
    parts = _frame("Calibration", "confidence bin center", "actual positive fraction")
    parts.append(_polyline([(_x(0), _y(0)), (_x(1), _y(1))], GOLD, dash="6,4"))
    parts.append(_text(_x(0.9), _y(0.93), "y = x", size=10))
    for i, report in enumerate(reports):
        color = PALETTE[i % len(PALETTE)]
        segment: list[tuple[float, float]] = []
        for bin_ in report["calibration"]:
            if bin_["fraction"] is None:
                if len(segment) >= 2:
                    parts.append(_polyline(segment, color))
                elif len(segment) == 1:
                    x, y = segment[0]
                    parts.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="2.5" fill="{color}" />')
                segment = []
            else:
                center = (bin_["lower"] + bin_["upper"]) / 2.0
                segment.append((_x(center), _y(bin_["fraction"])))
        if len(segment) >= 2:
            parts.append(_polyline(segment, color))
        elif len(segment) == 1:
            x, y = segment[0]
            parts.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="2.5" fill="{color}" />')
    parts += _legend([r["method"] for r in reports])
    return _document(parts)


def render_roc(reports: list[dict]) -> str:
    parts = _frame("ROC", "false positive rate", "true positive rate")
    parts.append(_polyline([(_x(0), _y(0)), (_x(1), _y(1))], "#999999", dash="6,4"))
    for i, report in enumerate(reports):
        roc = report["roc"]
        points = [(_x(f), _y(t)) for f, t in zip(roc["fpr"], roc["tpr"])]
        parts.append(_polyline(points, PALETTE[i % len(PALETTE)]))
    parts += _legend([f'{r["method"]} (AUC {r["auc"]:.3f})' for r in reports])
    return _document(parts)


def render_gains(reports: list[dict]) -> str:
    """Grouped bars: mean IoU gain per default-IoU decade, per method."""
    peak = max((g["mean_gain"] for r in reports for g in r["gain_bins"]), default=0.0)
    y_max = max(0.1, peak * 1.25)
    parts = _frame("Average IoU gain from image-specific thresholding",
                   "default IoU range", "mean IoU gain", y_max=y_max)
    n_methods = max(len(reports), 1)
    group_w = PLOT_W / 10.0
    bar_w = group_w * 0.8 / n_methods
    for i, report in enumerate(reports):
        color = PALETTE[i % len(PALETTE)]
        for gain in report["gain_bins"]:
            decade = int(round(gain["lower"] * 10))
            x0 = MARGIN_LEFT + decade * group_w + group_w * 0.1 + i * bar_w
            height = (gain["mean_gain"] / y_max) * PLOT_H
            y0 = MARGIN_TOP + PLOT_H - height
            parts.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(bar_w)}" '
                         f'height="{_fmt(height)}" fill="{color}" fill-opacity="0.85" />')
    parts += _legend([r["method"] for r in reports])
    return _document(parts)
