"""Minimal deterministic SVG bar charts (no plotting dependency)."""

from __future__ import annotations

PALETTE = (
    "#4C78A8",
    "#F58518",
    "#54A24B",
    "#E45756",
    "#72B7B2",
    "#B279A2",
    "#FF9DA6",
    "#9D755D",
)

_MARGIN_LEFT = 56
_MARGIN_RIGHT = 24
_MARGIN_TOP = 48
_MARGIN_BOTTOM = 72
_BAR_W = 16
_BAR_GAP = 2
_GROUP_GAP = 28
_PLOT_H = 220


def _esc(text: str) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def svg_grouped_bars(
    title: str,
    group_labels: list[str],
    series_labels: list[str],
    values: list[list[float]],
) -> str:
    """Grouped bar chart: one group per row, one bar per series entry.

    values[g][s] is the bar height for series s in group g; the y axis
    spans [0, max]. Output is a complete, deterministic SVG document.
    """
    groups, series = len(group_labels), len(series_labels)
    if groups == 0 or series == 0:
        raise ValueError("chart needs at least one group and one series")
    if len(values) != groups or any(len(row) != series for row in values):
        raise ValueError("values must be shaped (groups, series)")
    vmax = max(max(row) for row in values)
    if vmax <= 0:
        vmax = 1.0
    group_w = series * (_BAR_W + _BAR_GAP) + _GROUP_GAP
    width = _MARGIN_LEFT + groups * group_w + _MARGIN_RIGHT
    height = _MARGIN_TOP + _PLOT_H + _MARGIN_BOTTOM
    base_y = _MARGIN_TOP + _PLOT_H
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" font-family="sans-serif" font-size="11">',
        f'<text x="{_MARGIN_LEFT}" y="20" font-size="14">{_esc(title)}</text>',
        f'<line x1="{_MARGIN_LEFT}" y1="{base_y}" x2="{width - _MARGIN_RIGHT}" '
        f'y2="{base_y}" stroke="#333"/>',
        f'<line x1="{_MARGIN_LEFT}" y1="{_MARGIN_TOP}" x2="{_MARGIN_LEFT}" '
        f'y2="{base_y}" stroke="#333"/>',
    ]
    for frac in (0.0, 0.5, 1.0):
        y = base_y - frac * _PLOT_H
        out.append(
            f'<text x="{_MARGIN_LEFT - 6}" y="{y + 4:.1f}" '
            f'text-anchor="end">{frac * vmax:.2f}</text>'
        )
        if frac > 0:
            out.append(
                f'<line x1="{_MARGIN_LEFT}" y1="{y:.1f}" '
                f'x2="{width - _MARGIN_RIGHT}" y2="{y:.1f}" '
                f'stroke="#ddd" stroke-dasharray="3,3"/>'
            )
    for g, (glabel, row) in enumerate(zip(group_labels, values)):
        gx = _MARGIN_LEFT + g * group_w + _GROUP_GAP / 2
        for s, v in enumerate(row):
            h = _PLOT_H * max(float(v), 0.0) / vmax
            x = gx + s * (_BAR_W + _BAR_GAP)
            color = PALETTE[s % len(PALETTE)]
            out.append(
                f'<rect x="{x:.1f}" y="{base_y - h:.1f}" width="{_BAR_W}" '
                f'height="{h:.1f}" fill="{color}"/>'
            )
        cx = gx + (series * (_BAR_W + _BAR_GAP)) / 2
        out.append(
            f'<text x="{cx:.1f}" y="{base_y + 14}" text-anchor="middle" '
            f'transform="rotate(30 {cx:.1f} {base_y + 14})">{_esc(glabel)}</text>'
        )
    legend_y = 30
    lx = _MARGIN_LEFT
    for s, slabel in enumerate(series_labels):
        color = PALETTE[s % len(PALETTE)]
        out.append(
            f'<rect x="{lx}" y="{legend_y}" width="10" height="10" fill="{color}"/>'
        )
        out.append(
            f'<text x="{lx + 14}" y="{legend_y + 9}">{_esc(slabel)}</text>'
        )
        lx += 14 + 8 * max(len(str(slabel)), 3)
    out.append("</svg>")
    return "\n".join(out) + "\n"
