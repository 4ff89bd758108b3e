"""Deterministic SVG rendering of lineup grids.

Output is plain SVG 1.1 with data-* attributes carrying the lineup
metadata (id, m, design, hypothesis, n, grid, panel pixel origins) so a
client can lay hit regions over panels without re-deriving geometry.
Coordinates are formatted to fixed precision, so identical lineups
render byte-identical documents.
"""

from __future__ import annotations

from .geometry import QQPanelGeometry
from .lineup import Lineup

PANEL_SIZE = 150
PANEL_GAP = 10
MARGIN = 12
DATA_PAD = 0.04

_POINT_STYLE = 'r="2" fill="#30445f"'
_LINE_STYLE = 'stroke="#b0402f" stroke-width="1.2" fill="none"'
_BAND_STYLE = 'fill="#c9d7e8" fill-opacity="0.55" stroke="none"'
_FRAME_STYLE = 'fill="#ffffff" stroke="#9aa4ae" stroke-width="1"'
_LABEL_STYLE = 'font-family="sans-serif" font-size="11" fill="#444444"'


def _fmt(v: float) -> str:
    # Normalize negative zero so formatting is bit-stable.
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


class _Scale:
    """Affine data-to-pixel map for one square panel, y inverted."""

    def __init__(self, x_range, y_range):
        def padded(lo, hi):
            span = hi - lo
            if span <= 0.0:
                span = 1.0
            return lo - DATA_PAD * span, hi + DATA_PAD * span

        self.x_lo, self.x_hi = padded(*x_range)
        self.y_lo, self.y_hi = padded(*y_range)

    def x(self, v: float) -> float:
        return (v - self.x_lo) / (self.x_hi - self.x_lo) * PANEL_SIZE

    def y(self, v: float) -> float:
        return PANEL_SIZE - (v - self.y_lo) / (self.y_hi - self.y_lo) * PANEL_SIZE


def _clip_line(scale: _Scale, slope: float, intercept: float):
    """Visible segment of y = slope*x + intercept inside the padded window."""
    x0, x1 = scale.x_lo, scale.x_hi
    if slope == 0.0:
        if not scale.y_lo <= intercept <= scale.y_hi:
            return None
        return (x0, intercept, x1, intercept)
    xa = (scale.y_lo - intercept) / slope
    xb = (scale.y_hi - intercept) / slope
    lo = max(x0, min(xa, xb))
    hi = min(x1, max(xa, xb))
    if lo >= hi:
        return None
    return (lo, slope * lo + intercept, hi, slope * hi + intercept)


def _panel_svg(panel: QQPanelGeometry, index: int, px: float, py: float) -> list[str]:
    scale = _Scale(panel.x_range, panel.y_range)
    out = [
        f'<g data-panel-index="{index}" data-x="{_fmt(px)}" data-y="{_fmt(py)}" '
        f'transform="translate({_fmt(px)},{_fmt(py)})">'
    ]
    out.append(f'<rect width="{PANEL_SIZE}" height="{PANEL_SIZE}" {_FRAME_STYLE}/>')

    if panel.envelope_lower is not None:
        pts = []
        for t, u in zip(panel.theoretical, panel.envelope_upper):
            pts.append(f"{_fmt(scale.x(float(t)))},{_fmt(scale.y(float(u)))}")
        for t, l in zip(panel.theoretical[::-1], panel.envelope_lower[::-1]):
            pts.append(f"{_fmt(scale.x(float(t)))},{_fmt(scale.y(float(l)))}")
        out.append(f'<polygon class="band" points="{" ".join(pts)}" {_BAND_STYLE}/>')

    seg = _clip_line(scale, panel.line.slope, panel.line.intercept)
    if seg is not None:
        x1, y1, x2, y2 = seg
        out.append(
            f'<line x1="{_fmt(scale.x(x1))}" y1="{_fmt(scale.y(y1))}" '
            f'x2="{_fmt(scale.x(x2))}" y2="{_fmt(scale.y(y2))}" {_LINE_STYLE}/>'
        )

    for t, v in zip(panel.theoretical, panel.ordinates):
        out.append(
            f'<circle cx="{_fmt(scale.x(float(t)))}" cy="{_fmt(scale.y(float(v)))}" '
            f"{_POINT_STYLE}/>"
        )

    out.append(f'<text x="4" y="13" {_LABEL_STYLE}>{index}</text>')
    out.append("</g>")
    return out


def render_svg(lineup: Lineup, rows: int = 4, cols: int = 5) -> str:
    """Render the full lineup grid; panels numbered row-major from 1.

    The data panel is drawn by the same code path as every null panel,
    so nothing in the output distinguishes it.
    """
    m = lineup.spec.m
    if rows < 1 or cols < 1 or rows * cols != m:
        raise ValueError(f"grid {rows}x{cols} does not hold {m} panels")

    width = 2 * MARGIN + cols * PANEL_SIZE + (cols - 1) * PANEL_GAP
    height = 2 * MARGIN + rows * PANEL_SIZE + (rows - 1) * PANEL_GAP
    out = [
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}" '
        f'data-lineup-id="{lineup.id}" data-m="{m}" '
        f'data-design="{lineup.spec.design.value}" '
        f'data-hypothesis="{lineup.spec.hypothesis.value}" '
        f'data-n="{lineup.spec.data.n}" '
        f'data-rows="{rows}" data-cols="{cols}" '
        f'data-panel-width="{PANEL_SIZE}" data-panel-height="{PANEL_SIZE}">'
    ]
    out.append(f'<rect width="{width}" height="{height}" fill="#fafafa"/>')
    for idx, panel in enumerate(lineup.panels, start=1):
        r, c = divmod(idx - 1, cols)
        px = MARGIN + c * (PANEL_SIZE + PANEL_GAP)
        py = MARGIN + r * (PANEL_SIZE + PANEL_GAP)
        out.extend(_panel_svg(panel, idx, px, py))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def default_grid(m: int) -> tuple[int, int]:
    """Pick a near-square rows x cols factorization of m, wider than tall."""
    best = (1, m)
    for r in range(1, int(m**0.5) + 1):
        if m % r == 0:
            best = (r, m // r)
    return best
