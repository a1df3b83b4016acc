"""Deterministic SVG drawings of graph instances.

Every coordinate is printed with a fixed number of decimals, so the same
(instance, style) pair always yields the same bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .core import GRID_SIZE, Instance, InstanceError, Solution

# fixed colours; documented in docs/cli.md
NODE_FILL = "#ffffff"
NODE_STROKE = "#333333"
EDGE_STROKE = "#b0b0b0"
SELECTED_FILL = "#e4572e"
TOUR_STROKE = "#1f77b4"
LABEL_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

LAYOUTS = ("circle", "coordinates")


@dataclass(frozen=True)
class RenderStyle:
    layout: str = "circle"
    size: int = 480
    show_weights: bool = False
    highlight: Solution | None = None
    node_radius: float = 12.0

    def __post_init__(self):
        if self.layout not in LAYOUTS:
            raise ValueError(f"layout must be one of {LAYOUTS}, got {self.layout!r}")
        if self.size < 64:
            raise ValueError("canvas size must be at least 64")


def default_style(inst: Instance, **kw) -> RenderStyle:
    """Coordinates layout when the instance has coordinates, else circle."""
    layout = "coordinates" if inst.graph.coords is not None else "circle"
    return RenderStyle(layout=kw.pop("layout", layout), **kw)


def node_positions(inst: Instance, style: RenderStyle) -> list[tuple[float, float]]:
    g = inst.graph
    margin = 2.5 * style.node_radius
    span = style.size - 2 * margin
    if style.layout == "coordinates":
        if g.coords is None:
            raise InstanceError("coordinates layout requires instance coordinates")
        return [(margin + span * x / GRID_SIZE, margin + span * (GRID_SIZE - y) / GRID_SIZE)
                for x, y in g.coords]
    c, r = style.size / 2, span / 2
    return [(c + r * math.cos(2 * math.pi * i / g.n), c + r * math.sin(2 * math.pi * i / g.n))
            for i in range(g.n)]


def _tour_edges(sol: Solution) -> set:
    t = sol.data
    return {(min(t[i], t[(i + 1) % len(t)]), max(t[i], t[(i + 1) % len(t)])) for i in range(len(t))}


def _fmt(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def render_svg(inst: Instance, style: RenderStyle | None = None) -> str:
    """SVG text with one <circle> per vertex and one <line> per edge."""
    style = style or default_style(inst)
    pos = node_positions(inst, style)
    g, sol = inst.graph, style.highlight
    if sol is not None:
        sol.check_structure(g.n)

    fills = [NODE_FILL] * g.n
    marked = set()
    if sol is not None and sol.kind == "subset":
        for v in sol.data:
            fills[v] = SELECTED_FILL
    elif sol is not None and sol.kind == "labeling":
        fills = [LABEL_PALETTE[lab % len(LABEL_PALETTE)] for lab in sol.data]
    elif sol is not None and sol.kind == "tour":
        marked = _tour_edges(sol)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.size}" height="{style.size}" '
        f'viewBox="0 0 {style.size} {style.size}">',
        f"<title>{escape(inst.id)}</title>",
        f'<rect x="0" y="0" width="{style.size}" height="{style.size}" fill="#fafafa"/>',
        '<g id="edges">',
    ]
    labels = []
    for u, v, w in g.edges:
        (x1, y1), (x2, y2) = pos[u], pos[v]
        on = (u, v) in marked
        stroke, width = (TOUR_STROKE, 3) if on else (EDGE_STROKE, 1)
        out.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                   f'stroke="{stroke}" stroke-width="{width}"/>')
        if style.show_weights:
            text = str(g.to_rational(w)) if g.weight_scale == 1 else f"{w / g.weight_scale:.2f}"
            labels.append(f'<text x="{_fmt((x1 + x2) / 2)}" y="{_fmt((y1 + y2) / 2)}" '
                          f'font-size="9" fill="#555555">{text}</text>')
    out.append("</g>")
    if labels:
        out += ['<g id="weights">', *labels, "</g>"]
    out.append('<g id="nodes">')
    for i, (x, y) in enumerate(pos):
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(style.node_radius)}" '
                   f'fill="{fills[i]}" stroke="{NODE_STROKE}"/>')
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(y + 4)}" font-size="11" '
                   f'text-anchor="middle">{i}</text>')
    out += ["</g>", "</svg>", ""]
    return "\n".join(out)
