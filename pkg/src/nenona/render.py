"""Deterministic SVG diagrams for networks and projection scatter plots.

Symmetric networks: line thickness encodes edge weight, node radius the
code's total connection frequency. Directed networks: each edge is a
triangle with its apex at the origin node and base toward the destination,
area scaled by weight, with a dark chevron marking flow direction; inner-
circle fill saturation encodes self-connection weight. Subtracted networks
color positive differences in the group-A color and negative in group-B.

All output is byte-deterministic: fixed element order, floats at 3 decimals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .ingest import CODES
from .projection import GroupNetwork, NodeLayout, ProjectionModel


class EmptyNetworkWarning(UserWarning):
    """Every edge fell below the draw cutoff; nodes rendered alone."""


@dataclass(frozen=True)
class EdgeScale:
    """weight -> stroke width (symmetric) or triangle area (directed).

    With gain set, the map is width = gain * weight (pure linear). Otherwise
    widths interpolate [w_min, w_max] across [0, figure max weight].
    """

    w_min: float = 0.8
    w_max: float = 9.0
    gain: float | None = None

    def __call__(self, weight: float, figure_max: float) -> float:
        if self.gain is not None:
            return self.gain * weight
        if figure_max <= 0:
            return self.w_min
        return self.w_min + (self.w_max - self.w_min) * (weight / figure_max)


@dataclass(frozen=True)
class NodeScale:
    r_min: float = 6.0
    r_max: float = 26.0

    def __call__(self, freq: float, figure_max: float) -> float:
        if figure_max <= 0:
            return self.r_min
        return self.r_min + (self.r_max - self.r_min) * (freq / figure_max)


@dataclass(frozen=True)
class RenderSpec:
    width: int = 1000
    height: int = 800
    color_a: str = "#1f4f9f"  # group A (feedback)
    color_b: str = "#c03a2b"  # group B (no feedback)
    edge_scale: EdgeScale = field(default_factory=EdgeScale)
    node_scale: NodeScale = field(default_factory=NodeScale)
    min_edge_weight: float = 0.02  # fraction of the figure max weight
    font_family: str = "sans-serif"
    font_size: int = 15
    margin: int = 80


def _fmt(v: float) -> str:
    out = f"{v:.3f}"
    return "0.000" if out == "-0.000" else out


class _Canvas:
    """Maps data coordinates to pixel space and collects SVG elements."""

    def __init__(self, spec: RenderSpec, points: np.ndarray):
        self.spec = spec
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        span = np.maximum(hi - lo, 1e-9)
        pad = 0.12 * span
        self.lo, self.span = lo - pad, span + 2 * pad
        self.elements: list[str] = []

    def to_px(self, p) -> tuple[float, float]:
        s = self.spec
        fx = (p[0] - self.lo[0]) / self.span[0]
        fy = (p[1] - self.lo[1]) / self.span[1]
        x = s.margin + fx * (s.width - 2 * s.margin)
        y = s.height - s.margin - fy * (s.height - 2 * s.margin)
        return x, y

    def add(self, tag: str, **attrs) -> None:
        parts = [f'{k.replace("_", "-")}="{v}"' for k, v in attrs.items()]
        self.elements.append(f"<{tag} {' '.join(parts)}/>")

    def text(self, x: float, y: float, content: str, cls: str, anchor: str = "middle",
             fill: str = "#222") -> None:
        s = self.spec
        self.elements.append(
            f'<text class="{cls}" x="{_fmt(x)}" y="{_fmt(y)}" text-anchor="{anchor}" '
            f'font-family="{s.font_family}" font-size="{s.font_size}" '
            f'fill="{fill}">{content}</text>'
        )

    def document(self) -> str:
        s = self.spec
        body = "\n".join(self.elements)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{s.width}" '
            f'height="{s.height}" viewBox="0 0 {s.width} {s.height}">\n'
            f'<rect width="{s.width}" height="{s.height}" fill="#ffffff"/>\n'
            f"{body}\n</svg>\n"
        )


def _edge_color(weight: float, network: GroupNetwork, spec: RenderSpec) -> str:
    if network.condition == "difference":
        return spec.color_a if weight > 0 else spec.color_b
    return spec.color_a


def _draw_nodes(canvas: _Canvas, layout: NodeLayout, freqs: np.ndarray,
                spec: RenderSpec, inner: np.ndarray | None = None,
                codes: tuple[str, ...] = CODES) -> None:
    fmax = float(freqs.max())
    imax = float(inner.max()) if inner is not None else 0.0
    for i, code in enumerate(codes):
        x, y = canvas.to_px(layout.positions[i])
        r = spec.node_scale(float(freqs[i]), fmax)
        canvas.add("circle", **{"class": "node"}, id=f"node-{code}",
                   cx=_fmt(x), cy=_fmt(y), r=_fmt(r),
                   fill="#d8d8d8", stroke="#444", stroke_width="1.2")
        if inner is not None:
            sat = float(inner[i]) / imax if imax > 0 else 0.0
            canvas.add("circle", **{"class": "node-inner"}, id=f"inner-{code}",
                       cx=_fmt(x), cy=_fmt(y), r=_fmt(max(r - 3.0, 2.0)),
                       fill="#333333", fill_opacity=_fmt(sat))
        canvas.text(x, y - r - 6, code, cls="label")


def render_symmetric(layout: NodeLayout, network: GroupNetwork,
                     spec: RenderSpec = RenderSpec(),
                     codes: tuple[str, ...] = CODES) -> str:
    """Undirected network: one line per edge at or above the draw cutoff."""
    w = network.mean_weights
    n = len(codes)
    mags = np.abs(w)
    figure_max = float(mags.max())
    cutoff = spec.min_edge_weight * figure_max

    canvas = _Canvas(spec, layout.positions)
    drawn = 0
    for i in range(n):
        for j in range(i + 1, n):
            weight = float(w[i, j])
            if figure_max <= 0 or abs(weight) < cutoff or weight == 0.0:
                continue
            p1, p2 = canvas.to_px(layout.positions[i]), canvas.to_px(layout.positions[j])
            canvas.add("line", **{"class": "edge"},
                       id=f"edge-{codes[i]}-{codes[j]}",
                       x1=_fmt(p1[0]), y1=_fmt(p1[1]), x2=_fmt(p2[0]), y2=_fmt(p2[1]),
                       stroke=_edge_color(weight, network, spec),
                       stroke_width=_fmt(spec.edge_scale(abs(weight), figure_max)),
                       stroke_linecap="round")
            drawn += 1
    if drawn == 0:
        warnings.warn("all edges below draw cutoff; rendering nodes only",
                      EmptyNetworkWarning)

    _draw_nodes(canvas, layout, mags.sum(axis=1), spec, codes=codes)
    return canvas.document()


def render_directed(layout: NodeLayout, network: GroupNetwork,
                    spec: RenderSpec = RenderSpec(),
                    codes: tuple[str, ...] = CODES) -> str:
    """Directed network: triangles apex-at-origin, chevrons marking flow.

    Reciprocal edges are offset to opposite sides of the connecting line so
    both triangles of the pair stay visible. Node size encodes response
    (incoming) frequency; inner-circle saturation encodes the self-
    connection weight on the diagonal.
    """
    w = network.mean_weights
    n = len(codes)
    off_diag = np.abs(w - np.diag(np.diag(w)))
    figure_max = float(off_diag.max())
    cutoff = spec.min_edge_weight * figure_max

    canvas = _Canvas(spec, layout.positions)
    node_px = [canvas.to_px(layout.positions[i]) for i in range(n)]

    drawn = 0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            weight = float(w[i, j])
            if figure_max <= 0 or abs(weight) < cutoff or weight == 0.0:
                continue
            ax, ay = node_px[i]
            bx, by = node_px[j]
            dx, dy = bx - ax, by - ay
            dist = math.hypot(dx, dy)
            if dist < 1e-9:
                continue
            ux, uy = dx / dist, dy / dist        # unit: origin -> destination
            px_, py_ = -uy, ux                   # perpendicular (offset side)
            # reciprocal pair separation: each direction gets its own side
            ox, oy = px_ * 5.0, py_ * 5.0
            apex = (ax + ux * 10.0 + ox, ay + uy * 10.0 + oy)
            base_c = (bx - ux * 14.0 + ox, by - uy * 14.0 + oy)
            height = math.hypot(base_c[0] - apex[0], base_c[1] - apex[1])
            # triangle area encodes weight: area = edge_scale(|w|) * 40 px²
            area = spec.edge_scale(abs(weight), figure_max) * 40.0
            half_base = min(max(area / max(height, 1.0), 1.0), 18.0)
            b1 = (base_c[0] + px_ * half_base, base_c[1] + py_ * half_base)
            b2 = (base_c[0] - px_ * half_base, base_c[1] - py_ * half_base)
            pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (apex, b1, b2))
            canvas.add("polygon", **{"class": "triangle"},
                       id=f"tri-{codes[i]}-{codes[j]}",
                       points=pts, fill=_edge_color(weight, network, spec),
                       fill_opacity="0.55")
            # chevron: dark V near the base, opening back toward the apex
            tip = (base_c[0] + ux * 8.0, base_c[1] + uy * 8.0)
            c1 = (base_c[0] - ux * 2.0 + px_ * 6.0, base_c[1] - uy * 2.0 + py_ * 6.0)
            c2 = (base_c[0] - ux * 2.0 - px_ * 6.0, base_c[1] - uy * 2.0 - py_ * 6.0)
            cpts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (c1, tip, c2))
            canvas.add("polyline", **{"class": "chevron"},
                       id=f"chev-{codes[i]}-{codes[j]}",
                       points=cpts, fill="none", stroke="#111", stroke_width="2")
            drawn += 1
    if drawn == 0:
        warnings.warn("all edges below draw cutoff; rendering nodes only",
                      EmptyNetworkWarning)

    freqs = off_diag.sum(axis=0) + np.abs(np.diag(w))  # response frequency
    _draw_nodes(canvas, layout, freqs, spec, inner=np.abs(np.diag(w)), codes=codes)
    return canvas.document()


def render_scatter(model: ProjectionModel, groups: list[GroupNetwork],
                   spec: RenderSpec = RenderSpec()) -> str:
    """Unit points, square group centroids, dotted 95% CI boxes, SVD axes."""
    plotted = [g for g in groups if g.condition != "difference"]
    colors = {g.condition: (spec.color_a if k == 0 else spec.color_b)
              for k, g in enumerate(plotted)}

    pts = model.unit_points
    canvas = _Canvas(spec, np.vstack([pts, [p.centroid for p in plotted]]))

    # axes through the data origin
    ox, oy = canvas.to_px((0.0, 0.0))
    canvas.add("line", **{"class": "axis"}, x1=_fmt(spec.margin / 2), y1=_fmt(oy),
               x2=_fmt(spec.width - spec.margin / 2), y2=_fmt(oy),
               stroke="#999", stroke_width="1")
    canvas.add("line", **{"class": "axis"}, x1=_fmt(ox), y1=_fmt(spec.margin / 2),
               x2=_fmt(ox), y2=_fmt(spec.height - spec.margin / 2),
               stroke="#999", stroke_width="1")
    var = model.variance_explained
    v1 = 100.0 * float(var[0]) if var.size > 0 else 0.0
    v2 = 100.0 * float(var[1]) if var.size > 1 else 0.0
    canvas.text(spec.width - spec.margin, oy - 10, f"SVD1 ({v1:.1f}%)",
                cls="axis-label", anchor="end")
    canvas.text(ox + 10, spec.margin, f"SVD2 ({v2:.1f}%)",
                cls="axis-label", anchor="start")

    for unit, point in zip(model.units, pts):
        x, y = canvas.to_px(point)
        canvas.add("circle", **{"class": "unit-point"},
                   id=f"unit-{unit.participant}-{unit.condition}",
                   cx=_fmt(x), cy=_fmt(y), r="5",
                   fill=colors.get(unit.condition, "#777"), fill_opacity="0.8")

    for g in plotted:
        cx, cy = canvas.to_px(g.centroid)
        half_px_x = float(g.ci95[0]) / canvas.span[0] * (spec.width - 2 * spec.margin)
        half_px_y = float(g.ci95[1]) / canvas.span[1] * (spec.height - 2 * spec.margin)
        canvas.add("rect", **{"class": "ci"}, id=f"ci-{g.condition}",
                   x=_fmt(cx - half_px_x), y=_fmt(cy - half_px_y),
                   width=_fmt(2 * half_px_x), height=_fmt(2 * half_px_y),
                   fill="none", stroke=colors[g.condition],
                   stroke_width="1.2", stroke_dasharray="4 3")
        canvas.add("rect", **{"class": "centroid"}, id=f"centroid-{g.condition}",
                   x=_fmt(cx - 6), y=_fmt(cy - 6), width="12", height="12",
                   fill=colors[g.condition])
    return canvas.document()
