"""Deterministic SVG drawings of grid polygons.

Every body becomes one closed ``<path>``; contact markers are ``<circle>``
elements and measure glyphs are ``<line>`` ticks, so the number of paths
equals the number of bodies.  Coordinates are printed with fixed precision and
no timestamps or random ids are emitted, which makes output byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .measures import surface_measure
from .support_core import GeometryError, SupportVector, reconstruct_polygon

DEFAULT_STYLES = (
    "fill:none;stroke:#1f3a93;stroke-width:2",
    "fill:#d9e4f5;fill-opacity:0.5;stroke:#b03a2e;stroke-width:1.5",
    "fill:none;stroke:#117a65;stroke-width:1.5;stroke-dasharray:6 3",
)


@dataclass
class RenderSpec:
    width: int = 480
    height: int = 480
    bodies: list = field(default_factory=list)  # (SupportVector, style) pairs
    contact_highlight: bool = False
    measure_glyphs: bool = False
    contacts: list = field(default_factory=list)  # (body index, outer/inner body, tol) triples
    caption: Optional[str] = None
    margin: float = 0.08

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise GeometryError("canvas must have positive size")


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def contact_points(h: SupportVector, other: SupportVector, tol: float = 1e-6) -> np.ndarray:
    """Support points of ``h`` at normals where it touches ``other``."""
    poly = reconstruct_polygon(h).vertices
    idx = np.flatnonzero(np.abs(h.values - other.values) <= tol * (1.0 + np.abs(other.values)))
    pts = []
    u = h.grid.directions
    for i in idx:
        k = int(np.argmax(poly @ u[i]))
        pts.append(tuple(np.round(poly[k], 12)))
    return np.array(sorted(set(pts))).reshape(-1, 2)


def render_svg(spec: RenderSpec) -> str:
    if not spec.bodies:
        raise GeometryError("nothing to render: no bodies")
    polys = []
    for entry in spec.bodies:
        h, style = entry if isinstance(entry, tuple) else (entry, None)
        polys.append((h, reconstruct_polygon(h).vertices, style))
    allv = np.vstack([p for _, p, _ in polys])
    lo, hi = allv.min(axis=0), allv.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    usable = (1 - 2 * spec.margin) * np.array([spec.width, spec.height], dtype=float)
    scale = float(np.min(usable / span))
    centre = 0.5 * (lo + hi)
    offset = 0.5 * np.array([spec.width, spec.height], dtype=float)

    def tx(p):
        q = (np.asarray(p) - centre) * scale
        return offset[0] + q[..., 0], offset[1] - q[..., 1]

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" height="{spec.height}" '
        f'viewBox="0 0 {spec.width} {spec.height}">',
    ]
    for k, (h, verts, style) in enumerate(polys):
        style = style or DEFAULT_STYLES[k % len(DEFAULT_STYLES)]
        xs, ys = tx(verts)
        cmds = [f"M {_fmt(xs[0])} {_fmt(ys[0])}"] + [f"L {_fmt(x)} {_fmt(y)}" for x, y in zip(xs[1:], ys[1:])]
        out.append(f'<path d="{" ".join(cmds)} Z" style="{style}"/>')
        if spec.measure_glyphs:
            w = surface_measure(h, tol=1e-7).weights
            top = float(np.max(w)) if np.max(w) > 0 else 1.0
            u = h.grid.directions
            for i in np.flatnonzero(w > 0):
                j = int(np.argmax(verts @ u[i]))
                a = verts[j]
                b = a + u[i] * (0.12 * span.max() * w[i] / top)
                (x1, y1), (x2, y2) = tx(a), tx(b)
                out.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                           'style="stroke:#7d3c98;stroke-width:1"/>')
    if spec.contact_highlight:
        for body_index, other, tol in spec.contacts:
            h = polys[body_index][0]
            for p in contact_points(h, other, tol):
                x, y = tx(p)
                out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="4" '
                           'style="fill:#e67e22;stroke:#000;stroke-width:0.5"/>')
    if spec.caption:
        out.append(f'<text x="8" y="{spec.height - 8}" font-family="monospace" font-size="11">'
                   f'{_escape(spec.caption)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
