"""Standalone SVG 1.1 figures for the winding constructions.

Four panels: a winding around one pair, the half-circle radii
comparison behind the contact-point estimate, the tangent horocycle
chain along a vertical ray, and one sector region with the pulled-back
vertical ray.  Everything is drawn in Euclidean half-plane coordinates;
the horocycle chain switches the x and y axes to log scale once the
chain spans more than three decades.
"""

from __future__ import annotations

import math

from .horocycle import StandardTangency
from .sequence import WindingSequence

SVG_HEADER = (
    '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
    '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
    'width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'
    '<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>\n'
)

PALETTE = {
    "axis": "#888888",
    "u": "#1f77b4",
    "v": "#d62728",
    "horo": "#2ca02c",
    "horo2": "#9467bd",
    "mark": "#222222",
    "region": "#ffe8c0",
}


class Panel:
    """One panel with its own world window; y points up, SVG y points down."""

    def __init__(self, x0, x1, y0, y1, width=430, height=300, logx=False, logy=False):
        self.logx, self.logy = logx, logy
        self.x0, self.x1 = self._tx(x0), self._tx(x1)
        self.y0, self.y1 = self._ty(y0), self._ty(y1)
        self.width, self.height = width, height
        self.pad = 34
        self.parts: list[str] = []

    def _tx(self, x):
        return math.log10(max(float(x), 1e-12)) if self.logx else float(x)

    def _ty(self, y):
        return math.log10(max(float(y), 1e-12)) if self.logy else float(y)

    def map(self, x, y):
        u = (self._tx(x) - self.x0) / (self.x1 - self.x0)
        v = (self._ty(y) - self.y0) / (self.y1 - self.y0)
        px = self.pad + u * (self.width - 2 * self.pad)
        py = self.height - self.pad - v * (self.height - 2 * self.pad)
        return px, py

    def polyline(self, pts, color, width=1.4, dash=None, close=False, fill="none"):
        mapped = " ".join("%.2f,%.2f" % self.map(x, y) for x, y in pts)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        tag = "polygon" if close else "polyline"
        self.parts.append(
            f'<{tag} points="{mapped}" fill="{fill}" stroke="{color}" '
            f'stroke-width="{width}"{dash_attr}/>'
        )

    def half_circle(self, center_x, radius, color, width=1.4, dash=None, samples=96):
        pts = []
        for k in range(samples + 1):
            a = math.pi * k / samples
            pts.append((center_x + radius * math.cos(a), radius * math.sin(a)))
        self.polyline(pts, color, width, dash)

    def circle(self, cx, cy, radius, color, width=1.4, dash=None, samples=96, fill="none"):
        pts = []
        for k in range(samples + 1):
            a = 2 * math.pi * k / samples
            pts.append((cx + radius * math.cos(a), cy + radius * math.sin(a)))
        self.polyline(pts, color, width, dash, fill=fill)

    def dot(self, x, y, color, r=3.0):
        px, py = self.map(x, y)
        self.parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="{r}" fill="{color}"/>')

    def text(self, x, y, label, color="#222222", size=12, dx=5, dy=-5):
        px, py = self.map(x, y)
        self.parts.append(
            f'<text x="{px + dx:.2f}" y="{py + dy:.2f}" fill="{color}" '
            f'font-size="{size}" font-family="sans-serif">{label}</text>'
        )

    def caption(self, label):
        self.parts.append(
            f'<text x="{self.width / 2:.0f}" y="{self.height - 6:.0f}" fill="#333333" '
            f'font-size="13" font-family="sans-serif" text-anchor="middle">{label}</text>'
        )

    def axes(self):
        xa0, ya0 = self.map_world_axis()
        self.parts.insert(0, xa0)
        if ya0:
            self.parts.insert(0, ya0)

    def map_world_axis(self):
        p0 = self.map_raw(self.x0, self.y0)
        p1 = self.map_raw(self.x1, self.y0)
        x_axis = (
            f'<line x1="{p0[0]:.2f}" y1="{p0[1]:.2f}" x2="{p1[0]:.2f}" y2="{p1[1]:.2f}" '
            f'stroke="{PALETTE["axis"]}" stroke-width="1"/>'
        )
        if self.x0 <= 0 <= self.x1 and not self.logx:
            q0 = self.map_raw(0, self.y0)
            q1 = self.map_raw(0, self.y1)
            return x_axis, (
                f'<line x1="{q0[0]:.2f}" y1="{q0[1]:.2f}" x2="{q1[0]:.2f}" y2="{q1[1]:.2f}" '
                f'stroke="{PALETTE["axis"]}" stroke-width="1"/>'
            )
        return x_axis, None

    def map_raw(self, tx, ty):
        u = (tx - self.x0) / (self.x1 - self.x0)
        v = (ty - self.y0) / (self.y1 - self.y0)
        return (
            self.pad + u * (self.width - 2 * self.pad),
            self.height - self.pad - v * (self.height - 2 * self.pad),
        )

    def render(self, ox=0.0, oy=0.0) -> str:
        xa, ya = self.map_world_axis()
        body = [xa] + ([ya] if ya else []) + self.parts
        inner = "\n".join(body)
        return f'<g transform="translate({ox:.0f},{oy:.0f})">\n{inner}\n</g>'


def fig_winding(std: StandardTangency) -> Panel:
    xf = float(std.x_forward)
    xv = float(std.x_forward + std.lam)
    ru, cu = float(std.radius_u), float(std.center_u)
    rv, cv = float(std.radius_v), float(std.center_v)
    x_hi = max(xv + 0.3 * rv, 2.2)
    x_lo = min(cu - ru, -0.5) - 0.2
    p = Panel(x_lo, x_hi, 0, max(2.4 * ru, 1.6))
    h = ru
    p.polyline([(x_lo, h), (x_hi, h)], PALETTE["horo"], dash="6,4")
    p.half_circle(cu, ru, PALETTE["u"])
    p.half_circle(cv, rv, PALETTE["v"])
    p.dot(0, 1, PALETTE["mark"])
    p.text(0, 1, "u(0)")
    p.dot(cu, ru, PALETTE["u"])
    p.text(cu, ru, "q")
    p.dot(xf, 1e-9, PALETTE["u"], r=2.5)
    p.text(xf, 0.02, "u(+&#8734;)", color=PALETTE["u"])
    p.dot(xv, 1e-9, PALETTE["v"], r=2.5)
    p.text(xv, 0.02, "p u(+&#8734;)", color=PALETTE["v"], dy=-18)
    p.text(x_lo + 0.1, h, "H", color=PALETTE["horo"])
    p.caption("(a) winding of u around the pair (H, p)")
    return p


def fig_radii(std: StandardTangency) -> Panel:
    ru, cu = float(std.radius_u), float(std.center_u)
    rv, cv = float(std.radius_v), float(std.center_v)
    x_hi = max(cv + rv, cu + ru) * 1.12
    x_lo = min(cu - ru, cv - rv) - 0.2
    p = Panel(x_lo, x_hi, 0, 2.3 * max(ru, rv))
    p.polyline([(x_lo, ru), (x_hi, ru)], PALETTE["horo"], dash="6,4")
    p.polyline([(x_lo, rv), (x_hi, rv)], PALETTE["horo2"], dash="6,4")
    p.half_circle(cu, ru, PALETTE["u"])
    p.half_circle(cv, rv, PALETTE["v"])
    p.polyline([(cu, 1e-9), (cu, ru)], PALETTE["u"], width=1.0, dash="2,3")
    p.polyline([(cv, 1e-9), (cv, rv)], PALETTE["v"], width=1.0, dash="2,3")
    p.dot(cu, ru, PALETTE["u"])
    p.dot(cv, rv, PALETTE["v"])
    p.text(cu, ru, "q")
    p.text(cv, rv, "q'")
    p.text(x_lo + 0.1, ru, "H", color=PALETTE["horo"])
    p.text(x_lo + 0.1, rv, "H'", color=PALETTE["horo2"], dy=10)
    p.caption("(b) radii and centers of the two half-circles")
    return p


def fig_sequence(ws: WindingSequence) -> Panel:
    xs = [float(x) for x in ws.pair_sequence.fixed_points]
    span = xs[-1] / xs[0]
    log_mode = span > 1e3
    x_hi = xs[-1] * (2.6 if not log_mode else 4.0)
    p = Panel(
        xs[0] * 0.004 if log_mode else -0.3,
        x_hi,
        xs[0] * 0.004 if log_mode else 0,
        x_hi,
        logx=log_mode,
        logy=log_mode,
    )
    top = x_hi
    base_x = xs[0] * 0.005 if log_mode else 0.0
    p.polyline([(base_x if log_mode else 0, xs[0] * 0.005 if log_mode else 1e-9),
                (base_x if log_mode else 0, top)], PALETTE["u"], width=1.8)
    for n, x in enumerate(xs):
        p.circle(x, x, x, PALETTE["horo"] if n % 2 == 0 else PALETTE["horo2"], samples=160)
        p.dot(0 if not log_mode else base_x, x, PALETTE["mark"], r=2.2)
        p.text(x, x * 2, f"H{n}", dy=-2)
    p.dot(base_x if log_mode else 0, 1, PALETTE["u"])
    p.text(base_x if log_mode else 0, 1, "u(0)", color=PALETTE["u"])
    p.caption("(c) tangent horocycle chain along the vertical ray" + (" (log scale)" if log_mode else ""))
    return p


def fig_region(ws: WindingSequence, n: int | None = None) -> Panel:
    if n is None:
        n = min(1, ws.depth)
    if not (0 <= n <= ws.depth):
        raise ValueError(f"region index {n} out of range")
    xn = float(ws.pair_sequence.fixed_points[n])
    w_base = ws.products[n].inverse().apply_point(
        ws.pair_sequence.base.base
    )
    rho, height = float(w_base.x), float(w_base.y)
    x_hi = xn * 2.4
    p = Panel(-0.12 * xn, x_hi, 0, 1.35 * xn)
    # region boundary: imaginary-axis segment, lower-left arc of the circle, real segment
    arc = []
    for k in range(65):
        a = math.pi / 2 + k * math.pi / 64  # from top-left quarter to the bottom
        arc.append((xn + xn * math.cos(a), xn + xn * math.sin(a)))
    region = [(0.0, 1e-9), (0.0, xn)] + arc + [(xn, 1e-9)]
    p.polyline(region, PALETTE["mark"], width=1.0, close=True, fill=PALETTE["region"])
    p.circle(xn, xn, xn, PALETTE["horo"], samples=160)
    p.dot(0, xn, PALETTE["mark"], r=2.2)
    p.text(0, xn, "q")
    p.dot(xn, 1e-9, PALETTE["mark"], r=2.2)
    p.text(xn, 0.02 * xn, "x")
    p.polyline([(rho, height), (rho, 1.3 * xn)], PALETTE["v"], width=1.8)
    p.dot(rho, height, PALETTE["v"])
    p.text(rho, height, "pulled-back base", color=PALETTE["v"])
    if n + 1 <= ws.depth:
        pass
    p.caption(f"(d) sector region at index {n} with the pulled-back vertical ray")
    return p


FIGURES = ("winding", "radii", "sequence", "region")


def render_figures(
    std: StandardTangency, ws: WindingSequence, which: str = "all"
) -> str:
    """One standalone SVG: a single named panel or the 2 x 2 composite."""
    builders = {
        "winding": lambda: fig_winding(std),
        "radii": lambda: fig_radii(std),
        "sequence": lambda: fig_sequence(ws),
        "region": lambda: fig_region(ws),
    }
    if which == "all":
        panels = [builders[name]() for name in FIGURES]
        w, h = panels[0].width, panels[0].height
        body = [
            panels[0].render(0, 0),
            panels[1].render(w, 0),
            panels[2].render(0, h),
            panels[3].render(w, h),
        ]
        return SVG_HEADER.format(w=2 * w, h=2 * h) + "\n".join(body) + "\n</svg>\n"
    if which not in builders:
        raise ValueError(f"unknown figure {which!r}; choose from {FIGURES} or 'all'")
    panel = builders[which]()
    return (
        SVG_HEADER.format(w=panel.width, h=panel.height)
        + panel.render(0, 0)
        + "\n</svg>\n"
    )
