"""SVG drawings of networks with shortcuts, and matplotlib report figures."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Iterable, Sequence

import numpy as np

from .geometry import CycleNetwork, Network, Point

SVG_NS = "http://www.w3.org/2000/svg"
CANVAS = 600.0
MARGIN = 0.05


def _fmt(v: float) -> str:
    return f"{v:.6g}"


class _Canvas:
    """Maps network coordinates to an SVG canvas (y axis flipped)."""

    def __init__(self, points: np.ndarray, size: float = CANVAS, margin: float = MARGIN):
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        span = hi - lo
        extent = float(max(span.max(), 1e-12))
        pad = margin * extent
        self.lo = lo - pad
        self.width = float(span[0] + 2 * pad) or 2 * pad
        self.height = float(span[1] + 2 * pad) or 2 * pad
        self.scale = size / max(self.width, self.height)
        self.size = (self.width * self.scale, self.height * self.scale)
        self.stroke = 0.004 * size

    def xy(self, p: Sequence[float]) -> tuple[str, str]:
        x = (p[0] - self.lo[0]) * self.scale
        y = self.size[1] - (p[1] - self.lo[1]) * self.scale
        return _fmt(x), _fmt(y)


def svg_document(net: Network, shortcuts: Iterable[tuple[Point, Point]] = (),
                 points: Iterable[tuple[str, Point]] = (),
                 highlight: Iterable[str] = ()) -> str:
    """SVG 1.1 text for ``net`` with dashed shortcuts and labelled points.

    The network is one ``polyline`` (paths) or ``polygon`` (cycles); each
    shortcut is one ``line``.  Points whose label is in ``highlight`` are
    drawn larger and in red (diametral witnesses).
    """
    shortcuts = [tuple(map(tuple, s)) for s in shortcuts]
    points = [(label, tuple(p)) for label, p in points]
    highlight = set(highlight)
    cloud = [net.vertices] + [np.array(s) for s in shortcuts]
    if points:
        cloud.append(np.array([p for _, p in points]))
    canvas = _Canvas(np.vstack(cloud))
    w, h = canvas.size

    ET.register_namespace("", SVG_NS)
    root = ET.Element("svg", {
        "xmlns": SVG_NS, "version": "1.1",
        "width": _fmt(w), "height": _fmt(h), "viewBox": f"0 0 {_fmt(w)} {_fmt(h)}",
    })
    coords = " ".join(",".join(canvas.xy(v)) for v in net.vertices)
    tag = "polygon" if isinstance(net, CycleNetwork) else "polyline"
    ET.SubElement(root, tag, {
        "points": coords, "fill": "none", "stroke": "black",
        "stroke-width": _fmt(canvas.stroke), "stroke-linejoin": "round",
    })
    for a, b in shortcuts:
        (x1, y1), (x2, y2) = canvas.xy(a), canvas.xy(b)
        ET.SubElement(root, "line", {
            "x1": x1, "y1": y1, "x2": x2, "y2": y2, "stroke": "#1f5fbf",
            "stroke-width": _fmt(canvas.stroke), "stroke-dasharray": f"{_fmt(4 * canvas.stroke)} {_fmt(3 * canvas.stroke)}",
        })
    for label, p in points:
        x, y = canvas.xy(p)
        hot = label in highlight
        ET.SubElement(root, "circle", {
            "cx": x, "cy": y, "r": _fmt(canvas.stroke * (3.0 if hot else 2.0)),
            "fill": "#c0392b" if hot else "#333333",
        })
        text = ET.SubElement(root, "text", {
            "x": _fmt(float(x) + 3 * canvas.stroke), "y": _fmt(float(y) - 3 * canvas.stroke),
            "font-size": _fmt(0.03 * CANVAS), "font-family": "sans-serif",
        })
        text.text = label
    return ET.tostring(root, encoding="unicode")


def write_svg(path: str, *args, **kwargs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write('<?xml version="1.0" encoding="UTF-8"?>\n')
        fh.write(svg_document(*args, **kwargs))
        fh.write("\n")


# --------------------------------------------------------------------------
# matplotlib report figures
# --------------------------------------------------------------------------

def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _draw_network(ax, net: Network, shortcuts, points):
    v = net.vertices
    if isinstance(net, CycleNetwork):
        v = np.vstack([v, v[:1]])
    ax.plot(v[:, 0], v[:, 1], color="black", lw=1.2)
    for a, b in shortcuts:
        ax.plot([a[0], b[0]], [a[1], b[1]], ls="--", color="#1f5fbf", lw=1.2)
    for label, p in points:
        ax.plot(p[0], p[1], "o", color="#c0392b", ms=4)
        ax.annotate(label, p, textcoords="offset points", xytext=(4, 4), fontsize=8)
    ax.set_aspect("equal")
    ax.set_xticks([])
    ax.set_yticks([])


def path_figure(path, solution, out: str, samples: int = 400) -> None:
    """Network with the optimal shortcut, next to D(x) with b and x* marked."""
    from .paths import shortcut_length_at

    plt = _pyplot()
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 4))
    p, q = path.point_at(solution.p), path.point_at(solution.q)
    _draw_network(ax0, path, [(p, q)] if solution.is_shortcut else [], [("p", p), ("q", q)])
    ax0.set_title(f"diameter {solution.diameter:.6g}")

    xs = np.linspace(0.0, path.total_length / 2.0, samples)
    ax1.plot(xs, [shortcut_length_at(path, x) for x in xs], color="black", lw=1.2, label="D(x)")
    ax1.plot(xs, path.total_length - 4.0 * xs, color="grey", lw=0.8, ls=":", label="|P| - 4x")
    ax1.axvline(solution.budget_bound, color="#1f5fbf", ls="--", lw=1.0, label="b")
    ax1.plot([solution.x_star], [solution.shortcut_length], "o", color="#c0392b", label="x*")
    ax1.set_ylim(bottom=0.0)
    ax1.set_xlabel("x")
    ax1.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)


def cycle_figure(cycle, solution, out: str) -> None:
    """Cycle with the optimal pair, next to the balanced diameter along the sweep."""
    plt = _pyplot()
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 4))
    pair = solution.pair
    pts = [(name, cycle.point_at(pos)) for name, pos in zip("prqs", pair.positions)]
    xy = dict(pts)
    _draw_network(ax0, cycle, [(xy["p"], xy["q"]), (xy["r"], xy["s"])], pts)
    ax0.set_title(f"diameter {solution.diameter:.6g}")

    t, d = [], []
    for stage in solution.stages:
        for ti, di in stage.samples:
            t.append(ti)
            d.append(di)
    ax1.plot(t, d, color="black", lw=1.0)
    ax1.axhline(cycle.total_length / 2.0, color="grey", ls=":", lw=0.8, label="|C|/2")
    ax1.plot([solution.config.arcs[0]], [solution.diameter], "o", color="#c0392b", label="optimum")
    ax1.set_xlabel("arc position of p")
    ax1.set_ylabel("d")
    ax1.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
