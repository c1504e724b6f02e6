"""Standalone SVG charts on a fixed 800x600 canvas.

Output depends only on the input data: coordinates are printed with two
decimals and elements are emitted in input order, so identical data gives
identical bytes.

Element classes tests and readers can rely on: ``box`` / ``median`` /
``whisker`` / ``outlier`` (box plots), ``roc-curve`` and ``diagonal`` (ROC),
``cell`` (heatmap) and ``marker`` (scatter points).

Heatmap colours run linearly from white at 0 to dark navy (#081d58) at
``vmax``, so darker always means higher uncertainty.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .evaluation import boxplot_stats

WIDTH, HEIGHT = 800, 600
MARGIN = {"left": 70, "right": 30, "top": 50, "bottom": 70}
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
           "#bcbd22", "#17becf"]
CLASS_COLORS = {0: "#2ca02c", 1: "#d62728"}
DARK = (8, 29, 88)


def _esc(text) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def _f(v: float) -> str:
    return f"{v:.2f}"


class _Canvas:
    def __init__(self, title: str = ""):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff" class="background"/>',
        ]
        if title:
            self.text(WIDTH / 2, 28, title, size=18, anchor="middle")

    @property
    def plot_box(self):
        return (MARGIN["left"], MARGIN["top"], WIDTH - MARGIN["right"], HEIGHT - MARGIN["bottom"])

    def add(self, element: str) -> None:
        self.parts.append(element)

    def text(self, x, y, s, size=12, anchor="start", rotate=None):
        tr = f' transform="rotate({rotate} {_f(x)} {_f(y)})"' if rotate is not None else ""
        self.add(f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" font-size="{size}" '
                 f'text-anchor="{anchor}"{tr}>{_esc(s)}</text>')

    def axes(self, xlabel="", ylabel=""):
        x0, y0, x1, y1 = self.plot_box
        self.add(f'<path class="axis" d="M{x0} {y0} L{x0} {y1} L{x1} {y1}" stroke="#000000" fill="none"/>')
        if xlabel:
            self.text((x0 + x1) / 2, HEIGHT - 20, xlabel, anchor="middle")
        if ylabel:
            self.text(20, (y0 + y1) / 2, ylabel, anchor="middle", rotate=-90)

    def ticks(self, lo, hi, axis: str, n=5, fmt="{:.2f}"):
        x0, y0, x1, y1 = self.plot_box
        for v in np.linspace(lo, hi, n + 1):
            t = (v - lo) / (hi - lo) if hi > lo else 0.0
            if axis == "x":
                px = x0 + t * (x1 - x0)
                self.add(f'<path class="tick" d="M{_f(px)} {y1} L{_f(px)} {y1 + 5}" stroke="#000000"/>')
                self.text(px, y1 + 20, fmt.format(v), size=11, anchor="middle")
            else:
                py = y1 - t * (y1 - y0)
                self.add(f'<path class="tick" d="M{x0 - 5} {_f(py)} L{x0} {_f(py)}" stroke="#000000"/>')
                self.text(x0 - 8, py + 4, fmt.format(v), size=11, anchor="end")

    def svg(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _scale(lo, hi, a, b):
    span = hi - lo if hi > lo else 1.0
    return lambda v: a + (v - lo) / span * (b - a)


def boxplot_svg(groups, title: str = "", ylabel: str = "") -> str:
    """``groups``: sequence of ``(label, values)``; undefined (None) values are skipped."""
    groups = [(label, [float(v) for v in vals if v is not None]) for label, vals in groups]
    if not groups:
        raise ValueError("boxplot needs at least one group")
    allv = [v for _, vals in groups for v in vals] or [0.0]
    lo, hi = min(allv), max(allv)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    c = _Canvas(title)
    c.axes(ylabel=ylabel)
    c.ticks(lo, hi, "y")
    x0, y0, x1, y1 = c.plot_box
    ys = _scale(lo, hi, y1, y0)
    slot = (x1 - x0) / len(groups)
    half = min(slot * 0.3, 40)
    for gi, (label, vals) in enumerate(groups):
        cx = x0 + slot * (gi + 0.5)
        color = PALETTE[gi % len(PALETTE)]
        c.add(f'<g class="group" data-label="{_esc(label)}">')
        if vals:
            st = boxplot_stats(vals)
            top, bottom = ys(st["q3"]), ys(st["q1"])
            c.add(f'<path class="whisker" d="M{_f(cx)} {_f(ys(st["whisker_high"]))} L{_f(cx)} {_f(top)} '
                  f'M{_f(cx)} {_f(bottom)} L{_f(cx)} {_f(ys(st["whisker_low"]))}" stroke="{color}"/>')
            c.add(f'<rect class="box" x="{_f(cx - half)}" y="{_f(top)}" width="{_f(2 * half)}" '
                  f'height="{_f(bottom - top)}" fill="{color}" fill-opacity="0.3" stroke="{color}"/>')
            my = ys(st["median"])
            c.add(f'<path class="median" d="M{_f(cx - half)} {_f(my)} L{_f(cx + half)} {_f(my)}" '
                  f'stroke="{color}" stroke-width="2"/>')
            for o in st["outliers"]:
                c.add(f'<circle class="outlier" cx="{_f(cx)}" cy="{_f(ys(o))}" r="3" fill="none" '
                      f'stroke="{color}"/>')
        c.add("</g>")
        c.text(cx, y1 + 20, label, size=11, anchor="middle")
    return c.svg()


def roc_svg(curves, title: str = "ROC") -> str:
    """``curves``: sequence of ``(label, [(fpr, tpr), ...], auc)``."""
    if not curves:
        raise ValueError("ROC plot needs at least one curve")
    c = _Canvas(title)
    c.axes("false positive rate", "true positive rate")
    c.ticks(0, 1, "x")
    c.ticks(0, 1, "y")
    x0, y0, x1, y1 = c.plot_box
    xs, ys = _scale(0, 1, x0, x1), _scale(0, 1, y1, y0)
    c.add(f'<path class="diagonal" d="M{_f(xs(0))} {_f(ys(0))} L{_f(xs(1))} {_f(ys(1))}" '
          f'stroke="#999999" stroke-dasharray="6 4" fill="none"/>')
    for i, (label, points, auc) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        d = " ".join(("M" if j == 0 else "L") + f"{_f(xs(p[0]))} {_f(ys(p[1]))}" for j, p in enumerate(points))
        c.add(f'<path class="roc-curve" data-label="{_esc(label)}" d="{d}" stroke="{color}" '
              f'stroke-width="2" fill="none"/>')
        ly = y1 - 20 - 18 * (len(curves) - 1 - i)
        auc_txt = "n/a" if auc is None else f"{auc:.3f}"
        c.text(x1 - 10, ly, f"{label} (AUC {auc_txt})", size=12, anchor="end")
    return c.svg()


def _points(points):
    return [(float(p[0]), float(p[1]), int(p[2]) if len(p) > 2 else 0) for p in points]


def _draw_markers(c: _Canvas, pts, xs, ys):
    for x, y, label in pts:
        c.add(f'<circle class="marker" cx="{_f(xs(x))}" cy="{_f(ys(y))}" r="4" '
              f'fill="{CLASS_COLORS.get(label, "#000000")}" stroke="#ffffff" stroke-width="0.5"/>')


def scatter_svg(points, title: str = "", xlabel: str = "PC1", ylabel: str = "PC2", bounds=None) -> str:
    """``points``: sequence of ``(x, y)`` or ``(x, y, class)``; class 1 is red, class 0 green."""
    pts = _points(points)
    if not pts:
        raise ValueError("scatter needs at least one point")
    if bounds is None:
        xv, yv = [p[0] for p in pts], [p[1] for p in pts]
        pad_x = max(max(xv) - min(xv), 1.0) * 0.05
        pad_y = max(max(yv) - min(yv), 1.0) * 0.05
        bounds = (min(xv) - pad_x, max(xv) + pad_x, min(yv) - pad_y, max(yv) + pad_y)
    c = _Canvas(title)
    c.axes(xlabel, ylabel)
    c.ticks(bounds[0], bounds[1], "x")
    c.ticks(bounds[2], bounds[3], "y")
    x0, y0, x1, y1 = c.plot_box
    _draw_markers(c, pts, _scale(bounds[0], bounds[1], x0, x1), _scale(bounds[2], bounds[3], y1, y0))
    return c.svg()


def colormap(t: float) -> str:
    t = min(max(float(t), 0.0), 1.0)
    rgb = [round(255 + (d - 255) * t) for d in DARK]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def heatmap_svg(values, bounds, vmax: float, points=(), title: str = "", xlabel: str = "PC1",
                ylabel: str = "PC2") -> str:
    """Grid ``values[j, i]`` (row j = j-th y cell from the bottom) over ``bounds``, optional point overlay."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 2 or v.size == 0:
        raise ValueError("heatmap needs a non-empty 2-D grid")
    ny, nx = v.shape
    c = _Canvas(title)
    x0, y0, x1, y1 = c.plot_box
    cw, ch = (x1 - x0) / nx, (y1 - y0) / ny
    for j in range(ny):
        for i in range(nx):
            t = v[j, i] / vmax if vmax > 0 else 0.0
            c.add(f'<rect class="cell" x="{_f(x0 + i * cw)}" y="{_f(y1 - (j + 1) * ch)}" width="{_f(cw)}" '
                  f'height="{_f(ch)}" fill="{colormap(t)}"/>')
    c.axes(xlabel, ylabel)
    c.ticks(bounds[0], bounds[1], "x")
    c.ticks(bounds[2], bounds[3], "y")
    pts = _points(points)
    if pts:
        _draw_markers(c, pts, _scale(bounds[0], bounds[1], x0, x1), _scale(bounds[2], bounds[3], y1, y0))
    return c.svg()


def render_svg(kind: str, data: dict, path) -> None:
    """Write one chart. ``data`` holds the keyword arguments of the matching ``*_svg`` builder."""
    builders = {"boxplot": boxplot_svg, "roc": roc_svg, "heatmap": heatmap_svg, "scatter": scatter_svg}
    if kind not in builders:
        raise ValueError(f"unknown chart kind {kind!r}")
    if not data:
        raise ValueError("chart data is empty")
    Path(path).write_text(builders[kind](**data), encoding="utf-8")
