"""Minimal dependency-free SVG line plots for profile snapshots.

The plot layer only reads arrays; it never alters them.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

__all__ = ["profile_svg"]

WIDTH, HEIGHT, PAD = 640, 400, 56
MAX_POINTS = 4000


def _decimate(x, y):
    if len(x) <= MAX_POINTS:
        return x, y
    idx = np.unique(np.linspace(0, len(x) - 1, MAX_POINTS).astype(int))
    return x[idx], y[idx]


def profile_svg(path, x, y, *, title="", xlabel="", ylabel="", vlines=(), hlines=(),
                lines=()) -> None:
    """Write a profile plot with red dashed theory markers.

    ``vlines``/``hlines`` are abscissae/ordinates of dashed reference
    lines; ``lines`` holds extra ``(xs, ys)`` dashed segments.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    finite = np.isfinite(y)
    xlo, xhi = (float(x.min()), float(x.max())) if x.size else (0.0, 1.0)
    ys = [y[finite]] + [np.asarray(v, dtype=float) for v in hlines] \
        + [np.asarray(seg[1], dtype=float) for seg in lines]
    ycat = np.concatenate([np.atleast_1d(v) for v in ys]) if ys else np.zeros(1)
    ylo, yhi = (float(ycat.min()), float(ycat.max())) if ycat.size else (0.0, 1.0)
    if xhi <= xlo:
        xhi = xlo + 1.0
    if yhi <= ylo:
        ylo, yhi = ylo - 1.0, yhi + 1.0
    margin = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - margin, yhi + margin

    def sx(v):
        return PAD + (np.asarray(v) - xlo) / (xhi - xlo) * (WIDTH - 2 * PAD)

    def sy(v):
        return HEIGHT - PAD - (np.asarray(v) - ylo) / (yhi - ylo) * (HEIGHT - 2 * PAD)

    def poly(px, py, style):
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(sx(px), sy(py)))
        return f'<polyline fill="none" {style} points="{pts}"/>'

    dashed = 'stroke="red" stroke-width="1" stroke-dasharray="6,4"'
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">',
             '<rect width="100%" height="100%" fill="white"/>',
             f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}"'
             ' fill="none" stroke="black"/>']
    for v in vlines:
        if xlo <= v <= xhi:
            parts.append(poly([v, v], [ylo, yhi], dashed))
    for v in hlines:
        parts.append(poly([xlo, xhi], [v, v], dashed))
    for xs, ys_ in lines:
        parts.append(poly(np.asarray(xs, dtype=float), np.asarray(ys_, dtype=float), dashed))
    px, py = _decimate(x[finite], y[finite])
    if px.size:
        parts.append(poly(px, py, 'stroke="blue" stroke-width="1.2"'))
    font = 'font-family="sans-serif" font-size="12"'
    parts += [f'<text x="{WIDTH / 2}" y="{PAD / 2}" text-anchor="middle" {font}>{escape(title)}</text>',
              f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle" {font}>{escape(xlabel)}</text>',
              f'<text x="14" y="{HEIGHT / 2}" {font}>{escape(ylabel)}</text>',
              f'<text x="{PAD}" y="{HEIGHT - PAD + 16}" {font}>{xlo:.4g}</text>',
              f'<text x="{WIDTH - PAD}" y="{HEIGHT - PAD + 16}" text-anchor="end" {font}>{xhi:.4g}</text>',
              f'<text x="{PAD - 4}" y="{HEIGHT - PAD}" text-anchor="end" {font}>{ylo:.3g}</text>',
              f'<text x="{PAD - 4}" y="{PAD + 4}" text-anchor="end" {font}>{yhi:.3g}</text>',
              "</svg>"]
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
