"""Deterministic CSV and SVG writers."""
from __future__ import annotations

import os

import numpy as np

from . import __version__

SVG_SIZE = 640
SVG_CELLS = 200


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def footer(meta: dict) -> str:
    items = [f"{k}={meta[k]}" for k in sorted(meta)]
    return " ".join(items + [f"version={__version__}"])


class OutputSet:
    """Tracks written files so a failed run can remove its partial outputs."""

    def __init__(self, directory):
        self.directory = directory
        self.written = []

    def path(self, name):
        os.makedirs(self.directory, exist_ok=True)
        p = os.path.join(self.directory, name)
        self.written.append(p)
        return p

    def remove_all(self):
        for p in self.written:
            if os.path.exists(p):
                os.remove(p)
        self.written.clear()

    def write_csv(self, name, header, rows, meta):
        with open(self.path(name), "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(fmt(v) for v in row) + "\n")
            fh.write("# " + footer(meta) + "\n")

    def write_field_csv(self, name, fld, meta):
        x = np.repeat(fld.x, fld.shape[1])
        y = np.tile(fld.y, fld.shape[0])
        v = fld.values.ravel()
        m = fld.mask.ravel()
        with open(self.path(name), "w", newline="") as fh:
            fh.write("x,y,F,mask\n")
            for xi, yi, vi, mi in zip(x.tolist(), y.tolist(), v.tolist(), m.tolist()):
                fh.write(f"{xi:.17g},{yi:.17g},{vi:.17g},{1 if mi else 0}\n")
            fh.write("# " + footer(meta) + "\n")

    def write_text(self, name, text):
        with open(self.path(name), "w", newline="") as fh:
            fh.write(text)


def _sx(z):
    """Disc coordinates to SVG pixels (y axis pointing up)."""
    half = SVG_SIZE / 2
    return half + half * np.real(z), half - half * np.imag(z)


def _path(points, close=False) -> str:
    x, y = _sx(np.asarray(points))
    parts = [f"M{x[0]:.2f},{y[0]:.2f}"] + [f"L{a:.2f},{b:.2f}" for a, b in zip(x[1:], y[1:])]
    return "".join(parts) + ("Z" if close else "")


def render_field_svg(fld, polylines, boundaries, meta, title="") -> str:
    """Sign map (downsampled), nodal polylines and region boundary as SVG."""
    nx, ny = fld.shape
    step = max(1, int(np.ceil(max(nx, ny) / SVG_CELLS)))
    v = fld.values[::step, ::step]
    m = fld.mask[::step, ::step]
    xs, ys = fld.x[::step], fld.y[::step]
    cell = SVG_SIZE / 2 * fld.h * step
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
           f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">']
    if title:
        out.append(f"<title>{title}</title>")
    out.append(f'<circle cx="{SVG_SIZE / 2}" cy="{SVG_SIZE / 2}" r="{SVG_SIZE / 2}" '
               'fill="#f4f4f4" stroke="#000" stroke-width="1"/>')
    colours = {1: "#f2b5a6", -1: "#a9c4e8"}
    for i in range(v.shape[0]):
        # run-length encode each column of cells by sign
        j = 0
        while j < v.shape[1]:
            if not m[i, j]:
                j += 1
                continue
            s = 1 if v[i, j] > 0 else -1
            k = j
            while k + 1 < v.shape[1] and m[i, k + 1] and (1 if v[i, k + 1] > 0 else -1) == s:
                k += 1
            x0, y1 = _sx(xs[i] + 1j * ys[k])
            out.append(f'<rect x="{x0 - cell / 2:.2f}" y="{y1 - cell / 2:.2f}" '
                       f'width="{cell:.2f}" height="{cell * (k - j + 1):.2f}" '
                       f'fill="{colours[s]}" stroke="none"/>')
            j = k + 1
    for b in boundaries:
        out.append(f'<path d="{_path(b)}" fill="none" stroke="#555" stroke-width="0.8"/>')
    for pl in polylines:
        if len(pl) > 1:
            out.append(f'<path d="{_path(pl)}" fill="none" stroke="#000" stroke-width="0.6"/>')
    out.append("</svg>")
    out.append(f"<!-- {footer(meta)} -->")
    return "\n".join(out) + "\n"
