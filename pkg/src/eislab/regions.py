"""Compact regions of the disc on which fields are sampled."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hyperbolic import (
    DiscIsometry,
    apply_isometry,
    cell_area_weight,
    geodesic_from_endpoints,
    invert,
)
from .schottky import SchottkyGroup, fixed_points

DEFAULT_R_CUT = 0.985


@dataclass(frozen=True)
class RegionSpec:
    """``kind`` is one of ``fundamental``, ``collar``, ``disk``, ``polygon``.

    fundamental(r_cut)     exterior of all isometric discs with |z| <= r_cut
    collar(width)          2|Im w| / (1 - |w|^2) <= sinh(width) around the
                           axis of the first generator, w in axis coordinates,
                           intersected with the exterior of the isometric discs
    disk(center, radius)   Euclidean disc in disc coordinates
    polygon(vertices)      geodesic polygon with the given interior vertices
    """

    kind: str
    r_cut: float = DEFAULT_R_CUT
    width: float | None = None
    center: complex = 0j
    radius: float | None = None
    vertices: tuple = ()

    @classmethod
    def fundamental(cls, r_cut: float = DEFAULT_R_CUT):
        return cls("fundamental", r_cut=float(r_cut))

    @classmethod
    def collar(cls, width: float, r_cut: float = DEFAULT_R_CUT):
        return cls("collar", width=float(width), r_cut=float(r_cut))

    @classmethod
    def disk(cls, center, radius):
        return cls("disk", center=complex(center), radius=float(radius))

    @classmethod
    def polygon(cls, vertices):
        return cls("polygon", vertices=tuple(complex(v) for v in vertices))

    def validate(self):
        if self.kind in ("fundamental", "collar"):
            if not 0 < self.r_cut < 1:
                raise DomainError("r_cut must lie in (0, 1)")
            if self.kind == "collar" and not (self.width and self.width > 0):
                raise DomainError("collar width must be positive")
        elif self.kind == "disk":
            if not (self.radius and self.radius > 0) or abs(self.center) + self.radius >= 1:
                raise DomainError("disk must be a positive-radius disc inside the unit disc")
        elif self.kind == "polygon":
            if len(self.vertices) < 3 or max(abs(v) for v in self.vertices) >= 1:
                raise DomainError("polygon needs >= 3 vertices inside the disc")
        else:
            raise DomainError(f"unknown region kind {self.kind!r}")
        return self


def to_klein(z):
    z = np.asarray(z, dtype=complex)
    return 2.0 * z / (1.0 + np.abs(z) ** 2)


def _outside_isometric_discs(group: SchottkyGroup, z):
    ok = np.ones(np.shape(z), dtype=bool)
    for circ in group.circles:
        ok &= np.abs(z - circ.center) > circ.radius
    return ok


def _in_polygon(vertices, z):
    """Even-odd test in the Klein model, where geodesic edges are straight."""
    k = to_klein(np.asarray(vertices))
    p = to_klein(z)
    x, y = p.real, p.imag
    inside = np.zeros(np.shape(z), dtype=bool)
    xs, ys = k.real, k.imag
    for i in range(len(k)):
        x1, y1 = xs[i], ys[i]
        x2, y2 = xs[i - 1], ys[i - 1]
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xint)
    return inside


def _collar_coords(group: SchottkyGroup):
    if group.rank == 0:
        raise DomainError("collar region needs a generator")
    fp = fixed_points(group.generators[0])
    return geodesic_from_endpoints(fp[0], fp[1])


def region_mask(region: RegionSpec, group: SchottkyGroup, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    inside_disc = np.abs(z) < 1.0
    if region.kind == "fundamental":
        return inside_disc & (np.abs(z) <= region.r_cut) & _outside_isometric_discs(group, z)
    if region.kind == "collar":
        chart = _collar_coords(group)
        w = np.where(inside_disc, z, 0.0)
        w = apply_isometry(invert(chart.map), w)
        test = 2.0 * np.abs(w.imag) / (1.0 - np.abs(w) ** 2) <= math.sinh(region.width)
        return (inside_disc & test & (np.abs(z) <= region.r_cut)
                & _outside_isometric_discs(group, z))
    if region.kind == "disk":
        return inside_disc & (np.abs(z - region.center) <= region.radius)
    if region.kind == "polygon":
        return inside_disc & _in_polygon(region.vertices, z)
    raise DomainError(f"unknown region kind {region.kind!r}")


def region_extent(region: RegionSpec, group: SchottkyGroup):
    """``(xmin, xmax, ymin, ymax, r_grid)`` with ``r_grid = max |z|`` over the region."""
    region.validate()
    if region.kind == "fundamental":
        r = region.r_cut
        return -r, r, -r, r, r
    if region.kind == "disk":
        c, rad = region.center, region.radius
        return c.real - rad, c.real + rad, c.imag - rad, c.imag + rad, abs(c) + rad
    if region.kind == "polygon":
        pts = []
        v = region.vertices
        for i in range(len(v)):
            pts.append(_geodesic_segment(v[i - 1], v[i], 64))
        pts = np.concatenate(pts)
        return (pts.real.min(), pts.real.max(), pts.imag.min(), pts.imag.max(),
                float(np.abs(pts).max()))
    # collar: probe on a fine grid
    t = np.linspace(-1, 1, 1201)
    zz = t[:, None] + 1j * t[None, :]
    m = region_mask(region, group, zz)
    if not m.any():
        raise DomainError("collar region is empty")
    pts = zz[m]
    pad = 2.0 / 1200
    r = min(float(np.abs(pts).max()) + pad, region.r_cut)
    return (max(pts.real.min() - pad, -r), min(pts.real.max() + pad, r),
            max(pts.imag.min() - pad, -r), min(pts.imag.max() + pad, r), r)


def _geodesic_segment(p, q, n):
    """Points on the geodesic segment from p to q (interior points)."""
    m = DiscIsometry.translation_to(p)
    w = apply_isometry(invert(m), complex(q))
    t = np.tanh(np.linspace(0, 1, n) * math.atanh(abs(w)))
    return apply_isometry(m, t * (w / abs(w) if abs(w) > 0 else 1.0))


def region_boundary(region: RegionSpec, group: SchottkyGroup, n: int = 512):
    """Closed curves outlining the region, for plotting."""
    if region.kind == "disk":
        th = np.linspace(0, 2 * np.pi, n)
        return [region.center + region.radius * np.exp(1j * th)]
    if region.kind == "polygon":
        v = region.vertices
        return [np.concatenate([_geodesic_segment(v[i - 1], v[i], max(8, n // len(v)))
                                for i in range(len(v))])]
    th = np.linspace(0, 2 * np.pi, n)
    curves = [region.r_cut * np.exp(1j * th)]
    for circ in group.circles:
        c = circ.center + circ.radius * np.exp(1j * th)
        inside = np.abs(c) <= region.r_cut
        if not inside.all():
            # start the walk outside so the inner arc is contiguous
            k = int(np.argmin(inside))
            c, inside = np.roll(c, -k), np.roll(inside, -k)
        curves.append(c[inside])
    return [c for c in curves if c.size > 1]


def hyperbolic_region_area(region: RegionSpec, group: SchottkyGroup, n: int = 2001) -> float:
    """Hyperbolic area by a midpoint rule on an ``n x n`` grid."""
    xmin, xmax, ymin, ymax, _ = region_extent(region, group)
    hx = (xmax - xmin) / n
    hy = (ymax - ymin) / n
    x = xmin + hx * (np.arange(n) + 0.5)
    y = ymin + hy * (np.arange(n) + 0.5)
    z = x[:, None] + 1j * y[None, :]
    m = region_mask(region, group, z)
    return float(cell_area_weight(z[m]).sum() * hx * hy)
