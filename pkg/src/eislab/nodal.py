"""Grid fields of F_lambda, nodal lines and nodal domains."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .eisenstein import EisensteinContext, eval_F
from .errors import BudgetExceededError, DomainError
from .hyperbolic import cell_area_weight, length_weight
from .regions import RegionSpec, region_extent, region_mask

MAX_NODES = 10**8


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Samples on the nodes ``(i h, j h)``, ``i0 <= i < i0 + nx``, ``j0 <= j < j0 + ny``.

    Node coordinates are integer multiples of ``h`` so refining ``q`` by a
    factor two reproduces every old node exactly.  Unmasked nodes hold NaN.
    """

    h: float
    i0: int
    j0: int
    values: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    lam: float = 0.0
    q: int = 8
    r_grid: float = 0.0
    region: RegionSpec | None = None

    @property
    def shape(self):
        return self.values.shape

    @property
    def x(self) -> np.ndarray:
        return (self.i0 + np.arange(self.shape[0])) * self.h

    @property
    def y(self) -> np.ndarray:
        return (self.j0 + np.arange(self.shape[1])) * self.h

    @property
    def z(self) -> np.ndarray:
        return self.x[:, None] + 1j * self.y[None, :]


def grid_spacing(lam: float, q: int, r_grid: float) -> float:
    """``h = pi (1 - r_grid^2) / (q max(lambda, 1))``."""
    return math.pi * (1.0 - r_grid * r_grid) / (q * max(lam, 1.0))


def eval_field(ctx: EisensteinContext, lam: float, region: RegionSpec, q: int = 8,
               nthreads: int = 1, max_nodes: int = MAX_NODES) -> ScalarField:
    """Sample ``F_lambda`` on the masked nodes of a square grid over the region."""
    if q < 4:
        raise ValueError("q must be >= 4")
    xmin, xmax, ymin, ymax, r_grid = region_extent(region, ctx.group)
    if not r_grid < 1:
        raise DomainError("region must stay inside the disc")
    h = grid_spacing(lam, q, r_grid)
    i0, i1 = math.ceil(xmin / h), math.floor(xmax / h)
    j0, j1 = math.ceil(ymin / h), math.floor(ymax / h)
    nx, ny = i1 - i0 + 1, j1 - j0 + 1
    if nx * ny > max_nodes:
        raise BudgetExceededError(f"grid of {nx} x {ny} nodes exceeds the cap {max_nodes}")
    x = (i0 + np.arange(nx)) * h
    y = (j0 + np.arange(ny)) * h
    z = x[:, None] + 1j * y[None, :]
    mask = region_mask(region, ctx.group, z)
    values = np.full((nx, ny), np.nan)
    if mask.any():
        values[mask] = eval_F(ctx, lam, z[mask], nthreads)
    return ScalarField(h, i0, j0, values, mask, float(lam), int(q), float(r_grid), region)


# ---------------------------------------------------------------- marching squares

# edges of cell (i, j): 0 bottom, 1 right, 2 top, 3 left
# corners: bit0 (i,j), bit1 (i+1,j), bit2 (i+1,j+1), bit3 (i,j+1)
_SEGMENTS = {
    1: [(0, 3)], 2: [(0, 1)], 3: [(1, 3)], 4: [(1, 2)], 6: [(0, 2)], 7: [(2, 3)],
    8: [(2, 3)], 9: [(0, 2)], 11: [(1, 2)], 12: [(1, 3)], 13: [(0, 1)], 14: [(0, 3)],
}
# saddles: (center positive, center negative)
_SADDLES = {
    5: ([(0, 1), (2, 3)], [(0, 3), (1, 2)]),
    10: ([(0, 3), (1, 2)], [(0, 1), (2, 3)]),
}


@dataclass(eq=False)
class NodalLines:
    """Zero segments of a field; ``p``/``q`` are endpoints, ``ea``/``eb`` edge ids."""

    p: np.ndarray
    q: np.ndarray
    ea: np.ndarray
    eb: np.ndarray

    def __len__(self):
        return self.p.shape[0]

    @property
    def hyperbolic_length(self) -> float:
        if len(self) == 0:
            return 0.0
        mid = 0.5 * (self.p + self.q)
        return float(np.sum(np.abs(self.q - self.p) * length_weight(mid)))

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([self.p, self.q])

    def polylines(self) -> list:
        """Chain segments sharing grid edges into polylines."""
        if len(self) == 0:
            return []
        adj: dict = {}
        for k, (a, b) in enumerate(zip(self.ea.tolist(), self.eb.tolist())):
            adj.setdefault(a, []).append(k)
            adj.setdefault(b, []).append(k)
        used = np.zeros(len(self), dtype=bool)
        pos = {}
        for k, (a, b) in enumerate(zip(self.ea.tolist(), self.eb.tolist())):
            pos[a] = self.p[k]
            pos[b] = self.q[k]
        ends = {e for e, segs in adj.items() if len(segs) == 1}
        out = []

        def walk(start_edge, seg):
            chain = [start_edge]
            e = start_edge
            while seg is not None and not used[seg]:
                used[seg] = True
                a, b = int(self.ea[seg]), int(self.eb[seg])
                e = b if a == e else a
                chain.append(e)
                nxt = [s for s in adj[e] if not used[s]]
                seg = nxt[0] if nxt else None
            return np.array([pos[x] for x in chain])

        for e in sorted(ends):
            segs = [s for s in adj[e] if not used[s]]
            if segs:
                out.append(walk(e, segs[0]))
        for k in range(len(self)):
            if not used[k]:
                out.append(walk(int(self.ea[k]), k))
        return out


def extract_nodal_lines(fld: ScalarField) -> NodalLines:
    """Marching squares with linear interpolation on fully masked cells."""
    v = fld.values
    m = fld.mask
    nx, ny = v.shape
    if nx < 2 or ny < 2:
        e = np.zeros(0, complex)
        return NodalLines(e, e, np.zeros(0, np.int64), np.zeros(0, np.int64))
    cell = m[:-1, :-1] & m[1:, :-1] & m[1:, 1:] & m[:-1, 1:]
    pos = np.where(m, v > 0, False)
    case = (pos[:-1, :-1].astype(np.int8) | (pos[1:, :-1] << 1) | (pos[1:, 1:] << 2)
            | (pos[:-1, 1:] << 3))
    case = np.where(cell, case, 0)
    x, y, h = fld.x, fld.y, fld.h

    def crossing(i, j, di, dj):
        va = v[i, j]
        vb = v[i + di, j + dj]
        t = va / (va - vb)
        return (x[i] + t * di * h) + 1j * (y[j] + t * dj * h)

    def edge(k, i, j):
        if k == 0:
            return crossing(i, j, 1, 0), i * ny + j
        if k == 2:
            return crossing(i, j + 1, 1, 0), i * ny + j + 1
        if k == 3:
            return crossing(i, j, 0, 1), nx * ny + i * ny + j
        return crossing(i + 1, j, 0, 1), nx * ny + (i + 1) * ny + j

    ps, qs, eas, ebs = [], [], [], []

    def emit(sel_i, sel_j, pairs):
        for ka, kb in pairs:
            pa, ia = edge(ka, sel_i, sel_j)
            pb, ib = edge(kb, sel_i, sel_j)
            ps.append(pa)
            qs.append(pb)
            eas.append(ia)
            ebs.append(ib)

    with np.errstate(invalid="ignore", divide="ignore"):
        for c, pairs in _SEGMENTS.items():
            ii, jj = np.nonzero(case == c)
            if ii.size:
                emit(ii, jj, pairs)
        for c, (pos_pairs, neg_pairs) in _SADDLES.items():
            ii, jj = np.nonzero(case == c)
            if ii.size:
                center = 0.25 * (v[ii, jj] + v[ii + 1, jj] + v[ii + 1, jj + 1] + v[ii, jj + 1])
                up = center > 0
                emit(ii[up], jj[up], pos_pairs)
                emit(ii[~up], jj[~up], neg_pairs)
    if not ps:
        e = np.zeros(0, complex)
        return NodalLines(e, e, np.zeros(0, np.int64), np.zeros(0, np.int64))
    return NodalLines(np.concatenate(ps), np.concatenate(qs),
                      np.concatenate(eas).astype(np.int64), np.concatenate(ebs).astype(np.int64))


# ---------------------------------------------------------------- nodal domains


@dataclass(frozen=True, eq=False)
class DomainReport:
    """Nodal domains of a grid field.

    ``count = interior_count + boundary_count``.  Components made only of
    mask-boundary nodes (sub-grid slivers cut off by the region boundary)
    are excluded and reported in ``sliver_count``.
    """

    count: int
    interior_count: int
    boundary_count: int
    sliver_count: int
    areas: np.ndarray = field(repr=False)
    touches_boundary: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    h: float = 0.0

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    @property
    def min_area(self) -> float:
        return float(self.areas.min()) if self.areas.size else 0.0


def _boundary_nodes(mask):
    pad = np.pad(mask, 1, constant_values=False)
    inner = pad[:-2, 1:-1] & pad[2:, 1:-1] & pad[1:-1, :-2] & pad[1:-1, 2:]
    return mask & ~inner


def count_nodal_domains(fld: ScalarField, mask=None) -> DomainReport:
    """4-connected same-sign components of the masked nodes.

    Components containing a node next to the mask boundary are flagged as
    boundary-touching; areas sum the metric weight ``h^2 4/(1-|z|^2)^2``.
    Labels in the report are renumbered after dropping slivers.
    """
    mask = fld.mask if mask is None else (np.asarray(mask, dtype=bool) & fld.mask)
    sign = np.where(fld.values > 0, 1, -1).astype(np.int8)
    labels, count = kernels.label_components(sign, mask)
    edge = _boundary_nodes(mask)
    has_inner = np.zeros(count, dtype=bool)
    li = labels[mask & ~edge]
    has_inner[li] = True
    keep_ids = np.flatnonzero(has_inner)
    remap = np.full(count + 1, -1, dtype=np.int64)
    remap[keep_ids] = np.arange(keep_ids.size)
    labels = np.where(labels >= 0, remap[labels], -1)
    n = int(keep_ids.size)
    sel = labels >= 0
    weights = fld.h * fld.h * cell_area_weight(fld.z[sel])
    areas = np.bincount(labels[sel], weights=weights, minlength=n)
    touch = np.zeros(n, dtype=bool)
    bl = labels[edge]
    touch[bl[bl >= 0]] = True
    nb = int(touch.sum())
    return DomainReport(n, n - nb, nb, int(count) - n, areas, touch, labels, fld.h)
