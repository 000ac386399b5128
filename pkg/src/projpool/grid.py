"""Discretize a building outline into top-view grid cells.

Cells are addressed (row, col); scene coordinates map to cells by flooring,
so cell (r, c) owns the half-open square
[origin + c*s, origin + (c+1)*s) x [origin + r*s, origin + (r+1)*s).
Rasterization is conservative (supercover): a boundary that touches a cell
square emits that cell, including the two side cells when an edge passes
exactly through a lattice corner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyResult, InvalidThickness
from .geometry import Polygon


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    origin: np.ndarray  # scene coordinates of cell (0, 0)'s top-left corner
    cell_size: float

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=np.float64)
        object.__setattr__(self, "origin", o)
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid must have at least one row and column")
        if not self.cell_size > 0.0:
            raise ValueError("cell_size must be positive")

    def contains_cell(self, row: int, col: int) -> bool:
        return 0 <= row < self.rows and 0 <= col < self.cols

    def __eq__(self, other):
        if not isinstance(other, GridSpec):
            return NotImplemented
        return (self.rows == other.rows and self.cols == other.cols
                and self.cell_size == other.cell_size
                and bool(np.all(self.origin == other.origin)))


@dataclass(frozen=True)
class BoundaryCell:
    """One grid cell carrying the wall sub-segment it represents.

    ``t0 == t1`` only for supercover corner-touch cells, whose square meets
    the boundary in a single point.  ``generated_by`` is the thin-outline
    cell this cell was dilated from (itself for thickness-1 cells).
    """

    row: int
    col: int
    edge_index: int
    t0: float
    t1: float
    generated_by: tuple[int, int]


def scene_to_cell(spec: GridSpec, p) -> tuple[int, int]:
    """Cell indices of a scene point; may fall outside the grid range."""
    p = np.asarray(p, dtype=np.float64)
    row = math.floor((p[1] - spec.origin[1]) / spec.cell_size)
    col = math.floor((p[0] - spec.origin[0]) / spec.cell_size)
    return row, col


_CELL_SORT_KEY = lambda c: (c.row, c.col, c.edge_index, c.t0)  # noqa: E731


def _edge_crossings(a: np.ndarray, b: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Sorted edge parameters where [a, b] crosses lattice lines, incl. 0, 1."""
    ts = [0.0, 1.0]
    s = spec.cell_size
    for axis in (0, 1):
        o = spec.origin[axis]
        d = b[axis] - a[axis]
        if d == 0.0:
            continue
        k0 = math.ceil((min(a[axis], b[axis]) - o) / s)
        k1 = math.floor((max(a[axis], b[axis]) - o) / s)
        for k in range(k0, k1 + 1):
            t = (o + k * s - a[axis]) / d
            if 1e-12 < t < 1.0 - 1e-12:
                ts.append(t)
    ts.sort()
    out = [ts[0]]
    for t in ts[1:]:
        if t - out[-1] > 1e-12:
            out.append(t)
    return np.asarray(out)


def _near_corner(p: np.ndarray, spec: GridSpec) -> bool:
    f = (p - spec.origin) / spec.cell_size
    return bool(np.all(np.abs(f - np.round(f)) * spec.cell_size < 1e-9))


def rasterize_boundary(spec: GridSpec, poly: Polygon) -> list[BoundaryCell]:
    """Supercover rasterization of the polygon boundary.

    Emits one cell per (edge, maximal sub-segment inside the cell square);
    cells outside the grid are dropped.  Raises EmptyResult when the whole
    boundary misses the grid.
    """
    cells: list[BoundaryCell] = []
    n = len(poly)
    for e in range(n):
        a, b = poly.edge(e)
        ts = _edge_crossings(a, b, spec)
        span_cells = []
        for t0, t1 in zip(ts[:-1], ts[1:]):
            mid = a + 0.5 * (t0 + t1) * (b - a)
            span_cells.append((scene_to_cell(spec, mid), float(t0), float(t1)))
        for (rc, t0, t1) in span_cells:
            if spec.contains_cell(*rc):
                cells.append(BoundaryCell(rc[0], rc[1], e, t0, t1, rc))
        # exact lattice-corner crossings: the diagonal step skips the two
        # side cells whose squares the edge still touches
        for i in range(len(span_cells) - 1):
            (r0, c0), _, tc = span_cells[i]
            (r1, c1), _, _ = span_cells[i + 1]
            if r0 != r1 and c0 != c1:
                p = a + tc * (b - a)
                if _near_corner(p, spec):
                    for rc in ((r0, c1), (r1, c0)):
                        if spec.contains_cell(*rc):
                            cells.append(BoundaryCell(rc[0], rc[1], e, tc, tc, rc))
    if not cells:
        raise EmptyResult("polygon boundary lies entirely outside the grid")
    cells.sort(key=_CELL_SORT_KEY)
    return cells


def thicken(cells: list[BoundaryCell], k: int, spec: GridSpec) -> list[BoundaryCell]:
    """Dilate the thin outline to a band k cells wide (k odd).

    Generator cells keep all their entries; each added cell copies the wall
    sub-segment of its nearest generator (Euclidean distance on indices,
    ties to the smaller (row, col)), so cells of the same wall share one
    angle range and never occlude each other.
    """
    if k < 1 or k % 2 == 0:
        raise InvalidThickness(f"thickness must be an odd positive integer, got {k}")
    if k == 1:
        return sorted(cells, key=_CELL_SORT_KEY)
    radius = (k - 1) // 2
    by_cell: dict[tuple[int, int], list[BoundaryCell]] = {}
    for c in cells:
        by_cell.setdefault((c.row, c.col), []).append(c)
    generators = sorted(by_cell)

    assigned: dict[tuple[int, int], tuple[float, tuple[int, int]]] = {}
    for g in generators:
        for dr in range(-radius, radius + 1):
            for dc in range(-radius, radius + 1):
                rc = (g[0] + dr, g[1] + dc)
                if not spec.contains_cell(*rc):
                    continue
                dist = float(dr * dr + dc * dc)
                best = assigned.get(rc)
                if best is None or (dist, g) < best:
                    assigned[rc] = (dist, g)

    out: list[BoundaryCell] = []
    for rc, (_, g) in assigned.items():
        if rc in by_cell:
            out.extend(by_cell[rc])
        else:
            src = min(by_cell[g], key=lambda c: (c.edge_index, c.t0))
            out.append(BoundaryCell(rc[0], rc[1], src.edge_index, src.t0, src.t1, g))
    out.sort(key=_CELL_SORT_KEY)
    return out
