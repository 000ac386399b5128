"""Compile scene geometry into a sparse stripe-to-grid projection operator.

For every camera, the visible part of each boundary cell's wall sub-segment
is mapped to a fractional column range of that camera's feature stripe.
A sampling strategy turns the range into (stripe column, weight) pairs; the
collected entries form a sparse linear operator from stripes to grid cells.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateRange, ParseError
from .geometry import CameraPose, Polygon, in_image_angle, visible_segments_naive, visible_segments_sweep
from .grid import BoundaryCell, GridSpec, rasterize_boundary, thicken

WEIGHT_EPS = 1e-12


class SamplingStrategy(Enum):
    NEAREST = "nearest"
    SUM = "sum"
    AVERAGE = "average"

    @classmethod
    def parse(cls, name: str) -> "SamplingStrategy":
        name = name.lower()
        if name in ("avg", "average"):
            return cls.AVERAGE
        try:
            return cls(name)
        except ValueError:
            raise ParseError(f"unknown sampling strategy {name!r}") from None


@dataclass(frozen=True)
class StripeRange:
    """Fractional stripe-column range of one cell: left, center, right."""

    a_l_col: float
    a_c_col: float
    a_r_col: float

    def __post_init__(self):
        if not (0.0 <= self.a_l_col <= self.a_c_col <= self.a_r_col):
            raise ValueError("stripe range must satisfy 0 <= left <= center <= right")

    @property
    def width(self) -> float:
        return self.a_r_col - self.a_l_col


@dataclass(frozen=True)
class ProjectionOperator:
    """Sparse (image, row, col, stripe_col, weight) entries plus metadata.

    Entries are kept in canonical (image_id, row, col, stripe_col) order;
    weights are strictly positive.
    """

    entries: tuple
    grid: GridSpec
    stripe_widths: tuple
    strategy: SamplingStrategy
    thickness: int

    def image_ids(self):
        return sorted({e[0] for e in self.entries})


def _visible_by_edge(visible, polygon_id: int = 0) -> dict[int, list]:
    out: dict[int, list] = {}
    for s in visible:
        if s.polygon_id == polygon_id:
            out.setdefault(s.edge_index, []).append((s.t0, s.t1))
    for v in out.values():
        v.sort()
    return out


def _best_piece(cell: BoundaryCell, vis_by_edge) -> tuple[float, float] | None:
    """Longest intersection of the cell's wall sub-segment with the visible
    set of its edge, or None when fully occluded / out of cone."""
    best = None
    for v0, v1 in vis_by_edge.get(cell.edge_index, ()):
        lo, hi = max(cell.t0, v0), min(cell.t1, v1)
        if hi - lo > 0.0 and (best is None or hi - lo > best[1] - best[0]):
            best = (lo, hi)
    return best


def _range_from_piece(cam: CameraPose, poly: Polygon, edge_index: int,
                      piece: tuple[float, float]) -> StripeRange | None:
    a, b = poly.edge(edge_index)
    ba = b - a
    t0, t1 = piece
    p0 = a + t0 * ba
    p1 = a + t1 * ba
    pm = a + 0.5 * (t0 + t1) * ba
    am = in_image_angle(cam, pm)
    angles = []
    for p in (p0, p1):
        ang = in_image_angle(cam, p)
        # keep endpoint angles on the same branch as the midpoint, so pieces
        # touching a panoramic seam do not flip across it
        if ang - am > math.pi:
            ang -= 2.0 * math.pi
        elif am - ang > math.pi:
            ang += 2.0 * math.pi
        angles.append(ang)
    w = cam.stripe_width
    scale = w / cam.fov
    cols = sorted((angles[0] * scale, angles[1] * scale))
    c_lo = min(max(cols[0], 0.0), float(w))
    c_hi = min(max(cols[1], 0.0), float(w))
    c_mid = min(max(am * scale, c_lo), c_hi)
    if c_hi - c_lo < WEIGHT_EPS:
        return None
    return StripeRange(c_lo, c_mid, c_hi)


def pixel_to_stripe_range(cam: CameraPose, cell: BoundaryCell, visible,
                          poly: Polygon, polygon_id: int = 0) -> StripeRange | None:
    """Stripe-column range a boundary cell projects from, or None when the
    cell's wall piece is occluded, back-facing, or outside the view cone."""
    piece = _best_piece(cell, _visible_by_edge(visible, polygon_id))
    if piece is None:
        return None
    return _range_from_piece(cam, poly, cell.edge_index, piece)


def sample_weights_nearest(r: StripeRange, w: int) -> list[tuple[int, float]]:
    """Single unit weight at the column under the range center."""
    col = min(int(math.floor(r.a_c_col)), w - 1)
    return [(col, 1.0)]


def sample_weights_sum(r: StripeRange, w: int) -> list[tuple[int, float]]:
    """Overlap length of [left, right] with each unit column.

    This is the integral of the piecewise-constant stripe over the range:
    interior columns weigh 1, boundary columns their fractional overlap, and
    the weights total exactly right - left.
    """
    if r.width < WEIGHT_EPS:
        raise DegenerateRange(f"range width {r.width:.3e} below {WEIGHT_EPS}")
    i0 = max(0, int(math.floor(r.a_l_col)))
    i1 = min(w - 1, int(math.ceil(r.a_r_col)) - 1)
    out = []
    for i in range(i0, i1 + 1):
        overlap = min(r.a_r_col, i + 1.0) - max(r.a_l_col, float(i))
        if overlap > 0.0:
            out.append((i, overlap))
    return out


def sample_weights_avg(r: StripeRange, w: int) -> list[tuple[int, float]]:
    """Sum weights normalized to total 1."""
    width = r.width
    return [(i, wt / width) for i, wt in sample_weights_sum(r, w)]


_SAMPLERS = {
    SamplingStrategy.NEAREST: sample_weights_nearest,
    SamplingStrategy.SUM: sample_weights_sum,
    SamplingStrategy.AVERAGE: sample_weights_avg,
}


def build_operator(scene, strategy: SamplingStrategy, thickness: int = 1,
                   visibility: str = "sweep") -> ProjectionOperator:
    """Compile a scene into a ProjectionOperator.

    For each camera the building's visible segments are computed (with
    occluders in the scene), the outline is rasterized and thickened, and
    every cell whose wall piece survives the visibility test contributes
    entries per the sampling strategy.  ``visibility`` selects the sweep or
    the quadratic reference path; both yield identical operators.
    """
    algo = {"sweep": visible_segments_sweep, "naive": visible_segments_naive}[visibility]
    polygons = [scene.building] + list(scene.occluders)
    thin = rasterize_boundary(scene.grid, scene.building)
    cells = thicken(thin, thickness, scene.grid)
    by_cell: dict[tuple[int, int], list[BoundaryCell]] = {}
    for c in cells:
        by_cell.setdefault((c.row, c.col), []).append(c)

    sampler = _SAMPLERS[strategy]
    entries = []
    for image_id, cam in enumerate(scene.cameras):
        visible = algo(cam, polygons)
        vis_by_edge = _visible_by_edge(visible, polygon_id=0)
        for rc in sorted(by_cell):
            best = None
            for cell in sorted(by_cell[rc], key=lambda c: (c.edge_index, c.t0)):
                piece = _best_piece(cell, vis_by_edge)
                if piece is None:
                    continue
                plen = piece[1] - piece[0]
                if best is None or plen > best[1]:
                    best = (cell, plen, piece)
            if best is None:
                continue
            cell, _, piece = best
            rng = _range_from_piece(cam, scene.building, cell.edge_index, piece)
            if rng is None:
                continue
            for col, wt in sampler(rng, cam.stripe_width):
                if wt >= WEIGHT_EPS:
                    entries.append((image_id, rc[0], rc[1], col, wt))
    entries.sort(key=lambda e: e[:4])
    return ProjectionOperator(
        entries=tuple(entries),
        grid=scene.grid,
        stripe_widths=tuple(cam.stripe_width for cam in scene.cameras),
        strategy=strategy,
        thickness=thickness,
    )


# ---------------------------------------------------------------------------
# serialization: one JSON object, floats printed with 17 significant digits
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def dumps_operator(op: ProjectionOperator) -> str:
    g = op.grid
    parts = [
        '{"grid": {"rows": %d, "cols": %d, "origin": [%s, %s], "cell_size": %s}'
        % (g.rows, g.cols, _fmt(g.origin[0]), _fmt(g.origin[1]), _fmt(g.cell_size)),
        '"strategy": "%s"' % op.strategy.value,
        '"thickness": %d' % op.thickness,
        '"stripe_widths": [%s]' % ", ".join(str(int(w)) for w in op.stripe_widths),
        '"entries": [%s]}' % ", ".join(
            "[%d, %d, %d, %d, %s]" % (i, r, c, s, _fmt(w))
            for i, r, c, s, w in op.entries
        ),
    ]
    return ", ".join(parts) + "\n"


def loads_operator(text: str) -> ProjectionOperator:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"operator document is not valid JSON: {exc}") from None
    try:
        g = doc["grid"]
        grid = GridSpec(int(g["rows"]), int(g["cols"]),
                        np.asarray(g["origin"], dtype=np.float64), float(g["cell_size"]))
        strategy = SamplingStrategy.parse(doc["strategy"])
        entries = tuple(
            (int(i), int(r), int(c), int(s), float(w)) for i, r, c, s, w in doc["entries"]
        )
        return ProjectionOperator(
            entries=entries,
            grid=grid,
            stripe_widths=tuple(int(w) for w in doc["stripe_widths"]),
            strategy=strategy,
            thickness=int(doc["thickness"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed operator document: {exc}") from None


def save_operator(op: ProjectionOperator, path) -> None:
    with open(path, "w", encoding="ascii", newline="") as f:
        f.write(dumps_operator(op))


def load_operator(path) -> ProjectionOperator:
    with open(path, "r", encoding="ascii") as f:
        return loads_operator(f.read())
