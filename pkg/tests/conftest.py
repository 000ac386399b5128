"""Shared scene builders and geometric oracles for the test suite."""

import numpy as np
import pytest

from projpool import CameraPose, Polygon, validate_polygon
from projpool.grid import GridSpec
from projpool.sceneio import SceneDoc


def square(side=10.0, at=(0.0, 0.0)):
    x, y = at
    return validate_polygon(
        [[x, y], [x + side, y], [x + side, y + side], [x, y + side]]
    )


def cam(pos, direction=0.0, fov=2.0 * np.pi, w=64):
    return CameraPose(position=np.asarray(pos, dtype=np.float64),
                      direction=direction, fov=fov, stripe_width=w)


def unit_grid(rows=16, cols=16, origin=(-3.0, -3.0), cell=1.0):
    return GridSpec(rows=rows, cols=cols,
                    origin=np.asarray(origin, dtype=np.float64), cell_size=cell)


def scene_doc(building, cameras, occluders=(), grid=None):
    return SceneDoc(building=building, occluders=tuple(occluders),
                    cameras=tuple(cameras), grid=grid or unit_grid())


def edge_arrays(polygons):
    """Stacked (A, B) endpoint arrays over all edges of all polygons."""
    a, b = [], []
    for poly in polygons:
        for e in range(len(poly)):
            pa, pb = poly.edge(e)
            a.append(pa)
            b.append(pb)
    return np.asarray(a), np.asarray(b)


def blocked(c, pts, A, B, skip=None):
    """For each point, does any edge (A[i], B[i]) cross the open segment
    camera->point?  ``skip`` masks out edges that must not count (the point's
    own edge).  Pure numpy oracle, independent of the visibility code."""
    c = np.asarray(c, dtype=np.float64)
    d = pts - c  # [m, 2]
    e = B - A  # [n, 2]
    w = c - A  # [n, 2]
    denom = d[:, None, 0] * e[None, :, 1] - d[:, None, 1] * e[None, :, 0]
    num_s = w[None, :, 0] * e[None, :, 1] - w[None, :, 1] * e[None, :, 0]
    num_t = w[None, :, 0] * d[:, None, 1] - w[None, :, 1] * d[:, None, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = -num_s / denom  # position along camera->point, hit if 0 < s < 1
        t = -num_t / denom  # position along the edge
    eps = 1e-9
    hit = (np.abs(denom) > 1e-15) & (s > eps) & (s < 1.0 - eps) \
        & (t > eps) & (t < 1.0 - eps)
    if skip is not None:
        hit &= ~skip
    return hit.any(axis=1)


def oracle_visible_fraction(camera, polygons, polygon_id, edge_index, m=2000):
    """Fraction of an edge visible per point sampling: front-facing, inside
    the cone, and unobstructed by every other edge in the scene."""
    from projpool import cone_contains

    poly = polygons[polygon_id]
    a, b = poly.edge(edge_index)
    ts = (np.arange(m) + 0.5) / m
    pts = a[None, :] + ts[:, None] * (b - a)[None, :]
    c = np.asarray(camera.position, dtype=np.float64)
    ba = b - a
    facing = ba[0] * (c[1] - a[1]) - ba[1] * (c[0] - a[0]) > 0.0
    if not facing:
        return 0.0
    in_cone = np.array([cone_contains(camera, p) for p in pts])
    A, B = edge_arrays(polygons)
    flat = sum(len(p) for p in polygons[:polygon_id]) + edge_index
    skip = np.zeros((m, A.shape[0]), dtype=bool)
    skip[:, flat] = True
    occ = blocked(c, pts, A, B, skip=skip)
    return float(np.mean(in_cone & ~occ))


def visible_fraction(segments, polygon_id, edge_index):
    return sum(s.t1 - s.t0 for s in segments
               if s.polygon_id == polygon_id and s.edge_index == edge_index)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240817))
