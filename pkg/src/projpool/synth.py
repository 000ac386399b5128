"""Deterministic synthetic scenes for tests, demos, and benchmarking."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from shapely.geometry import Point as _ShPoint

from .errors import GenerationError
from .geometry import TWO_PI, CameraPose, Polygon, broaden_fov, min_fov_for_polygon, validate_polygon
from .grid import GridSpec
from .sceneio import SceneDoc, _validate_scene

FOV_MARGIN = 0.2  # widen the minimal cone by 20% against imprecise poses


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    n_vertices: int = 12
    n_cameras: int = 2
    occluder_count: int = 0
    rows: int = 32
    cols: int = 32
    convex: bool = True
    stripe_width: int = 16
    fov: float | None = None  # None: minimal cone widened by FOV_MARGIN

    def __post_init__(self):
        if self.n_vertices < 3:
            raise ValueError("need at least 3 vertices")
        if self.n_cameras < 1:
            raise ValueError("need at least one camera")


def random_polygon(rng: np.random.Generator, n_vertices: int, convex: bool,
                   center=(0.0, 0.0), radius: float = 10.0) -> Polygon:
    """Random simple polygon: a convex hull of random points, or a
    star-shaped ring of jittered radii."""
    center = np.asarray(center, dtype=np.float64)
    for _ in range(50):
        if convex:
            pts = center + rng.uniform(-radius, radius, size=(max(n_vertices, 3), 2))
            hull = _convex_hull(pts)
            if len(hull) < 3:
                continue
            ring = hull
        else:
            # evenly spaced angles with sub-half-step jitter stay strictly
            # increasing at any vertex count
            step = TWO_PI / n_vertices
            angles = step * np.arange(n_vertices) + rng.uniform(
                0.1 * step, 0.9 * step, size=n_vertices
            )
            radii = rng.uniform(0.35 * radius, radius, size=n_vertices)
            ring = center + np.stack(
                [radii * np.cos(angles), radii * np.sin(angles)], axis=1
            )
        try:
            return validate_polygon(ring)
        except Exception:
            continue
    raise GenerationError("could not generate a valid polygon")


def _convex_hull(pts: np.ndarray) -> np.ndarray:
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.asarray(lower[:-1] + upper[:-1])


def generate_scene(config: SynthConfig) -> SceneDoc:
    """Seed-deterministic scene: building, occluders, exterior cameras whose
    cones cover the whole building, and a grid fitted around everything."""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    radius = 10.0
    building = random_polygon(rng, config.n_vertices, config.convex, radius=radius)
    center = building.vertices.mean(axis=0)
    max_r = float(np.max(np.linalg.norm(building.vertices - center, axis=1)))

    polys = [building]
    b_shape = building.shapely()
    for _ in range(config.occluder_count):
        placed = False
        for _ in range(200):
            occ = random_polygon(rng, 4, convex=True,
                                 center=center + _unit(rng) * rng.uniform(1.1, 1.6) * max_r,
                                 radius=0.25 * max_r)
            o_shape = occ.shapely()
            if any(o_shape.intersection(p.shapely()).area > 1e-9 for p in polys):
                continue
            polys.append(occ)
            placed = True
            break
        if not placed:
            raise GenerationError("could not place an occluder clear of other polygons")

    cameras = []
    for _ in range(config.n_cameras):
        placed = False
        for _ in range(200):
            pos = center + _unit(rng) * rng.uniform(1.8, 3.5) * max_r
            if any(p.shapely().contains(_ShPoint(pos)) for p in polys):
                continue
            direction, min_fov = min_fov_for_polygon(pos, building)
            fov = config.fov if config.fov is not None else broaden_fov(min_fov, FOV_MARGIN)
            if config.fov is not None and config.fov >= TWO_PI - 1e-9:
                direction = 0.0
            cameras.append(CameraPose(position=pos, direction=direction,
                                      fov=min(fov, TWO_PI - 1e-9),
                                      stripe_width=config.stripe_width))
            placed = True
            break
        if not placed:
            raise GenerationError("could not place a camera outside all polygons")

    lo = building.vertices.min(axis=0)
    hi = building.vertices.max(axis=0)
    span = hi - lo
    cell = 1.1 * max(span[0] / config.cols, span[1] / config.rows)
    mid = 0.5 * (lo + hi)
    origin = mid - 0.5 * cell * np.array([config.cols, config.rows], dtype=np.float64)
    grid = GridSpec(rows=config.rows, cols=config.cols, origin=origin, cell_size=cell)
    return _validate_scene(building, polys[1:], cameras, grid)


def _unit(rng: np.random.Generator) -> np.ndarray:
    a = rng.uniform(0.0, TWO_PI)
    return np.array([math.cos(a), math.sin(a)])


def synth_featmap(rng: np.random.Generator, height: int, width: int, depth: int) -> np.ndarray:
    """Band-structured feature map: smooth vertical bands plus noise, so
    height-averaging and vertical splits produce distinguishable stripes."""
    rows = np.linspace(0.0, 1.0, height)[:, None, None]
    cols = np.linspace(0.0, 1.0, width)[None, :, None]
    chan = np.arange(depth)[None, None, :] / max(depth - 1, 1)
    base = np.sin(3.0 * math.pi * rows + 2.0 * chan) + np.cos(2.0 * math.pi * cols + chan)
    noise = rng.normal(0.0, 0.05, size=(height, width, depth))
    return (base + noise).astype(np.float32)
