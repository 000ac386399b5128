"""Apply a projection operator to feature tensors.

Stripes are street-view feature maps averaged over height (optionally in
vertical bands stacked along depth).  Pooling accumulates each image's
weighted stripe columns into its boundary cells, then fuses images by
element-wise max over contributors only: cells no image wrote stay exactly
zero and are tracked in a written mask.

Seeded randomness uses numpy's PCG64 generator throughout, so masks
reproduce across platforms for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DepthMismatch,
    IndivisibleHeight,
    MissingStripe,
    ShapeMismatch,
    WidthMismatch,
    WrongRank,
)
from .projection import ProjectionOperator


@dataclass(frozen=True)
class PooledGrid:
    """Fused top-view tensor plus the mask of cells that received features."""

    values: np.ndarray  # [rows, cols, depth] float32
    written: np.ndarray  # [rows, cols] bool


def stripe_from_featmap(f: np.ndarray, splits: int = 1) -> np.ndarray:
    """Average a [h, w, d] feature map over height into a [w, d*splits] stripe.

    With splits > 1 the map is cut into equal horizontal bands (band 0 at the
    top); each band is height-averaged and the bands are concatenated along
    depth in top-to-bottom order.
    """
    f = np.asarray(f)
    if f.ndim != 3:
        raise WrongRank(f"feature map must be rank 3, got rank {f.ndim}")
    h, w, d = f.shape
    if splits < 1 or h % splits != 0:
        raise IndivisibleHeight(f"height {h} is not divisible by {splits} bands")
    bands = f.astype(np.float64).reshape(splits, h // splits, w, d).mean(axis=1)
    return np.ascontiguousarray(bands.transpose(1, 0, 2).reshape(w, splits * d)).astype(np.float32)


def pool_scene(op: ProjectionOperator, stripes: dict[int, np.ndarray]) -> PooledGrid:
    """Project stripes through the operator and max-fuse across images.

    ``stripes`` maps image ids to [w_i, depth] arrays; every image with
    operator entries must be present, widths must match the operator, and
    all stripes must share one depth.
    """
    ids = op.image_ids()
    depth = None
    for i, s in stripes.items():
        s = np.asarray(s)
        if s.ndim != 2:
            raise WrongRank(f"stripe {i} must be rank 2, got rank {s.ndim}")
        if i < len(op.stripe_widths) and s.shape[0] != op.stripe_widths[i]:
            raise WidthMismatch(
                f"stripe {i} has width {s.shape[0]}, operator expects {op.stripe_widths[i]}"
            )
        if depth is None:
            depth = s.shape[1]
        elif s.shape[1] != depth:
            raise DepthMismatch(f"stripe {i} depth {s.shape[1]} != {depth}")
    for i in ids:
        if i not in stripes:
            raise MissingStripe(f"operator references image {i} with no stripe")
    if depth is None:
        depth = 0

    rows, cols = op.grid.rows, op.grid.cols
    values = np.zeros((rows, cols, depth), dtype=np.float64)
    written = np.zeros((rows, cols), dtype=bool)

    entries = np.asarray(op.entries, dtype=np.float64).reshape(-1, 5)
    for i in ids:
        sel = entries[entries[:, 0] == i]
        r = sel[:, 1].astype(np.intp)
        c = sel[:, 2].astype(np.intp)
        s = sel[:, 3].astype(np.intp)
        w = sel[:, 4]
        stripe = np.asarray(stripes[i], dtype=np.float64)
        acc = np.zeros((rows, cols, depth), dtype=np.float64)
        np.add.at(acc, (r, c), w[:, None] * stripe[s])
        contrib = np.zeros((rows, cols), dtype=bool)
        contrib[r, c] = True
        first = contrib & ~written
        values[first] = acc[first]
        both = contrib & written
        values[both] = np.maximum(values[both], acc[both])
        written |= contrib
    return PooledGrid(values=values.astype(np.float32), written=written)


def concat_topview(pooled: PooledGrid, f0: np.ndarray) -> np.ndarray:
    """Concatenate projected channels with the top-view feature map."""
    f0 = np.asarray(f0)
    if f0.ndim != 3:
        raise ShapeMismatch(f"top-view map must be rank 3, got rank {f0.ndim}")
    if f0.shape[:2] != pooled.values.shape[:2]:
        raise ShapeMismatch(
            f"spatial dims {f0.shape[:2]} do not match grid {pooled.values.shape[:2]}"
        )
    return np.concatenate([pooled.values, f0.astype(np.float32)], axis=2)


def image_dropout_mask(n_images: int, p: float, seed: int) -> np.ndarray:
    """Boolean keep-mask dropping each image independently with probability p.

    If every image would be dropped, one image (picked uniformly from the
    same generator) is kept, so a scene never loses all its views.  Feature
    values are never rescaled.
    """
    if n_images < 1:
        raise ValueError("need at least one image")
    if not (0.0 <= p < 1.0):
        raise ValueError("dropout probability must be in [0, 1)")
    rng = np.random.Generator(np.random.PCG64(seed))
    keep = rng.random(n_images) >= p
    if not keep.any():
        keep[int(rng.integers(n_images))] = True
    return keep


def cutout_mask(height: int, width: int, q: float, seed: int) -> np.ndarray | None:
    """With probability q, a blackout mask covering ~40% of the pixels.

    The mask marks one axis-aligned rectangle of side round(dim * sqrt(0.4))
    per dimension, placed uniformly fully inside the image.  Returns None
    when no cutout is drawn.
    """
    if height < 1 or width < 1:
        raise ValueError("mask dimensions must be positive")
    if not (0.0 <= q <= 1.0):
        raise ValueError("cutout probability must be in [0, 1]")
    rng = np.random.Generator(np.random.PCG64(seed))
    if rng.random() >= q:
        return None
    side = math.sqrt(0.4)
    rect_h = int(round(height * side))
    rect_w = int(round(width * side))
    top = int(rng.integers(0, height - rect_h + 1))
    left = int(rng.integers(0, width - rect_w + 1))
    mask = np.zeros((height, width), dtype=bool)
    mask[top:top + rect_h, left:left + rect_w] = True
    return mask


def _jacobi_eigh(S: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps all off-diagonal pairs until their Frobenius mass drops below
    ``tol`` relative to the matrix norm.  Deterministic and dependency-free,
    which keeps false-color output reproducible across implementations.
    """
    A = np.array(S, dtype=np.float64)
    n = A.shape[0]
    V = np.eye(n)
    norm = max(np.linalg.norm(A), 1e-300)
    for _ in range(100):
        off = math.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = 0.5 * (A[q, q] - A[p, p]) / apq
                if abs(theta) > 1e150:  # theta^2 would overflow; use 1/(2 theta)
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                cth = 1.0 / math.sqrt(t * t + 1.0)
                sth = t * cth
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = cth * rp - sth * rq
                A[q, :] = sth * rp + cth * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = cth * cp - sth * cq
                A[:, q] = sth * cp + cth * cq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = cth * vp - sth * vq
                V[:, q] = sth * vp + cth * vq
    return np.diag(A).copy(), V


def pca_rgb(vectors: np.ndarray) -> np.ndarray:
    """Map [n, d] feature vectors to [n, 3] RGB bytes via their top three
    principal components.

    Each projected dimension is min-max scaled to [0, 255]; degenerate
    (zero-variance or missing) channels render mid-gray 128.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise WrongRank("expected a non-empty [n, d] array")
    n, d = X.shape
    out = np.full((n, 3), 128, dtype=np.uint8)
    Xc = X - X.mean(axis=0)
    cov = (Xc.T @ Xc) / n
    evals, evecs = _jacobi_eigh(cov)
    order = np.argsort(evals)[::-1]
    scale = max(float(evals[order[0]]), 0.0)
    for ch in range(3):
        if ch >= d:
            break
        lam = float(evals[order[ch]])
        if lam <= 1e-12 * max(scale, 1e-30) or lam <= 0.0:
            continue
        comp = evecs[:, order[ch]]
        j = int(np.argmax(np.abs(comp)))
        if comp[j] < 0.0:
            comp = -comp
        proj = Xc @ comp
        lo, hi = float(proj.min()), float(proj.max())
        if hi - lo < 1e-12:
            continue
        out[:, ch] = np.round((proj - lo) / (hi - lo) * 255.0).astype(np.uint8)
    return out
