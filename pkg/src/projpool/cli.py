"""Batch front door: visibility reports, operator compilation, pooling,
synthetic scenes, benchmarking, and false-color visualization.

Exit codes: 0 success, 2 invalid input or validation failure, 3 internal
generation failure.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import fusion, projection, sceneio, synth
from .errors import GenerationError, ProjpoolError
from .geometry import segments_match, visible_segments_naive, visible_segments_sweep


def _fmt(x: float) -> str:
    return "%.17g" % x


def cmd_visibility(args) -> int:
    scene = sceneio.load_scene(args.scene)
    if not (0 <= args.camera < len(scene.cameras)):
        raise sceneio.ValidationError(f"no camera with id {args.camera}")
    algo = visible_segments_sweep if args.algorithm == "sweep" else visible_segments_naive
    segments = algo(scene.cameras[args.camera], scene.polygons())
    for s in segments:
        print(
            f"{s.polygon_id} {s.edge_index} {_fmt(s.t0)} {_fmt(s.t1)} "
            f"{_fmt(s.p0[0])} {_fmt(s.p0[1])} {_fmt(s.p1[0])} {_fmt(s.p1[1])}"
        )
    return 0


def cmd_build_op(args) -> int:
    scene = sceneio.load_scene(args.scene)
    strategy = projection.SamplingStrategy.parse(args.strategy)
    op = projection.build_operator(scene, strategy, thickness=args.thickness,
                                   visibility=args.visibility)
    projection.save_operator(op, args.out)
    return 0


def _load_stripes(scene, features_dir: Path, splits: int):
    stripes = {}
    for i, cam in enumerate(scene.cameras):
        path = features_dir / f"sv_{i}.pptf"
        if not path.exists():
            raise sceneio.ValidationError(f"missing feature file for camera id {i}: {path}")
        stripes[i] = fusion.stripe_from_featmap(sceneio.load_tensor(path), splits)
    return stripes


def cmd_pool(args) -> int:
    scene = sceneio.load_scene(args.scene)
    op = projection.load_operator(args.op)
    stripes = _load_stripes(scene, Path(args.features), args.splits)
    if args.dropout is not None:
        keep = fusion.image_dropout_mask(len(scene.cameras), args.dropout, args.seed)
        stripes = {i: s for i, s in stripes.items() if keep[i]}
        op = projection.ProjectionOperator(
            entries=tuple(e for e in op.entries if keep[e[0]]),
            grid=op.grid, stripe_widths=op.stripe_widths,
            strategy=op.strategy, thickness=op.thickness,
        )
    pooled = fusion.pool_scene(op, stripes)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sceneio.save_tensor(pooled.values, out_dir / "pooled.pptf")
    if args.topview:
        unified = fusion.concat_topview(pooled, sceneio.load_tensor(args.topview))
        sceneio.save_tensor(unified, out_dir / "unified.pptf")
    return 0


def cmd_synth(args) -> int:
    config = synth.SynthConfig(
        seed=args.seed, n_vertices=args.vertices, n_cameras=args.cameras,
        occluder_count=args.occluders, rows=args.rows, cols=args.cols,
        convex=not args.star, stripe_width=args.stripe_width, fov=args.fov,
    )
    scene = synth.generate_scene(config)
    sceneio.save_scene(scene, args.out)
    if args.features_out:
        rng = np.random.Generator(np.random.PCG64(args.seed + 1))
        out = Path(args.features_out)
        out.mkdir(parents=True, exist_ok=True)
        for i, cam in enumerate(scene.cameras):
            f = synth.synth_featmap(rng, args.feature_height, cam.stripe_width,
                                    args.feature_depth)
            sceneio.save_tensor(f, out / f"sv_{i}.pptf")
        tv = synth.synth_featmap(rng, scene.grid.rows, scene.grid.cols,
                                 args.feature_depth)
        # top-view maps are [rows, cols, depth] already
        sceneio.save_tensor(tv, out / "tv.pptf")
    return 0


def cmd_bench(args) -> int:
    if args.trials < 1:
        raise sceneio.ValidationError("need at least one trial")
    config = synth.SynthConfig(seed=args.seed, n_vertices=args.vertices,
                               n_cameras=1, convex=False, fov=2.0 * np.pi)
    scene = synth.generate_scene(config)
    cam = scene.cameras[0]
    polys = scene.polygons()
    naive_t, sweep_t = [], []
    for trial in range(args.trials):
        t0 = time.perf_counter()
        ref = visible_segments_naive(cam, polys)
        naive_t.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        fast = visible_segments_sweep(cam, polys)
        sweep_t.append(time.perf_counter() - t0)
        if trial == 0 and not segments_match(ref, fast):
            raise RuntimeError("sweep and naive visibility disagree; refusing to time")
    naive_us = statistics.median(naive_t) * 1e6
    sweep_us = statistics.median(sweep_t) * 1e6
    print(f"{naive_us:.0f}\t{sweep_us:.0f}")
    return 0


def cmd_viz_pca(args) -> int:
    arr = sceneio.load_tensor(args.tensor)
    if arr.ndim == 2:
        h, w = arr.shape[0], 1
        flat = arr
    elif arr.ndim == 3:
        h, w = arr.shape[:2]
        flat = arr.reshape(h * w, arr.shape[2])
    else:
        raise sceneio.ValidationError(f"expected rank 2 or 3 tensor, got rank {arr.ndim}")
    if args.zero_white:
        nonzero = np.any(flat != 0.0, axis=1)
        rgb = np.full((flat.shape[0], 3), 255, dtype=np.uint8)
        if nonzero.any():
            rgb[nonzero] = fusion.pca_rgb(flat[nonzero])
    else:
        rgb = fusion.pca_rgb(flat)
    with open(args.out, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (w, h))
        f.write(rgb.tobytes())
    return 0


def cmd_mpp(args) -> int:
    print(f"{sceneio.meters_per_pixel(args.lat):.5f}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="projpool")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("visibility", help="report visible wall segments for one camera")
    p.add_argument("scene")
    p.add_argument("--camera", type=int, default=0)
    p.add_argument("--algorithm", choices=["sweep", "naive"], default="sweep")
    p.set_defaults(func=cmd_visibility)

    p = sub.add_parser("build-op", help="compile a scene into a projection operator")
    p.add_argument("scene")
    p.add_argument("--strategy", default="average")
    p.add_argument("--thickness", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--visibility", choices=["sweep", "naive"], default="sweep",
                   help="debug: force the quadratic visibility path")
    p.set_defaults(func=cmd_build_op)

    p = sub.add_parser("pool", help="project feature maps through an operator")
    p.add_argument("scene")
    p.add_argument("--op", required=True)
    p.add_argument("--features", required=True, help="directory with sv_<id>.pptf files")
    p.add_argument("--splits", type=int, default=1)
    p.add_argument("--topview", default=None)
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("synth", help="generate a synthetic scene")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vertices", type=int, default=12)
    p.add_argument("--cameras", type=int, default=2)
    p.add_argument("--occluders", type=int, default=0)
    p.add_argument("--rows", type=int, default=32)
    p.add_argument("--cols", type=int, default=32)
    p.add_argument("--star", action="store_true", help="star-shaped non-convex outline")
    p.add_argument("--stripe-width", type=int, default=16)
    p.add_argument("--fov", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--features-out", default=None)
    p.add_argument("--feature-height", type=int, default=6)
    p.add_argument("--feature-depth", type=int, default=4)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="time naive vs sweep visibility")
    p.add_argument("--vertices", type=int, default=10000)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("viz-pca", help="false-color a tensor into a PPM image")
    p.add_argument("tensor")
    p.add_argument("--out", required=True)
    p.add_argument("--zero-white", action="store_true",
                   help="render all-zero vectors as white")
    p.set_defaults(func=cmd_viz_pca)

    p = sub.add_parser("mpp", help="meters per pixel at a latitude (zoom 19)")
    p.add_argument("--lat", type=float, required=True)
    p.set_defaults(func=cmd_mpp)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GenerationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (ProjpoolError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
