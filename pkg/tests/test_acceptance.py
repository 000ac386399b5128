"""Acceptance gate: one test per release criterion, one PASS line each.

Lines are written to the real stdout so they appear even under pytest's
capture; a failed criterion fails its test and prints nothing.
"""

import math
import sys
import time

import numpy as np
import pytest

from projpool import (
    CameraPose,
    broaden_fov,
    min_fov_for_polygon,
    segments_match,
    visible_segments_naive,
    visible_segments_sweep,
)
from projpool.fusion import image_dropout_mask, pool_scene, stripe_from_featmap, concat_topview
from projpool.projection import (
    SamplingStrategy,
    StripeRange,
    build_operator,
    dumps_operator,
    loads_operator,
    sample_weights_avg,
    sample_weights_nearest,
    sample_weights_sum,
)
from projpool.sceneio import dumps_scene, loads_scene, load_tensor, meters_per_pixel, save_tensor
from projpool.synth import SynthConfig, generate_scene, random_polygon, synth_featmap

from conftest import cam, scene_doc, square

TWO_PI = 2.0 * math.pi
FOVS = [math.pi / 3, math.pi / 2, TWO_PI]


def note(line):
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()


def test_criterion_visibility_differential():
    """1,000 seeded scenes, sweep vs naive within 1e-9, under 60 s."""
    start = time.perf_counter()
    rng = np.random.Generator(np.random.PCG64(1))
    for i in range(1000):
        n = int(rng.integers(3, 201))
        config = SynthConfig(seed=i, n_vertices=n, n_cameras=1,
                             occluder_count=int(rng.integers(0, 4)),
                             convex=bool(rng.integers(0, 2)),
                             fov=FOVS[i % 3])
        scene = generate_scene(config)
        c = scene.cameras[0]
        a = visible_segments_naive(c, scene.polygons())
        b = visible_segments_sweep(c, scene.polygons())
        assert segments_match(a, b, endpoint_tol=1e-9, length_rtol=1e-9), \
            f"scene {i} (n={n})"
    elapsed = time.perf_counter() - start
    assert elapsed <= 60.0, f"differential suite took {elapsed:.1f} s"
    note(f"PASS visibility differential: 1000 scenes agree (1e-9), "
         f"{elapsed:.1f} s")


def test_criterion_convex_front_face_exact():
    """100 convex polygons, fov 2pi: exactly the front-facing edges, full."""
    rng = np.random.Generator(np.random.PCG64(2))
    for i in range(100):
        poly = random_polygon(rng, int(rng.integers(3, 40)), convex=True)
        ang = rng.uniform(0.0, TWO_PI)
        pos = rng.uniform(15.0, 400.0) * np.array([math.cos(ang), math.sin(ang)])
        segs = visible_segments_sweep(cam(pos), [poly])
        front = set()
        for e in range(len(poly)):
            a, b = poly.edge(e)
            ba = b - a
            if ba[0] * (pos[1] - a[1]) - ba[1] * (pos[0] - a[0]) > 0.0:
                front.add(e)
        assert {s.edge_index for s in segs} == front, f"case {i}"
        for s in segs:
            assert s.t0 == 0.0 and s.t1 == 1.0, f"case {i} edge {s.edge_index}"
    note("PASS convex analytic check: 100 scenes, front-facing set exact, "
         "full intervals")


def test_criterion_sampling_weight_laws():
    """1e5 ranges: Average sums to 1, Sum to width, Nearest one-hot, Eq.-style
    boundary weights reproduced when the endpoints straddle a cell edge."""
    rng = np.random.Generator(np.random.PCG64(3))
    checked_literal = 0
    for _ in range(100_000):
        w = int(rng.integers(1, 65))
        lo, hi = np.sort(rng.uniform(0.0, w, 2))
        if hi - lo < 1e-9:
            continue
        r = StripeRange(lo, float(rng.uniform(lo, hi)), hi)
        s = sample_weights_sum(r, w)
        assert abs(sum(wt for _, wt in s) - r.width) <= 1e-12
        a = sample_weights_avg(r, w)
        assert abs(sum(wt for _, wt in a) - 1.0) <= 1e-12
        n = sample_weights_nearest(r, w)
        assert len(n) == 1 and n[0][1] == 1.0 and 0 <= n[0][0] < w
        il, ir = math.floor(lo), math.floor(hi)
        if il != ir:
            # literal per-cell weights: ceil(lo)-lo, interior 1s, hi-floor(hi)
            want = {}
            if il + 1 - lo > 0:
                want[il] = il + 1 - lo
            for i in range(il + 1, min(ir, w)):
                want[i] = 1.0
            if ir < w and hi - ir > 0:
                want[ir] = hi - ir
            got = dict(s)
            assert set(got) == set(want)
            for k in want:
                assert abs(got[k] - want[k]) <= 1e-12
            checked_literal += 1
    assert checked_literal > 10_000
    note(f"PASS sampling-weight laws: 1e5 ranges within 1e-12 "
         f"({checked_literal} straddling-literal checks)")


def test_criterion_distance_law():
    """Camera at D, 2D, 4D: Sum totals scale 1 : 1/2 : 1/4, Average stays 1."""
    w = 4096
    totals = {}
    for mult in (1, 2, 4):
        c = cam((5.0, -20.0 * mult), direction=math.pi / 2,
                fov=math.pi / 3, w=w)
        scene = scene_doc(square(), [c])
        sums = build_operator(scene, SamplingStrategy.SUM)
        avgs = build_operator(scene, SamplingStrategy.AVERAGE)
        totals[mult] = sum(e[4] for e in sums.entries if e[1:3] == (3, 7))
        avg_total = sum(e[4] for e in avgs.entries if e[1:3] == (3, 7))
        assert abs(avg_total - 1.0) <= 1e-9
    assert totals[2] / totals[1] == pytest.approx(0.5, rel=0.05)
    assert totals[4] / totals[1] == pytest.approx(0.25, rel=0.05)
    note("PASS distance law: Sum 1:1/2:1/4 within 5%, Average constant "
         "within 1e-9")


def test_criterion_fusion_invariants():
    scene = generate_scene(SynthConfig(seed=61, n_vertices=12, n_cameras=3,
                                       convex=False))
    op = build_operator(scene, SamplingStrategy.AVERAGE)
    rng = np.random.Generator(np.random.PCG64(62))
    stripes = {i: rng.normal(size=(c.stripe_width, 5)).astype(np.float32)
               for i, c in enumerate(scene.cameras)}
    base = pool_scene(op, stripes)

    # permutation invariance, bit-exact
    perm = {0: 1, 1: 2, 2: 0}
    op_p = type(op)(entries=tuple(sorted(((perm[i], r, c, s, w)
                                          for i, r, c, s, w in op.entries),
                                         key=lambda e: e[:4])),
                    grid=op.grid,
                    stripe_widths=tuple(op.stripe_widths[j]
                                        for j in sorted(perm, key=perm.get)),
                    strategy=op.strategy, thickness=op.thickness)
    permuted = pool_scene(op_p, {perm[i]: s for i, s in stripes.items()})
    assert np.array_equal(base.values, permuted.values)
    assert np.array_equal(base.written, permuted.written)

    # constant conservation, exact
    const = pool_scene(op, {i: np.full((w, 3), 2.5, np.float32)
                            for i, w in enumerate(op.stripe_widths)})
    assert np.array_equal(const.values[const.written],
                          np.full_like(const.values[const.written], 2.5))

    # single-image identity, bit-exact
    only = 0
    op_1 = type(op)(entries=tuple(e for e in op.entries if e[0] == only),
                    grid=op.grid, stripe_widths=op.stripe_widths,
                    strategy=op.strategy, thickness=op.thickness)
    got = pool_scene(op_1, {only: stripes[only]})
    ref = np.zeros((op.grid.rows, op.grid.cols, 5), np.float64)
    s64 = stripes[only].astype(np.float64)
    for i, r, c, s, w in op_1.entries:
        ref[r, c] += w * s64[s]
    assert np.array_equal(got.values, ref.astype(np.float32))

    # monotonicity under image removal
    drop = 2
    op_d = type(op)(entries=tuple(e for e in op.entries if e[0] != drop),
                    grid=op.grid, stripe_widths=op.stripe_widths,
                    strategy=op.strategy, thickness=op.thickness)
    reduced = pool_scene(op_d, {i: s for i, s in stripes.items() if i != drop})
    both = base.written & reduced.written
    assert np.all(reduced.values[both] <= base.values[both])
    lost = base.written & ~reduced.written
    assert not reduced.values[lost].any()
    note("PASS fusion invariants: permutation/identity bit-exact, constant "
         "conserved, removal monotone")


def test_criterion_benchmark_50k():
    """50k-vertex star scene: sweep at least 10x faster, results equal."""
    start = time.perf_counter()
    scene = generate_scene(SynthConfig(seed=7, n_vertices=50_000, n_cameras=1,
                                       convex=False, fov=TWO_PI))
    c = scene.cameras[0]
    polys = scene.polygons()
    naive_t, sweep_t = [], []
    for trial in range(5):
        t0 = time.perf_counter()
        ref = visible_segments_naive(c, polys)
        naive_t.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        fast = visible_segments_sweep(c, polys)
        sweep_t.append(time.perf_counter() - t0)
        if trial == 0:
            assert segments_match(ref, fast)
    ratio = np.median(naive_t) / np.median(sweep_t)
    elapsed = time.perf_counter() - start
    assert ratio >= 10.0, f"speedup only {ratio:.1f}x"
    assert elapsed <= 300.0, f"benchmark took {elapsed:.0f} s"
    note(f"PASS benchmark: n=50000, sweep {ratio:.0f}x faster "
         f"(median of 5), {elapsed:.0f} s total")


def test_criterion_meters_per_pixel():
    got = meters_per_pixel(0.0)
    assert abs(got - 0.29858) <= 1e-4
    note(f"PASS resolution formula: meters_per_pixel(0) = {got:.5f}")


def test_criterion_shape_rules():
    s = stripe_from_featmap(np.zeros((6, 8, 4), np.float32), 3)
    assert s.shape == (8, 12)
    scene = generate_scene(SynthConfig(seed=71, n_vertices=8, n_cameras=1))
    op = build_operator(scene, SamplingStrategy.AVERAGE)
    rng = np.random.Generator(np.random.PCG64(72))
    d, k, d0 = 4, 3, 2
    stripes = {i: stripe_from_featmap(
        synth_featmap(rng, 6, w, d), k) for i, w in enumerate(op.stripe_widths)}
    pooled = pool_scene(op, stripes)
    f0 = rng.normal(size=(op.grid.rows, op.grid.cols, d0)).astype(np.float32)
    unified = concat_topview(pooled, f0)
    assert unified.shape == (op.grid.rows, op.grid.cols, d * k + d0)
    note("PASS shape rules: stripe [6,8,4]x3 -> [8,12], concat depth d*k+d0")


def test_criterion_image_dropout_law():
    """N=4, p=0.5: per-image keep rate = 0.5 + 0.5^4/4 within 3 sigma."""
    n, p, trials = 4, 0.5, 100_000
    kept = np.zeros(n)
    for seed in range(trials):
        mask = image_dropout_mask(n, p, seed)
        assert mask.any()
        kept += mask
    rate = kept / trials
    expect = (1.0 - p) + p ** n / n
    sigma = math.sqrt(expect * (1.0 - expect) / trials)
    for i in range(n):
        assert abs(rate[i] - expect) <= 3.0 * sigma, \
            f"image {i}: {rate[i]:.5f} vs {expect:.5f}"
    note(f"PASS image dropout: keep rates {np.round(rate, 4).tolist()} vs "
         f"{expect:.6f} within 3 sigma")


def test_criterion_format_round_trips(tmp_path):
    """200 fixtures per format, load-save byte identical."""
    rng = np.random.Generator(np.random.PCG64(8))
    for i in range(200):
        config = SynthConfig(seed=1000 + i, n_vertices=int(rng.integers(3, 25)),
                             n_cameras=int(rng.integers(1, 4)),
                             occluder_count=int(rng.integers(0, 3)),
                             convex=bool(i % 2))
        scene = generate_scene(config)
        text = dumps_scene(scene)
        assert dumps_scene(loads_scene(text)) == text, f"scene {i}"

        shape = tuple(int(rng.integers(1, 7)) for _ in range(int(rng.integers(1, 4))))
        arr = rng.normal(size=shape).astype(np.float32)
        p = tmp_path / "t.pptf"
        save_tensor(arr, p)
        blob = p.read_bytes()
        save_tensor(load_tensor(p), p)
        assert p.read_bytes() == blob, f"tensor {i}"

        op = build_operator(scene, list(SamplingStrategy)[i % 3],
                            thickness=[1, 3][i % 2])
        doc = dumps_operator(op)
        assert dumps_operator(loads_operator(doc)) == doc, f"operator {i}"
    note("PASS format round trips: 200 scene/tensor/operator fixtures "
         "byte-identical")
