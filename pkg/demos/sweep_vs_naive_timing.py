"""How the radial sweep scales against the quadratic reference.

Times both visibility algorithms over growing star polygons and prints the
speedup.  The sweep processes 2n endpoint events with a distance-ordered
active set (O(n log n)); the reference checks every edge against every
other edge (O(n^2)).
"""

import time

import numpy as np

from projpool import segments_match, visible_segments_naive, visible_segments_sweep
from projpool.synth import SynthConfig, generate_scene

print(f"{'vertices':>9} {'naive':>10} {'sweep':>10} {'speedup':>8}")
for n in (250, 1000, 4000, 16000):
    scene = generate_scene(SynthConfig(seed=1, n_vertices=n, n_cameras=1,
                                       convex=False, fov=2.0 * np.pi))
    cam, polys = scene.cameras[0], scene.polygons()

    t0 = time.perf_counter()
    slow = visible_segments_naive(cam, polys)
    t_naive = time.perf_counter() - t0

    t0 = time.perf_counter()
    fast = visible_segments_sweep(cam, polys)
    t_sweep = time.perf_counter() - t0

    assert segments_match(slow, fast)
    print(f"{n:>9} {t_naive * 1e3:>8.1f}ms {t_sweep * 1e3:>8.1f}ms "
          f"{t_naive / t_sweep:>7.1f}x")
