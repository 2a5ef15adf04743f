#!/usr/bin/env python3
"""Benchmark the compiled kernel against the pure-Python fallback.

Times the two hot paths (the accumulate/hold schedule and batched point
transforms) on both implementations, verifies the outputs are
bit-identical, and prints a speedup table.

Usage: python benchmarks/bench_kernels.py [--points 262144] [--reps 20]
"""

import argparse
import math
import time

import numpy as np

from tdmac import kernels
from tdmac.cell import MacCellConfig, derive
from tdmac.registration import (
    CoordNormalization,
    _prepare_weights,
    build_rotation,
    build_translation_scaling,
    compose,
)


def time_call(fn, reps):
    best = math.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_schedule(impls, reps):
    cfg = MacCellConfig()
    d = derive(cfg)
    n = 512
    step = 2.0 * math.pi * 0.6e6 * 1e-8
    x = [cfg.v_fullscale * math.sin(j * step) for j in range(n)]
    ticks = [10] * n
    signs = [1] * n
    results = {}
    for name, impl in impls.items():
        results[name] = time_call(
            lambda impl=impl: impl.run_schedule(d, x, ticks, signs, 0.0, True),
            reps,
        )
    return "512-sample sine schedule", results


def bench_transform(impls, n_points, reps, ideal):
    cfg = MacCellConfig()
    d = derive(cfg)
    t = compose(
        [
            build_rotation("z", math.radians(10.0)),
            build_translation_scaling((1, 1, 1), (3.5, -2.25, 1.0)),
        ]
    )
    norm = CoordNormalization.for_dims((64, 64, 64), cfg)
    w, ticks, signs = _prepare_weights(t, norm, 1e-5, cfg)
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, 63, size=(n_points, 3))
    results = {}
    for name, impl in impls.items():
        results[name] = time_call(
            lambda impl=impl: impl.transform_points(
                d, pts, w, ticks, signs, norm.offset, norm.scale,
                norm.u_const, 1e-5, ideal, 0,
            ),
            reps,
        )
    label = f"{n_points} point transforms ({'ideal' if ideal else 'cell'} backend)"
    return label, results


def check_equal(results):
    outs = [out for _, out in results.values()]
    if len(outs) < 2:
        return "n/a (one kernel)"
    a, b = outs[0], outs[1]
    if isinstance(a, tuple):
        return "bit-identical" if a == b else "MISMATCH"
    return "bit-identical" if np.array_equal(a, b) else "MISMATCH"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=64**3)
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()

    impls = kernels.implementations()
    print(f"kernels available: {', '.join(impls)}")
    rows = [
        bench_schedule(impls, max(args.reps, 20)),
        bench_transform(impls, args.points, args.reps, ideal=True),
        bench_transform(impls, args.points, args.reps, ideal=False),
    ]
    print(f"{'case':<44} {'python':>10} {'compiled':>10} {'speedup':>8}  agreement")
    for label, results in rows:
        t_py = results["python"][0]
        line = f"{label:<44} {t_py * 1e3:>8.2f}ms"
        if "compiled" in results:
            t_c = results["compiled"][0]
            line += f" {t_c * 1e3:>8.2f}ms {t_py / t_c:>7.1f}x"
        else:
            line += f" {'-':>10} {'-':>8}"
        print(f"{line}  {check_equal(results)}")


if __name__ == "__main__":
    main()
