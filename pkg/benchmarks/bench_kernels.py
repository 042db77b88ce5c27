#!/usr/bin/env python
"""Time the compiled and NumPy ball-counting kernels on covering workloads."""

import argparse
import time

import numpy as np

from boglab import kernels
from boglab.geometry import build_covering, make_domain, sample_annulus


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigma", type=float, nargs="+", default=[0.125, 0.0625, 0.03125])
    ap.add_argument("--L", type=float, default=1.75)
    ap.add_argument("--points", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = ["numpy"] + (["cython"] if kernels.BACKEND == "cython" else [])
    rng = np.random.default_rng(0x5EED)
    print(f"{'sigma':>8} {'centers':>9} " + " ".join(f"{b + ' [s]':>12}" for b in backends) + f" {'speedup':>8}")
    for s in args.sigma:
        cover = build_covering(make_domain("annulus3d", 1.0, args.L), s)
        lo, hi = cover.target_radii
        pts = sample_annulus(args.points, lo, hi, False, rng)
        times, results = [], []
        for b in backends:
            t, out = _best_of(lambda: kernels.count_containing(pts, cover.centers, cover.radii, backend=b), args.repeat)
            times.append(t)
            results.append(out)
        if len(results) == 2 and not np.array_equal(results[0], results[1]):
            raise SystemExit(f"backends disagree at sigma={s}")
        speed = times[0] / times[-1]
        print(f"{s:8.5f} {len(cover.centers):9d} " + " ".join(f"{t:12.4f}" for t in times) + f" {speed:8.1f}")


if __name__ == "__main__":
    main()
