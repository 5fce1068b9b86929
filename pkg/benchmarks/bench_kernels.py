"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel and problem size with the best wall time of each
backend and the speed-up.
"""

import argparse
import timeit

import numpy as np

from qgabor import _kernels_py
from qgabor.algebra import Lattice2, TransversalSample, _tables, disc_stencil, random_kernel

try:
    from qgabor import _ckernels
except ImportError:
    _ckernels = None


def cube_case(n, seed=0):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-50, 50, size=(n, 2))
    pts = pts[np.argsort(pts[:, 0], kind="stable")]
    return (pts[:, 0].copy(), pts[:, 1].copy(), 1.0, 1e-9)


def convolve_case(half, N, radius, seed=0):
    lat = Lattice2((0.5, 0.5))
    bases = np.array([(a, b) for a in range(-half, half) for b in range(-half, half)])
    sample = TransversalSample.uniform(bases, lat)
    stencil = disc_stencil(lat, radius)
    f = random_kernel(sample, stencil, N, seed=seed)
    g = random_kernel(sample, stencil, N, seed=seed + 1)
    nbr, sumidx, phase = _tables(sample, stencil)
    return (f.dense(), f.present.astype(np.uint8), g.dense(), g.present.astype(np.uint8),
            nbr.astype(np.intp), sumidx.astype(np.intp), phase, np.arange(len(sample), dtype=np.intp))


def best(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ns = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the fallback is timed")
    cases = [
        ("max_cube_count", f"n={n}", "max_cube_count", cube_case(n)) for n in (2_000, 20_000)
    ] + [
        ("twisted_convolve", f"bases={(2 * h) ** 2} N={N} r={r}", "twisted_convolve_dense", convolve_case(h, N, r))
        for h, N, r in ((6, 1, 1.5), (10, 2, 2.0))
    ]
    print(f"{'kernel':<18} {'case':<26} {'python s':>10} {'cython s':>10} {'speed-up':>9}")
    for label, desc, attr, args in cases:
        tp = best(getattr(_kernels_py, attr), args, ns.repeat)
        if _ckernels is None:
            print(f"{label:<18} {desc:<26} {tp:>10.4f} {'-':>10} {'-':>9}")
            continue
        tc = best(getattr(_ckernels, attr), args, ns.repeat)
        print(f"{label:<18} {desc:<26} {tp:>10.4f} {tc:>10.4f} {tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
