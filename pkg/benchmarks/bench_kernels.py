"""Compare the compiled kernels with the numpy/pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Prints one CSV row per (kernel, backend) with the best wall time and the
speedup over the fallback, after checking both backends agree.
"""

import argparse
import math
import sys
import time

import numpy as np

from su2time import _fallback
from su2time.oracle import param_grid, polar_grid
from su2time.su2 import ModelParams

try:
    from su2time import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    mp = ModelParams(2.0, 1.0, "two")
    params = np.ascontiguousarray(param_grid(mp, 401))
    pts = polar_grid(12, 24)
    dt = (2 * math.pi / mp.gamma) / 800
    n_steps = int(1.5 * 5.1 / dt)
    tx, ty = np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1])
    k0 = np.zeros(tx.size, dtype=np.int64)
    yield "first_hits[tolerance]", lambda m: m.first_hits(True, 2.0, 1.0, params, dt, n_steps, tx, ty, 2e-3, False, k0)
    yield "first_hits[swept]", lambda m: m.first_hits(True, 2.0, 1.0, params, dt, n_steps, tx, ty, 1e-7, True, k0)

    n = 20001
    t = np.linspace(0.0, 5.0, n)
    ux, uy, uz = np.cos(1.3 * t), np.sin(1.3 * t), np.zeros(n)
    h = 5.0 / ((n - 1) // 2)
    yield "propagate_rk4", lambda m: m.propagate_rk4(2.0, ux, uy, uz, h)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; run `python setup.py build_ext --inplace`", file=sys.stderr)
        return 1
    print("kernel,backend,seconds,speedup")
    for name, fn in cases():
        t_py, ref = best_of(lambda: fn(_fallback), args.repeat)
        t_cy, got = best_of(lambda: fn(_kernels), args.repeat)
        for a, b in zip(ref, got):
            if not np.allclose(a, b, rtol=1e-12, atol=1e-12):
                print(f"{name}: backends disagree", file=sys.stderr)
                return 2
        print(f"{name},python,{t_py:.4g},1")
        print(f"{name},cython,{t_cy:.4g},{t_py / t_cy:.3g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
