import math
import os
import subprocess
import sys

import numpy as np
import pytest

from su2time import _fallback, kernels
from su2time.oracle import param_grid
from su2time.su2 import ModelParams

try:
    from su2time import _kernels
except ImportError:  # extension not built
    _kernels = None

compiled = pytest.mark.skipif(_kernels is None, reason="compiled extension not built")


def random_targets(rng, n):
    r = np.sqrt(rng.uniform(0.0, 1.0, n))
    psi = rng.uniform(-math.pi, math.pi, n)
    return np.ascontiguousarray(r * np.cos(psi)), np.ascontiguousarray(r * np.sin(psi))


def run_both(mp, tx, ty, tol, swept, kmin, n_params=301, n_steps=900):
    params = np.ascontiguousarray(param_grid(mp, n_params), dtype=float)
    dt = (2 * math.pi / mp.gamma) / 400.0
    args = (mp.mode.value == "two", mp.omega0, mp.gamma, params, dt, n_steps, tx, ty, tol, swept,
            np.ascontiguousarray(kmin, dtype=np.int64))
    return _kernels.first_hits(*args), _fallback.first_hits(*args)


@compiled
@pytest.mark.parametrize("mode,w,g", [("three", 1.0, 3.0), ("three", 3.0, 1.0), ("two", 2.0, 1.0), ("two", -0.5, 1.5)])
def test_swept_backends_agree(mode, w, g):
    rng = np.random.default_rng(5)
    tx, ty = random_targets(rng, 300)
    kmin = np.zeros(tx.size, dtype=np.int64)
    (s1, j1), (s2, j2) = run_both(ModelParams(w, g, mode), tx, ty, 1e-7, True, kmin)
    assert np.array_equal(s1, s2) and np.array_equal(j1, j2)
    assert np.all(s1 >= 0)


@compiled
def test_tolerance_backends_agree():
    rng = np.random.default_rng(6)
    mp = ModelParams(1.0, 3.0, "three")
    tx, ty = random_targets(rng, 200)
    (s1, j1), (s2, j2) = run_both(mp, tx, ty, 2e-2, False, np.zeros(tx.size, dtype=np.int64))
    assert np.array_equal(s1, s2) and np.array_equal(j1, j2)


@compiled
def test_direct_grid_targets_agree():
    # targets placed exactly on grid nodes sit on shared cell edges
    mp = ModelParams(2.0, 1.0, "two")
    params = param_grid(mp, 301)
    from su2time.extremals import disk_two_xy

    dt = (2 * math.pi / mp.gamma) / 400.0
    x, y = disk_two_xy(params[::37], mp.omega0, mp.gamma, 0.5 * 120 * dt)
    tx, ty = np.ascontiguousarray(x), np.ascontiguousarray(y)
    (s1, j1), (s2, j2) = run_both(mp, tx, ty, 1e-7, True, np.zeros(tx.size, dtype=np.int64))
    assert np.array_equal(s1, s2) and np.array_equal(j1, j2)
    assert np.all(s1 <= 120)


@compiled
def test_start_steps_respected():
    rng = np.random.default_rng(7)
    mp = ModelParams(3.0, 1.0, "three")
    tx, ty = random_targets(rng, 150)
    kmin = rng.integers(0, 300, tx.size)
    for swept in (True, False):
        tol = 1e-7 if swept else 2e-2
        (s1, j1), (s2, j2) = run_both(mp, tx, ty, tol, swept, kmin)
        assert np.array_equal(s1, s2) and np.array_equal(j1, j2)
        hit = s1 >= 0
        assert np.all(s1[hit] >= kmin[hit])


@compiled
def test_rk4_backends_agree():
    rng = np.random.default_rng(8)
    m = 2 * 250 + 1
    ux, uy, uz = (np.ascontiguousarray(rng.uniform(-1, 1, m)) for _ in range(3))
    a1, c1 = _kernels.propagate_rk4(0.7, ux, uy, uz, 0.01)
    a2, c2 = _fallback.propagate_rk4(0.7, ux, uy, uz, 0.01)
    assert abs(a1 - a2) <= 1e-13 and abs(c1 - c2) <= 1e-13
    assert abs(abs(a1) ** 2 + abs(c1) ** 2 - 1.0) <= 1e-14


def test_rk4_constant_drift():
    m = 2 * 100 + 1
    z = np.zeros(m)
    a, c = kernels.propagate_rk4(2.0, z, z, z, 0.01)
    assert abs(a - np.exp(-0.5j * 2.0 * 1.0)) <= 1e-10 and abs(c) == 0.0


def test_backend_env_override():
    env = dict(os.environ, SU2TIME_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from su2time import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    if _kernels is not None and "SU2TIME_PURE_PYTHON" not in os.environ:
        assert kernels.BACKEND == "cython"


@compiled
def test_benchmark_runs():
    bench = os.path.join(os.path.dirname(__file__), os.pardir, "benchmarks", "bench_kernels.py")
    out = subprocess.run([sys.executable, bench, "--repeat", "1"], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert out.stdout.splitlines()[0] == "kernel,backend,seconds,speedup"
