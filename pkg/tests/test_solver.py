import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from su2time.extremals import controls, disk_three, disk_two, state
from su2time.frontline import admissible_range
from su2time.solver import (
    diagonal_min_time,
    diagonal_target,
    diameter,
    min_time,
    min_time_operator,
    min_time_three,
    min_time_three_equal,
    min_time_two,
    replay,
    scan_roots,
    separatrix_frequency,
    separatrix_two,
    swap_min_time,
    synthesize_controls,
    trajectory_xy,
)
from su2time.su2 import (
    DiskPoint,
    GroupParams,
    ModelParams,
    Regime,
    disk_distance,
    params_to_matrix,
    project,
)

SQ3 = math.sqrt(3.0)
CONFIGS = [(3.0, 1.0), (1.0, 1.0), (1.0, 3.0), (1.0, 1.2), (1.0, 2.0), (2.0, -1.0), (1.0, 0.0)]


def disk_points():
    r = st.floats(0.0, 0.999)
    psi = st.floats(-math.pi, math.pi)
    return st.builds(lambda a, b: DiskPoint.polar(math.sqrt(a), b), r, psi)


def test_three_examples():
    mp = ModelParams(1.0, 3.0, "three")
    assert min_time_three(DiskPoint(1.0, 0.0), mp).t_f == 0.0
    sol = min_time_three(DiskPoint(0.0, 0.0), mp)
    assert sol.t_f == pytest.approx(math.pi / 3.0, abs=1e-12) and sol.param == pytest.approx(0.0, abs=1e-12)
    sol = min_time_three(DiskPoint(-0.5, SQ3 / 2), mp)
    assert sol.t_f == pytest.approx(2 * math.pi / 3, abs=1e-7)
    assert sol.residual <= 1e-9


def test_three_rounded_collapse_point_lies_inside():
    # six-digit rounding moves the point off the circle and earlier
    sol = min_time_three(DiskPoint(-0.5, 0.866025), ModelParams(1.0, 3.0, "three"))
    assert 2.09 < sol.t_f < 2 * math.pi / 3


def test_equal_examples():
    mp = ModelParams(-1.0, 1.0, "three")
    assert min_time_three_equal(DiskPoint(0.0, 0.0), mp).t_f == pytest.approx(math.pi, abs=1e-12)
    mp = ModelParams(1.0, 1.0, "three")
    assert min_time_three_equal(DiskPoint(0.0, 0.0), mp).t_f == pytest.approx(math.pi, abs=1e-12)
    assert min_time_three_equal(DiskPoint(1.0, 0.0), mp).t_f == 0.0
    with pytest.raises(ValueError):
        min_time_three_equal(DiskPoint(0.0, 0.0), ModelParams(1.0, 2.0, "three"))


def test_two_examples():
    mp = ModelParams(0.7, 1.0, "two")
    sol = min_time_two(DiskPoint(0.0, 0.0), mp)
    assert sol.t_f == pytest.approx(math.pi, abs=1e-12) and sol.param == pytest.approx(0.7, abs=1e-12)
    sol = min_time_two(DiskPoint(0.0, 1.0), ModelParams(1.0, 1.0, "two"))
    assert sol.t_f == pytest.approx(math.pi * (1 + math.sqrt(7)) / 2, abs=1e-7)
    sol = min_time_two(DiskPoint(0.0, 1.0), ModelParams(0.0, 1.0, "two"))
    assert sol.t_f == pytest.approx(math.pi * SQ3, abs=1e-7)
    assert min_time_two(DiskPoint(1.0, 0.0), mp).t_f == 0.0


def test_outside_target_rejected():
    with pytest.raises(ValueError):
        min_time(SimpleNamespace(x=1.1, y=0.0), ModelParams(1.0, 1.0))


def test_wrong_mode_rejected():
    with pytest.raises(ValueError):
        min_time_two(DiskPoint(0.0, 0.0), ModelParams(1.0, 1.0, "three"))


def test_diameter_examples():
    d = diameter(ModelParams(1.0, 3.0, "three"))
    assert d.t_max == pytest.approx(2 * math.pi / 3, abs=1e-15)
    assert (d.worst_point.x, d.worst_point.y) == pytest.approx((-0.5, SQ3 / 2), abs=1e-15)
    assert diameter(ModelParams(3.0, 1.0, "three")).t_max == pytest.approx(4 * math.pi / 3, abs=1e-15)
    d = diameter(ModelParams(2.0, 1.0, "two"))
    assert d.t_max == pytest.approx(0.5 * math.pi * (1 + math.sqrt(5)), abs=1e-15)
    assert d.regime is Regime.TWO_WEAK and d.open_limit
    assert d.worst_param == pytest.approx(1.5, abs=1e-15)
    d = diameter(ModelParams(1.2, 1.0, "two"))
    assert d.t_max == pytest.approx(4.8 * math.pi / 2.44, abs=1e-15)
    assert d.worst_param == pytest.approx(0.5 * (1.44 + 1) / 1.2, abs=1e-15)


def test_diameter_regime_override():
    mp = ModelParams(1.0, 1.0, "two")
    assert diameter(mp, Regime.TWO_MIDDLE).t_max == pytest.approx(diameter(mp).t_max, abs=1e-12)
    with pytest.raises(ValueError):
        diameter(mp, Regime.THREE_WEAK)
    with pytest.raises(ValueError):
        diameter(ModelParams(0.0, 1.0, "two"), Regime.TWO_WEAK)


def test_worst_points_are_worst():
    for g, w in CONFIGS:
        for mode in ("three", "two"):
            mp = ModelParams(w, g, mode)
            d = diameter(mp)
            if d.open_limit or d.worst_point == DiskPoint(1.0, 0.0):
                continue
            assert min_time(d.worst_point, mp).t_f == pytest.approx(d.t_max, abs=1e-6)


def test_open_limit_approached():
    mp = ModelParams(3.0, 1.0, "three")
    d = diameter(mp)
    c = d.worst_point
    near = DiskPoint(c.x * (1 - 1e-6), c.y * (1 - 1e-6))
    assert d.t_max - 1e-3 < min_time(near, mp).t_f <= d.t_max + 1e-9


def test_diagonal_examples():
    sol = diagonal_min_time(math.pi / 2, ModelParams(2.0, 2.0, "three"))
    assert sol.t_f == pytest.approx(3 * math.pi / 4, abs=1e-15)
    assert diagonal_min_time(math.pi, ModelParams(0.0, 1.5, "two")).t_f == pytest.approx(2 * math.pi / 1.5, abs=1e-12)
    for w in (-1.0, 0.0, 0.5, 2.0):
        mp = ModelParams(w, 1.3, "two")
        ref = math.pi * (w + math.sqrt(4 * w * w + 3 * 1.3 ** 2)) / (w * w + 1.3 ** 2)
        assert diagonal_min_time(math.pi / 2, mp).t_f == pytest.approx(ref, abs=1e-12)
    assert diagonal_min_time(0.0, ModelParams(1.0, 2.0, "three")).t_f == 0.0


def test_diagonal_point_is_reached():
    for g, w in CONFIGS:
        for mode in ("three", "two"):
            mp = ModelParams(w, g, mode)
            for lam in (0.4, math.pi / 2, 2.5, -1.2):
                sol = diagonal_min_time(lam, mp)
                assert sol.residual <= 1e-9
                assert sol.t_f == pytest.approx(min_time(diagonal_target(lam), mp).t_f, abs=1e-6)


def test_swap_examples():
    for mode in ("three", "two"):
        mp = ModelParams(0.4, 2.0, mode)
        sol = swap_min_time(mp)
        assert sol.t_f == pytest.approx(math.pi / 2, abs=1e-15)
        assert abs(state(sol.extremal(), mp, sol.t_f).a) <= 1e-15
    mp = ModelParams(0.4, 2.0, "two")
    ts = np.linspace(0.0, math.pi / 2, 9)
    x, y = trajectory_xy(mp.omega0, mp, ts)
    ref = np.abs(np.cos(ts)) * np.exp(-0.2j * ts)
    assert np.max(np.abs(x + 1j * y - ref)) <= 1e-15


def test_separatrix():
    center, radius = separatrix_two(ModelParams(1.0, 1.0, "two"))
    assert (center.x, center.y, radius) == pytest.approx((0.5, 0.0, 0.5), abs=1e-15)
    for g, w in ((1.0, 2.0), (3.0, -1.0), (1.0, 1.2)):
        mp = ModelParams(w, g, "two")
        center, radius = separatrix_two(mp)
        assert center.x + radius == pytest.approx(1.0, abs=1e-15)
        for t in np.linspace(0.0, 20.0, 41):
            p = disk_two(separatrix_frequency(mp), mp, float(t))
            assert abs(disk_distance(p, center) - radius) <= 1e-12
    with pytest.raises(ValueError):
        separatrix_two(ModelParams(0.0, 1.0, "two"))


def test_synthesized_pulse():
    mp = ModelParams(0.0, 1.5, "two")
    samples = synthesize_controls(swap_min_time(mp), mp, 11)
    assert all(s.norm == pytest.approx(1.5, abs=1e-15) for s in samples)
    assert len({(round(s.ux, 12), round(s.uy, 12)) for s in samples}) == 1
    with pytest.raises(ValueError):
        synthesize_controls(swap_min_time(mp), mp, 1)


def test_replay_reaches_target():
    for g, w in ((3.0, 1.0), (1.0, 2.0)):
        for mode in ("three", "two"):
            mp = ModelParams(w, g, mode)
            tgt = DiskPoint(-0.3, 0.45)
            sol = min_time(tgt, mp)
            n = 2 * int(math.ceil(4096 * g * sol.t_f)) + 1
            assert disk_distance(project(replay(synthesize_controls(sol, mp, n), mp)), tgt) <= 1e-6
            # spline path for an even sample count
            coarse = synthesize_controls(sol, mp, 2000)
            assert disk_distance(project(replay(coarse, mp, steps=4000)), tgt) <= 1e-6


def test_min_time_operator_matches_phase():
    mp = ModelParams(2.0, 1.0, "three")
    m = params_to_matrix(GroupParams(0.6, 1.1, -0.4))
    sol = min_time_operator(m, mp)
    got = state(sol.extremal(), mp, sol.t_f)
    assert abs(got.a - m.a) <= 1e-9 and abs(got.b - m.b) <= 1e-9


def test_scan_roots_double_and_touching():
    def f(x):
        return (x - 1.0) ** 2 - 1e-8

    grid = np.linspace(0.0, 2.0, 11)
    roots = scan_roots(f, grid, [f(x) for x in grid])
    assert roots == pytest.approx([1.0 - 1e-4, 1.0 + 1e-4], abs=1e-12)
    grid = np.linspace(-0.45, 2.55, 31) * math.pi
    roots = scan_roots(np.sin, grid, np.sin(grid))
    assert roots == pytest.approx([0.0, math.pi, 2 * math.pi], abs=1e-12)


@given(st.sampled_from(CONFIGS), disk_points())
def test_three_solution_properties(m, tgt):
    g, w = m
    mp = ModelParams(w, g, "three")
    sol = min_time_three(tgt, mp)
    assert sol.residual <= 1e-9 and sol.t_f >= 0.0
    assert disk_distance(disk_three(sol.param, mp, sol.t_f), tgt) <= 1e-9
    assert sol.t_f <= diameter(mp).t_max + 1e-9
    if sol.t_f > 1e-6:
        assert any(lo - 1e-6 <= sol.param <= hi + 1e-6 for lo, hi in admissible_range(mp, sol.t_f))


@given(st.sampled_from(CONFIGS), disk_points())
def test_two_solution_properties(m, tgt):
    g, w = m
    mp = ModelParams(w, g, "two")
    sol = min_time_two(tgt, mp)
    assert sol.residual <= 1e-9 and sol.t_f >= 0.0
    assert disk_distance(disk_two(sol.param, mp, sol.t_f), tgt) <= 1e-9
    assert sol.t_f <= diameter(mp).t_max + 1e-9


@given(st.sampled_from([1.0, -1.0, 2.5, -0.3]), disk_points())
def test_equal_closed_form_matches_scan(w, tgt):
    mp = ModelParams(w, abs(w), "three")
    assert min_time_three_equal(tgt, mp).t_f == pytest.approx(min_time_three(tgt, mp).t_f, abs=1e-9)


@given(st.floats(0.2, 3.0), st.floats(-3.0, 3.0))
def test_diameter_continuous_across_regimes(g, w):
    for mode in ("three", "two"):
        lo = diameter(ModelParams(w, g * (1 - 1e-8), mode)).t_max
        hi = diameter(ModelParams(w, g * (1 + 1e-8), mode)).t_max
        assert abs(hi - lo) <= 1e-6 * max(1.0, hi)


@given(st.sampled_from(CONFIGS), st.floats(0.0, 1.0), st.floats(-1.0, 1.0))
def test_controls_of_solution_saturate(m, frac, al):
    g, w = m
    mp = ModelParams(w, g, "three")
    sol = min_time_three(DiskPoint.polar(0.5, 3 * al), mp)
    assert controls(sol.extremal(), mp, frac * sol.t_f).norm == pytest.approx(g, abs=1e-12)
