import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from su2time.su2 import (
    DiskPoint,
    GroupParams,
    ModelParams,
    Regime,
    SU2Operator,
    classify_regime,
    disk_distance,
    distance,
    matrix_to_params,
    params_to_matrix,
    project,
    su2_exp,
    wrap_angle,
)

angles = st.floats(-10.0, 10.0, allow_nan=False)
radii = st.floats(0.0, 1.0, allow_nan=False)
coef = st.floats(-5.0, 5.0, allow_nan=False)


def random_op(r, psi, phi):
    return params_to_matrix(GroupParams(r, psi, phi))


def test_identity_params():
    p = matrix_to_params(SU2Operator.identity())
    assert (p.r, p.psi, p.phi) == (1.0, 0.0, 0.0)


def test_diagonal_params():
    lam = 0.7
    p = matrix_to_params(SU2Operator(cmath.exp(1j * lam), 0j))
    assert p.r == pytest.approx(1.0, abs=1e-15)
    assert p.psi == pytest.approx(lam, abs=1e-15)
    assert p.phi == 0.0


def test_project_examples():
    assert project(SU2Operator.identity()) == DiskPoint(1.0, 0.0)
    assert project(SU2Operator(0j, 1.0 + 0j)) == DiskPoint(0.0, 0.0)
    a = cmath.rect(0.6, 0.3)
    p = project(SU2Operator(a, math.sqrt(1 - 0.36) + 0j))
    assert p.x == pytest.approx(0.6 * math.cos(0.3), abs=1e-15)
    assert p.y == pytest.approx(0.6 * math.sin(0.3), abs=1e-15)


def test_su2_exp_examples():
    assert distance(su2_exp(0, 0, 0, 3.0), SU2Operator.identity()) == 0.0
    c, t = 1.3, 0.8
    m = su2_exp(0, 0, c, t)
    assert abs(m.a - cmath.exp(-0.5j * c * t)) <= 1e-15
    assert abs(m.b) == 0.0


def test_su2_exp_matches_extremal_generator():
    g, al, phi, t = 2.0, 0.4, 0.9, 1.7
    s = math.sqrt(1 - al * al)
    m = su2_exp(g * s * math.cos(phi), g * s * math.sin(phi), g * al, t)
    tau = 0.5 * t
    a_ref = math.cos(g * tau) - 1j * al * math.sin(g * tau)
    b_ref = -1j * s * math.sin(g * tau) * cmath.exp(-1j * phi)
    assert abs(m.a - a_ref) <= 1e-12 and abs(m.b - b_ref) <= 1e-12


def test_su2_exp_matches_matrix_exponential():
    from scipy.linalg import expm

    cx, cy, cz, t = 0.3, -1.1, 0.7, 2.3
    sx = np.array([[0, 1], [1, 0]]) / 2
    sy = np.array([[0, -1j], [1j, 0]]) / 2
    sz = np.array([[1, 0], [0, -1]]) / 2
    ref = expm(-1j * t * (cx * sx + cy * sy + cz * sz))
    assert np.max(np.abs(su2_exp(cx, cy, cz, t).matrix() - ref)) <= 1e-12


def test_regime_examples():
    assert classify_regime(ModelParams(1.0, 3.0, "three")) is Regime.THREE_STRONG
    assert classify_regime(ModelParams(3.0, 1.0, "three")) is Regime.THREE_WEAK
    assert classify_regime(ModelParams(2.0, 1.0, "two")) is Regime.TWO_WEAK
    assert classify_regime(ModelParams(1.2, 1.0, "two")) is Regime.TWO_MIDDLE
    assert classify_regime(ModelParams(-1.0, 1.0, "three")) is Regime.THREE_EQUAL


def test_regime_equality_tolerance():
    assert ModelParams(1.0, 1.0 + 5e-10, "three").regime is Regime.THREE_EQUAL
    assert ModelParams(1.0, 1.0 + 5e-9, "three").regime is Regime.THREE_STRONG


def test_distance_examples():
    eye = SU2Operator.identity()
    assert distance(eye, eye) == 0.0
    assert disk_distance(DiskPoint(1, 0), DiskPoint(-1, 0)) == 2.0
    assert distance(eye, SU2Operator(-1.0 + 0j, 0j)) == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-15)


def test_invalid_values_rejected():
    with pytest.raises(ValueError):
        DiskPoint(1.0, 0.1)
    with pytest.raises(ValueError):
        ModelParams(1.0, 0.0)
    with pytest.raises(ValueError):
        SU2Operator(1.0 + 0j, 0.5 + 0j)
    with pytest.raises(ValueError):
        GroupParams(1.5, 0.0, 0.0)


def test_wrap_angle_range():
    for a in (-7.0, -math.pi, 0.0, math.pi, 2 * math.pi, 13.0):
        w = wrap_angle(a)
        assert 0.0 <= w < 2 * math.pi
        assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-12)


@given(radii, angles, angles)
def test_params_unitary(r, psi, phi):
    m = random_op(r, psi, phi)
    assert abs(abs(m.a) ** 2 + abs(m.b) ** 2 - 1.0) <= 1e-12


@given(st.floats(1e-6, 1.0 - 1e-6), angles, angles)
def test_params_round_trip(r, psi, phi):
    m = random_op(r, psi, phi)
    assert distance(params_to_matrix(matrix_to_params(m)), m) <= 1e-12


@given(radii, angles, angles, angles)
def test_projection_ignores_phi(r, psi, phi1, phi2):
    assert project(random_op(r, psi, phi1)) == project(random_op(r, psi, phi2))


@given(coef, coef, coef, st.floats(-3, 3), st.floats(-3, 3))
def test_exp_group_law(cx, cy, cz, t1, t2):
    lhs = su2_exp(cx, cy, cz, t1) @ su2_exp(cx, cy, cz, t2)
    assert distance(lhs, su2_exp(cx, cy, cz, t1 + t2)) <= 1e-12


@given(radii, angles, angles, radii, angles, angles)
def test_distance_metric(r1, p1, f1, r2, p2, f2):
    m1, m2 = random_op(r1, p1, f1), random_op(r2, p2, f2)
    d = distance(m1, m2)
    assert d >= 0.0
    assert d == pytest.approx(distance(m2, m1), abs=1e-15)
    assert distance(m1, m1) == 0.0


@given(radii, angles, angles)
def test_product_with_dagger_is_identity(r, psi, phi):
    m = random_op(r, psi, phi)
    assert distance(m @ m.dagger(), SU2Operator.identity()) <= 1e-12
