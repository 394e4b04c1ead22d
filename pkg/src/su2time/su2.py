"""Exact SU(2) arithmetic, the (r, psi, phi) parametrization and the disk projection.

An element of SU(2) is stored by its first row ``(a, b)``; the full matrix is
``[[a, b], [-conj(b), conj(a)]]``.  Operators that differ only in the phase of
the off-diagonal entries are reached in the same minimum time, so most of the
package works with the projection ``x + i y = a`` onto the closed unit disk.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
UNIT_TOL = 1e-12


def wrap_angle(angle: float) -> float:
    """Wrap an angle into [0, 2*pi)."""
    w = math.fmod(angle, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    if w >= TWO_PI:
        w = 0.0
    return w


class Mode(str, enum.Enum):
    THREE = "three"
    TWO = "two"


class Regime(str, enum.Enum):
    THREE_STRONG = "ThreeStrong"
    THREE_EQUAL = "ThreeEqual"
    THREE_WEAK = "ThreeWeak"
    TWO_STRONG = "TwoStrong"
    TWO_MIDDLE = "TwoMiddle"
    TWO_WEAK = "TwoWeak"


@dataclass(frozen=True)
class SU2Operator:
    a: complex
    b: complex

    def __post_init__(self):
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"not special unitary: |a|^2 + |b|^2 = {norm!r}")

    @classmethod
    def identity(cls) -> "SU2Operator":
        return cls(1.0 + 0j, 0j)

    @classmethod
    def from_matrix(cls, m) -> "SU2Operator":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix")
        if abs(m[1, 0] + np.conj(m[0, 1])) > 1e-9 or abs(m[1, 1] - np.conj(m[0, 0])) > 1e-9:
            raise ValueError("matrix is not of the form [[a, b], [-b*, a*]]")
        return cls(complex(m[0, 0]), complex(m[0, 1]))

    def matrix(self) -> np.ndarray:
        a, b = self.a, self.b
        return np.array([[a, b], [-b.conjugate(), a.conjugate()]], dtype=complex)

    def __matmul__(self, other: "SU2Operator") -> "SU2Operator":
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        return SU2Operator(a1 * a2 - b1 * b2.conjugate(), a1 * b2 + b1 * a2.conjugate())

    def dagger(self) -> "SU2Operator":
        return SU2Operator(self.a.conjugate(), -self.b)


@dataclass(frozen=True)
class GroupParams:
    r: float
    psi: float
    phi: float

    def __post_init__(self):
        if not -UNIT_TOL <= self.r <= 1.0 + UNIT_TOL:
            raise ValueError(f"r must lie in [0, 1], got {self.r!r}")


@dataclass(frozen=True)
class DiskPoint:
    x: float
    y: float

    def __post_init__(self):
        if self.x * self.x + self.y * self.y > 1.0 + UNIT_TOL:
            raise ValueError(f"point ({self.x}, {self.y}) is outside the unit disk")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @property
    def r(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def psi(self) -> float:
        return wrap_angle(math.atan2(self.y, self.x))

    @classmethod
    def from_complex(cls, z: complex) -> "DiskPoint":
        # rounding can push closed-form boundary points a hair outside
        m = abs(z)
        if 1.0 < m <= 1.0 + UNIT_TOL:
            z = z / m
        return cls(z.real, z.imag)

    @classmethod
    def polar(cls, r: float, psi: float) -> "DiskPoint":
        return cls.from_complex(cmath.rect(r, psi))


@dataclass(frozen=True)
class ModelParams:
    """Drift ``omega0`` along S_z and control bound ``gamma`` (rad per unit time)."""

    omega0: float
    gamma: float
    mode: Mode = Mode.THREE

    def __post_init__(self):
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if not math.isfinite(self.omega0):
            raise ValueError("omega0 must be finite")
        object.__setattr__(self, "mode", Mode(self.mode))

    @property
    def tol_eq(self) -> float:
        return 1e-9 * max(self.gamma, abs(self.omega0))

    @property
    def regime(self) -> Regime:
        return classify_regime(self)


def params_to_matrix(p: GroupParams) -> SU2Operator:
    r = min(max(p.r, 0.0), 1.0)
    return SU2Operator(cmath.rect(r, p.psi), cmath.rect(math.sqrt(1.0 - r * r), p.phi))


def matrix_to_params(m: SU2Operator) -> GroupParams:
    r = min(abs(m.a), 1.0)
    psi = 0.0 if abs(m.a) <= UNIT_TOL else wrap_angle(cmath.phase(m.a))
    phi = 0.0 if abs(m.b) <= UNIT_TOL else wrap_angle(cmath.phase(m.b))
    return GroupParams(r, psi, phi)


def project(m: SU2Operator) -> DiskPoint:
    return DiskPoint.from_complex(m.a)


def su2_exp(cx: float, cy: float, cz: float, t: float) -> SU2Operator:
    """exp(-i (cx Sx + cy Sy + cz Sz) t) via the half-angle closed form."""
    nu = math.sqrt(cx * cx + cy * cy + cz * cz)
    if nu == 0.0:
        return SU2Operator.identity()
    half = 0.5 * nu * t
    c, s = math.cos(half), math.sin(half) / nu
    return SU2Operator(complex(c, -s * cz), -1j * s * complex(cx, -cy))


def classify_regime(p: ModelParams) -> Regime:
    g, w = p.gamma, abs(p.omega0)
    tol = p.tol_eq
    if p.mode is Mode.THREE:
        if abs(g - w) <= tol:
            return Regime.THREE_EQUAL
        return Regime.THREE_STRONG if g > w else Regime.THREE_WEAK
    if g >= w - tol:
        return Regime.TWO_STRONG
    if g <= w / math.sqrt(3.0) + tol:
        return Regime.TWO_WEAK
    return Regime.TWO_MIDDLE


def distance(m1: SU2Operator, m2: SU2Operator) -> float:
    """Frobenius norm of the difference; each row carries half of it."""
    return math.sqrt(2.0 * (abs(m1.a - m2.a) ** 2 + abs(m1.b - m2.b) ** 2))


def disk_distance(p1: DiskPoint, p2: DiskPoint) -> float:
    return math.hypot(p1.x - p2.x, p1.y - p2.y)
