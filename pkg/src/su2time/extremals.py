"""Candidate optimal (extremal) controls, trajectories and costates.

Three controls: the transverse control rotates at the drift frequency and the
longitudinal one is constant, parametrized by ``alpha`` in [-1, 1].  Two
controls: a transverse control of full strength rotating at any frequency
``omega``.  The off-diagonal phase ``phi`` never changes the disk projection.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .su2 import DiskPoint, Mode, ModelParams, SU2Operator, wrap_angle


@dataclass(frozen=True)
class ThreeControlExtremal:
    alpha: float
    phi: float = 0.0

    def __post_init__(self):
        if not -1.0 - 1e-12 <= self.alpha <= 1.0 + 1e-12:
            raise ValueError(f"alpha must lie in [-1, 1], got {self.alpha!r}")
        object.__setattr__(self, "alpha", min(max(self.alpha, -1.0), 1.0))


@dataclass(frozen=True)
class TwoControlExtremal:
    omega: float
    phi: float = 0.0

    def b(self, mp: ModelParams) -> float:
        return mp.omega0 - self.omega

    def a(self, mp: ModelParams) -> float:
        return math.hypot(mp.omega0 - self.omega, mp.gamma)


@dataclass(frozen=True)
class ControlSample:
    t: float
    ux: float
    uy: float
    uz: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.ux * self.ux + self.uy * self.uy + self.uz * self.uz)


@dataclass(frozen=True)
class Costate:
    bx: float
    by: float
    bz: float
    mu: float
    phase: float
    degenerate: bool = False


def _require(mp: ModelParams, mode: Mode):
    if mp.mode is not mode:
        raise ValueError(f"operation needs mode={mode.value}, model has mode={mp.mode.value}")


def controls_three(e: ThreeControlExtremal, mp: ModelParams, t: float) -> ControlSample:
    _require(mp, Mode.THREE)
    g = mp.gamma
    s = g * math.sqrt(1.0 - e.alpha * e.alpha)
    ph = mp.omega0 * t + e.phi
    return ControlSample(t, s * math.cos(ph), s * math.sin(ph), g * e.alpha)


def controls_two(e: TwoControlExtremal, mp: ModelParams, t: float) -> ControlSample:
    _require(mp, Mode.TWO)
    ph = e.omega * t + e.phi
    return ControlSample(t, mp.gamma * math.cos(ph), mp.gamma * math.sin(ph), 0.0)


def controls(e, mp: ModelParams, t: float) -> ControlSample:
    if isinstance(e, ThreeControlExtremal):
        return controls_three(e, mp, t)
    return controls_two(e, mp, t)


def state_three(e: ThreeControlExtremal, mp: ModelParams, t: float) -> SU2Operator:
    tau = 0.5 * t
    al, g, w0 = e.alpha, mp.gamma, mp.omega0
    c, s = math.cos(g * tau), math.sin(g * tau)
    a = cmath.exp(-1j * w0 * tau) * complex(c, -al * s)
    b = -1j * math.sqrt(1.0 - al * al) * cmath.exp(-1j * (w0 * tau + e.phi)) * s
    return SU2Operator(a, b)


def state_two(e: TwoControlExtremal, mp: ModelParams, t: float) -> SU2Operator:
    tau = 0.5 * t
    bb, aa = e.b(mp), e.a(mp)
    c, s = math.cos(aa * tau), math.sin(aa * tau)
    a = cmath.exp(-1j * e.omega * tau) * complex(c, -(bb / aa) * s)
    b = -1j * (mp.gamma / aa) * cmath.exp(-1j * (e.omega * tau + e.phi)) * s
    return SU2Operator(a, b)


def state(e, mp: ModelParams, t: float) -> SU2Operator:
    if isinstance(e, ThreeControlExtremal):
        return state_three(e, mp, t)
    return state_two(e, mp, t)


def disk_three_xy(alpha, omega0: float, gamma: float, t):
    """Vectorized disk map of the three-control family; broadcasts alpha and t."""
    tau = 0.5 * np.asarray(t, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    cw, sw = np.cos(omega0 * tau), np.sin(omega0 * tau)
    cg, sg = np.cos(gamma * tau), np.sin(gamma * tau)
    return cw * cg - alpha * sw * sg, -sw * cg - alpha * cw * sg


def disk_two_xy(omega, omega0: float, gamma: float, t):
    """Vectorized disk map of the two-control family; broadcasts omega and t."""
    tau = 0.5 * np.asarray(t, dtype=float)
    omega = np.asarray(omega, dtype=float)
    b = omega0 - omega
    a = np.hypot(b, gamma)
    beta = b / a
    cwt, swt = np.cos(omega * tau), np.sin(omega * tau)
    cat, sat = np.cos(a * tau), np.sin(a * tau)
    return cwt * cat - beta * swt * sat, -swt * cat - beta * cwt * sat


def disk_three(alpha: float, mp: ModelParams, t: float) -> DiskPoint:
    x, y = disk_three_xy(alpha, mp.omega0, mp.gamma, t)
    return DiskPoint.from_complex(complex(float(x), float(y)))


def disk_two(omega: float, mp: ModelParams, t: float) -> DiskPoint:
    x, y = disk_two_xy(omega, mp.omega0, mp.gamma, t)
    return DiskPoint.from_complex(complex(float(x), float(y)))


def disk_point(param: float, mp: ModelParams, t: float) -> DiskPoint:
    if mp.mode is Mode.THREE:
        return disk_three(param, mp, t)
    return disk_two(param, mp, t)


def polar_two(omega: float, mp: ModelParams, t: float) -> tuple[float, float]:
    """Squared radius and phase of the two-control disk point, on the first branch.

    The phase satisfies ``x + i y = r exp(i psi)`` and is returned in [0, 2*pi).
    Valid for ``a * tau < pi``; at ``a * tau = pi / 2`` it takes the common
    one-sided limit.
    """
    tau = 0.5 * t
    b = mp.omega0 - omega
    a = math.hypot(b, mp.gamma)
    theta = a * tau
    if theta >= math.pi:
        raise ValueError("polar_two is defined for t < 2*pi/a")
    beta = b / a
    r2 = 1.0 - (mp.gamma / a) ** 2 * math.sin(theta) ** 2
    half = 0.5 * math.pi
    if theta == half:
        psi = -omega * tau - math.copysign(half, beta) if beta != 0.0 else -omega * tau
    elif theta < half:
        psi = -omega * tau - math.atan(beta * math.tan(theta))
    else:
        psi = math.pi - omega * tau - math.atan(beta * math.tan(theta))
    return r2, wrap_angle(psi)


def costate_three(e: ThreeControlExtremal, mp: ModelParams, t: float) -> Costate:
    mu = math.sqrt(max(0.0, 1.0 - e.alpha * e.alpha))
    phase = mp.omega0 * t + e.phi
    return Costate(mu * math.cos(phase), mu * math.sin(phase), e.alpha, mu, phase, degenerate=mu == 0.0)


def costate_two(e: TwoControlExtremal, mp: ModelParams, t: float) -> Costate:
    mu = 1.0
    phase = e.omega * t + e.phi
    bz = mu * (mp.omega0 - e.omega) / mp.gamma
    return Costate(mu * math.cos(phase), mu * math.sin(phase), bz, mu, phase)


def costate(e, mp: ModelParams, t: float) -> Costate:
    if isinstance(e, ThreeControlExtremal):
        return costate_three(e, mp, t)
    return costate_two(e, mp, t)


def control_from_costate(bx: float, by: float, bz: float, mp: ModelParams) -> tuple[float, float, float]:
    """Maximizing control for a costate direction."""
    g = mp.gamma
    if mp.mode is Mode.THREE:
        n = math.sqrt(bx * bx + by * by + bz * bz)
        return g * bx / n, g * by / n, g * bz / n
    n = math.hypot(bx, by)
    return g * bx / n, g * by / n, 0.0


def verify_pmp(e, mp: ModelParams, t_grid: Sequence[float]) -> float:
    """Largest deviation between the extremal's controls and the costate law."""
    worst = 0.0
    for t in t_grid:
        cs = costate(e, mp, t)
        if cs.degenerate:
            raise ValueError("degenerate costate (|alpha| = 1): control law undefined")
        u = controls(e, mp, t)
        v = control_from_costate(cs.bx, cs.by, cs.bz, mp)
        worst = max(worst, abs(u.ux - v[0]), abs(u.uy - v[1]), abs(u.uz - v[2]))
    return worst


def _costate_rhs(b, mp: ModelParams):
    ux, uy, uz = control_from_costate(b[0], b[1], b[2], mp)
    hz = mp.omega0 + uz
    return (uy * b[2] - hz * b[1], hz * b[0] - ux * b[2], ux * b[1] - uy * b[0])


def propagate_costate(b0: Sequence[float], mp: ModelParams, t_final: float, steps: int) -> np.ndarray:
    """RK4 for the costate with the control fed back from the costate itself.

    Returns the ``(steps + 1, 3)`` trajectory of ``(bx, by, bz)``.
    """
    h = t_final / steps
    out = np.empty((steps + 1, 3))
    b = tuple(float(v) for v in b0)
    out[0] = b
    for k in range(steps):
        k1 = _costate_rhs(b, mp)
        k2 = _costate_rhs(tuple(b[i] + 0.5 * h * k1[i] for i in range(3)), mp)
        k3 = _costate_rhs(tuple(b[i] + 0.5 * h * k2[i] for i in range(3)), mp)
        k4 = _costate_rhs(tuple(b[i] + h * k3[i] for i in range(3)), mp)
        b = tuple(b[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(3))
        out[k + 1] = b
    return out


def default_steps(mp: ModelParams, t_final: float) -> int:
    return max(1, int(math.ceil(4096 * mp.gamma * abs(t_final))))


def propagate_numeric(
    controls_fn: Callable[[float], ControlSample],
    mp: ModelParams,
    t_final: float,
    steps: int | None = None,
) -> SU2Operator:
    """Fixed-step RK4 integration of X' = -i(w0 Sz + u.S) X from the identity."""
    if steps is None:
        steps = default_steps(mp, t_final)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = t_final / steps
    grid = np.linspace(0.0, t_final, 2 * steps + 1)
    u = np.array([(s.ux, s.uy, s.uz) for s in map(controls_fn, grid)], dtype=float)
    a, c = kernels.propagate_rk4(
        float(mp.omega0),
        np.ascontiguousarray(u[:, 0]),
        np.ascontiguousarray(u[:, 1]),
        np.ascontiguousarray(u[:, 2]),
        float(h),
    )
    return SU2Operator(a, -c.conjugate())


def swap_trajectory(mp: ModelParams, t) -> np.ndarray:
    """|cos(gamma tau)| exp(-i w0 tau): the SWAP extremal up to its arrival at the center."""
    tau = 0.5 * np.asarray(t, dtype=float)
    return np.abs(np.cos(mp.gamma * tau)) * np.exp(-1j * mp.omega0 * tau)


def beta_to_omega(beta, mp: ModelParams):
    """Map the compactified coordinate beta = b/a in (-1, 1) to the frequency omega."""
    beta = np.asarray(beta, dtype=float)
    return mp.omega0 - mp.gamma * beta / np.sqrt(1.0 - beta * beta)


def omega_to_beta(omega, mp: ModelParams):
    b = mp.omega0 - np.asarray(omega, dtype=float)
    return b / np.hypot(b, mp.gamma)

