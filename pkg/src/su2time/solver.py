"""Minimum-time solutions, closed-form special cases, diameters and pulse synthesis."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar

from .extremals import (
    ControlSample,
    ThreeControlExtremal,
    TwoControlExtremal,
    controls,
    disk_three,
    disk_three_xy,
    disk_two,
    disk_two_xy,
    propagate_numeric,
    state,
)
from .su2 import (
    TWO_PI,
    DiskPoint,
    Mode,
    ModelParams,
    Regime,
    SU2Operator,
    disk_distance,
    project,
    wrap_angle,
)

ORIGIN_TOL = 1e-14


@dataclass(frozen=True)
class Solution:
    t_f: float
    param: float
    phi: float
    residual: float
    regime: Regime
    mode: Mode
    target: DiskPoint | None = None

    def extremal(self):
        if self.mode is Mode.THREE:
            return ThreeControlExtremal(self.param, self.phi)
        return TwoControlExtremal(self.param, self.phi)


@dataclass(frozen=True)
class Diameter:
    t_max: float
    worst_point: DiskPoint
    worst_param: float
    regime: Regime
    open_limit: bool = False


def _solution(t_f, param, mp, target, phi=0.0):
    got = disk_three(param, mp, t_f) if mp.mode is Mode.THREE else disk_two(param, mp, t_f)
    res = disk_distance(got, target) if target is not None else 0.0
    return Solution(float(t_f), float(param), float(phi), float(res), mp.regime, mp.mode, target)


def _check_target(target: DiskPoint):
    if target.x * target.x + target.y * target.y > 1.0 + 1e-12:
        raise ValueError("target lies outside the unit disk")


def scan_roots(fn, grid, values, xtol=1e-15):
    """Roots of ``fn`` on a sampled grid, in increasing order.

    Sign changes are refined by Brent's method.  Cells around a local minimum
    of ``|fn|`` without a sign change may still hold two close roots or a
    tangency: the extremum is located and split on.
    """
    grid = np.asarray(grid, dtype=float)
    v = np.asarray(values, dtype=float)
    roots = list(grid[v == 0.0])
    # a sample sitting exactly on a root hides any second root in the adjacent cells
    for i in np.flatnonzero(v == 0.0):
        for lo, hi, other in ((i - 1, i, i - 1), (i, i + 1, i + 1)):
            if lo < 0 or hi >= len(v) or v[other] == 0.0:
                continue
            sgn = 1.0 if v[other] > 0 else -1.0
            r = minimize_scalar(lambda s: sgn * fn(s), bounds=(grid[lo], grid[hi]), method="bounded",
                                options={"xatol": xtol})
            if sgn * fn(r.x) < 0.0 and grid[lo] < r.x < grid[hi]:
                a, b = (grid[other], r.x) if other < i else (r.x, grid[other])
                roots.append(brentq(fn, a, b, xtol=xtol, rtol=1e-15))
    for i in np.flatnonzero(v[:-1] * v[1:] < 0.0):
        roots.append(brentq(fn, grid[i], grid[i + 1], xtol=xtol, rtol=1e-15))
    a = np.abs(v)
    idx = np.arange(1, len(v) - 1)
    keep = (a[idx] <= a[idx - 1]) & (a[idx] <= a[idx + 1]) & (v[idx - 1] * v[idx] > 0.0) & (v[idx + 1] * v[idx] > 0.0)
    # only near-touching extrema can hide roots inside a cell
    keep &= a[idx] <= 2.0 * (np.abs(v[idx - 1] - v[idx]) + np.abs(v[idx + 1] - v[idx]))
    for i in idx[keep]:
        lo, hi = grid[i - 1], grid[i + 1]
        sgn = 1.0 if v[i] > 0 else -1.0
        r = minimize_scalar(lambda s: sgn * fn(s), bounds=(lo, hi), method="bounded",
                            options={"xatol": xtol})
        xm, fm = r.x, fn(r.x)
        if sgn * fm < 0.0 and lo < xm < hi:
            roots.append(brentq(fn, lo, xm, xtol=xtol, rtol=1e-15))
            roots.append(brentq(fn, xm, hi, xtol=xtol, rtol=1e-15))
        elif abs(fm) <= 1e-12:
            roots.append(xm)
    return sorted(roots)


# three controls ----------------------------------------------------------


def _alpha_at(x, y, w0, g, tau):
    return -(x * math.sin(w0 * tau) + y * math.cos(w0 * tau)) / math.sin(g * tau)


def min_time_three(target: DiskPoint, mp: ModelParams) -> Solution:
    """Smallest time at which the target lies on the three-control front line.

    Roots of ``r cos(w0 tau + psi) = cos(gamma tau)`` are scanned in tau and
    refined by Brent's method; alpha then follows linearly from the target.
    """
    if mp.mode is not Mode.THREE:
        raise ValueError("min_time_three needs a three-control model")
    _check_target(target)
    x, y = target.x, target.y
    if abs(x - 1.0) <= ORIGIN_TOL and abs(y) <= ORIGIN_TOL:
        return _solution(0.0, 0.0, mp, target)
    g, w0 = mp.gamma, mp.omega0

    def f(tau):
        return y * math.sin(w0 * tau) - x * math.cos(w0 * tau) + math.cos(g * tau)

    step = math.pi / (50.0 * (g + abs(w0)))
    horizon = 0.5 * diameter(mp).t_max
    for scale in (1.0, 4.0):
        n = int(math.ceil(scale * horizon / step)) + 2
        taus = np.arange(n + 1) * step
        fv = y * np.sin(w0 * taus) - x * np.cos(w0 * taus) + np.cos(g * taus)
        for tau in scan_roots(f, taus, fv):
            if tau <= 0.0:
                continue
            sol = _alpha_solution(tau, target, mp)
            if sol is not None:
                return sol
    raise RuntimeError(f"no front-line root found for target {target}")


def _alpha_solution(tau, target, mp):
    g, w0 = mp.gamma, mp.omega0
    sg = math.sin(g * tau)
    if abs(sg) < 1e-9:
        # front line collapsed to a point at gamma tau = k pi: any alpha
        k = round(g * tau / math.pi)
        tau_k = k * math.pi / g
        sol = _solution(2.0 * tau_k, 0.0, mp, target)
        return sol if sol.residual <= 1e-9 else None
    al = _alpha_at(target.x, target.y, w0, g, tau)
    if abs(al) > 1.0 + 1e-9:
        return None
    al = min(max(al, -1.0), 1.0)
    sol = _solution(2.0 * tau, al, mp, target)
    return sol if sol.residual <= 1e-9 else None


def min_time_three_equal(target: DiskPoint, mp: ModelParams) -> Solution:
    """Closed form for gamma = |omega0|: extremals are circles through (1, 0)."""
    if mp.mode is not Mode.THREE or mp.regime is not Regime.THREE_EQUAL:
        raise ValueError("min_time_three_equal needs a three-control model with gamma = |omega0|")
    _check_target(target)
    x, y = target.x, target.y
    if abs(x - 1.0) <= ORIGIN_TOL and abs(y) <= ORIGIN_TOL:
        return _solution(0.0, 0.0, mp, target)
    g = mp.gamma
    sign = 1.0 if mp.omega0 > 0 else -1.0
    al = -sign * (x + y * y / (x - 1.0))
    al = min(max(al, -1.0), 1.0)
    theta = wrap_angle(math.atan2(2.0 * y * (1.0 - x), y * y - (1.0 - x) ** 2))
    if sign > 0:
        theta = wrap_angle(TWO_PI - theta)
    return _solution(theta / g, al, mp, target)


# two controls ------------------------------------------------------------


def min_time_two(target: DiskPoint, mp: ModelParams, n_grid: int = 4001) -> Solution:
    """Smallest time at which a two-control extremal reaches the target.

    The radius condition fixes ``a tau`` as a function of ``beta = b/a``
    (two branches up to ``a tau = pi``); the remaining phase condition is a
    scalar root problem in beta, solved by scanning and Brent refinement.
    """
    if mp.mode is not Mode.TWO:
        raise ValueError("min_time_two needs a two-control model")
    _check_target(target)
    g, w0 = mp.gamma, mp.omega0
    zt = target.z
    r = abs(zt)
    if abs(zt - 1.0) <= ORIGIN_TOL:
        return _solution(0.0, w0, mp, target)
    if r <= ORIGIN_TOL:
        return _solution(math.pi / g, w0, mp, target)
    r = min(r, 1.0)
    bmax = min(r, 1.0 - 1e-12)
    u = np.linspace(-0.5 * math.pi, 0.5 * math.pi, n_grid)
    betas = bmax * np.sin(u)
    r2 = abs(zt) ** 2
    one_minus_r2 = max(0.0, 1.0 - r2)
    best = None

    def theta_of(beta, branch):
        # sin and cos both from closed forms: asin alone loses digits near the center
        d = 1.0 - beta * beta
        th = math.atan2(math.sqrt(min(1.0, one_minus_r2 / d)), math.sqrt(max(0.0, (r2 - beta * beta) / d)))
        return th if branch == 0 else math.pi - th

    def z_of(beta, th):
        c = math.sqrt(1.0 - beta * beta)
        wt = th * (w0 * c / g - beta)
        return cmath.exp(-1j * wt) * complex(math.cos(th), -beta * math.sin(th))

    def G(beta, branch):
        return (z_of(beta, theta_of(beta, branch)) * zt.conjugate()).imag

    for branch in (0, 1):
        d = 1.0 - betas * betas
        th = np.arctan2(np.sqrt(np.minimum(1.0, one_minus_r2 / d)), np.sqrt(np.maximum(0.0, (r2 - betas * betas) / d)))
        th = th if branch == 0 else math.pi - th
        c = np.sqrt(1.0 - betas * betas)
        wt = th * (w0 * c / g - betas)
        zv = np.exp(-1j * wt) * (np.cos(th) - 1j * betas * np.sin(th))
        gv = (zv * np.conj(zt)).imag
        roots = scan_roots(lambda b: G(b, branch), betas, gv)
        for beta in roots:
            thb = theta_of(beta, branch)
            z = z_of(beta, thb)
            if (z * zt.conjugate()).real <= 0.0:
                continue
            tau = thb * math.sqrt(1.0 - beta * beta) / g
            if best is None or tau < best[0]:
                best = (tau, beta)
    if best is None:
        raise RuntimeError(f"no two-control extremal reaches target {target}")
    tau, beta = best
    omega = w0 - g * beta / math.sqrt(1.0 - beta * beta)
    return _solution(2.0 * tau, omega, mp, target)


def min_time(target: DiskPoint, mp: ModelParams) -> Solution:
    if mp.mode is Mode.THREE:
        return min_time_three(target, mp)
    return min_time_two(target, mp)


def min_time_operator(m: SU2Operator, mp: ModelParams) -> Solution:
    """Solve for an operator; the free off-diagonal phase is then matched."""
    sol = min_time(project(m), mp)
    if abs(m.b) <= 1e-12:
        return sol
    b0 = state(sol.extremal(), mp, sol.t_f).b
    if abs(b0) <= 1e-12:
        return sol
    phi = wrap_angle(cmath.phase(b0) - cmath.phase(m.b))
    return Solution(sol.t_f, sol.param, phi, sol.residual, sol.regime, sol.mode, sol.target)


# special targets ---------------------------------------------------------


def diameter(mp: ModelParams, regime: Regime | None = None) -> Diameter:
    """Worst-case minimum time over all of SU(2), with a worst-case point.

    ``regime`` evaluates that regime's closed form instead of the classified
    one, e.g. to compare neighbouring formulas on a regime boundary.
    """
    g, w0 = mp.gamma, mp.omega0
    aw = abs(w0)
    reg = mp.regime if regime is None else Regime(regime)
    if reg.value.startswith("Three") != (mp.mode is Mode.THREE):
        raise ValueError(f"regime {reg.value} does not belong to mode {mp.mode.value}")
    if w0 == 0.0 and reg in (Regime.THREE_WEAK, Regime.TWO_MIDDLE, Regime.TWO_WEAK):
        raise ValueError(f"regime {reg.value} needs omega0 != 0")
    if reg is Regime.THREE_STRONG:
        ang = math.pi * w0 / g
        return Diameter(TWO_PI / g, DiskPoint.from_complex(complex(-math.cos(ang), math.sin(ang))), 0.0, reg)
    if reg is Regime.THREE_EQUAL:
        return Diameter(TWO_PI / g, DiskPoint(1.0, 0.0), 0.0, reg)
    if reg is Regime.THREE_WEAK:
        t_bar = (math.pi / g) * (1.0 - g / aw)
        return Diameter(
            (math.pi / g) * (1.0 + g / aw),
            disk_three(-g / w0, mp, t_bar),
            g / w0,
            reg,
            open_limit=True,
        )
    if reg is Regime.TWO_STRONG:
        psi = math.pi * (1.0 - w0 / g)
        return Diameter(TWO_PI / g, DiskPoint.polar(1.0, psi), w0, reg)
    wc = (w0 * w0 + g * g) / w0
    if reg is Regime.TWO_MIDDLE:
        return Diameter(4.0 * math.pi * aw / (w0 * w0 + g * g), DiskPoint(1.0, 0.0), 0.5 * wc, reg)
    ac = math.hypot(w0 - wc, g)
    tau_bar = (math.pi / (2.0 * ac)) * (abs(wc) - 2.0 * ac) / (abs(wc) - ac)
    return Diameter(
        (math.pi / aw) * (1.0 + math.hypot(w0, g) / g),
        disk_two(wc, mp, 2.0 * tau_bar),
        (w0 * w0 - g * g) / w0,
        reg,
        open_limit=True,
    )


def diagonal_target(lam: float) -> DiskPoint:
    return DiskPoint.polar(1.0, lam)


def diagonal_min_time(lam: float, mp: ModelParams) -> Solution:
    """Closed-form minimum time for diag(exp(i lam), exp(-i lam))."""
    lam = wrap_angle(lam)
    target = diagonal_target(lam)
    g, w0 = mp.gamma, mp.omega0
    if lam == 0.0:
        return _solution(0.0, 0.0 if mp.mode is Mode.THREE else w0, mp, target)
    if mp.mode is Mode.THREE:
        if w0 >= ((math.pi - lam) / math.pi) * g:
            return _solution((4.0 * math.pi - 2.0 * lam) / (g + w0), 1.0, mp, target)
        return _solution(2.0 * lam / (g - w0), -1.0, mp, target)
    big = math.sqrt(math.pi ** 2 * w0 * w0 + (TWO_PI * lam - lam * lam) * g * g)
    t = 2.0 * ((math.pi - lam) * w0 + big) / (w0 * w0 + g * g)
    tau = 0.5 * t
    d = math.sqrt(max(0.0, (math.pi / tau) ** 2 - g * g))
    best = None
    for om in (w0 + d, w0 - d):
        miss = abs(cmath.exp(1j * (math.pi - om * tau)) - target.z)
        if best is None or miss < best[0]:
            best = (miss, om)
    return _solution(t, best[1], mp, target)


def swap_min_time(mp: ModelParams) -> Solution:
    param = 0.0 if mp.mode is Mode.THREE else mp.omega0
    return _solution(math.pi / mp.gamma, param, mp, DiskPoint(0.0, 0.0))


def separatrix_two(mp: ModelParams) -> tuple[DiskPoint, float]:
    """Circle separating extremals that reach diagonal operators from those that do not.

    Traced by the extremal at omega = omega_c / 2.
    """
    w0, g = mp.omega0, mp.gamma
    if w0 == 0.0:
        raise ValueError("omega0 = 0: every extremal reaches the boundary, no separatrix")
    d = w0 * w0 + g * g
    return DiskPoint(g * g / d, 0.0), w0 * w0 / d


def separatrix_frequency(mp: ModelParams) -> float:
    if mp.omega0 == 0.0:
        raise ValueError("omega0 = 0: every extremal reaches the boundary, no separatrix")
    return 0.5 * (mp.omega0 ** 2 + mp.gamma ** 2) / mp.omega0


# pulses ------------------------------------------------------------------


def synthesize_controls(sol: Solution, mp: ModelParams, n: int) -> list[ControlSample]:
    """``n`` uniform samples of the optimal pulse on [0, t_f]."""
    if n < 2:
        raise ValueError("n must be >= 2")
    e = sol.extremal()
    return [controls(e, mp, float(t)) for t in np.linspace(0.0, sol.t_f, n)]


def replay(samples: list[ControlSample], mp: ModelParams, steps: int | None = None) -> SU2Operator:
    """Propagate sampled controls numerically.

    With an odd sample count and no ``steps``, RK4 stages land exactly on the
    samples; otherwise the controls are interpolated by cubic splines.
    """
    n = len(samples)
    t0, t1 = samples[0].t, samples[-1].t
    if t1 == t0:
        return SU2Operator.identity()
    if steps is None and n % 2 == 1:
        dt = (t1 - t0) / (n - 1)

        def fn(t):
            return samples[min(n - 1, max(0, int(round((t - t0) / dt))))]

        return propagate_numeric(fn, mp, t1 - t0, (n - 1) // 2)
    ts = np.array([s.t for s in samples])
    splines = [CubicSpline(ts, [getattr(s, k) for s in samples]) for k in ("ux", "uy", "uz")]

    def fn(t):
        return ControlSample(t, *(float(sp(t)) for sp in splines))

    return propagate_numeric(fn, mp, t1 - t0, steps)


def trajectory_xy(param: float, mp: ModelParams, ts) -> tuple[np.ndarray, np.ndarray]:
    if mp.mode is Mode.THREE:
        return disk_three_xy(param, mp.omega0, mp.gamma, ts)
    return disk_two_xy(param, mp.omega0, mp.gamma, ts)
