"""Optimal front lines, their self-intersections and the admissible parameter ranges.

The front line at time t is the set of endpoints of all extremals at t.  With
three controls it is a straight segment in alpha; with two controls it is a
curve in omega, handled through ``beta = b/a`` in (-1, 1).  An extremal
parameter is admissible at t when its endpoint is not reachable earlier.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, fsolve, minimize_scalar

from .extremals import beta_to_omega, disk_point, disk_three_xy, disk_two_xy, omega_to_beta
from .solver import diameter, min_time, scan_roots
from .su2 import DiskPoint, Mode, ModelParams, Regime

BETA_EDGE = 1.0 - 1e-6


@dataclass
class FrontLine:
    mode: Mode
    t: float
    params: np.ndarray
    x: np.ndarray
    y: np.ndarray
    admissible: list = field(default_factory=list)
    flags: np.ndarray | None = None

    @property
    def points(self) -> list[DiskPoint]:
        return [DiskPoint.from_complex(complex(a, b)) for a, b in zip(self.x, self.y)]

    @property
    def sample(self) -> list[tuple[float, DiskPoint]]:
        return list(zip(self.params.tolist(), self.points))


@dataclass(frozen=True)
class CriticalCurve:
    mode: Mode
    param_c: float
    t_domain: tuple[float, float]
    mp: ModelParams

    def xy(self, t):
        if self.mode is Mode.THREE:
            return disk_three_xy(self.param_c, self.mp.omega0, self.mp.gamma, t)
        return disk_two_xy(self.param_c, self.mp.omega0, self.mp.gamma, t)

    def points(self, t: float) -> DiskPoint:
        x, y = self.xy(t)
        return DiskPoint.from_complex(complex(float(x), float(y)))


@dataclass(frozen=True)
class BoundaryCutLocus:
    mp: ModelParams
    k: int = 1

    def freqs(self, t: float) -> tuple[float, float]:
        return boundary_critical_freqs_two(self.mp, t, self.k)

    def angles(self, t: float) -> tuple[float, float]:
        return boundary_cut_angles_two(self.mp, t, self.k)


def frontline_residual_three(p: DiskPoint, mp: ModelParams, t: float) -> float:
    tau = 0.5 * t
    w = mp.omega0 * tau
    return p.y * math.sin(w) - p.x * math.cos(w) + math.cos(mp.gamma * tau)


def tangent_residual_two(p: DiskPoint, omega: float, mp: ModelParams, t: float) -> float:
    tau = 0.5 * t
    a = math.hypot(mp.omega0 - omega, mp.gamma)
    return p.y * math.sin(omega * tau) - p.x * math.cos(omega * tau) + math.cos(a * tau)


def alpha_on_line(x: float, y: float, mp: ModelParams, t: float) -> float:
    """Front-line coordinate alpha of a point known to lie on the line at t."""
    tau = 0.5 * t
    s = math.sin(mp.gamma * tau)
    return -(x * math.sin(mp.omega0 * tau) + y * math.cos(mp.omega0 * tau)) / s


# critical structure -------------------------------------------------------


def critical_curve_three(mp: ModelParams) -> CriticalCurve:
    if mp.mode is not Mode.THREE or mp.regime is not Regime.THREE_WEAK:
        raise ValueError("the three-control critical trajectory exists only for gamma < |omega0|")
    return CriticalCurve(Mode.THREE, -mp.gamma / mp.omega0, (0.0, math.pi / mp.gamma), mp)


def cusp_three(mp: ModelParams) -> tuple[float, DiskPoint]:
    critical_curve_three(mp)
    g, w = mp.gamma, mp.omega0
    ang = math.pi * w / (2.0 * g)
    return math.pi / g, DiskPoint((g / w) * math.sin(ang), (g / w) * math.cos(ang))


def return_time_three(mp: ModelParams) -> float:
    return 4.0 * math.pi / (mp.gamma + abs(mp.omega0))


def self_intersection_three(mp: ModelParams, t: float, dt: float) -> DiskPoint:
    """Intersection of the front-line lines at t and t + dt."""
    rows, rhs = [], []
    for s in (t, t + dt):
        tau = 0.5 * s
        rows.append((-math.cos(mp.omega0 * tau), math.sin(mp.omega0 * tau)))
        rhs.append(-math.cos(mp.gamma * tau))
    x, y = np.linalg.solve(np.array(rows), np.array(rhs))
    return DiskPoint.from_complex(complex(x, y))


def critical_frequency_two(mp: ModelParams) -> float:
    if mp.omega0 == 0.0:
        raise ValueError("omega0 = 0: the critical trajectory collapses to the initial point (1, 0)")
    return (mp.omega0 ** 2 + mp.gamma ** 2) / mp.omega0


def critical_time_two(mp: ModelParams) -> float:
    if mp.omega0 == 0.0:
        raise ValueError("omega0 = 0: the critical trajectory collapses to the initial point (1, 0)")
    w, g = mp.omega0, mp.gamma
    return math.pi * abs(w) / (g * math.hypot(w, g))


def critical_curve_two(mp: ModelParams) -> CriticalCurve:
    return CriticalCurve(Mode.TWO, critical_frequency_two(mp), (0.0, critical_time_two(mp)), mp)


def critical_curve(mp: ModelParams) -> CriticalCurve | None:
    """The critical trajectory of the model, or None when there is none."""
    try:
        return critical_curve_three(mp) if mp.mode is Mode.THREE else critical_curve_two(mp)
    except ValueError:
        return None


def _cut_root(mp: ModelParams, t: float, k: int) -> float:
    if k < 1:
        raise ValueError("k must be a positive integer")
    tau = 0.5 * t
    lim = k * math.pi
    gt = mp.gamma * tau
    if gt > lim * (1.0 + 1e-12):
        raise ValueError(f"boundary cut locus needs tau <= k*pi/gamma (tau = {tau})")
    return math.sqrt(max(0.0, lim * lim - gt * gt))


def boundary_critical_freqs_two(mp: ModelParams, t: float, k: int = 1) -> tuple[float, float]:
    """Frequencies (omega+, omega-) whose extremals reach the disk boundary at t."""
    root = _cut_root(mp, t, k)
    tau = 0.5 * t
    if tau == 0.0:
        return math.inf, -math.inf
    d = root / tau
    return mp.omega0 + d, mp.omega0 - d


def boundary_cut_angles_two(mp: ModelParams, t: float, k: int = 1) -> tuple[float, float]:
    """Boundary phases (psi+, psi-) of those extremals, unwrapped from 0 at t = 0."""
    root = _cut_root(mp, t, k)
    base = -mp.omega0 * 0.5 * t
    return base - root + k * math.pi, base + root - k * math.pi


# sampling ----------------------------------------------------------------


def _domain(mp: ModelParams, t: float) -> tuple[float, float]:
    if mp.mode is Mode.THREE:
        return -1.0, 1.0
    if t <= 0.0:
        return -math.inf, math.inf
    wp, wm = boundary_critical_freqs_two(mp, t)
    return wm, wp


def _to_coord(mp: ModelParams, p):
    # sampling coordinate: alpha itself, or beta for two controls
    return p if mp.mode is Mode.THREE else omega_to_beta(p, mp)


def _from_coord(mp: ModelParams, c):
    return c if mp.mode is Mode.THREE else beta_to_omega(c, mp)


def _spread(intervals, n: int) -> np.ndarray:
    lengths = np.array([hi - lo for lo, hi in intervals])
    total = lengths.sum()
    if total == 0.0:
        return np.full(n, intervals[0][0])
    s = np.linspace(0.0, total, n)
    out = np.empty(n)
    start = 0.0
    edges = np.cumsum(lengths)
    for (lo, _), end, ln in zip(intervals, edges, lengths):
        sel = (s >= start) & (s <= end)
        out[sel] = lo + (s[sel] - start)
        start = end
    return out


def _flags(params, intervals, tol=1e-12):
    f = np.zeros(len(params), dtype=bool)
    for lo, hi in intervals:
        f |= (params >= lo - tol * (1 + abs(lo))) & (params <= hi + tol * (1 + abs(hi)))
    return f


def _sample(mp: ModelParams, t: float, n: int, full: bool) -> FrontLine:
    if n < 2:
        raise ValueError("n must be >= 2")
    adm = admissible_range(mp, t)
    if mp.mode is Mode.THREE:
        coords = np.linspace(-1.0, 1.0, n) if full else (_spread(adm, n) if adm else np.empty(0))
        params = coords
        x, y = disk_three_xy(params, mp.omega0, mp.gamma, t)
    else:
        if full:
            coords = np.linspace(-BETA_EDGE, BETA_EDGE, n)
        elif adm:
            cint = [
                tuple(sorted((float(np.clip(_to_coord(mp, lo), -BETA_EDGE, BETA_EDGE)),
                              float(np.clip(_to_coord(mp, hi), -BETA_EDGE, BETA_EDGE)))))
                for lo, hi in adm
            ]
            coords = _spread(sorted(cint), n)
        else:
            coords = np.empty(0)
        params = np.asarray(_from_coord(mp, coords), dtype=float)
        order = np.argsort(params, kind="stable")
        params = params[order]
        x, y = disk_two_xy(params, mp.omega0, mp.gamma, t)
    x, y = np.broadcast_to(x, params.shape).copy(), np.broadcast_to(y, params.shape).copy()
    return FrontLine(mp.mode, t, params, x, y, adm, _flags(params, adm))


def frontline_sample_three(mp: ModelParams, t: float, n: int, full: bool = False) -> FrontLine:
    """Sample the three-control front line at t.

    By default ``n`` points spread over the admissible alpha range; with
    ``full`` the whole segment alpha in [-1, 1], flagged per point.
    """
    if mp.mode is not Mode.THREE:
        raise ValueError("three-control front line requested for a two-control model")
    return _sample(mp, t, n, full)


def frontline_sample_two(mp: ModelParams, t: float, n: int, full: bool = False) -> FrontLine:
    """Sample the two-control front line at t on a uniform beta grid."""
    if mp.mode is not Mode.TWO:
        raise ValueError("two-control front line requested for a three-control model")
    return _sample(mp, t, n, full)


def frontline_sample(mp: ModelParams, t: float, n: int, full: bool = False) -> FrontLine:
    return _sample(mp, t, n, full)


# intersections with the critical trajectory -------------------------------


def _crossings_three(mp: ModelParams, t: float, curve: CriticalCurve) -> list[float]:
    s_hi = min(t, curve.t_domain[1])
    if s_hi <= 0.0 or abs(math.sin(0.5 * mp.gamma * t)) < 1e-14:
        return []

    def g(s):
        x, y = curve.xy(s)
        return frontline_residual_three(DiskPoint.from_complex(complex(float(x), float(y))), mp, t)

    n = max(200, int(math.ceil(s_hi * (mp.gamma + abs(mp.omega0)) * 50)))
    ss = np.linspace(0.0, s_hi, n + 1)
    gx, gy = curve.xy(ss)
    tau = 0.5 * t
    gv = gy * math.sin(mp.omega0 * tau) - gx * math.cos(mp.omega0 * tau) + math.cos(mp.gamma * tau)
    roots = scan_roots(g, ss, gv, xtol=1e-14)
    out = []
    for s in roots:
        x, y = curve.xy(s)
        al = alpha_on_line(float(x), float(y), mp, t)
        if -1.0 - 1e-12 <= al <= 1.0 + 1e-12:
            out.append(min(max(al, -1.0), 1.0))
    return out


def _segments_intersect(p, q):
    """Index pairs of intersecting segments between polylines p (N, 2) and q (M, 2)."""
    a, b = p[:-1], p[1:]
    c, d = q[:-1], q[1:]
    r = b - a
    s = d - c
    out = []
    chunk = max(1, 400_000 // max(1, len(c)))
    for lo in range(0, len(a), chunk):
        A, R = a[lo:lo + chunk, None, :], r[lo:lo + chunk, None, :]
        den = R[..., 0] * s[None, :, 1] - R[..., 1] * s[None, :, 0]
        qa = c[None] - A
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (qa[..., 0] * s[None, :, 1] - qa[..., 1] * s[None, :, 0]) / den
            v = (qa[..., 0] * R[..., 1] - qa[..., 1] * R[..., 0]) / den
        i, j = np.nonzero((den != 0) & (u >= 0) & (u <= 1) & (v >= 0) & (v <= 1))
        for ii, jj in zip(i, j):
            out.append((lo + ii, jj, u[ii, jj], v[ii, jj]))
    return out


def _crossings_two(mp: ModelParams, t: float, curve: CriticalCurve) -> list[float]:
    s_hi = min(t, curve.t_domain[1])
    if s_hi <= 0.0:
        return []
    wm, wp = _domain(mp, t)
    b_lo, b_hi = sorted(float(np.clip(omega_to_beta(w, mp), -BETA_EDGE, BETA_EDGE)) for w in (wp, wm))
    bs = np.linspace(b_lo, b_hi, 1201)
    fx, fy = disk_two_xy(beta_to_omega(bs, mp), mp.omega0, mp.gamma, t)
    ss = np.linspace(0.0, s_hi, 801)
    cx, cy = curve.xy(ss)
    hits = _segments_intersect(np.column_stack([fx, fy]), np.column_stack([cx, cy]))

    def F(v):
        bb = min(max(v[0], -BETA_EDGE), BETA_EDGE)
        x1, y1 = disk_two_xy(float(beta_to_omega(bb, mp)), mp.omega0, mp.gamma, t)
        x2, y2 = curve.xy(v[1])
        return [float(x1 - x2), float(y1 - y2)]

    out = []
    for i, j, u, v in hits:
        guess = [bs[i] + u * (bs[i + 1] - bs[i]), ss[j] + v * (ss[j + 1] - ss[j])]
        with warnings.catch_warnings():
            # acceptance is decided by the residual below
            warnings.simplefilter("ignore", RuntimeWarning)
            sol = fsolve(F, guess, xtol=1e-13)
        if math.hypot(*F(sol)) > 1e-10:
            continue
        if not (b_lo - 1e-9 <= sol[0] <= b_hi + 1e-9 and -1e-9 <= sol[1] <= s_hi + 1e-9):
            continue
        out.append(float(beta_to_omega(sol[0], mp)))
    return out


def _crossings(mp: ModelParams, t: float) -> list[float]:
    curve = critical_curve(mp)
    if curve is None:
        return []
    if mp.mode is Mode.THREE:
        return _crossings_three(mp, t, curve)
    return _crossings_two(mp, t, curve)


def _dedupe(values, tol):
    out = []
    for v in sorted(values):
        if not out or abs(v - out[-1]) > tol * (1.0 + abs(v)):
            out.append(v)
    return out


def _is_optimal_at(param: float, mp: ModelParams, t: float) -> bool:
    p = disk_point(param, mp, t)
    return min_time(p, mp).t_f >= t * (1.0 - 1e-7) - 1e-12


def admissible_range(mp: ModelParams, t: float) -> list[tuple[float, float]]:
    """Parameter intervals whose extremals are still optimal at time t.

    Intervals are in alpha (three controls) or omega (two controls); empty
    once t exceeds the diameter.
    """
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    dia = diameter(mp)
    if t > dia.t_max * (1.0 + 1e-12):
        return []
    lo, hi = _domain(mp, t)
    if t == 0.0:
        return [(lo, hi)]
    if mp.regime in (Regime.THREE_STRONG, Regime.THREE_EQUAL):
        return [(lo, hi)]
    curve = critical_curve(mp)
    cuts = [lo, hi]
    if curve is not None:
        if t <= curve.t_domain[1]:
            cuts.append(curve.param_c)
        cuts.extend(_crossings(mp, t))
    cuts = _dedupe([c for c in cuts if lo <= c <= hi], 1e-10)
    # midpoints taken in beta for two controls, where far ends bunch up near +-1
    coords = [float(_to_coord(mp, c)) for c in cuts]
    pieces = []
    for i in range(len(cuts) - 1):
        mid = float(_from_coord(mp, 0.5 * (coords[i] + coords[i + 1])))
        if _is_optimal_at(mid, mp, t):
            pieces.append((cuts[i], cuts[i + 1]))
    pieces.sort()
    merged: list[tuple[float, float]] = []
    for p0, p1 in pieces:
        if merged and abs(p0 - merged[-1][1]) <= 1e-12 * (1.0 + abs(p0)):
            merged[-1] = (merged[-1][0], p1)
        else:
            merged.append((p0, p1))
    return merged


def critical_intersection(mp: ModelParams, t: float) -> tuple[float, ...]:
    """Parameters where the front line at t meets the critical trajectory and
    bound the optimal piece; a repeated value at the tangency time, and ``()``
    when there is no intersection."""
    curve = critical_curve(mp)
    if curve is None:
        return ()
    dia = diameter(mp)
    if dia.open_limit and abs(t - dia.t_max) <= 1e-9 * dia.t_max:
        p = dia.worst_param
        return (p, p)
    if t > dia.t_max:
        return ()
    cr = _dedupe(_crossings(mp, t), 1e-10)
    if not cr:
        return ()
    adm = admissible_range(mp, t)
    if not adm:
        return ()
    lo, hi = adm[0][0], adm[-1][1]
    tol = 1e-9

    def near(v):
        return min(cr, key=lambda c: abs(c - v))

    p1, p2 = near(lo), near(hi)
    if abs(p1 - lo) > tol * (1 + abs(lo)) or abs(p2 - hi) > tol * (1 + abs(hi)):
        # one end is a domain or critical-parameter end, not a crossing
        inner = [c for c in cr if lo - tol <= c <= hi + tol]
        if len(inner) >= 2:
            return (inner[0], inner[-1])
        return tuple(inner)
    return (p1, p2)


def intersection_residual(param: float, mp: ModelParams, t: float) -> float:
    """Disk distance from the front-line point at ``param`` to the critical trajectory."""
    curve = critical_curve(mp)
    if mp.mode is Mode.THREE:
        x, y = disk_three_xy(param, mp.omega0, mp.gamma, t)
    else:
        x, y = disk_two_xy(param, mp.omega0, mp.gamma, t)
    s_hi = curve.t_domain[1]
    ss = np.linspace(0.0, s_hi, 4001)
    cx, cy = curve.xy(ss)
    i = int(np.argmin((cx - x) ** 2 + (cy - y) ** 2))
    lo, hi = ss[max(i - 1, 0)], ss[min(i + 1, len(ss) - 1)]
    h = 1e-6 * max(s_hi, 1e-300)

    def d(s):
        px, py = curve.xy(s)
        return float(math.hypot(px - x, py - y))

    def tangential(s):
        px, py = curve.xy(s)
        ax, ay = curve.xy(s + h)
        bx, by = curve.xy(s - h)
        return float((px - x) * (ax - bx) + (py - y) * (ay - by))

    cands = [lo, hi, ss[i]]
    if tangential(lo) * tangential(hi) < 0.0:
        cands.append(brentq(tangential, lo, hi, xtol=1e-16, rtol=1e-15))
    else:
        r = minimize_scalar(lambda s: d(s) ** 2, bounds=(lo, hi), method="bounded",
                            options={"xatol": 1e-15})
        cands.append(r.x)
    return min(d(c) for c in cands)
