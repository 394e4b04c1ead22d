"""Brute-force verification: exhaustive grid search over the extremal families.

Nothing here uses the analytic solver; the grid search only evaluates the
closed-form disk maps on a (time, parameter) grid and reports first hits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._fallback import _in_triangle, _seg_dist2
from .extremals import beta_to_omega, default_steps, disk_three_xy, disk_two_xy, state
from .frontline import BETA_EDGE
from .solver import Solution, diameter, replay, synthesize_controls
from .su2 import TWO_PI, DiskPoint, Mode, ModelParams, disk_distance, project


class OracleInconsistency(RuntimeError):
    """A target was not reached within 1.5 times the tabulated diameter."""


class VerificationError(RuntimeError):
    def __init__(self, report):
        super().__init__("verification failed: " + ", ".join(report.failed))
        self.report = report


@dataclass(frozen=True)
class OracleConfig:
    param_grid_size: int = 2001
    time_step: float | None = None
    hit_tolerance: float = 2e-3
    swept_tolerance: float = 1e-7

    def __post_init__(self):
        if self.param_grid_size < 2:
            raise ValueError("param_grid_size must be >= 2")
        if self.time_step is not None and not self.time_step > 0:
            raise ValueError("time_step must be positive")
        if not (self.hit_tolerance > 0 and self.swept_tolerance > 0):
            raise ValueError("hit tolerances must be positive")

    def dt(self, mp: ModelParams) -> float:
        return self.time_step if self.time_step is not None else (TWO_PI / mp.gamma) / 4000.0


@dataclass(frozen=True)
class OracleHit:
    t_hat: float
    param_hat: float
    step: int


def param_grid(mp: ModelParams, n: int) -> np.ndarray:
    """alpha grid, or the omega images of a uniform beta grid."""
    if mp.mode is Mode.THREE:
        return np.linspace(-1.0, 1.0, n)
    return beta_to_omega(np.linspace(-BETA_EDGE, BETA_EDGE, n), mp)


REFINE_SPLIT = 4
REFINE_DEPTH = 4
REFINE_TOL = 1e-12
REFINE_ROUNDS = 200


def _quad_contains(px, py, a, b, c, e, tol):
    tol2 = tol * tol
    return (
        _in_triangle(px, py, a[0], a[1], b[0], b[1], c[0], c[1])
        | _in_triangle(px, py, a[0], a[1], c[0], c[1], e[0], e[1])
        | (_seg_dist2(px, py, a[0], a[1], b[0], b[1]) <= tol2)
        | (_seg_dist2(px, py, b[0], b[1], c[0], c[1]) <= tol2)
        | (_seg_dist2(px, py, c[0], c[1], e[0], e[1]) <= tol2)
        | (_seg_dist2(px, py, e[0], e[1], a[0], a[1]) <= tol2)
    )


def _confirm(tx, ty, t0, c0, dt, dc, mp: ModelParams) -> np.ndarray:
    """Whether the exact image of each cell ``[t0, t0+dt] x [c0, c0+dc]`` holds its target.

    Cells are split recursively and only sub-cells whose straight-edged
    image, padded by its measured midpoint error, holds the target are
    kept.  This removes hits where the target sits within the edge error
    of a coarse cell but off the true image, as at the cusp of a critical
    curve.
    """
    n = REFINE_SPLIT
    owner = np.arange(tx.size)
    for _ in range(REFINE_DEPTH):
        if owner.size == 0:
            break
        dt, dc = dt / n, dc / n
        u = 0.5 * np.arange(2 * n + 1)
        tt = t0[:, None, None] + dt[:, None, None] * u[None, :, None]
        cc = c0[:, None, None] + dc[:, None, None] * u[None, None, :]
        tt, cc = np.broadcast_arrays(tt, cc)
        pp = _coord_to_param(cc, mp)
        if mp.mode is Mode.THREE:
            x, y = disk_three_xy(pp, mp.omega0, mp.gamma, tt)
        else:
            x, y = disk_two_xy(pp, mp.omega0, mp.gamma, tt)
        z = x + 1j * y
        k = z[:, ::2, ::2]
        a, b, c, e = k[:, :-1, :-1], k[:, :-1, 1:], k[:, 1:, 1:], k[:, 1:, :-1]
        err = np.maximum.reduce([
            np.abs(z[:, 1::2, 1::2] - 0.25 * (a + b + c + e)),
            np.abs(z[:, :-1:2, 1::2] - 0.5 * (a + b)),
            np.abs(z[:, 2::2, 1::2] - 0.5 * (e + c)),
            np.abs(z[:, 1::2, :-1:2] - 0.5 * (a + e)),
            np.abs(z[:, 1::2, 2::2] - 0.5 * (b + c)),
        ])
        px = np.broadcast_to(tx[owner][:, None, None], a.shape)
        py = np.broadcast_to(ty[owner][:, None, None], a.shape)
        keep = _quad_contains(px, py, (a.real, a.imag), (b.real, b.imag), (c.real, c.imag),
                              (e.real, e.imag), REFINE_TOL + 2.0 * err)
        box, i, j = np.nonzero(keep)
        owner = owner[box]
        t0 = t0[box] + dt[box] * i
        c0 = c0[box] + dc[box] * j
        dt, dc = dt[box], dc[box]
    ok = np.zeros(tx.size, dtype=bool)
    ok[owner] = True
    return ok


def _sweep(targets: np.ndarray, mp: ModelParams, cfg: OracleConfig, horizon: float, swept: bool):
    params = np.ascontiguousarray(param_grid(mp, cfg.param_grid_size), dtype=float)
    coords = _coord_grid(mp, cfg.param_grid_size)
    dt = cfg.dt(mp)
    n_steps = int(math.ceil(horizon / dt))
    tx = np.ascontiguousarray(targets[:, 0], dtype=float)
    ty = np.ascontiguousarray(targets[:, 1], dtype=float)
    tol = float(cfg.swept_tolerance if swept else cfg.hit_tolerance)
    kmin = np.zeros(tx.size, dtype=np.int64)
    step = np.full(tx.size, -1, dtype=np.int64)
    pidx = np.full(tx.size, -1, dtype=np.int64)
    todo = np.arange(tx.size)
    for _ in range(REFINE_ROUNDS):
        s, j = kernels.first_hits(
            mp.mode is Mode.TWO, float(mp.omega0), float(mp.gamma), params, float(dt), n_steps,
            tx[todo], ty[todo], tol, bool(swept), np.ascontiguousarray(kmin[todo]),
        )
        step[todo], pidx[todo] = s, j
        if not swept:
            break
        hit = s >= 0
        ok = np.ones(todo.size, dtype=bool)
        if hit.any():
            # neighbouring cells share the edge the target may sit on
            lo = np.maximum(j[hit] - 1, 0)
            hi = np.minimum(j[hit] + 2, coords.size - 1)
            k0 = np.maximum(s[hit] - 1, 0)
            ok[hit] = _confirm(tx[todo[hit]], ty[todo[hit]], k0 * dt, coords[lo],
                               (s[hit] + 1 - k0) * dt, coords[hi] - coords[lo], mp)
        # a rejected cell resumes the search one step later
        bad = todo[~ok]
        if bad.size == 0:
            break
        kmin[bad] = step[bad] + 1
        todo = bad
    return step, pidx, params, dt


BOUNDARY_TOL = 1e-12
PAIR_ANGLE = 0.02
PAIR_DEPTH = 4
SUB_MAX = 256


def _coord_grid(mp: ModelParams, n: int) -> np.ndarray:
    if mp.mode is Mode.THREE:
        return np.linspace(-1.0, 1.0, n)
    return np.linspace(-BETA_EDGE, BETA_EDGE, n)


def _coord_to_param(c, mp: ModelParams):
    return c if mp.mode is Mode.THREE else beta_to_omega(c, mp)


def _grid_xy(mp: ModelParams, params, t):
    if mp.mode is Mode.THREE:
        return disk_three_xy(params[None, :], mp.omega0, mp.gamma, t[:, None])
    return disk_two_xy(params[None, :], mp.omega0, mp.gamma, t[:, None])


def _wrap(a):
    return (a + math.pi) % TWO_PI - math.pi


def _touches(x, y, t0: float, dt: float):
    """Touches of the unit circle along sampled columns of ``(x, y)``.

    A touch is a strict local maximum of r^2 in time whose parabolic peak
    reaches the circle; time and phase are refined by quadratic interpolation.
    Returns arrays ``(column, time, angle)`` ordered by row then column.
    """
    r2 = x * x + y * y
    f0, f1, f2 = r2[:-2], r2[1:-1], r2[2:]
    curv = f0 - 2.0 * f1 + f2
    i, j = np.nonzero((f1 > f0) & (f1 >= f2) & (curv < 0.0))
    c = curv[i, j]
    d = 0.5 * (f0[i, j] - f2[i, j]) / c
    top = f1[i, j] - 0.25 * (f0[i, j] - f2[i, j]) * d
    # columns resting on the circle are followed separately, not as touches
    resting = (np.abs(f0[i, j] - 1.0) <= BOUNDARY_TOL) & (np.abs(f2[i, j] - 1.0) <= BOUNDARY_TOL)
    keep = ((top >= 1.0 - 1e-7) | (np.abs(f1[i, j] - 1.0) <= BOUNDARY_TOL)) & ~resting
    i, j, d = i[keep], j[keep], d[keep]
    a1 = np.arctan2(y[i + 1, j], x[i + 1, j])
    e0 = _wrap(np.arctan2(y[i, j], x[i, j]) - a1)
    e2 = _wrap(np.arctan2(y[i + 2, j], x[i + 2, j]) - a1)
    ang = a1 + 0.5 * d * (e2 - e0) + 0.5 * d * d * (e2 + e0)
    return j, t0 + (i + 1 + d) * dt, ang


def _touches_of(c: float, mp: ModelParams, dt: float, n_steps: int):
    t = np.arange(n_steps + 1) * dt
    x, y = _grid_xy(mp, np.atleast_1d(_coord_to_param(c, mp)), t)
    _, tt, aa = _touches(x, y, 0.0, dt)
    return list(zip(tt.tolist(), aa.tolist()))


def _join(best: np.ndarray, psi: np.ndarray, t0, a0, t1, a1, slack: float = 1e-9) -> np.ndarray:
    """Lower ``best`` where a target angle lies on the short arc of a pair.

    Each pair ``(t0, a0) -> (t1, a1)`` is a short boundary arc traversed with
    time interpolated linearly in angle.
    """
    t0, a0, t1, a1 = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (t0, a0, t1, a1))
    step = max(1, 4_000_000 // max(1, psi.size))
    for s0 in range(0, t0.size, step):
        sl = slice(s0, s0 + step)
        span = _wrap(a1[sl] - a0[sl])[:, None]
        off = _wrap(psi[None, :] - a0[sl, None])
        end = _wrap(psi[None, :] - a1[sl, None])
        with np.errstate(divide="ignore", invalid="ignore"):
            f = off / span
        f = np.where(np.abs(off) <= slack, 0.0, np.where(np.abs(end) <= slack, 1.0, f))
        f = np.where((f >= 0.0) & (f <= 1.0), f, np.nan)
        tt = t0[sl, None] + f * (t1[sl] - t0[sl])[:, None]
        best = np.fmin(best, np.nanmin(np.where(np.isnan(tt), np.inf, tt), axis=0))
    return best


def _boundary_sweep(psi: np.ndarray, mp: ModelParams, cfg: OracleConfig, horizon: float) -> np.ndarray:
    """First passage times through boundary points at angles ``psi``.

    Boundary points are reached only where a grid trajectory touches the unit
    circle.  Touches are located as local maxima of r^2 along each sampled
    trajectory.  The m-th touch moves continuously with the parameter, so the
    target angle is interpolated between m-th touches of neighbouring
    parameters, subdividing the parameter interval until they are close.
    Trajectories that stay on the circle are followed sample to sample.
    """
    coords = _coord_grid(mp, cfg.param_grid_size)
    params = _coord_to_param(coords, mp)
    dt = cfg.dt(mp)
    n_steps = int(math.ceil(horizon / dt))
    best = np.full(psi.size, np.inf)
    found = []
    chunk = max(8, 2_000_000 // params.size)
    for k0 in range(0, n_steps + 1, chunk):
        lo = max(0, k0 - 1)
        ks = np.arange(lo, min(n_steps, k0 + chunk) + 1)
        if ks.size < 2:
            break
        t = ks * dt
        x, y = _grid_xy(mp, params, t)
        r2 = x * x + y * y
        # trajectories lying on the circle at consecutive samples
        i, j = np.nonzero((np.abs(r2[:-1] - 1.0) <= BOUNDARY_TOL) & (np.abs(r2[1:] - 1.0) <= BOUNDARY_TOL))
        if i.size:
            best = _join(best, psi, t[i], np.arctan2(y[i, j], x[i, j]), t[i + 1], np.arctan2(y[i + 1, j], x[i + 1, j]))
        if ks.size >= 3:
            found.append(_touches(x, y, t[0], dt))
    cols = np.concatenate([f[0] for f in found]) if found else np.empty(0, dtype=int)
    tt = np.concatenate([f[1] for f in found]) if found else np.empty(0)
    aa = np.concatenate([f[2] for f in found]) if found else np.empty(0)
    # padded (param, m) tables of touch times and angles
    order = np.lexsort((tt, cols))
    cols, tt, aa = cols[order], tt[order], aa[order]
    counts = np.bincount(cols, minlength=params.size)
    m_idx = np.arange(cols.size) - np.repeat(np.cumsum(counts) - counts, counts)
    n_m = int(counts.max()) if cols.size else 0
    T = np.full((params.size, n_m), np.nan)
    A = np.full((params.size, n_m), np.nan)
    T[cols, m_idx] = tt
    A[cols, m_idx] = aa
    # a target sitting exactly on a touch
    hit = np.abs(_wrap(psi[None, :] - aa[:, None])) <= 1e-9 if aa.size else np.zeros((0, psi.size), bool)
    best = np.fmin(best, np.min(np.where(hit, tt[:, None], np.inf), axis=0, initial=np.inf))

    def is_close(ta, aa_, tb, ab):
        return (np.abs(_wrap(ab - aa_)) <= PAIR_ANGLE) & (np.abs(tb - ta) <= PAIR_ANGLE / mp.gamma)

    valid = ~np.isnan(T[:-1]) & ~np.isnan(T[1:])
    near = valid & is_close(T[:-1], A[:-1], T[1:], A[1:])
    jj, mm = np.nonzero(near)
    best = _join(best, psi, T[jj, mm], A[jj, mm], T[jj + 1, mm], A[jj + 1, mm])

    def touches_at(c_list, limit):
        t = np.arange(limit + 1) * dt
        x, y = _grid_xy(mp, np.atleast_1d(_coord_to_param(np.asarray(c_list), mp)), t)
        cc, t1, a1 = _touches(x, y, 0.0, dt)
        chain = [[] for _ in c_list]
        for c, tv, av in zip(cc.tolist(), t1.tolist(), a1.tolist()):
            chain[c].append((tv, av))
        return chain

    def refine(ca, cb, pa, pb, ms, depth):
        """Subdivide [ca, cb] until the listed touches of neighbours are close."""
        limit = min(n_steps, int((max(max(pa[m][0], pb[m][0]) for m in ms) + 1.0 / mp.gamma) / dt) + 2)
        gap = max(max(abs(_wrap(pb[m][1] - pa[m][1])), mp.gamma * abs(pb[m][0] - pa[m][0])) for m in ms)
        n_sub = int(min(SUB_MAX, max(2, math.ceil(2.0 * gap / PAIR_ANGLE))))
        sub = np.linspace(ca, cb, n_sub + 1)
        chain = [pa] + touches_at(sub[1:-1], limit) + [pb]
        for q in range(n_sub):
            left, right = chain[q], chain[q + 1]
            still = []
            for m in ms:
                if len(left) <= m or len(right) <= m:
                    continue
                (ta, a0), (tb, a1) = left[m], right[m]
                if is_close(ta, a0, tb, a1):
                    pending.append((ta, a0, tb, a1))
                elif depth < PAIR_DEPTH and min(ta, tb) < best.max():
                    still.append(m)
            if still:
                refine(sub[q], sub[q + 1], left, right, still, depth + 1)

    # pairs that are still apart, earliest intervals first; pairs starting
    # after every target's current first passage cannot improve it
    far = valid & ~near
    jf = np.unique(np.nonzero(far)[0])
    jf = jf[np.argsort([np.nanmin(np.fmin(T[j], T[j + 1])[far[j]]) for j in jf])] if jf.size else jf
    for j in jf:
        ms = [int(m) for m in np.nonzero(far[j])[0] if min(T[j, m], T[j + 1, m]) < best.max()]
        if ms:
            pa = list(zip(T[j].tolist(), A[j].tolist()))
            pb = list(zip(T[j + 1].tolist(), A[j + 1].tolist()))
            pending: list[tuple[float, float, float, float]] = []
            refine(coords[j], coords[j + 1], pa, pb, ms, 0)
            if pending:
                best = _join(best, psi, *np.array(pending).T)
    return best


def brute_min_times(targets, mp: ModelParams, cfg: OracleConfig | None = None,
                    method: str = "swept", horizon: float | None = None,
                    strict: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """First-hit times and parameters for a batch of ``(x, y)`` targets.

    ``method="tolerance"`` counts a grid point within ``hit_tolerance``;
    ``method="swept"`` counts the target lying inside (or within
    ``swept_tolerance`` of) the image of a grid cell and reports the cell's
    earlier time.  Swept search handles targets on the unit circle by
    following boundary touches of the grid trajectories (see
    ``_boundary_sweep``); those report an interpolated time and a NaN
    parameter.  Unreached targets are NaN, or raise when ``strict``.
    """
    if method not in ("tolerance", "swept"):
        raise ValueError(f"unknown method {method!r}")
    cfg = cfg or OracleConfig()
    pts = np.atleast_2d(np.asarray(targets, dtype=float))
    if np.any(np.hypot(pts[:, 0], pts[:, 1]) > 1.0 + 1e-12):
        raise ValueError("target lies outside the unit disk")
    if horizon is None:
        horizon = 1.5 * diameter(mp).t_max
    t_hat = np.full(len(pts), np.nan)
    p_hat = np.full(len(pts), np.nan)
    r = np.hypot(pts[:, 0], pts[:, 1])
    on_circle = (np.abs(r - 1.0) <= BOUNDARY_TOL) & ~((np.abs(pts[:, 0] - 1.0) <= 1e-14) & (np.abs(pts[:, 1]) <= 1e-14))
    if method == "swept" and on_circle.any():
        tb = _boundary_sweep(np.arctan2(pts[on_circle, 1], pts[on_circle, 0]), mp, cfg, horizon)
        t_hat[on_circle] = np.where(np.isfinite(tb) & (tb <= horizon), tb, np.nan)
        rest = ~on_circle
    else:
        rest = np.ones(len(pts), dtype=bool)
    if rest.any():
        step, pidx, params, dt = _sweep(pts[rest], mp, cfg, horizon, method == "swept")
        t_hat[rest] = np.where(step < 0, np.nan, step * dt)
        p_hat[rest] = np.where(step < 0, np.nan, params[np.maximum(pidx, 0)])
    missing = np.isnan(t_hat)
    if strict and missing.any():
        bad = pts[np.flatnonzero(missing)[0]]
        raise OracleInconsistency(f"target ({bad[0]:.6g}, {bad[1]:.6g}) not reached within t = {horizon:.6g}")
    return t_hat, p_hat


def brute_min_time(target: DiskPoint, mp: ModelParams, cfg: OracleConfig | None = None,
                   method: str = "swept") -> OracleHit:
    """Smallest grid time at which a grid extremal hits the target.

    Swept-cell hits by default; ``method="tolerance"`` is the plain
    nearest-sample test, which fires early where the front line approaches
    the target tangentially.
    """
    cfg = cfg or OracleConfig()
    t_hat, p_hat = brute_min_times([[target.x, target.y]], mp, cfg, method)
    return OracleHit(float(t_hat[0]), float(p_hat[0]), int(round(t_hat[0] / cfg.dt(mp))))


def polar_grid(n_r: int = 60, n_psi: int = 120) -> np.ndarray:
    r = np.arange(1, n_r + 1) / n_r
    psi = np.arange(n_psi) * (TWO_PI / n_psi)
    rr, pp = np.meshgrid(r, psi, indexing="ij")
    return np.column_stack([(rr * np.cos(pp)).ravel(), (rr * np.sin(pp)).ravel()])


def brute_diameter(mp: ModelParams, cfg: OracleConfig | None = None, n_r: int = 60,
                   n_psi: int = 120, method: str = "swept") -> float:
    """Largest brute-force minimum time over a polar grid of the disk.

    Swept-cell hits by default: point-tolerance hits fire early near boundary
    collapse points and across the cut locus, where the minimum time jumps.
    """
    t_hat, _ = brute_min_times(polar_grid(n_r, n_psi), mp, cfg, method)
    return float(np.max(t_hat))


@dataclass
class VerificationReport:
    closed_form_residual: float
    replay_residual: float
    oracle_t_hat: float
    earliest_allowed: float
    checks: dict = field(default_factory=dict)

    @property
    def failed(self) -> list[str]:
        return [k for k, ok in self.checks.items() if not ok]

    @property
    def passed(self) -> bool:
        return not self.failed

    def as_dict(self) -> dict:
        return {
            "closed_form_residual": self.closed_form_residual,
            "replay_residual": self.replay_residual,
            "oracle_t_hat": None if math.isnan(self.oracle_t_hat) else self.oracle_t_hat,
            "earliest_allowed": self.earliest_allowed,
            "checks": dict(self.checks),
            "passed": self.passed,
        }


def verify_solution(sol: Solution, target: DiskPoint, mp: ModelParams,
                    cfg: OracleConfig | None = None, raise_on_failure: bool = False) -> VerificationReport:
    """Check a solution three ways.

    closed_form: the extremal's state at t_f projects onto the target (1e-9).
    replay: numerically propagated sampled controls land on it (1e-6).
    minimality: the swept grid search finds no hit before t_f - 2 time steps.
    """
    cfg = cfg or OracleConfig()
    e = sol.extremal()
    cf = disk_distance(project(state(e, mp, sol.t_f)), target)
    steps = default_steps(mp, sol.t_f)
    if sol.t_f > 0.0:
        samples = synthesize_controls(sol, mp, 2 * steps + 1)
        rp = disk_distance(project(replay(samples, mp)), target)
    else:
        rp = disk_distance(DiskPoint(1.0, 0.0), target)
    dt = cfg.dt(mp)
    limit = sol.t_f - 2.0 * dt
    t_hat = math.nan
    if limit > 0.0:
        th, _ = brute_min_times([[target.x, target.y]], mp, cfg, "swept", horizon=limit + dt, strict=False)
        t_hat = float(th[0])
    early = not math.isnan(t_hat) and t_hat < limit
    report = VerificationReport(
        cf, rp, t_hat, limit,
        {"closed_form": cf <= 1e-9, "replay": rp <= 1e-6, "minimality": not early},
    )
    if raise_on_failure and not report.passed:
        raise VerificationError(report)
    return report
