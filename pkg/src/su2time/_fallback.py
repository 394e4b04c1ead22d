"""Pure numpy/Python implementations of the compiled kernels (same contracts)."""

import math

import numpy as np
from scipy.spatial import cKDTree

_DENSE_LIMIT = 400_000


def _row(two, omega0, gamma, params, tau):
    if not two:
        cw, sw = math.cos(omega0 * tau), math.sin(omega0 * tau)
        cg, sg = math.cos(gamma * tau), math.sin(gamma * tau)
        return cw * cg - params * sw * sg, -sw * cg - params * cw * sg
    b = omega0 - params
    a = np.sqrt(b * b + gamma * gamma)
    beta = b / a
    cwt, swt = np.cos(params * tau), np.sin(params * tau)
    cat, sat = np.cos(a * tau), np.sin(a * tau)
    return cwt * cat - beta * swt * sat, -swt * cat - beta * cwt * sat


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _seg_dist2(px, py, ax, ay, bx, by):
    dx, dy = bx - ax, by - ay
    l2 = dx * dx + dy * dy
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(l2 > 0, ((px - ax) * dx + (py - ay) * dy) / np.where(l2 > 0, l2, 1.0), 0.0)
    s = np.clip(s, 0.0, 1.0)
    ex, ey = ax + s * dx - px, ay + s * dy - py
    return ex * ex + ey * ey


def _in_triangle(px, py, ax, ay, bx, by, cx, cy):
    area = _cross(bx - ax, by - ay, cx - ax, cy - ay)
    sgn = np.where(area < 0, -1.0, 1.0)
    eps = 1e-12 * np.abs(area)
    d1 = sgn * _cross(bx - ax, by - ay, px - ax, py - ay)
    d2 = sgn * _cross(cx - bx, cy - by, px - bx, py - by)
    d3 = sgn * _cross(ax - cx, ay - cy, px - cx, py - cy)
    inside = (d1 >= -eps) & (d2 >= -eps) & (d3 >= -eps)
    degenerate = np.abs(area) <= 1e-28
    on_edge = (
        (_seg_dist2(px, py, ax, ay, bx, by) <= 1e-24)
        | (_seg_dist2(px, py, bx, by, cx, cy) <= 1e-24)
        | (_seg_dist2(px, py, cx, cy, ax, ay) <= 1e-24)
    )
    return np.where(degenerate, on_edge, inside)


def first_hits(two, omega0, gamma, params, dt, n_steps, tx, ty, tol, swept, kmin):
    params = np.ascontiguousarray(params, dtype=float)
    tx = np.ascontiguousarray(tx, dtype=float)
    ty = np.ascontiguousarray(ty, dtype=float)
    kmin = np.maximum(np.asarray(kmin, dtype=np.int64), 0)
    n_t = tx.size
    step = np.full(n_t, -1, dtype=np.int64)
    pidx = np.full(n_t, -1, dtype=np.int64)
    prev = None
    k0 = int(kmin.min()) if n_t else 0
    for k in range(k0, n_steps + 1):
        if not np.any(step == -1):
            break
        # hits count from each target's own first step
        rem = np.flatnonzero((step == -1) & (kmin <= (k if not swept else k - 1)))
        x, y = _row(two, omega0, gamma, params, 0.5 * k * dt)
        if not swept:
            px, py = tx[rem], ty[rem]
            if rem.size * params.size <= _DENSE_LIMIT:
                d2 = (px[:, None] - x[None, :]) ** 2 + (py[:, None] - y[None, :]) ** 2
                j = np.argmin(d2, axis=1)
                hit = d2[np.arange(rem.size), j] <= tol * tol
            else:
                d, j = cKDTree(np.column_stack([x, y])).query(
                    np.column_stack([px, py]), distance_upper_bound=tol
                )
                hit = d <= tol
            step[rem[hit]] = k
            pidx[rem[hit]] = j[hit]
        elif prev is not None:
            ax, ay = prev[0][:-1], prev[1][:-1]
            bx, by = prev[0][1:], prev[1][1:]
            cx, cy = x[1:], y[1:]
            ex, ey = x[:-1], y[:-1]
            spad = max(tol, 1e-12)
            xmin = np.minimum(np.minimum(ax, bx), np.minimum(cx, ex)) - spad
            xmax = np.maximum(np.maximum(ax, bx), np.maximum(cx, ex)) + spad
            ymin = np.minimum(np.minimum(ay, by), np.minimum(cy, ey)) - spad
            ymax = np.maximum(np.maximum(ay, by), np.maximum(cy, ey)) + spad
            chunk = max(1, _DENSE_LIMIT // max(1, ax.size))
            for lo in range(0, rem.size, chunk):
                sub = rem[lo:lo + chunk]
                px, py = tx[sub][:, None], ty[sub][:, None]
                ti, ci = np.nonzero((px >= xmin) & (px <= xmax) & (py >= ymin) & (py <= ymax))
                if ti.size == 0:
                    continue
                qx, qy = tx[sub][ti], ty[sub][ti]
                a_x, a_y, b_x, b_y = ax[ci], ay[ci], bx[ci], by[ci]
                c_x, c_y, e_x, e_y = cx[ci], cy[ci], ex[ci], ey[ci]
                tol2 = tol * tol
                inside = (
                    _in_triangle(qx, qy, a_x, a_y, b_x, b_y, c_x, c_y)
                    | _in_triangle(qx, qy, a_x, a_y, c_x, c_y, e_x, e_y)
                    | (_seg_dist2(qx, qy, a_x, a_y, b_x, b_y) <= tol2)
                    | (_seg_dist2(qx, qy, b_x, b_y, c_x, c_y) <= tol2)
                    | (_seg_dist2(qx, qy, c_x, c_y, e_x, e_y) <= tol2)
                    | (_seg_dist2(qx, qy, e_x, e_y, a_x, a_y) <= tol2)
                )
                ti, ci = ti[inside], ci[inside]
                if ti.size == 0:
                    continue
                # smallest cell index per target, matching the compiled loop order
                order = np.lexsort((ci, ti))
                ti, ci = ti[order], ci[order]
                first = np.r_[True, ti[1:] != ti[:-1]]
                step[sub[ti[first]]] = k - 1
                pidx[sub[ti[first]]] = ci[first]
        prev = (x, y)
    return step, pidx


def propagate_rk4(omega0, ux, uy, uz, h):
    ux, uy, uz = (np.asarray(v, dtype=float).tolist() for v in (ux, uy, uz))
    n = (len(ux) - 1) // 2
    a, c = 1.0 + 0j, 0j
    mi = -0.5j

    def rhs(i, sa, sc):
        hz = omega0 + uz[i]
        hx, hy = ux[i], uy[i]
        return mi * (hz * sa + complex(hx, -hy) * sc), mi * (complex(hx, hy) * sa - hz * sc)

    for k in range(n):
        i0, i1, i2 = 2 * k, 2 * k + 1, 2 * k + 2
        ka1, kc1 = rhs(i0, a, c)
        ka2, kc2 = rhs(i1, a + 0.5 * h * ka1, c + 0.5 * h * kc1)
        ka3, kc3 = rhs(i1, a + 0.5 * h * ka2, c + 0.5 * h * kc2)
        ka4, kc4 = rhs(i2, a + h * ka3, c + h * kc3)
        a = a + h / 6.0 * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4)
        c = c + h / 6.0 * (kc1 + 2.0 * kc2 + 2.0 * kc3 + kc4)
        nrm = math.sqrt(abs(a) ** 2 + abs(c) ** 2)
        a, c = a / nrm, c / nrm
    return complex(a), complex(c)
