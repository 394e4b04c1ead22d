# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: brute-force first-hit sweep and the RK4 propagator.

``su2time._fallback`` mirrors every function here with the same signature and
semantics; ``su2time.kernels`` picks whichever imports.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, floor, fabs

cnp.import_array()


cdef inline void disk_point(bint two, double w0, double g, double p, double tau,
                            double cw, double sw, double cg, double sg,
                            double *x, double *y) noexcept nogil:
    cdef double b, a, beta, cwt, swt, cat, sat
    if not two:
        x[0] = cw * cg - p * sw * sg
        y[0] = -sw * cg - p * cw * sg
    else:
        b = w0 - p
        a = sqrt(b * b + g * g)
        beta = b / a
        cwt = cos(p * tau)
        swt = sin(p * tau)
        cat = cos(a * tau)
        sat = sin(a * tau)
        x[0] = cwt * cat - beta * swt * sat
        y[0] = -swt * cat - beta * cwt * sat


cdef inline double cross(double ax, double ay, double bx, double by) noexcept nogil:
    return ax * by - ay * bx


cdef inline double seg_dist2(double px, double py, double ax, double ay,
                             double bx, double by) noexcept nogil:
    cdef double dx = bx - ax, dy = by - ay
    cdef double l2 = dx * dx + dy * dy
    cdef double s = 0.0
    if l2 > 0.0:
        s = ((px - ax) * dx + (py - ay) * dy) / l2
        if s < 0.0:
            s = 0.0
        elif s > 1.0:
            s = 1.0
    dx = ax + s * dx - px
    dy = ay + s * dy - py
    return dx * dx + dy * dy


cdef inline bint in_triangle(double px, double py, double ax, double ay,
                             double bx, double by, double cx, double cy) noexcept nogil:
    cdef double area = cross(bx - ax, by - ay, cx - ax, cy - ay)
    cdef double d1, d2, d3, eps
    if fabs(area) <= 1e-28:
        return (seg_dist2(px, py, ax, ay, bx, by) <= 1e-24
                or seg_dist2(px, py, bx, by, cx, cy) <= 1e-24
                or seg_dist2(px, py, cx, cy, ax, ay) <= 1e-24)
    eps = 1e-12 * fabs(area)
    d1 = cross(bx - ax, by - ay, px - ax, py - ay)
    d2 = cross(cx - bx, cy - by, px - bx, py - by)
    d3 = cross(ax - cx, ay - cy, px - cx, py - cy)
    if area < 0.0:
        d1 = -d1
        d2 = -d2
        d3 = -d3
    return d1 >= -eps and d2 >= -eps and d3 >= -eps


cdef inline void test_cell(Py_ssize_t idx, Py_ssize_t j, Py_ssize_t k,
                           double[::1] tx, double[::1] ty, long long[::1] step,
                           long long[::1] pidx, long long[::1] kmin, Py_ssize_t* remaining,
                           double ax, double ay, double bx, double by,
                           double cx, double cy, double ex, double ey,
                           double xmin, double xmax, double ymin, double ymax,
                           double tol2) noexcept nogil:
    cdef double x, y
    if step[idx] != -1 or k - 1 < kmin[idx]:
        return
    x = tx[idx]
    y = ty[idx]
    if x < xmin or x > xmax or y < ymin or y > ymax:
        return
    if (in_triangle(x, y, ax, ay, bx, by, cx, cy)
            or in_triangle(x, y, ax, ay, cx, cy, ex, ey)
            or seg_dist2(x, y, ax, ay, bx, by) <= tol2
            or seg_dist2(x, y, bx, by, cx, cy) <= tol2
            or seg_dist2(x, y, cx, cy, ex, ey) <= tol2
            or seg_dist2(x, y, ex, ey, ax, ay) <= tol2):
        step[idx] = k - 1
        pidx[idx] = j
        remaining[0] -= 1


def first_hits(bint two, double omega0, double gamma, double[::1] params,
               double dt, Py_ssize_t n_steps, double[::1] tx, double[::1] ty,
               double tol, bint swept, long long[::1] kmin):
    """First grid step at which each target is hit by the extremal family.

    ``two`` selects the two-control family (params are frequencies) instead of
    the three-control one (params are alpha).  With ``swept`` false a hit is a
    sampled point within ``tol``; with ``swept`` true it is the target lying in
    (or within ``tol`` of) the image of a (time, param) grid cell, reported at
    the cell's lower step.  Target ``i`` only counts hits at steps
    ``>= kmin[i]``.
    Returns ``(step, param_index)`` arrays, -1 where no hit occurred.
    """
    cdef Py_ssize_t n_p = params.shape[0], n_t = tx.shape[0]
    cdef Py_ssize_t i, j, k, c, q, idx, ci, cj, ci0, ci1, cj0, cj1
    cdef Py_ssize_t remaining = n_t
    cdef Py_ssize_t k0 = n_steps + 1
    cdef double pad = 2.0 * tol + 1e-9
    cdef double spad = tol if tol > 1e-12 else 1e-12
    cdef double bs = tol if tol > 2.0 / 1024.0 else 2.0 / 1024.0
    cdef double org = -1.0 - pad
    cdef Py_ssize_t nb = <Py_ssize_t>((2.0 + 2.0 * pad) / bs) + 1
    cdef double tau, cw, sw, cg, sg, x, y, dx, dy, d2, tol2 = tol * tol
    cdef double xmin, xmax, ymin, ymax
    cdef double ax, ay, bx, by, cx, cy, ex, ey

    step_np = np.full(n_t, -1, dtype=np.int64)
    pidx_np = np.full(n_t, -1, dtype=np.int64)
    best_np = np.full(n_t, np.inf)
    cdef long long[::1] step = step_np
    cdef long long[::1] pidx = pidx_np
    cdef double[::1] best = best_np

    cell_np = np.empty(n_t, dtype=np.int64)
    cdef long long[::1] cell = cell_np
    for i in range(n_t):
        ci = <Py_ssize_t>floor((tx[i] - org) / bs)
        cj = <Py_ssize_t>floor((ty[i] - org) / bs)
        ci = min(max(ci, 0), nb - 1)
        cj = min(max(cj, 0), nb - 1)
        cell[i] = ci * nb + cj
    order_np = np.argsort(cell_np, kind="stable").astype(np.int64)
    starts_np = np.searchsorted(cell_np[order_np], np.arange(nb * nb + 1)).astype(np.int64)
    cdef long long[::1] order = order_np
    cdef long long[::1] starts = starts_np

    prev_np = np.empty((n_p, 2))
    cur_np = np.empty((n_p, 2))
    cdef double[:, ::1] prev = prev_np
    cdef double[:, ::1] cur = cur_np
    cdef double[:, ::1] tmp
    for i in range(n_t):
        k0 = min(k0, <Py_ssize_t>max(kmin[i], 0))

    with nogil:
        for k in range(k0, n_steps + 1):
            if remaining == 0:
                break
            tau = 0.5 * k * dt
            cw = cos(omega0 * tau)
            sw = sin(omega0 * tau)
            cg = cos(gamma * tau)
            sg = sin(gamma * tau)
            for j in range(n_p):
                disk_point(two, omega0, gamma, params[j], tau, cw, sw, cg, sg, &x, &y)
                cur[j, 0] = x
                cur[j, 1] = y
            if not swept:
                for j in range(n_p):
                    x = cur[j, 0]
                    y = cur[j, 1]
                    ci = <Py_ssize_t>floor((x - org) / bs)
                    cj = <Py_ssize_t>floor((y - org) / bs)
                    for ci0 in range(max(ci - 1, 0), min(ci + 2, nb)):
                        for cj0 in range(max(cj - 1, 0), min(cj + 2, nb)):
                            c = ci0 * nb + cj0
                            for q in range(starts[c], starts[c + 1]):
                                idx = order[q]
                                if (step[idx] != -1 and step[idx] != k) or k < kmin[idx]:
                                    continue
                                dx = x - tx[idx]
                                dy = y - ty[idx]
                                d2 = dx * dx + dy * dy
                                if d2 <= tol2 and d2 < best[idx]:
                                    if step[idx] == -1:
                                        step[idx] = k
                                        remaining -= 1
                                    best[idx] = d2
                                    pidx[idx] = j
            elif k > k0:
                for j in range(n_p - 1):
                    ax = prev[j, 0]; ay = prev[j, 1]
                    bx = prev[j + 1, 0]; by = prev[j + 1, 1]
                    cx = cur[j + 1, 0]; cy = cur[j + 1, 1]
                    ex = cur[j, 0]; ey = cur[j, 1]
                    xmin = min(min(ax, bx), min(cx, ex)) - spad
                    xmax = max(max(ax, bx), max(cx, ex)) + spad
                    ymin = min(min(ay, by), min(cy, ey)) - spad
                    ymax = max(max(ay, by), max(cy, ey)) + spad
                    ci0 = min(max(<Py_ssize_t>floor((xmin - org) / bs), 0), nb - 1)
                    ci1 = min(max(<Py_ssize_t>floor((xmax - org) / bs), 0), nb - 1)
                    cj0 = min(max(<Py_ssize_t>floor((ymin - org) / bs), 0), nb - 1)
                    cj1 = min(max(<Py_ssize_t>floor((ymax - org) / bs), 0), nb - 1)
                    if (ci1 - ci0 + 1) * (cj1 - cj0 + 1) > n_t:
                        # large cell: cheaper to test every target directly
                        for q in range(n_t):
                            test_cell(q, j, k, tx, ty, step, pidx, kmin, &remaining,
                                      ax, ay, bx, by, cx, cy, ex, ey,
                                      xmin, xmax, ymin, ymax, tol2)
                        continue
                    for ci in range(ci0, ci1 + 1):
                        for cj in range(cj0, cj1 + 1):
                            c = ci * nb + cj
                            for q in range(starts[c], starts[c + 1]):
                                test_cell(order[q], j, k, tx, ty, step, pidx, kmin, &remaining,
                                          ax, ay, bx, by, cx, cy, ex, ey,
                                          xmin, xmax, ymin, ymax, tol2)
            tmp = prev
            prev = cur
            cur = tmp
    return step_np, pidx_np


def propagate_rk4(double omega0, double[::1] ux, double[::1] uy, double[::1] uz, double h):
    """RK4 for the first column of X under X' = -i H X, X(0) = I.

    Controls are sampled on the half-step grid (length 2*steps + 1).  The column
    is renormalized after every step.  Returns the column ``(a, c)``; the first
    row of X is ``(a, -conj(c))``.
    """
    cdef Py_ssize_t n = (ux.shape[0] - 1) // 2, k, s
    cdef double complex a = 1.0, c = 0.0, sa, sc, off
    cdef double complex ka[4]
    cdef double complex kc[4]
    cdef double hz, hx, hy, nrm
    cdef double complex mi = -0.5j
    cdef Py_ssize_t idx[4]
    cdef double coef[4]
    coef[0] = 0.0; coef[1] = 0.5; coef[2] = 0.5; coef[3] = 1.0
    with nogil:
        for k in range(n):
            idx[0] = 2 * k; idx[1] = 2 * k + 1; idx[2] = 2 * k + 1; idx[3] = 2 * k + 2
            for s in range(4):
                if s == 0:
                    sa = a; sc = c
                else:
                    sa = a + coef[s] * h * ka[s - 1]
                    sc = c + coef[s] * h * kc[s - 1]
                hz = omega0 + uz[idx[s]]
                hx = ux[idx[s]]
                hy = uy[idx[s]]
                off = hx - 1j * hy
                ka[s] = mi * (hz * sa + off * sc)
                kc[s] = mi * ((hx + 1j * hy) * sa - hz * sc)
            a = a + h / 6.0 * (ka[0] + 2.0 * ka[1] + 2.0 * ka[2] + ka[3])
            c = c + h / 6.0 * (kc[0] + 2.0 * kc[1] + 2.0 * kc[2] + kc[3])
            nrm = sqrt(a.real * a.real + a.imag * a.imag + c.real * c.real + c.imag * c.imag)
            a = a / nrm
            c = c / nrm
    return complex(a), complex(c)
