# cython: language_level=3
"""Compiled versions of the hot kernels; semantics match ``_pykernels``."""

import numpy as np

from libc.math cimport INFINITY, ceil, exp, floor, isfinite, log

cdef int OK = 0
cdef int SKIPPED = 1
cdef int DEGENERATE = 2
cdef double SNAP = 1e-12


cdef inline long _start_index(double g, double d, double other_d, long n):
    cdef long i
    if d > 0.0:
        i = <long>floor(g)
    elif d < 0.0:
        i = <long>ceil(g) - 1
    elif g == floor(g):
        if other_d > 0.0:
            i = <long>g - 1
        else:
            i = <long>g
    else:
        i = <long>floor(g)
    if i < 0:
        i = 0
    if i > n - 1:
        i = n - 1
    return i


def trace(double ox, double oy, double vs, long nx, long ny,
          double px, double py, double dx, double dy, double max_range):
    cdef double t0 = 0.0, t1 = INFINITY, ta, tb, tmp
    cdef double lo, hi, p, d
    cdef int axis
    if dx < SNAP and dx > -SNAP:
        dx = 0.0
    if dy < SNAP and dy > -SNAP:
        dy = 0.0

    for axis in range(2):
        if axis == 0:
            p, d, lo, hi = px, dx, ox, ox + nx * vs
        else:
            p, d, lo, hi = py, dy, oy, oy + ny * vs
        if d == 0.0:
            if p < lo or p > hi:
                return np.empty(0, np.int64), np.empty(0), np.empty(0)
        else:
            ta = (lo - p) / d
            tb = (hi - p) / d
            if ta > tb:
                tmp = ta
                ta = tb
                tb = tmp
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
    if t0 >= t1 or t0 >= max_range:
        return np.empty(0, np.int64), np.empty(0), np.empty(0)

    cdef long ix = _start_index((px + t0 * dx - ox) / vs, dx, dy, nx)
    cdef long iy = _start_index((py + t0 * dy - oy) / vs, dy, -dx, ny)
    cdef long step_x, step_y
    cdef double t_max_x, t_max_y, t_dx, t_dy
    if dx > 0.0:
        step_x, t_max_x, t_dx = 1, (ox + (ix + 1) * vs - px) / dx, vs / dx
    elif dx < 0.0:
        step_x, t_max_x, t_dx = -1, (ox + ix * vs - px) / dx, -vs / dx
    else:
        step_x, t_max_x, t_dx = 0, INFINITY, INFINITY
    if dy > 0.0:
        step_y, t_max_y, t_dy = 1, (oy + (iy + 1) * vs - py) / dy, vs / dy
    elif dy < 0.0:
        step_y, t_max_y, t_dy = -1, (oy + iy * vs - py) / dy, -vs / dy
    else:
        step_y, t_max_y, t_dy = 0, INFINITY, INFINITY
    cdef bint x_first_on_tie = step_x * step_y < 0

    cdef long cap = nx + ny + 2
    voxels_arr = np.empty(cap, np.int64)
    entry_arr = np.empty(cap)
    ranges_arr = np.empty(cap)
    cdef long long[::1] voxels = voxels_arr
    cdef double[::1] entry = entry_arr
    cdef double[::1] ranges = ranges_arr
    cdef long count = 0
    cdef double t = t0, t_next
    while 0 <= ix < nx and 0 <= iy < ny and count < cap:
        voxels[count] = iy * nx + ix
        entry[count] = t
        if t_max_x < t_max_y or (t_max_x == t_max_y and x_first_on_tie):
            t_next = t_max_x
            ix += step_x
            t_max_x += t_dx
        else:
            t_next = t_max_y
            iy += step_y
            t_max_y += t_dy
        ranges[count] = 0.5 * (t + t_next)
        count += 1
        if t_next >= max_range:
            break
        t = t_next
    return voxels_arr[:count].copy(), entry_arr[:count].copy(), ranges_arr[:count].copy()


def crm_cone_update(double[:, ::1] mass, double[::1] mean, const double[::1] centers,
                    const long long[::1] voxels, const double[::1] ranges,
                    double z, double noise_var, double max_range, bint flat, double eps):
    cdef Py_ssize_t n_cone = voxels.shape[0]
    cdef Py_ssize_t bins = centers.shape[0]
    cdef Py_ssize_t p, j, v
    if n_cone == 0:
        return OK, float("inf"), float("inf")

    logpost_arr = np.empty(n_cone + 1)
    post_arr = np.empty(n_cone + 1)
    m_arr = np.empty(n_cone)
    cdef double[::1] logpost = logpost_arr
    cdef double[::1] post = post_arr
    cdef double[::1] m = m_arr
    cdef double reach = 1.0, w, mu, top = -INFINITY, total

    for p in range(n_cone):
        m[p] = mean[voxels[p]]
    for p in range(n_cone + 1):
        if p < n_cone:
            w = m[p] * reach
            reach *= 1.0 - m[p]
            mu = ranges[p]
        else:
            w = reach
            mu = max_range
        logpost[p] = log(w) if w > 0.0 else -INFINITY
        if not flat:
            logpost[p] -= (z - mu) * (z - mu) / (2.0 * noise_var)
        if logpost[p] > top:
            top = logpost[p]
    if not isfinite(top):
        return SKIPPED, float("inf"), float("inf")
    total = 0.0
    for p in range(n_cone + 1):
        post[p] = exp(logpost[p] - top)
        total += post[p]
    for p in range(n_cone + 1):
        post[p] /= total

    far_arr = np.empty(n_cone + 1)
    cdef double[::1] far = far_arr
    far[n_cone] = 0.0
    cdef double acc = post[n_cone]
    for p in range(n_cone - 1, -1, -1):
        far[p] = acc
        acc += post[p]

    block_arr = np.empty((n_cone, bins))
    totals_arr = np.empty(n_cone)
    cdef double[:, ::1] block = block_arr
    cdef double[::1] totals = totals_arr
    cdef double near = 0.0, mh, a, b, mult
    cdef double min_mult = INFINITY, min_mass = INFINITY
    cdef bint degenerate = False
    for p in range(n_cone):
        mh = m[p]
        if mh < eps:
            mh = eps
        elif mh > 1.0 - eps:
            mh = 1.0 - eps
        a = post[p] / mh - far[p] / (1.0 - mh)
        b = near + far[p] / (1.0 - mh)
        near += post[p]
        v = voxels[p]
        total = 0.0
        for j in range(bins):
            mult = a * centers[j] + b
            if mult < min_mult:
                min_mult = mult
            block[p, j] = mass[v, j] * mult
            total += block[p, j]
        totals[p] = total
        if total < min_mass:
            min_mass = total
        if not (total > 0.0) or not isfinite(total):
            degenerate = True
    if degenerate:
        return DEGENERATE, min_mult, min_mass

    cdef double s
    for p in range(n_cone):
        v = voxels[p]
        s = 0.0
        for j in range(bins):
            mass[v, j] = block[p, j] / totals[p]
            s += mass[v, j] * centers[j]
        mean[v] = s
    return OK, min_mult, min_mass


cdef inline double _ism(double d, double z, double q_l, double q_h,
                        double r_ramp, double r_top, double max_range):
    cdef double lo, hi
    if z >= max_range:
        return q_l if d < z else 0.5
    lo = z - 0.5 * r_ramp
    hi = z + 0.5 * r_ramp
    if d < lo:
        return q_l
    if d <= hi:
        return q_l + (q_h - q_l) * (d - lo) / r_ramp
    if d <= hi + r_top:
        return q_h
    return 0.5


def ism_cone_update(double[::1] logodds, const long long[::1] voxels, const double[::1] ranges,
                    double z, double q_l, double q_h, double r_ramp, double r_top,
                    double max_range, double prior, double lmax):
    cdef Py_ssize_t p
    cdef double q, val
    for p in range(voxels.shape[0]):
        q = _ism(ranges[p], z, q_l, q_h, r_ramp, r_top, max_range)
        val = logodds[voxels[p]] + log(q / (1.0 - q)) - prior
        if val > lmax:
            val = lmax
        elif val < -lmax:
            val = -lmax
        logodds[voxels[p]] = val
