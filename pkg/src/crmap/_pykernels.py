"""Pure-Python/numpy implementation of the hot kernels.

Mirrors ``_ckernels.pyx`` function for function; ``crmap.kernels`` picks
one of the two at import time.
"""

import math

import numpy as np

OK = 0
SKIPPED = 1
DEGENERATE = 2

# direction components below this are treated as exactly axis-aligned
SNAP = 1e-12


def _start_index(g, d, other_d, n):
    """Cell index along one axis for a point at grid coordinate ``g``."""
    if d > 0.0:
        i = math.floor(g)
    elif d < 0.0:
        i = math.ceil(g) - 1
    elif g == math.floor(g):
        # running along a grid line: take the counterclockwise (left) side
        i = int(g) - 1 if other_d > 0.0 else int(g)
    else:
        i = math.floor(g)
    return min(max(int(i), 0), n - 1)


def trace(ox, oy, vs, nx, ny, px, py, dx, dy, max_range):
    """Grid traversal of the ray ``p + t d``, ``0 <= t``, nearest voxel first.

    Returns ``(voxels, entry, ranges)`` where ``ranges`` is the mid-chord
    distance of every traversed voxel. A voxel is kept iff it is entered
    before ``max_range``.
    """
    if abs(dx) < SNAP:
        dx = 0.0
    if abs(dy) < SNAP:
        dy = 0.0
    empty = (np.empty(0, np.int64), np.empty(0), np.empty(0))

    t0, t1 = 0.0, math.inf
    for p, d, lo, hi in ((px, dx, ox, ox + nx * vs), (py, dy, oy, oy + ny * vs)):
        if d == 0.0:
            if p < lo or p > hi:
                return empty
        else:
            ta, tb = (lo - p) / d, (hi - p) / d
            if ta > tb:
                ta, tb = tb, ta
            t0 = max(t0, ta)
            t1 = min(t1, tb)
    if t0 >= t1 or t0 >= max_range:
        return empty

    ix = _start_index((px + t0 * dx - ox) / vs, dx, dy, nx)
    iy = _start_index((py + t0 * dy - oy) / vs, dy, -dx, ny)

    if dx > 0.0:
        step_x, t_max_x, t_dx = 1, (ox + (ix + 1) * vs - px) / dx, vs / dx
    elif dx < 0.0:
        step_x, t_max_x, t_dx = -1, (ox + ix * vs - px) / dx, -vs / dx
    else:
        step_x, t_max_x, t_dx = 0, math.inf, math.inf
    if dy > 0.0:
        step_y, t_max_y, t_dy = 1, (oy + (iy + 1) * vs - py) / dy, vs / dy
    elif dy < 0.0:
        step_y, t_max_y, t_dy = -1, (oy + iy * vs - py) / dy, -vs / dy
    else:
        step_y, t_max_y, t_dy = 0, math.inf, math.inf
    x_first_on_tie = step_x * step_y < 0

    voxels, entry, exits = [], [], []
    t = t0
    while 0 <= ix < nx and 0 <= iy < ny:
        voxels.append(iy * nx + ix)
        entry.append(t)
        if t_max_x < t_max_y or (t_max_x == t_max_y and x_first_on_tie):
            t_next = t_max_x
            ix += step_x
            t_max_x += t_dx
        else:
            t_next = t_max_y
            iy += step_y
            t_max_y += t_dy
        exits.append(t_next)
        if t_next >= max_range:
            break
        t = t_next

    entry_arr = np.array(entry)
    exit_arr = np.array(exits)
    return np.array(voxels, dtype=np.int64), entry_arr, 0.5 * (entry_arr + exit_arr)


def crm_cone_update(mass, mean, centers, voxels, ranges, z, noise_var, max_range, flat, eps):
    """Apply one reading to every voxel of its cone, in place.

    Returns ``(status, min_multiplier, min_mass)``; the two diagnostics are
    the smallest affine multiplier seen on any bin center and the smallest
    pre-normalization mass of any updated voxel.
    """
    n_cone = voxels.shape[0]
    if n_cone == 0:
        return OK, math.inf, math.inf
    m = mean[voxels]
    reach = np.empty(n_cone + 1)
    reach[0] = 1.0
    np.cumprod(1.0 - m, out=reach[1:])
    prior = np.empty(n_cone + 1)
    prior[:n_cone] = m * reach[:n_cone]
    prior[n_cone] = reach[n_cone]

    with np.errstate(divide="ignore"):
        logpost = np.log(prior)
    if not flat:
        mu = np.empty(n_cone + 1)
        mu[:n_cone] = ranges
        mu[n_cone] = max_range
        logpost -= (z - mu) ** 2 / (2.0 * noise_var)
    top = logpost.max()
    if not math.isfinite(top):
        return SKIPPED, math.inf, math.inf
    post = np.exp(logpost - top)
    post /= post.sum()

    near = np.cumsum(post[:n_cone]) - post[:n_cone]
    far = np.cumsum(post[::-1])[::-1][1:]
    mh = np.clip(m, eps, 1.0 - eps)
    a = post[:n_cone] / mh - far / (1.0 - mh)
    b = near + far / (1.0 - mh)

    mult = a[:, None] * centers[None, :] + b[:, None]
    block = mass[voxels] * mult
    total = block.sum(axis=1)
    if not np.all(total > 0.0) or not np.all(np.isfinite(total)):
        return DEGENERATE, float(mult.min()), float(total.min())
    block /= total[:, None]
    mass[voxels] = block
    mean[voxels] = block @ centers
    return OK, float(mult.min()), float(total.min())


def ism_curve(d, z, q_l, q_h, r_ramp, r_top, max_range):
    """Vectorized inverse sensor model over distances ``d``."""
    d = np.asarray(d, dtype=float)
    if z >= max_range:
        return np.where(d < z, q_l, 0.5)
    lo = z - 0.5 * r_ramp
    hi = z + 0.5 * r_ramp
    ramp = q_l + (q_h - q_l) * (d - lo) / r_ramp
    return np.where(d < lo, q_l, np.where(d <= hi, ramp, np.where(d <= hi + r_top, q_h, 0.5)))


def ism_cone_update(logodds, voxels, ranges, z, q_l, q_h, r_ramp, r_top, max_range, prior, lmax):
    if voxels.shape[0] == 0:
        return
    p = ism_curve(ranges, z, q_l, q_h, r_ramp, r_top, max_range)
    inc = np.log(p / (1.0 - p)) - prior
    logodds[voxels] = np.clip(logodds[voxels] + inc, -lmax, lmax)
