"""Rotated-rectangle geometry on the BEV plane.

Boxes are rows ``(x, y, h, w, heading)`` where ``h`` is the extent along the
heading direction and ``w`` the extent across it.  All functions accept
arrays of boxes and broadcast over leading dimensions.
"""

from functools import lru_cache

import numpy as np


def box_corners(boxes):
    """Corners of rotated boxes, counter-clockwise, shape ``(..., 4, 2)``."""
    boxes = np.asarray(boxes, dtype=float)
    x, y, h, w, a = (boxes[..., k] for k in range(5))
    c, s = np.cos(a), np.sin(a)
    # local corner offsets (along, across), counter-clockwise
    du = np.array([0.5, -0.5, -0.5, 0.5])
    dv = np.array([0.5, 0.5, -0.5, -0.5])
    lu = h[..., None] * du
    lv = w[..., None] * dv
    cx = x[..., None] + lu * c[..., None] - lv * s[..., None]
    cy = y[..., None] + lu * s[..., None] + lv * c[..., None]
    return np.stack([cx, cy], axis=-1)


def _inside_part(p, q, keep_shared):
    """Signed-area contribution of the edges of ``p`` clipped to convex ``q``.

    Both corner arrays are counter-clockwise, shape ``(n, 4, 2)``.  An edge
    lying on one of ``q``'s boundary lines is kept only when ``keep_shared``
    is set and the two edges run the same way, so a boundary shared by both
    boxes is counted once and a boundary where they merely touch adds nothing.
    """
    p0 = p
    d = np.roll(p, -1, axis=1) - p0
    q0 = q
    e = np.roll(q, -1, axis=1) - q0
    elen = np.hypot(e[..., 0], e[..., 1])
    nx = e[..., 1] / elen
    ny = -e[..., 0] / elen
    # outward distance of each p-edge start/end from each q-edge line, (n, 4p, 4q)
    rx = p0[:, :, None, 0] - q0[:, None, :, 0]
    ry = p0[:, :, None, 1] - q0[:, None, :, 1]
    start = rx * nx[:, None, :] + ry * ny[:, None, :]
    rate = d[:, :, None, 0] * nx[:, None, :] + d[:, :, None, 1] * ny[:, None, :]
    end = start + rate
    tol = 1e-9
    on_line = (np.abs(start) <= tol) & (np.abs(end) <= tol)
    same = (d[:, :, None, 0] * e[:, None, :, 0] + d[:, :, None, 1] * e[:, None, :, 1]) > 0
    flat = ~on_line & (np.abs(rate) <= 1e-15)
    reject = (on_line & ~(same & keep_shared)) | (flat & (start > 0))
    safe = np.where(np.abs(rate) <= 1e-15, 1.0, rate)
    cut = -start / safe
    active = ~on_line & ~flat
    upper = np.where(active & (rate > 0), cut, np.inf).min(axis=2)
    lower = np.where(active & (rate < 0), cut, -np.inf).max(axis=2)
    lo = np.maximum(lower, 0.0)
    hi = np.minimum(upper, 1.0)
    ok = (hi > lo) & ~reject.any(axis=2)
    sx = p0[..., 0] + lo * d[..., 0]
    sy = p0[..., 1] + lo * d[..., 1]
    fx = p0[..., 0] + hi * d[..., 0]
    fy = p0[..., 1] + hi * d[..., 1]
    return 0.5 * np.where(ok, sx * fy - sy * fx, 0.0).sum(axis=1)

def intersection_area(a, b):
    """Element-wise overlap area of two broadcastable box arrays.

    Green's theorem over the boundary of the overlap: each box contributes
    the parts of its own edges that lie inside the other box.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    shape = a.shape[:-1]
    a = a.reshape(-1, 5)
    b = b.reshape(-1, 5)
    ref = a[:, None, :2]  # work relative to one centre to limit cancellation
    ca = box_corners(a) - ref
    cb = box_corners(b) - ref
    area = _inside_part(ca, cb, True) + _inside_part(cb, ca, False)
    return np.maximum(area, 0.0).reshape(shape)


def rotated_iou(a, b):
    """Element-wise IoU of two broadcastable box arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    inter = intersection_area(a, b)
    union = a[..., 2] * a[..., 3] + b[..., 2] * b[..., 3] - inter
    return np.where(union > 0, inter / np.where(union > 0, union, 1.0), 0.0)


def iou_matrix(a, b):
    """Pairwise IoU, shape ``(len(a), len(b))``.

    Pairs whose circumscribed circles are disjoint are skipped.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 5)
    b = np.asarray(b, dtype=float).reshape(-1, 5)
    out = np.zeros((len(a), len(b)))
    if len(a) == 0 or len(b) == 0:
        return out
    ra = 0.5 * np.hypot(a[:, 2], a[:, 3])
    rb = 0.5 * np.hypot(b[:, 2], b[:, 3])
    d = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
    ii, jj = np.nonzero(d < ra[:, None] + rb[None, :])
    if len(ii):
        out[ii, jj] = rotated_iou(a[ii], b[jj])
    return out


@lru_cache(maxsize=16)
def cell_centres(height, width, cell_size):
    """Metric (x, y) of every cell centre, each shaped ``(height, width)``.

    Cached; the returned arrays are read-only.
    """
    cols = (np.arange(width) + 0.5) * cell_size
    rows = (np.arange(height) + 0.5) * cell_size
    cx, cy = np.meshgrid(cols, rows)
    cx.flags.writeable = False
    cy.flags.writeable = False
    return cx, cy


def cell_of(x, y, cell_size):
    """(row, col) of the cell containing metric point (x, y)."""
    return int(np.floor(y / cell_size)), int(np.floor(x / cell_size))


def box_footprint(box, height, width, cell_size, margin=0.0):
    """Boolean mask of cells whose centre lies in the (optionally grown) box."""
    x, y, h, w, a = box
    out = np.zeros((height, width), dtype=bool)
    # only cells inside the circumscribed square can be covered
    reach = 0.5 * np.hypot(h, w) + margin * np.sqrt(2)
    r0 = max(0, int(np.floor((y - reach) / cell_size)))
    r1 = min(height, int(np.ceil((y + reach) / cell_size)) + 1)
    c0 = max(0, int(np.floor((x - reach) / cell_size)))
    c1 = min(width, int(np.ceil((x + reach) / cell_size)) + 1)
    if r0 >= r1 or c0 >= c1:
        return out
    cx, cy = cell_centres(height, width, cell_size)
    dx, dy = cx[r0:r1, c0:c1] - x, cy[r0:r1, c0:c1] - y
    c, s = np.cos(a), np.sin(a)
    u = dx * c + dy * s
    v = -dx * s + dy * c
    out[r0:r1, c0:c1] = (np.abs(u) <= h / 2 + margin) & (np.abs(v) <= w / 2 + margin)
    return out


def segments_cross_box(origin, ends, box):
    """Which open segments ``origin -> ends[k]`` pass through the open box.

    ``ends`` has shape ``(..., 2)``.  A segment counts only if its overlap with
    the box interior has positive length, so grazing a corner or an edge does
    not occlude.
    """
    x, y, h, w, a = box
    c, s = np.cos(a), np.sin(a)
    ox, oy = origin[0] - x, origin[1] - y
    au = ox * c + oy * s
    av = -ox * s + oy * c
    ex = ends[..., 0] - x
    ey = ends[..., 1] - y
    du = ex * c + ey * s - au
    dv = -ex * s + ey * c - av

    tmin = np.zeros(du.shape)
    tmax = np.ones(du.shape)
    ok = np.ones(du.shape, dtype=bool)
    for start, d, half in ((au, du, h / 2), (av, dv, w / 2)):
        flat = np.abs(d) < 1e-12
        ok &= ~flat | (abs(start) < half)
        safe = np.where(flat, 1.0, d)
        t1 = (-half - start) / safe
        t2 = (half - start) / safe
        lo = np.where(flat, -np.inf, np.minimum(t1, t2))
        hi = np.where(flat, np.inf, np.maximum(t1, t2))
        tmin = np.maximum(tmin, lo)
        tmax = np.minimum(tmax, hi)
    return ok & (tmin < tmax - 1e-12)


def wrap_angle(a):
    """Map angles into ``[-pi, pi)``."""
    return (np.asarray(a) + np.pi) % (2 * np.pi) - np.pi
