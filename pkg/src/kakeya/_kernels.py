"""Numba kernels that stamp moving primitives into a dense occupancy grid.

Every kernel receives per-time-step motion coefficients ``us`` / ``cs`` and
sets each cell whose centre lies within ``h`` of the moved primitive.
Thin primitives are handled by walking sample points spaced at most half a
cell apart and testing the 3x3 block of cells around each sample; with
``h`` at most one half-diagonal this block provably contains every cell in
range. Polygons are scan-filled at the first and last time step only: a
continuously moving polygon sweeps its initial position plus the region
swept by its boundary, and the boundary is stamped at every step.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _seg_dist(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    ll = dx * dx + dy * dy
    if ll == 0.0:
        return math.hypot(px - ax, py - ay)
    s = ((px - ax) * dx + (py - ay) * dy) / ll
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    return math.hypot(px - ax - s * dx, py - ay - s * dy)


@njit(cache=True)
def _stamp_segment(occ, x0, y0, cell, h, ax, ay, bx, by):
    rows, cols = occ.shape
    length = math.hypot(bx - ax, by - ay)
    n = int(math.ceil(2.0 * length / cell)) + 1
    last_i = -10
    last_j = -10
    for k in range(n + 1):
        s = k / n if n > 0 else 0.0
        sx = ax + s * (bx - ax)
        sy = ay + s * (by - ay)
        i = int(math.floor((sx - x0) / cell))
        j = int(math.floor((sy - y0) / cell))
        if i == last_i and j == last_j:
            continue
        last_i = i
        last_j = j
        for jj in range(j - 1, j + 2):
            if jj < 0 or jj >= rows:
                continue
            cy = y0 + (jj + 0.5) * cell
            for ii in range(i - 1, i + 2):
                if ii < 0 or ii >= cols or occ[jj, ii]:
                    continue
                cx = x0 + (ii + 0.5) * cell
                if _seg_dist(cx, cy, ax, ay, bx, by) <= h:
                    occ[jj, ii] = True


@njit(cache=True)
def sweep_segments(occ, x0, y0, cell, h, us, cs, A, B):
    for t in range(us.shape[0]):
        u = us[t]
        c = cs[t]
        for k in range(A.shape[0]):
            a = u * A[k] + c
            b = u * B[k] + c
            _stamp_segment(occ, x0, y0, cell, h, a.real, a.imag, b.real, b.imag)


@njit(cache=True)
def sweep_points(occ, x0, y0, cell, h, us, cs, P):
    rows, cols = occ.shape
    for t in range(us.shape[0]):
        u = us[t]
        c = cs[t]
        for k in range(P.shape[0]):
            p = u * P[k] + c
            i = int(math.floor((p.real - x0) / cell))
            j = int(math.floor((p.imag - y0) / cell))
            for jj in range(j - 1, j + 2):
                if jj < 0 or jj >= rows:
                    continue
                cy = y0 + (jj + 0.5) * cell
                for ii in range(i - 1, i + 2):
                    if ii < 0 or ii >= cols:
                        continue
                    cx = x0 + (ii + 0.5) * cell
                    if math.hypot(cx - p.real, cy - p.imag) <= h:
                        occ[jj, ii] = True


@njit(cache=True, inline="always")
def _arc_dist(px, py, cx, cy, r, start, extent):
    dx = px - cx
    dy = py - cy
    rho = math.hypot(dx, dy)
    if rho > 0.0:
        th = math.atan2(dy, dx) - start
        th = th - 2.0 * math.pi * math.floor(th / (2.0 * math.pi))
        if th <= extent:
            return abs(rho - r)
    e1x = cx + r * math.cos(start)
    e1y = cy + r * math.sin(start)
    e2x = cx + r * math.cos(start + extent)
    e2y = cy + r * math.sin(start + extent)
    d1 = math.hypot(px - e1x, py - e1y)
    d2 = math.hypot(px - e2x, py - e2y)
    d = d1 if d1 < d2 else d2
    if rho == 0.0 and r < d:
        return r
    return d


@njit(cache=True)
def sweep_arcs(occ, x0, y0, cell, h, us, cs, centers, radii, starts, extents):
    rows, cols = occ.shape
    for t in range(us.shape[0]):
        u = us[t]
        c = cs[t]
        rot = math.atan2(u.imag, u.real)
        for k in range(centers.shape[0]):
            ctr = u * centers[k] + c
            r = radii[k]
            st = starts[k] + rot
            ext = extents[k]
            full = ext >= 2.0 * math.pi
            n = int(math.ceil(2.0 * r * ext / cell)) + 1
            last_i = -10
            last_j = -10
            for m in range(n + 1):
                th = st + ext * m / n
                sx = ctr.real + r * math.cos(th)
                sy = ctr.imag + r * math.sin(th)
                i = int(math.floor((sx - x0) / cell))
                j = int(math.floor((sy - y0) / cell))
                if i == last_i and j == last_j:
                    continue
                last_i = i
                last_j = j
                for jj in range(j - 1, j + 2):
                    if jj < 0 or jj >= rows:
                        continue
                    cy = y0 + (jj + 0.5) * cell
                    for ii in range(i - 1, i + 2):
                        if ii < 0 or ii >= cols or occ[jj, ii]:
                            continue
                        cx = x0 + (ii + 0.5) * cell
                        # the distance to the full circle is a cheap lower bound
                        if abs(math.hypot(cx - ctr.real, cy - ctr.imag) - r) > h:
                            continue
                        if full or _arc_dist(cx, cy, ctr.real, ctr.imag, r, st, ext) <= h:
                            occ[jj, ii] = True


@njit(cache=True)
def _fill_polygon(occ, x0, y0, cell, vx, vy):
    rows, cols = occ.shape
    n = vx.shape[0]
    ymin = vy.min()
    ymax = vy.max()
    j0 = max(0, int(math.ceil((ymin - y0) / cell - 0.5)))
    j1 = min(rows - 1, int(math.floor((ymax - y0) / cell - 0.5)))
    xs = np.empty(n)
    for j in range(j0, j1 + 1):
        yc = y0 + (j + 0.5) * cell
        m = 0
        for k in range(n):
            ax = vx[k]
            ay = vy[k]
            bx = vx[(k + 1) % n]
            by = vy[(k + 1) % n]
            if (ay <= yc) != (by <= yc):
                xs[m] = ax + (yc - ay) * (bx - ax) / (by - ay)
                m += 1
        # insertion sort, m is small
        for p in range(1, m):
            key = xs[p]
            q = p - 1
            while q >= 0 and xs[q] > key:
                xs[q + 1] = xs[q]
                q -= 1
            xs[q + 1] = key
        for p in range(0, m - 1, 2):
            i0 = max(0, int(math.ceil((xs[p] - x0) / cell - 0.5)))
            i1 = min(cols - 1, int(math.floor((xs[p + 1] - x0) / cell - 0.5)))
            for i in range(i0, i1 + 1):
                occ[j, i] = True


@njit(cache=True)
def sweep_polygons(occ, x0, y0, cell, h, us, cs, verts, starts):
    """``verts`` holds all polygons back to back; polygon ``k`` is ``verts[starts[k]:starts[k+1]]``."""
    for t in range(us.shape[0]):
        u = us[t]
        c = cs[t]
        for k in range(starts.shape[0] - 1):
            lo = starts[k]
            hi = starts[k + 1]
            n = hi - lo
            vx = np.empty(n)
            vy = np.empty(n)
            for q in range(n):
                z = u * verts[lo + q] + c
                vx[q] = z.real
                vy[q] = z.imag
            if t == 0 or t == us.shape[0] - 1:
                _fill_polygon(occ, x0, y0, cell, vx, vy)
            for q in range(n):
                r = (q + 1) % n
                _stamp_segment(occ, x0, y0, cell, h, vx[q], vy[q], vx[r], vy[r])


@njit(cache=True)
def segment_keys(x0, y0, cell, h, stride, us, cs, A, B, out, n):
    """Append keys ``row * stride + col`` of cells within ``h`` of each moved segment.

    Writes into ``out`` starting at ``n`` and returns the new fill level, or
    ``-1`` when ``out`` is too small (nothing is guaranteed written then).
    Cell indices are relative to the origin ``(x0, y0)`` and may be negative
    only if the caller chose the origin badly; rows and columns must stay in
    ``[0, stride)``.
    """
    cap = out.shape[0]
    for t in range(us.shape[0]):
        u = us[t]
        c = cs[t]
        for k in range(A.shape[0]):
            a = u * A[k] + c
            b = u * B[k] + c
            ax = a.real
            ay = a.imag
            bx = b.real
            by = b.imag
            length = math.hypot(bx - ax, by - ay)
            m = int(math.ceil(2.0 * length / cell)) + 1
            last_i = -10
            last_j = -10
            for q in range(m + 1):
                s = q / m
                sx = ax + s * (bx - ax)
                sy = ay + s * (by - ay)
                i = int(math.floor((sx - x0) / cell))
                j = int(math.floor((sy - y0) / cell))
                if i == last_i and j == last_j:
                    continue
                last_i = i
                last_j = j
                if n + 9 > cap:
                    return -1
                for jj in range(j - 1, j + 2):
                    cy = y0 + (jj + 0.5) * cell
                    for ii in range(i - 1, i + 2):
                        cx = x0 + (ii + 0.5) * cell
                        if _seg_dist(cx, cy, ax, ay, bx, by) <= h:
                            out[n] = jj * stride + ii
                            n += 1
    return n
