# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled clipping kernels; mirrors pyfallback.py (see that module's docs)."""
import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, fmax, fmin, sqrt

cnp.import_array()

BACKEND = "compiled"

cdef double _DISC_EPS = 1e-12


cdef inline double _arc(double w0x, double w0y, double w1x, double w1y,
                        double rho2) nogil:
    return 0.5 * rho2 * atan2(w0x * w1y - w0y * w1x, w0x * w1x + w0y * w1y)


cdef double _disk_tri_area_2d(double ax, double ay, double bx, double by,
                              double cx, double cy, double rho) nogil:
    cdef double rho2, total, x0, y0, x1, y1, dx, dy, dd, p0d, p00, disc, sq
    cdef double lo, hi, w0x, w0y, w1x, w1y
    cdef double px[3]
    cdef double py[3]
    cdef int k, k1
    if rho <= 0.0:
        return 0.0
    rho2 = rho * rho
    total = 0.0
    px[0] = ax; py[0] = ay
    px[1] = bx; py[1] = by
    px[2] = cx; py[2] = cy
    for k in range(3):
        k1 = k + 1 if k < 2 else 0
        x0 = px[k]; y0 = py[k]
        x1 = px[k1]; y1 = py[k1]
        dx = x1 - x0; dy = y1 - y0
        dd = dx * dx + dy * dy
        if dd < 1e-300:
            continue
        p0d = x0 * dx + y0 * dy
        p00 = x0 * x0 + y0 * y0
        disc = p0d * p0d - dd * (p00 - rho2)
        lo = 1.0; hi = 0.0
        if disc > _DISC_EPS * dd * rho2:
            sq = sqrt(disc)
            lo = fmax(0.0, (-p0d - sq) / dd)
            hi = fmin(1.0, (-p0d + sq) / dd)
        if lo < hi:
            if lo > 0.0:
                total += _arc(x0, y0, x0 + lo * dx, y0 + lo * dy, rho2)
            w0x = x0 + lo * dx; w0y = y0 + lo * dy
            w1x = x0 + hi * dx; w1y = y0 + hi * dy
            total += 0.5 * (w0x * w1y - w0y * w1x)
            if hi < 1.0:
                total += _arc(x0 + hi * dx, y0 + hi * dy, x1, y1, rho2)
        else:
            total += _arc(x0, y0, x1, y1, rho2)
    return total


def disk_tri_area_2d(double ax, double ay, double bx, double by,
                     double cx, double cy, double rho):
    """Area of triangle (a, b, c) ∩ disk of radius rho centered at the origin."""
    return _disk_tri_area_2d(ax, ay, bx, by, cx, cy, rho)


def ball_masses(vertices, faces, mult, x0, radii):
    """Mass inside B(x0, r) for each r in radii (see pyfallback.ball_masses)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V = np.ascontiguousarray(vertices, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] F = np.ascontiguousarray(faces, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] M = np.ascontiguousarray(mult, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] P = np.ascontiguousarray(x0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] R = np.ascontiguousarray(radii, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(R.shape[0])

    cdef Py_ssize_t nf = F.shape[0], nr = R.shape[0], f, ir
    cdef double ax, ay, az, bx, by, bz, cx, cy, cz
    cdef double nx, ny, nz, two_area, area, r, d, rho2, rho
    cdef double e1x, e1y, e1z, e2x, e2y, e2z, el, qx, qy, qz
    cdef double a2x, a2y, b2x, b2y, c2x, c2y, clip
    cdef double cenx, ceny, cenz, spread, s, dmin, dmax
    cdef double total, comp, yy, tt
    cdef double px0 = P[0], px1 = P[1], px2 = P[2]

    with nogil:
        for ir in range(nr):
            r = R[ir]
            if r <= 0.0:
                continue
            total = 0.0
            comp = 0.0  # Kahan compensation
            for f in range(nf):
                ax = V[F[f, 0], 0] - px0; ay = V[F[f, 0], 1] - px1; az = V[F[f, 0], 2] - px2
                bx = V[F[f, 1], 0] - px0; by = V[F[f, 1], 1] - px1; bz = V[F[f, 1], 2] - px2
                cx = V[F[f, 2], 0] - px0; cy = V[F[f, 2], 1] - px1; cz = V[F[f, 2], 2] - px2
                cenx = (ax + bx + cx) / 3.0
                ceny = (ay + by + cy) / 3.0
                cenz = (az + bz + cz) / 3.0
                spread = 0.0
                s = (ax - cenx) ** 2 + (ay - ceny) ** 2 + (az - cenz) ** 2
                if s > spread: spread = s
                s = (bx - cenx) ** 2 + (by - ceny) ** 2 + (bz - cenz) ** 2
                if s > spread: spread = s
                s = (cx - cenx) ** 2 + (cy - ceny) ** 2 + (cz - cenz) ** 2
                if s > spread: spread = s
                spread = sqrt(spread)
                dmin = sqrt(cenx * cenx + ceny * ceny + cenz * cenz) - spread
                if dmin >= r:
                    continue
                nx = (by - ay) * (cz - az) - (bz - az) * (cy - ay)
                ny = (bz - az) * (cx - ax) - (bx - ax) * (cz - az)
                nz = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
                two_area = sqrt(nx * nx + ny * ny + nz * nz)
                if two_area < 1e-300:
                    continue
                area = 0.5 * two_area
                dmax = ax * ax + ay * ay + az * az
                s = bx * bx + by * by + bz * bz
                if s > dmax: dmax = s
                s = cx * cx + cy * cy + cz * cz
                if s > dmax: dmax = s
                if sqrt(dmax) <= r:
                    clip = M[f] * area
                else:
                    nx /= two_area; ny /= two_area; nz /= two_area
                    d = ax * nx + ay * ny + az * nz
                    rho2 = r * r - d * d
                    if rho2 <= 0.0:
                        continue
                    rho = sqrt(rho2)
                    e1x = bx - ax; e1y = by - ay; e1z = bz - az
                    el = sqrt(e1x * e1x + e1y * e1y + e1z * e1z)
                    e1x /= el; e1y /= el; e1z /= el
                    e2x = ny * e1z - nz * e1y
                    e2y = nz * e1x - nx * e1z
                    e2z = nx * e1y - ny * e1x
                    qx = -d * nx; qy = -d * ny; qz = -d * nz
                    a2x = (ax - qx) * e1x + (ay - qy) * e1y + (az - qz) * e1z
                    a2y = (ax - qx) * e2x + (ay - qy) * e2y + (az - qz) * e2z
                    b2x = (bx - qx) * e1x + (by - qy) * e1y + (bz - qz) * e1z
                    b2y = (bx - qx) * e2x + (by - qy) * e2y + (bz - qz) * e2z
                    c2x = (cx - qx) * e1x + (cy - qy) * e1y + (cz - qz) * e1z
                    c2y = (cx - qx) * e2x + (cy - qy) * e2y + (cz - qz) * e2z
                    clip = _disk_tri_area_2d(a2x, a2y, b2x, b2y, c2x, c2y, rho)
                    if clip < 0.0:
                        clip = 0.0
                    elif clip > area:
                        clip = area
                    if clip == 0.0:
                        continue
                    clip = M[f] * clip
                yy = clip - comp
                tt = total + yy
                comp = (tt - total) - yy
                total = tt
            out[ir] = total
    return out
