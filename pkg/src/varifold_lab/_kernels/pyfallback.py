"""Pure-Python clipping kernels.

Reference implementation of the disk/triangle intersection used by ball-mass
queries. The compiled twin in ``_clipcore.pyx`` must agree with this module to
round-off; the test suite checks parity on random inputs.

The core routine computes area(T ∩ D) for a triangle T and a disk D exactly,
via Green's theorem: walking the triangle boundary counter-clockwise, each
edge piece inside the disk contributes a chord term ½·cross(w0, w1) and each
piece outside contributes the circular-arc term ½ρ²·angle(w0→w1). Summing the
signed angle over all outside pieces automatically picks up the winding of the
triangle around the disk center, so the same loop handles every configuration
(disk inside triangle, triangle inside disk, partial overlap, disjoint).
"""
from __future__ import annotations

import math

import numpy as np

BACKEND = "fallback"

_DISC_EPS = 1e-12


def disk_tri_area_2d(
    ax: float, ay: float, bx: float, by: float, cx: float, cy: float, rho: float
) -> float:
    """Area of the intersection of triangle (a, b, c) with the disk |p| <= rho.

    The triangle must be counter-clockwise; the disk is centered at the origin.
    """
    if rho <= 0.0:
        return 0.0
    rho2 = rho * rho
    total = 0.0
    pts = ((ax, ay), (bx, by), (cx, cy))
    for k in range(3):
        x0, y0 = pts[k]
        x1, y1 = pts[(k + 1) % 3]
        dx, dy = x1 - x0, y1 - y0
        dd = dx * dx + dy * dy
        if dd < 1e-300:
            continue
        p0d = x0 * dx + y0 * dy
        p00 = x0 * x0 + y0 * y0
        disc = p0d * p0d - dd * (p00 - rho2)
        lo, hi = 1.0, 0.0
        if disc > _DISC_EPS * dd * rho2:
            sq = math.sqrt(disc)
            lo = max(0.0, (-p0d - sq) / dd)
            hi = min(1.0, (-p0d + sq) / dd)
        if lo < hi:
            # entry arc piece, chord piece, exit arc piece
            if lo > 0.0:
                total += _arc_term(x0, y0, x0 + lo * dx, y0 + lo * dy, rho2)
            w0x, w0y = x0 + lo * dx, y0 + lo * dy
            w1x, w1y = x0 + hi * dx, y0 + hi * dy
            total += 0.5 * (w0x * w1y - w0y * w1x)
            if hi < 1.0:
                total += _arc_term(x0 + hi * dx, y0 + hi * dy, x1, y1, rho2)
        else:
            total += _arc_term(x0, y0, x1, y1, rho2)
    return total


def _arc_term(w0x: float, w0y: float, w1x: float, w1y: float, rho2: float) -> float:
    """Green's-theorem contribution of an edge piece outside the circle."""
    ang = math.atan2(w0x * w1y - w0y * w1x, w0x * w1x + w0y * w1y)
    return 0.5 * rho2 * ang


def ball_masses(
    vertices: np.ndarray,
    faces: np.ndarray,
    mult: np.ndarray,
    x0: np.ndarray,
    radii: np.ndarray,
) -> np.ndarray:
    """Mass of the varifold restricted to balls B(x0, r) for each r in radii.

    Each face contributes multiplicity × area(face ∩ ball) with the clipped
    area computed exactly. Totals are accumulated with math.fsum so results do
    not depend on face order.
    """
    vertices = np.asarray(vertices, dtype=np.float64)
    faces = np.asarray(faces, dtype=np.int64)
    mult = np.asarray(mult, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64)

    va = vertices[faces[:, 0]] - x0
    vb = vertices[faces[:, 1]] - x0
    vc = vertices[faces[:, 2]] - x0
    d_max = np.sqrt(np.maximum.reduce([_sq(va), _sq(vb), _sq(vc)]))
    # conservative lower bound on the distance from x0 to the face
    cen = (va + vb + vc) / 3.0
    spread = np.sqrt(np.maximum.reduce([_sq(va - cen), _sq(vb - cen), _sq(vc - cen)]))
    d_min = np.maximum(0.0, np.sqrt(_sq(cen)) - spread)

    n = np.cross(vb - va, vc - va)
    two_area = np.sqrt(_sq(n))
    areas = 0.5 * two_area

    out = np.zeros(len(radii))
    for ir, r in enumerate(radii):
        if r <= 0.0:
            continue
        parts = []
        hit = np.nonzero(d_min < r)[0]
        for f in hit:
            if two_area[f] < 1e-300:
                continue
            if d_max[f] <= r:
                parts.append(mult[f] * areas[f])
                continue
            nf = n[f] / two_area[f]
            d = float(va[f] @ nf)  # signed distance from x0 to the face plane
            rho2 = r * r - d * d
            if rho2 <= 0.0:
                continue
            rho = math.sqrt(rho2)
            e1 = vb[f] - va[f]
            e1 = e1 / math.sqrt(float(_sq(e1)))
            e2 = np.cross(nf, e1)
            q = -d * nf  # foot of x0 on the face plane, relative to x0
            a2 = (va[f] - q) @ e1, (va[f] - q) @ e2
            b2 = (vb[f] - q) @ e1, (vb[f] - q) @ e2
            c2 = (vc[f] - q) @ e1, (vc[f] - q) @ e2
            clip = disk_tri_area_2d(
                float(a2[0]), float(a2[1]), float(b2[0]), float(b2[1]),
                float(c2[0]), float(c2[1]), rho,
            )
            clip = min(max(clip, 0.0), float(areas[f]))
            if clip > 0.0:
                parts.append(mult[f] * clip)
        out[ir] = math.fsum(parts)
    return out


def _sq(w: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", w, w)
