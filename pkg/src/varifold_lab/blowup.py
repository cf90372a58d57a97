"""Ball masses, density extrapolation, monotonicity checks, spherical links.

Ball masses are computed by exact disk–triangle clipping in each face plane
(see the _kernels package), so mass ratios carry no sampling noise and the
density at a point can be extrapolated from a geometric radius ladder.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .curvature import mean_curvature, point_surface_distance, willmore_energy
from .mesh import DiscreteVarifold, MeshError, mesh_scale

log = logging.getLogger(__name__)

__all__ = [
    "ADMISSIBLE_DENSITIES",
    "DensityReport",
    "SphericalLink",
    "ball_mass",
    "ball_mass_ladder",
    "density",
    "classify_density",
    "monotonicity_check",
    "li_yau_check",
    "spherical_link",
    "local_edge_scale",
]

#: Densities attainable below the 6*pi energy threshold in codimension one:
#: 1 (smooth point), 3/2 (triple-line point), 3*acos(-1/3)/pi (tetrahedral point).
ADMISSIBLE_DENSITIES: tuple[tuple[str, float], ...] = (
    ("1", 1.0),
    ("3/2", 1.5),
    ("3*acos(-1/3)/pi", 3.0 * math.acos(-1.0 / 3.0) / math.pi),
)


def ball_mass(v: DiscreteVarifold, x0, r: float) -> float:
    """Mass of v restricted to the closed ball B(x0, r), by exact clipping."""
    if r <= 0:
        raise ValueError(f"ball radius must be positive, got {r}")
    return float(
        _kernels.ball_masses(
            v.vertices, v.faces, v.multiplicity.astype(np.float64), np.asarray(x0, dtype=np.float64), np.asarray([r])
        )[0]
    )


def ball_mass_ladder(v: DiscreteVarifold, x0, radii) -> np.ndarray:
    """Ball masses for several radii at once (one pass over the faces per radius)."""
    radii = np.asarray(radii, dtype=np.float64)
    if (radii <= 0).any():
        raise ValueError("all ball radii must be positive")
    return _kernels.ball_masses(
        v.vertices, v.faces, v.multiplicity.astype(np.float64), np.asarray(x0, dtype=np.float64), radii
    )


def local_edge_scale(v: DiscreteVarifold, x0, k: int = 32) -> float:
    """Mean edge length over the k faces whose centroids are nearest to x0."""
    x0 = np.asarray(x0, dtype=np.float64)
    cen = v.vertices[v.faces].mean(axis=1)
    d2 = np.einsum("ij,ij->i", cen - x0, cen - x0)
    k = min(k, len(d2))
    idx = np.argpartition(d2, k - 1)[:k] if k < len(d2) else np.arange(len(d2))
    p = v.vertices[v.faces[idx]]
    e = np.concatenate([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]])
    return float(np.linalg.norm(e, axis=1).mean())


@dataclass(frozen=True)
class DensityReport:
    x0: np.ndarray
    radii: np.ndarray
    ratios: np.ndarray
    theta: float
    error_bar: float
    model: str  # "quadratic" (theta + c r^2) or "linear" (theta + c r)
    classification: str
    classification_residual: float
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "x0": list(map(float, self.x0)),
            "radii": list(map(float, self.radii)),
            "ratios": list(map(float, self.ratios)),
            "theta": self.theta,
            "error_bar": self.error_bar,
            "model": self.model,
            "classification": self.classification,
            "classification_residual": self.classification_residual,
            "warnings": list(self.warnings),
        }


def _fit(radii: np.ndarray, ratios: np.ndarray, power: int) -> tuple[float, float]:
    """Least-squares fit ratios ≈ theta + c*r^power; returns (theta, SSR)."""
    A = np.stack([np.ones_like(radii), radii**power], axis=1)
    coef, *_ = np.linalg.lstsq(A, ratios, rcond=None)
    ssr = float(((A @ coef - ratios) ** 2).sum())
    return float(coef[0]), ssr


def density(
    v: DiscreteVarifold,
    x0,
    r_max: float | None = None,
    rungs: int = 6,
    ratio: float = 0.5,
) -> DensityReport:
    """Extrapolated 2-density of v at x0 from a geometric radius ladder.

    Mass ratios μ(B_r)/(π r²) are computed on r_i = r_max · ratio^i and fitted
    against both theta + c·r² (smooth sheets) and theta + c·r (conical
    junction points); the better-fitting model supplies theta. The error bar
    is the half-spread of the pairwise Richardson extrapolants of the winning
    model. x0 must lie on the support (within half a local edge length).
    """
    x0 = np.asarray(x0, dtype=np.float64)
    h = local_edge_scale(v, x0)
    warnings: list[str] = []
    if point_surface_distance(v, x0) > 0.5 * h:
        raise MeshError(f"point {x0.tolist()} is not on the support of the varifold")
    if r_max is None:
        r_max = 10.0 * h
    elif r_max < 2.0 * h:
        msg = f"r_max={r_max:.3g} is below mesh resolution (edge scale {h:.3g}); trimming ladder"
        log.warning(msg)
        warnings.append(msg)
    if rungs < 3:
        raise ValueError("need at least 3 rungs to extrapolate")
    radii = r_max * ratio ** np.arange(rungs)
    if warnings:
        keep = radii >= 0.5 * h
        if keep.sum() >= 3:
            radii = radii[keep]
    masses = ball_mass_ladder(v, x0, radii)
    ratios = masses / (math.pi * radii**2)

    theta_q, ssr_q = _fit(radii, ratios, 2)
    theta_l, ssr_l = _fit(radii, ratios, 1)
    if ssr_q <= ssr_l:
        theta, model, power = theta_q, "quadratic", 2
    else:
        theta, model, power = theta_l, "linear", 1

    qp = ratio**power
    rich = (ratios[1:] - qp * ratios[:-1]) / (1.0 - qp)
    error_bar = 0.5 * float(rich.max() - rich.min()) if len(rich) > 1 else float("nan")

    label, resid = classify_density(theta)
    return DensityReport(
        x0=x0,
        radii=radii,
        ratios=ratios,
        theta=theta,
        error_bar=error_bar,
        model=model,
        classification=label,
        classification_residual=resid,
        warnings=tuple(warnings),
    )


def classify_density(theta: float, tol: float = 0.1, ambient_dim: int = 3) -> tuple[str, float]:
    """Nearest admissible density value, or ">=2 / unclassified".

    In ambient dimension 3 the admissible set below 2 is {1, 3/2,
    3*acos(-1/3)/pi}; in higher ambient dimensions only {1, 3/2} survives.
    Returns (label, |theta - value|); the residual is NaN when unclassified.
    """
    if theta < 0.5:
        raise ValueError(f"theta={theta} is not a varifold density (< 0.5)")
    if theta >= 2.0 - tol:
        return ">=2 / unclassified", float("nan")
    candidates = ADMISSIBLE_DENSITIES if ambient_dim == 3 else ADMISSIBLE_DENSITIES[:2]
    label, value = min(candidates, key=lambda kv: abs(theta - kv[1]))
    return label, abs(theta - value)


# ---------------------------------------------------------------------------
# monotonicity and Li–Yau


@dataclass(frozen=True)
class MonotonicityReport:
    x0: np.ndarray
    r: float
    s: float
    lhs: float
    rhs: float
    willmore_term: float
    slack: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "x0": list(map(float, self.x0)),
            "r": self.r,
            "s": self.s,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "willmore_term": self.willmore_term,
            "slack": self.slack,
            "passed": self.passed,
        }


def monotonicity_check(
    v: DiscreteVarifold, x0, r: float, s: float, eps: float = 0.02
) -> MonotonicityReport:
    """Check μ(B_r)/(πr²) ≤ μ(B_s)/(πs²) + (1/16π) ∫_{B_s} |H|² dμ for r < s.

    The curvature integral is the lumped sum over vertices inside B_s. The
    check passes when slack = RHS - LHS ≥ -eps (discretization allowance).
    """
    if not 0 < r < s:
        raise ValueError(f"need 0 < r < s, got r={r}, s={s}")
    x0 = np.asarray(x0, dtype=np.float64)
    m_r, m_s = ball_mass_ladder(v, x0, [r, s])
    lhs = m_r / (math.pi * r * r)
    ratio_s = m_s / (math.pi * s * s)
    f = mean_curvature(v)
    inside = np.linalg.norm(v.vertices - x0, axis=1) <= s
    keep = inside & ~f.boundary_mask & ~f.isolated_mask
    h2 = np.einsum("ij,ij->i", f.H, f.H)
    w_term = math.fsum((h2 * f.vertex_area)[keep]) / (16.0 * math.pi)
    rhs = ratio_s + w_term
    slack = rhs - lhs
    return MonotonicityReport(
        x0=x0, r=r, s=s, lhs=float(lhs), rhs=float(rhs),
        willmore_term=float(w_term), slack=float(slack), passed=bool(slack >= -eps),
    )


@dataclass(frozen=True)
class LiYauReport:
    thetas: np.ndarray
    theta_max: float
    willmore_over_4pi: float
    gap: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "thetas": list(map(float, self.thetas)),
            "theta_max": self.theta_max,
            "willmore_over_4pi": self.willmore_over_4pi,
            "gap": self.gap,
            "passed": self.passed,
        }


def li_yau_check(v: DiscreteVarifold, sample_points, eps: float = 0.05) -> LiYauReport:
    """Li–Yau bound: max over samples of Θ(x) must not exceed W/(4π) + eps.

    Requires a closed varifold (no boundary edges). The gap reported is
    theta_max - W/(4π); sampling the maximizing points of the density makes
    the gap |·| ≈ 0 exactly when the bound is saturated.
    """
    from .mesh import edge_topology

    topo = edge_topology(v)
    if len(topo.boundary_edges):
        e = topo.edges[topo.boundary_edges[0]]
        raise MeshError(f"Li–Yau check needs a closed varifold: edge ({e[0]}, {e[1]}) is boundary")
    thetas = np.array([density(v, p).theta for p in sample_points])
    w = willmore_energy(v)
    bound = w / (4.0 * math.pi)
    theta_max = float(thetas.max()) if len(thetas) else 0.0
    gap = theta_max - bound
    return LiYauReport(
        thetas=thetas,
        theta_max=theta_max,
        willmore_over_4pi=float(bound),
        gap=float(gap),
        passed=bool(gap <= eps),
    )


# ---------------------------------------------------------------------------
# spherical link


@dataclass(frozen=True)
class SphericalLink:
    """Blow-up link of the varifold at a point: ∂B_r(x0) ∩ spt, rescaled to S²."""

    polylines: tuple[np.ndarray, ...]
    total_length: float
    junction_count: int
    density_estimate: float

    def to_dict(self) -> dict:
        return {
            "polylines": [p.tolist() for p in self.polylines],
            "total_length": self.total_length,
            "junction_count": self.junction_count,
            "density_estimate": self.density_estimate,
        }


def _face_circle_arcs(p2d: np.ndarray, rho: float) -> list[tuple[float, float]]:
    """Angular intervals of the circle |p| = rho lying inside the CCW triangle p2d."""
    angles: list[float] = []
    for k in range(3):
        p0 = p2d[k]
        d = p2d[(k + 1) % 3] - p0
        dd = float(d @ d)
        if dd < 1e-300:
            continue
        p0d = float(p0 @ d)
        disc = p0d * p0d - dd * (float(p0 @ p0) - rho * rho)
        if disc <= 1e-12 * dd * rho * rho:
            continue
        sq = math.sqrt(disc)
        for t in ((-p0d - sq) / dd, (-p0d + sq) / dd):
            if 0.0 <= t <= 1.0:
                q = p0 + t * d
                angles.append(math.atan2(q[1], q[0]))
    if not angles:
        probe = np.array([rho, 0.0])
        return [(0.0, 2.0 * math.pi)] if _inside_ccw(p2d, probe) else []
    angles.sort()
    out = []
    for i, a0 in enumerate(angles):
        a1 = angles[(i + 1) % len(angles)]
        if i + 1 == len(angles):
            a1 += 2.0 * math.pi
        mid = 0.5 * (a0 + a1)
        probe = np.array([rho * math.cos(mid), rho * math.sin(mid)])
        if _inside_ccw(p2d, probe):
            out.append((a0, a1 - a0))
    return out


def _inside_ccw(p2d: np.ndarray, q: np.ndarray) -> bool:
    for k in range(3):
        a = p2d[k]
        b = p2d[(k + 1) % 3]
        if (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]) < -1e-12:
            return False
    return True


def spherical_link(v: DiscreteVarifold, x0, r: float) -> SphericalLink:
    """Intersection of spt v with the sphere ∂B_r(x0), rescaled to the unit sphere.

    Per face the circle–triangle intersection is computed exactly in the face
    plane; lengths are summed from arc angles (multiplicity-weighted), then
    the arcs are sampled and chained into polylines. Arc ends crossing the
    same mesh edge coincide to round-off, so endpoint merging uses a small
    scale-free tolerance; nodes where three or more ends meet are junctions;
    at four-end nodes (transversal crossings) the chaining continues straight
    through.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if r <= 0:
        raise ValueError("link radius must be positive")
    arcs = []  # (mult, rho, x0foot, e1, e2, theta0, dtheta)
    lengths = []
    va = v.vertices[v.faces[:, 0]] - x0
    vb = v.vertices[v.faces[:, 1]] - x0
    vc = v.vertices[v.faces[:, 2]] - x0
    norms = np.stack([np.linalg.norm(va, axis=1), np.linalg.norm(vb, axis=1), np.linalg.norm(vc, axis=1)])
    dmin_v = norms.min(axis=0)
    dmax_v = norms.max(axis=0)
    # the max of |x - x0| over a triangle sits at a vertex, so the dmax test is
    # exact; the min can undershoot the vertices by up to the longest edge
    # (the circle may enter through an edge with all three vertices outside)
    emax = np.max(np.stack([
        np.linalg.norm(vb - va, axis=1),
        np.linalg.norm(vc - vb, axis=1),
        np.linalg.norm(va - vc, axis=1),
    ]), axis=0)
    cand = np.nonzero((dmin_v < r + emax) & (dmax_v > r * (1 - 1e-12)))[0]
    for fi in cand:
        a, b, c = va[fi], vb[fi], vc[fi]
        n = np.cross(b - a, c - a)
        nn = np.linalg.norm(n)
        if nn < 1e-300:
            continue
        nhat = n / nn
        d = float(a @ nhat)
        rho2 = r * r - d * d
        if rho2 <= 0.0:
            continue
        rho = math.sqrt(rho2)
        e1 = b - a
        e1 = e1 / np.linalg.norm(e1)
        e2 = np.cross(nhat, e1)
        foot = d * nhat  # circle center relative to x0
        p2d = np.stack([[float((p - foot) @ e1), float((p - foot) @ e2)] for p in (a, b, c)])
        for theta0, dtheta in _face_circle_arcs(p2d, rho):
            m = float(v.multiplicity[fi])
            arcs.append((m, rho, foot, e1, e2, theta0, dtheta))
            lengths.append(m * rho * dtheta / r)
    total_length = math.fsum(lengths)
    polylines, junction_count = _chain_arcs(arcs, r, tol=1e-5)
    return SphericalLink(
        polylines=tuple(polylines),
        total_length=total_length,
        junction_count=junction_count,
        density_estimate=total_length / (2.0 * math.pi),
    )


def _sample_arc(mult, rho, foot, e1, e2, theta0, dtheta, r) -> np.ndarray:
    npts = max(2, int(math.ceil(dtheta / 0.1)) + 1)
    t = theta0 + np.linspace(0.0, dtheta, npts)
    pts = foot[None, :] + rho * (np.cos(t)[:, None] * e1[None, :] + np.sin(t)[:, None] * e2[None, :])
    u = pts / r
    u /= np.linalg.norm(u, axis=1)[:, None]
    return u


def _chain_arcs(arcs, r, tol: float) -> tuple[list[np.ndarray], int]:
    """Merge sampled arc endpoints into nodes and walk maximal polylines."""
    if not arcs:
        return [], 0
    samples = [_sample_arc(*a, r) for a in arcs]
    closed = [a[6] >= 2.0 * math.pi - 1e-9 for a in arcs]
    # collect endpoints of open arcs
    ends = []  # (arc index, which end, point)
    for i, (s, cl) in enumerate(zip(samples, closed)):
        if not cl:
            ends.append((i, 0, s[0]))
            ends.append((i, 1, s[-1]))
    node_of: dict[tuple[int, int], int] = {}
    centers: list[np.ndarray] = []
    for i, w, p in ends:
        for j, cpt in enumerate(centers):
            if np.linalg.norm(cpt - p) <= tol:
                node_of[(i, w)] = j
                break
        else:
            node_of[(i, w)] = len(centers)
            centers.append(p)
    degree = [0] * len(centers)
    for key, nd in node_of.items():
        degree[nd] += 1
    junction_count = sum(1 for d in degree if d >= 3)

    incident: dict[int, list[tuple[int, int]]] = {}
    for (i, w), nd in node_of.items():
        incident.setdefault(nd, []).append((i, w))

    used = [False] * len(samples)
    polylines: list[np.ndarray] = []
    for i, cl in enumerate(closed):
        if cl:
            used[i] = True
            polylines.append(samples[i])

    def heading(i: int, w: int, outward: bool) -> np.ndarray:
        s = samples[i]
        d = (s[1] - s[0]) if w == 0 else (s[-2] - s[-1])
        d = d if outward else -d
        n = np.linalg.norm(d)
        return d / n if n > 0 else d

    def walk(i0: int, w0: int) -> np.ndarray:
        pts = [samples[i0] if w0 == 0 else samples[i0][::-1]]
        used[i0] = True
        cur, went = i0, 1 - w0  # arrived at the far end
        while True:
            nd = node_of[(cur, went)]
            options = [(j, w) for (j, w) in incident[nd] if not used[j]]
            if degree[nd] == 2 and len(options) == 1:
                nxt, wn = options[0]
            elif degree[nd] == 4 and len(options) >= 1:
                inc = heading(cur, went, outward=False)
                nxt, wn = max(options, key=lambda jw: float(inc @ heading(jw[0], jw[1], outward=True)))
            else:
                break
            used[nxt] = True
            seg = samples[nxt] if wn == 0 else samples[nxt][::-1]
            pts.append(seg[1:])
            cur, went = nxt, 1 - wn
            if (cur, went) == (i0, w0):
                break
        return np.vstack(pts)

    # start walks at junction nodes and odd nodes first, then sweep leftovers
    for nd, deg in enumerate(degree):
        if deg != 2:
            for (i, w) in incident[nd]:
                if not used[i]:
                    polylines.append(walk(i, w))
    for i in range(len(samples)):
        if not used[i]:
            polylines.append(walk(i, 0))
    return polylines, junction_count
