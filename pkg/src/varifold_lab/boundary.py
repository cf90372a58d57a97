"""Boundary measures and circle conormal integrals.

The discrete side extracts per-edge outward conormals from a mesh with
boundary.  The analytic side evaluates the conormal integral of a circle with
plane-orthogonal conormal, in closed form and by spectral quadrature, plus the
sup-over-basepoints search and the admissibility threshold report built on it.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .mesh import DiscreteVarifold, MeshError, edge_topology, face_areas, face_normals

log = logging.getLogger(__name__)

_FOUR_PI = 4.0 * math.pi


def _unit(a: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(a))
    if n == 0.0:
        raise ValueError("zero vector cannot be normalized")
    return a / n


@dataclass(frozen=True)
class CircleSpec:
    """One boundary circle: center, radius, plane normal, multiplicity, sign.

    The conormal field is conormal_sign * normal, constant along the circle
    (the closed-form lemma's hypothesis).
    """

    center: np.ndarray
    radius: float
    normal: np.ndarray
    m: int = 1
    conormal_sign: int = 1

    def __post_init__(self) -> None:
        center = np.asarray(self.center, dtype=np.float64).reshape(3)
        normal = _unit(np.asarray(self.normal, dtype=np.float64).reshape(3))
        center.flags.writeable = False
        normal.flags.writeable = False
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "normal", normal)
        if not self.radius > 0.0:
            raise ValueError("circle radius must be positive")
        if int(self.m) < 1:
            raise ValueError("multiplicity m must be a positive integer")
        if self.conormal_sign not in (-1, 1):
            raise ValueError("conormal_sign must be +1 or -1")

    def to_dict(self) -> dict:
        return {
            "center": [float(c) for c in self.center],
            "radius": float(self.radius),
            "normal": [float(c) for c in self.normal],
            "m": int(self.m),
            "conormal_sign": int(self.conormal_sign),
        }


@dataclass(frozen=True)
class BoundaryDatum:
    circles: tuple[CircleSpec, ...]

    def to_dict(self) -> dict:
        return {"circles": [c.to_dict() for c in self.circles]}


def make_datum(circles) -> BoundaryDatum:
    return BoundaryDatum(tuple(circles))


def save_datum(datum: BoundaryDatum, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(datum.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_datum(path: str) -> BoundaryDatum:
    with open(path) as fh:
        doc = json.load(fh)
    circles = [
        CircleSpec(
            np.asarray(c["center"], dtype=np.float64),
            float(c["radius"]),
            np.asarray(c["normal"], dtype=np.float64),
            int(c.get("m", 1)),
            int(c.get("conormal_sign", 1)),
        )
        for c in doc["circles"]
    ]
    return BoundaryDatum(tuple(circles))


# ---------------------------------------------------------------------------
# discrete boundary of a mesh

@dataclass(frozen=True)
class DiscreteBoundary:
    """Boundary edges of a mesh with their lengths and outward conormals."""

    edges: np.ndarray       # (B, 2) vertex indices
    lengths: np.ndarray     # (B,)
    conormals: np.ndarray   # (B, 3) unit, in the incident face plane, outward
    multiplicity: np.ndarray  # (B,) of the incident face
    total_length: float


def boundary_measure(v: DiscreteVarifold) -> DiscreteBoundary:
    """Per-edge outward conormals on the boundary of ``v``.

    Each boundary edge has exactly one incident face; the conormal is the
    in-plane unit normal to the edge pointing out of that face.  A closed mesh
    yields an empty boundary (with a log notice).
    """
    topo = edge_topology(v)
    bidx = topo.boundary_edges
    if len(bidx) == 0:
        log.info("mesh is closed: boundary measure is empty")
        z3 = np.zeros((0, 3))
        z = np.zeros(0)
        return DiscreteBoundary(np.zeros((0, 2), dtype=np.int64), z, z3,
                                np.zeros(0, dtype=np.int64), 0.0)
    normals, _ = face_normals(v)
    edges = topo.edges[bidx]
    starts = topo.offsets[bidx]
    fidx = topo.inc_faces[starts]
    signs = topo.inc_signs[starts]
    vec = (v.vertices[edges[:, 1]] - v.vertices[edges[:, 0]]) * signs[:, None]
    lengths = np.linalg.norm(vec, axis=1)
    conormals = np.cross(vec, normals[fidx])
    conormals /= np.linalg.norm(conormals, axis=1, keepdims=True)
    mult = v.multiplicity[fidx]
    total = float(np.dot(mult.astype(np.float64), lengths))
    return DiscreteBoundary(edges, lengths, conormals, mult, total)


# ---------------------------------------------------------------------------
# circle conormal integral: closed form and quadrature

def _reduced_coords(circle: CircleSpec, x0: np.ndarray) -> tuple[float, float]:
    """Reduce to the unit circle in z=0: returns (a, c) with x0 -> (a, 0, c)."""
    w = (np.asarray(x0, dtype=np.float64).reshape(3) - circle.center) / circle.radius
    c = float(w @ circle.normal)
    a = float(np.linalg.norm(w - c * circle.normal))
    return a, c


def _half_integral(a: float, c: float) -> float:
    return -c * math.pi / (
        math.sqrt((1.0 + a) ** 2 + c * c) * math.sqrt((1.0 - a) ** 2 + c * c)
    )


def circle_conormal_integral(circle: CircleSpec, x0) -> float:
    """Closed-form conormal integral of one circle at basepoint x0.

    After reduction to the unit circle with conormal e3 and x0 = (a, 0, c),
    the value is m * (I(a) + I(-a)) with
    I(a) = -c*pi / (sqrt((1+a)^2+c^2) * sqrt((1-a)^2+c^2)).
    """
    a, c = _reduced_coords(circle, x0)
    if math.sqrt((a - 1.0) ** 2 + c * c) < 1e-9:
        raise MeshError("integrand singular: x0 lies on the circle")
    val = _half_integral(a, c) + _half_integral(-a, c)
    return circle.m * circle.conormal_sign * val


def _circle_frame(circle: CircleSpec) -> tuple[np.ndarray, np.ndarray]:
    n = circle.normal
    pick = np.zeros(3)
    pick[int(np.argmin(np.abs(n)))] = 1.0
    e1 = _unit(np.cross(n, pick))
    e2 = np.cross(n, e1)
    return e1, e2


def circle_conormal_integral_quad(
    circle: CircleSpec, x0, n_samples: int = 256, nu0=None
) -> float:
    """Trapezoid-rule conormal integral (spectrally accurate: periodic smooth).

    ``nu0`` overrides the conormal direction (need not be plane-orthogonal;
    the closed form refuses that case, the quadrature does not).
    """
    if n_samples < 16:
        raise ValueError("n_samples must be >= 16")
    x0 = np.asarray(x0, dtype=np.float64).reshape(3)
    if nu0 is None:
        nu = circle.conormal_sign * circle.normal
    else:
        nu = _unit(np.asarray(nu0, dtype=np.float64).reshape(3))
    e1, e2 = _circle_frame(circle)
    t = 2.0 * math.pi * np.arange(n_samples) / n_samples
    pts = (circle.center
           + circle.radius * np.outer(np.cos(t), e1)
           + circle.radius * np.outer(np.sin(t), e2))
    d = pts - x0
    dd = np.einsum("ij,ij->i", d, d)
    if math.sqrt(float(dd.min())) < 1e-12 * circle.radius:
        raise MeshError("integrand singular: x0 lies on the circle")
    vals = (d @ nu) / dd
    return circle.m * float(vals.mean()) * 2.0 * math.pi * circle.radius


def datum_integral(datum: BoundaryDatum, x0) -> float:
    """Sum of closed-form circle integrals over the datum at basepoint x0."""
    return math.fsum(circle_conormal_integral(c, x0) for c in datum.circles)


# ---------------------------------------------------------------------------
# sup over basepoints and the admissibility report

@dataclass(frozen=True)
class ConormalSup:
    value: float
    argmax: np.ndarray
    grid_shape: tuple[int, int, int]

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "argmax": [float(c) for c in self.argmax],
            "grid_shape": list(self.grid_shape),
        }


def _datum_eval(datum: BoundaryDatum, pts: np.ndarray) -> np.ndarray:
    """Vectorized total integral at many basepoints (singular points -> -inf)."""
    total = np.zeros(len(pts))
    for c in datum.circles:
        w = (pts - c.center) / c.radius
        h = w @ c.normal
        a = np.linalg.norm(w - h[:, None] * c.normal, axis=1)
        sing = np.sqrt((a - 1.0) ** 2 + h * h) < 1e-9
        # I(a) + I(-a) = 2 I(a): the two half-period terms coincide.
        denom = np.sqrt((1.0 + a) ** 2 + h * h) * np.sqrt((1.0 - a) ** 2 + h * h)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = -2.0 * h * math.pi / denom
        val = np.where(sing, -np.inf, c.m * c.conormal_sign * val)
        total = total + val
    return total


def sup_conormal_integral(
    datum: BoundaryDatum, grid_n: int = 24, tol: float = 1e-9
) -> ConormalSup:
    """Sup over basepoints of the total conormal integral.

    Coarse grid over the circles' bounding box padded by two diameters (the
    integrand decays like 1/dist^2, so the sup lies inside), then a
    deterministic pattern-search polish.  Grid ties resolve to the first point
    in C scan order; the polish shrinks its step by half on failure.
    """
    if not datum.circles:
        raise ValueError("datum has no circles")
    centers = np.array([c.center for c in datum.circles])
    radii = np.array([c.radius for c in datum.circles])
    lo = (centers - radii[:, None]).min(axis=0)
    hi = (centers + radii[:, None]).max(axis=0)
    diam = float(max(np.max(hi - lo), 2.0 * radii.max()))
    lo = lo - 2.0 * diam
    hi = hi + 2.0 * diam
    axes = [np.linspace(lo[k], hi[k], grid_n) for k in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    vals = _datum_eval(datum, pts)
    best = int(np.argmax(vals))
    x = pts[best].copy()
    fx = float(vals[best])

    step = float((hi - lo).max() / (grid_n - 1))
    dirs = np.array([
        [1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1],
    ], dtype=np.float64)
    while step > tol * diam:
        cand = x + step * dirs
        cv = _datum_eval(datum, cand)
        k = int(np.argmax(cv))
        if cv[k] > fx:
            x, fx = cand[k].copy(), float(cv[k])
        else:
            step *= 0.5
    return ConormalSup(fx, x, (grid_n, grid_n, grid_n))


@dataclass(frozen=True)
class AdmissibilityReport:
    p_estimate: float
    sup_value: float
    sup_argmax: np.ndarray
    total: float
    threshold: float
    slack: float
    passes_threshold: bool
    passes_p_bound: bool
    admissible: bool

    def to_dict(self) -> dict:
        return {
            "p_estimate": float(self.p_estimate),
            "sup_value": float(self.sup_value),
            "sup_argmax": [float(c) for c in self.sup_argmax],
            "total": float(self.total),
            "threshold": float(self.threshold),
            "slack": float(self.slack),
            "passes_threshold": bool(self.passes_threshold),
            "passes_p_bound": bool(self.passes_p_bound),
            "admissible": bool(self.admissible),
        }


def admissibility_check(
    p_estimate: float, datum: BoundaryDatum, threshold: float = 6.0 * math.pi
) -> AdmissibilityReport:
    """Check P + 2*sup < threshold (strict) and P < 4*pi (strict).

    ``threshold`` must be 6*pi or 8*pi — the two regimes with a guarantee.
    """
    if p_estimate < 0.0:
        raise ValueError("p_estimate must be >= 0")
    if not (abs(threshold - 6.0 * math.pi) < 1e-12 or abs(threshold - 8.0 * math.pi) < 1e-12):
        raise ValueError("threshold must be 6*pi or 8*pi")
    sup = sup_conormal_integral(datum)
    total = p_estimate + 2.0 * sup.value
    passes_threshold = total < threshold
    passes_p = p_estimate < _FOUR_PI
    return AdmissibilityReport(
        p_estimate=float(p_estimate),
        sup_value=sup.value,
        sup_argmax=sup.argmax,
        total=float(total),
        threshold=float(threshold),
        slack=float(threshold - total),
        passes_threshold=passes_threshold,
        passes_p_bound=passes_p,
        admissible=passes_threshold and passes_p,
    )
