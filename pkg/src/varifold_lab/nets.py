"""Geodesic nets on the unit sphere: lengths, balance, catalogue, relaxation.

A net is a set of unit vertices joined by great-circle arcs with integer
multiplicities. Stationarity means the multiplicity-weighted unit tangents of
the incident arcs cancel at every vertex; the classification of such nets
comprises exactly ten families, reproduced here with their closed-form total
lengths and, for the first seven, explicit balanced coordinates.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "NetError",
    "GeodesicNet",
    "CatalogueEntry",
    "RelaxResult",
    "make_net",
    "load_net",
    "save_net",
    "arc_length",
    "total_length",
    "balance_residual",
    "catalogue",
    "relax",
    "match_link",
]


class NetError(ValueError):
    """Raised for structurally invalid nets or ambiguous geodesics."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GeodesicNet:
    """Unit-sphere net: vertices (N, 3) unit vectors; arcs (M, 3) int rows
    [i, j, multiplicity]; major (M,) bool flags selecting the long way round."""

    vertices: np.ndarray
    arcs: np.ndarray
    major: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", _frozen(np.asarray(self.vertices, dtype=np.float64)))
        object.__setattr__(self, "arcs", _frozen(np.asarray(self.arcs, dtype=np.int64).reshape(-1, 3)))
        m = self.major if self.major is not None else np.zeros(len(self.arcs), dtype=bool)
        object.__setattr__(self, "major", _frozen(np.asarray(m, dtype=bool)))

    @property
    def num_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def num_arcs(self) -> int:
        return int(self.arcs.shape[0])


def make_net(vertices, arcs, major=None, check: bool = True) -> GeodesicNet:
    vertices = np.asarray(vertices, dtype=np.float64)
    arcs = np.asarray(arcs, dtype=np.int64).reshape(-1, 3)
    if major is None:
        major = np.zeros(len(arcs), dtype=bool)
    net = GeodesicNet(vertices, arcs, np.asarray(major, dtype=bool))
    if check:
        _validate(net)
    return net


def _validate(net: GeodesicNet) -> None:
    if net.vertices.ndim != 2 or net.vertices.shape[1] != 3:
        raise NetError(f"vertices must be (N, 3), got {net.vertices.shape}")
    nrm = np.linalg.norm(net.vertices, axis=1)
    off = np.abs(nrm - 1.0)
    if len(nrm) and off.max() > 1e-12:
        raise NetError(f"vertex {int(off.argmax())} is off the unit sphere by {off.max():.2e}")
    if len(net.arcs):
        if net.arcs[:, :2].min() < 0 or net.arcs[:, :2].max() >= net.num_vertices:
            raise NetError("arc endpoint index out of range")
        if (net.arcs[:, 0] == net.arcs[:, 1]).any():
            bad = int(np.nonzero(net.arcs[:, 0] == net.arcs[:, 1])[0][0])
            raise NetError(f"arc {bad} has identical endpoints")
        if (net.arcs[:, 2] < 1).any():
            raise NetError("arc multiplicities must be >= 1")


def arc_length(p, q, major: bool = False) -> float:
    """Great-circle distance arccos<p, q>, or 2*pi minus it for the major arc.

    Antipodal endpoints leave the minor geodesic undetermined and raise
    NetError("ambiguous geodesic"); the major-arc length is still pi and is
    returned without complaint.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    c = float(np.clip(p @ q, -1.0, 1.0))
    if not major and np.linalg.norm(p + q) < 1e-9:
        raise NetError("ambiguous geodesic: endpoints are antipodal")
    ang = math.acos(c)
    return 2.0 * math.pi - ang if major else ang


def total_length(net: GeodesicNet) -> float:
    """Sum of multiplicity-weighted arc lengths."""
    p = net.vertices[net.arcs[:, 0]]
    q = net.vertices[net.arcs[:, 1]]
    c = np.clip(np.einsum("ij,ij->i", p, q), -1.0, 1.0)
    ang = np.arccos(c)
    ang = np.where(net.major, 2.0 * math.pi - ang, ang)
    return math.fsum(net.arcs[:, 2] * ang)


def _tangents(net: GeodesicNet) -> tuple[np.ndarray, np.ndarray]:
    """Unit tangents of each arc at both endpoints, pointing into the arc.

    Returns (t_start (M,3), t_end (M,3)). Major arcs leave each endpoint in
    the direction opposite the minor arc.
    """
    p = net.vertices[net.arcs[:, 0]]
    q = net.vertices[net.arcs[:, 1]]
    c = np.clip(np.einsum("ij,ij->i", p, q), -1.0, 1.0)
    s = np.sqrt(np.maximum(1.0 - c * c, 0.0))
    if (s < 1e-12).any():
        bad = int(np.nonzero(s < 1e-12)[0][0])
        raise NetError(f"arc {bad} joins (nearly) parallel or antipodal points")
    tp = (q - c[:, None] * p) / s[:, None]
    tq = (p - c[:, None] * q) / s[:, None]
    sign = np.where(net.major, -1.0, 1.0)[:, None]
    return tp * sign, tq * sign


def balance_residual(net: GeodesicNet) -> float:
    """Max over vertices of |sum of multiplicity-weighted incident tangents|.

    The sums are projected to the tangent plane of the sphere (they already
    are, up to round-off). Zero characterizes stationarity.
    """
    tp, tq = _tangents(net)
    force = np.zeros_like(net.vertices)
    w = net.arcs[:, 2].astype(np.float64)[:, None]
    np.add.at(force, net.arcs[:, 0], w * tp)
    np.add.at(force, net.arcs[:, 1], w * tq)
    radial = np.einsum("ij,ij->i", force, net.vertices)
    force -= radial[:, None] * net.vertices
    deg = np.zeros(net.num_vertices)
    np.add.at(deg, net.arcs[:, 0], 1.0)
    np.add.at(deg, net.arcs[:, 1], 1.0)
    force[deg == 0] = 0.0
    return float(np.linalg.norm(force, axis=1).max()) if net.num_vertices else 0.0


# ---------------------------------------------------------------------------
# relaxation


@dataclass(frozen=True)
class RelaxResult:
    net: GeodesicNet
    lengths: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def relax(
    net: GeodesicNet,
    max_iter: int = 1000,
    tol: float = 1e-10,
    trace: bool = False,
) -> GeodesicNet | RelaxResult:
    """Drive the net to stationarity (zero junction force), combinatorics fixed.

    Balanced nets are saddle points of total length — every net shortens by
    sliding all its vertices toward a common point — so descending length
    cannot return a perturbed net to balance. This solves the first-order
    balance system instead: the residual stacks the multiplicity-weighted
    tangential force at every vertex, and damped Gauss-Newton steps,
    renormalized to the sphere and accepted only when the residual norm
    decreases, drive it to zero. Arcs longer than pi/2 are subdivided with
    temporary slave vertices so the minor-arc parametrization stays
    well-posed; a slave is 2-valent, so zero force there means its two
    tangents are collinear and its chain is a single geodesic. Slaves are
    dropped on return and the combinatorics is the input one. Stops when the
    largest per-vertex force norm drops below tol or after max_iter steps.
    Aborts with NetError if any (sub)arc collapses below 1e-6.
    """
    _validate(net)
    work_x, work_arcs, n_master = _subdivide(net)
    lengths: list[float] = []
    residuals: list[float] = []

    def length_of(x: np.ndarray) -> float:
        p = x[work_arcs[:, 0]]
        q = x[work_arcs[:, 1]]
        c = np.clip(np.einsum("ij,ij->i", p, q), -1.0, 1.0)
        return math.fsum(work_arcs[:, 2] * np.arccos(c))

    def forces(x: np.ndarray) -> np.ndarray:
        # Tangent of the arc to q at p is (q - <p,q>p)/sqrt(1-<p,q>^2); the
        # per-vertex sum is projected to the tangent plane of the sphere.
        p = x[work_arcs[:, 0]]
        q = x[work_arcs[:, 1]]
        c = np.clip(np.einsum("ij,ij->i", p, q), -1.0, 1.0)
        ang = np.arccos(c)
        if (ang < 1e-6).any():
            bad = int(np.nonzero(ang < 1e-6)[0][0])
            raise NetError(
                f"arc collapse during relaxation: sub-arc {bad} shrank below 1e-6"
            )
        s = np.sqrt(np.maximum(1.0 - c * c, 1e-30))
        tp = (q - c[:, None] * p) / s[:, None]
        tq = (p - c[:, None] * q) / s[:, None]
        w = work_arcs[:, 2].astype(np.float64)[:, None]
        f = np.zeros_like(x)
        np.add.at(f, work_arcs[:, 0], w * tp)
        np.add.at(f, work_arcs[:, 1], w * tq)
        f -= np.einsum("ij,ij->i", f, x)[:, None] * x
        return f

    def residual_of(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = z / np.linalg.norm(z, axis=1)[:, None]
        return forces(x).ravel(), x

    def jacobian(x: np.ndarray) -> np.ndarray:
        n = x.size
        jac = np.empty((n, n))
        h = 1e-7
        flat = x.ravel()
        for k in range(n):
            step = np.zeros(n)
            step[k] = h
            rp, _ = residual_of((flat + step).reshape(-1, 3))
            rm, _ = residual_of((flat - step).reshape(-1, 3))
            jac[:, k] = (rp - rm) / (2.0 * h)
        return jac

    r, x = residual_of(work_x.copy())
    L = length_of(x)
    lam = 1e-3
    converged = False
    it = 0
    for it in range(max_iter):
        res = float(np.linalg.norm(r.reshape(-1, 3), axis=1).max())
        lengths.append(L)
        residuals.append(res)
        if res < tol:
            converged = True
            break
        jac = jacobian(x)
        lhs = jac.T @ jac
        rhs = jac.T @ r
        eye = np.eye(lhs.shape[0])
        accepted = False
        for _ in range(40):
            try:
                d = np.linalg.solve(lhs + lam * eye, -rhs)
            except np.linalg.LinAlgError:
                lam *= 4.0
                continue
            r_new, x_new = residual_of(x + d.reshape(-1, 3))
            if r_new @ r_new < r @ r:
                accepted = True
                break
            lam *= 4.0
        if not accepted:
            break
        lam = max(0.5 * lam, 1e-12)
        x, r = x_new, r_new
        L = length_of(x)
    else:
        it = max_iter

    out = replace(net, vertices=_frozen(x[:n_master]))
    if trace:
        return RelaxResult(net=out, lengths=lengths, residuals=residuals,
                           iterations=it, converged=converged)
    return out


def _subdivide(net: GeodesicNet) -> tuple[np.ndarray, np.ndarray, int]:
    """Split arcs longer than pi/2 with slave vertices along the great circle."""
    verts = [net.vertices[i].copy() for i in range(net.num_vertices)]
    rows: list[list[int]] = []
    for (i, j, m), major in zip(net.arcs.tolist(), net.major.tolist()):
        p, q = net.vertices[i], net.vertices[j]
        c = float(np.clip(p @ q, -1.0, 1.0))
        if np.linalg.norm(p + q) < 1e-9:
            raise NetError("cannot relax an arc with antipodal endpoints (ambiguous geodesic)")
        ang = math.acos(c)
        length = 2.0 * math.pi - ang if major else ang
        k = max(1, int(math.ceil(length / (0.5 * math.pi) - 1e-12)))
        if k == 1:
            rows.append([i, j, m])
            continue
        w = q - c * p
        w /= np.linalg.norm(w)
        step = (-(2.0 * math.pi - ang) if major else ang) / k
        last = i
        for t in range(1, k):
            phi = step * t
            verts.append(math.cos(phi) * p + math.sin(phi) * w)
            rows.append([last, len(verts) - 1, m])
            last = len(verts) - 1
        rows.append([last, j, m])
    return np.asarray(verts), np.asarray(rows, dtype=np.int64), net.num_vertices


# ---------------------------------------------------------------------------
# the ten-net catalogue


@dataclass(frozen=True)
class CatalogueEntry:
    name: str
    n_arcs: int
    closed_form: str
    length: float | None
    below_4pi: bool
    constructible: bool
    combinatorics: str
    net: GeodesicNet | None = None
    invalid_as_printed: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_arcs": self.n_arcs,
            "closed_form": self.closed_form,
            "length": self.length,
            "below_4pi": self.below_4pi,
            "constructible": self.constructible,
            "combinatorics": self.combinatorics,
            "invalid_as_printed": self.invalid_as_printed,
            "note": self.note,
        }


def _arcs_by_dot(verts: np.ndarray, target: float, tol: float = 1e-9) -> np.ndarray:
    rows = []
    n = len(verts)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(float(verts[i] @ verts[j]) - target) < tol:
                rows.append([i, j, 1])
    return np.asarray(rows, dtype=np.int64)


def _net_great_circle() -> GeodesicNet:
    verts = np.array([[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]], dtype=np.float64)
    arcs = np.array([[0, 1, 1], [1, 2, 1], [2, 3, 1], [3, 0, 1]], dtype=np.int64)
    return make_net(verts, arcs)


def _net_three_half_circles() -> GeodesicNet:
    verts = [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]
    arcs = []
    for k in range(3):
        a = 2.0 * math.pi * k / 3.0
        verts.append([math.cos(a), math.sin(a), 0.0])
        arcs.append([0, 2 + k, 1])
        arcs.append([2 + k, 1, 1])
    return make_net(np.asarray(verts), np.asarray(arcs, dtype=np.int64))


def _net_tetrahedron() -> GeodesicNet:
    verts = np.array(
        [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=np.float64
    ) / math.sqrt(3.0)
    return make_net(verts, _arcs_by_dot(verts, -1.0 / 3.0))


def _net_cube() -> GeodesicNet:
    verts = np.array(
        [[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)],
        dtype=np.float64,
    ) / math.sqrt(3.0)
    return make_net(verts, _arcs_by_dot(verts, 1.0 / 3.0))


def _net_prism(sides: int, rho2: float) -> GeodesicNet:
    rho = math.sqrt(rho2)
    h = math.sqrt(1.0 - rho2)
    verts = []
    for sz in (h, -h):
        for k in range(sides):
            a = 2.0 * math.pi * k / sides
            verts.append([rho * math.cos(a), rho * math.sin(a), sz])
    verts = np.asarray(verts)
    arcs = []
    for k in range(sides):  # two rings
        arcs.append([k, (k + 1) % sides, 1])
        arcs.append([sides + k, sides + (k + 1) % sides, 1])
    for k in range(sides):  # uprights
        arcs.append([k, sides + k, 1])
    return make_net(verts, np.asarray(arcs, dtype=np.int64))


def _net_dodecahedron() -> GeodesicNet:
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    pts = [[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
    for a in (-1.0 / phi, 1.0 / phi):
        for b in (-phi, phi):
            pts.append([0.0, a, b])
            pts.append([a, b, 0.0])
            pts.append([b, 0.0, a])
    verts = np.asarray(pts, dtype=np.float64) / math.sqrt(3.0)
    arcs = _arcs_by_dot(verts, math.sqrt(5.0) / 3.0)
    assert len(arcs) == 30, f"dodecahedron edge scan found {len(arcs)} arcs"
    return make_net(verts, arcs)


def catalogue() -> list[CatalogueEntry]:
    """The ten stationary nets on the unit sphere, with printed closed forms.

    Entries 1–7 carry explicit balanced coordinates; 8–10 are length-only
    (no coordinates are printed in the classification; reconstructing them is
    out of scope). Entry 10's printed formula contains arcsin of an argument
    larger than one and is flagged invalid; its intended comparison (> 25,
    hence > 4*pi) is kept as a note.
    """
    acos, asin, sqrt, pi = math.acos, math.asin, math.sqrt, math.pi
    e8 = (
        16 * asin(1 / sqrt(3))
        + 16 * asin(sqrt(2 - sqrt(2)) / sqrt(3))
        + 16 * asin(sqrt((2 ** 0.25 - 1) ** 2 / 6 + (2 - sqrt(2)) ** 2 / 12))
    )
    e9 = (6 * 83.80167087 + 8 * 58.25684287 + 4 * 13.55944752) * pi / 180.0
    entries = [
        CatalogueEntry(
            name="great circle",
            n_arcs=4,
            closed_form="2*pi",
            length=2 * pi,
            below_4pi=True,
            constructible=True,
            combinatorics="one great circle sampled at 4 points, 4 quarter arcs",
            net=_net_great_circle(),
        ),
        CatalogueEntry(
            name="three half circles",
            n_arcs=6,
            closed_form="3*pi",
            length=3 * pi,
            below_4pi=True,
            constructible=True,
            combinatorics="three meridians sharing both poles, split at the equator",
            net=_net_three_half_circles(),
        ),
        CatalogueEntry(
            name="tetrahedron",
            n_arcs=6,
            closed_form="6*acos(-1/3)",
            length=6 * acos(-1.0 / 3.0),
            below_4pi=True,
            constructible=True,
            combinatorics="1-skeleton of the regular tetrahedron, radially projected",
            net=_net_tetrahedron(),
        ),
        CatalogueEntry(
            name="cube",
            n_arcs=12,
            closed_form="12*acos(1/3)",
            length=12 * acos(1.0 / 3.0),
            below_4pi=False,
            constructible=True,
            combinatorics="1-skeleton of the cube, radially projected",
            net=_net_cube(),
        ),
        CatalogueEntry(
            name="pentagon prism",
            n_arcs=15,
            closed_form="10*acos(sqrt(5)/3) + 5*acos((3 - 5*sqrt(5)/3)/(5 - sqrt(5)))",
            length=10 * acos(sqrt(5) / 3) + 5 * acos((3 - 5 * sqrt(5) / 3) / (5 - sqrt(5))),
            below_4pi=False,
            constructible=True,
            combinatorics="prism over a regular pentagon: two rings of 5 plus 5 uprights",
            net=_net_prism(5, 2.0 * (5.0 - math.sqrt(5.0)) / 15.0),
        ),
        CatalogueEntry(
            name="triangle prism",
            n_arcs=9,
            closed_form="6*acos(-1/3) + 3*acos(7/9)",
            length=6 * acos(-1.0 / 3.0) + 3 * acos(7.0 / 9.0),
            below_4pi=False,
            constructible=True,
            combinatorics="prism over a regular triangle: two rings of 3 plus 3 uprights",
            net=_net_prism(3, 8.0 / 9.0),
        ),
        CatalogueEntry(
            name="dodecahedron",
            n_arcs=30,
            closed_form="30*acos(1 - 8/(3*(1 + sqrt(5))**2))",
            length=30 * acos(1 - 8 / (3 * (1 + sqrt(5)) ** 2)),
            below_4pi=False,
            constructible=True,
            combinatorics="1-skeleton of the regular dodecahedron, radially projected",
            net=_net_dodecahedron(),
        ),
        CatalogueEntry(
            name="two squares and eight pentagons",
            n_arcs=24,
            closed_form=(
                "8*2*asin(1/sqrt(3)) + 8*2*asin(sqrt(2 - sqrt(2))/sqrt(3))"
                " + 8*2*asin(sqrt((2**(1/4) - 1)**2/6 + (2 - sqrt(2))**2/12))"
            ),
            length=e8,
            below_4pi=False,
            constructible=False,
            combinatorics=(
                "24 arcs forming 2 regular quadrilaterals and 8 equal pentagons; each"
                " quadrilateral surrounded by 4 pentagons, each pentagon by 4 pentagons"
                " and one quadrilateral"
            ),
        ),
        CatalogueEntry(
            name="four pentagons and four quadrilaterals",
            n_arcs=18,
            closed_form="(6*83.80167087 + 8*58.25684287 + 4*13.55944752)*2*pi/360",
            length=e9,
            below_4pi=False,
            constructible=False,
            combinatorics=(
                "18 arcs forming 4 equal pentagons and 4 equal quadrilaterals; each"
                " quadrilateral surrounded by 3 pentagons and 1 quadrilateral, each"
                " pentagon by 3 quadrilaterals and 2 pentagons"
            ),
        ),
        CatalogueEntry(
            name="three squares and six pentagons",
            n_arcs=21,
            closed_form=(
                "12*2*asin(1/sqrt(3)) + 6*2*asin(sqrt(3 - sqrt(6)/6))"
                " + 3*2*asin((sqrt(3) - sqrt(2))/(2*sqrt(3)))"
            ),
            length=None,
            below_4pi=False,
            constructible=False,
            combinatorics=(
                "21 arcs forming 3 regular quadrilaterals and 6 equal pentagons; each"
                " quadrilateral surrounded by 4 pentagons, each pentagon by 2"
                " quadrilaterals and 3 pentagons"
            ),
            invalid_as_printed=True,
            note=(
                "the middle arcsin argument sqrt(3 - sqrt(6)/6) ≈ 1.61 exceeds 1, so"
                " the printed formula cannot be evaluated; the intended comparison"
                " (> 25, hence > 4*pi) is recorded here"
            ),
        ),
    ]
    return entries


def match_link(link) -> dict:
    """Classify a spherical link (or a bare length) against the catalogue.

    Nearest catalogue length wins; residuals above 5% of 2*pi are reported as
    composite/unknown (sums of catalogue lengths are not decomposed).
    """
    length = float(getattr(link, "total_length", link))
    if length <= 0:
        raise NetError("cannot match an empty link")
    best: CatalogueEntry | None = None
    best_err = math.inf
    for entry in catalogue():
        if entry.length is None:
            continue
        err = abs(length - entry.length)
        if err < best_err:
            best, best_err = entry, err
    assert best is not None
    result = {
        "length": length,
        "density": length / (2.0 * math.pi),
        "match": best.name,
        "matched_length": best.length,
        "residual": best_err,
    }
    if best_err > 0.05 * 2.0 * math.pi:
        result["match"] = "composite/unknown"
        result["matched_length"] = None
    return result


# ---------------------------------------------------------------------------
# serialization


def save_net(net: GeodesicNet, path: str) -> None:
    """Net JSON: {"vertices": [[x,y,z],...], "arcs": [[i,j,mult],...]};
    arcs that take the major way round get a fourth element 1."""
    rows = []
    for (i, j, m), major in zip(net.arcs.tolist(), net.major.tolist()):
        rows.append([i, j, m, 1] if major else [i, j, m])
    doc = {"vertices": net.vertices.tolist(), "arcs": rows}
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_net(path: str) -> GeodesicNet:
    with open(path) as fh:
        doc = json.load(fh)
    if "vertices" not in doc or "arcs" not in doc:
        raise NetError(f"net file {path!r} needs 'vertices' and 'arcs'")
    rows = doc["arcs"]
    arcs = np.asarray([r[:3] for r in rows], dtype=np.int64)
    major = np.asarray([len(r) > 3 and bool(r[3]) for r in rows], dtype=bool)
    return make_net(np.asarray(doc["vertices"], dtype=np.float64), arcs, major)
