"""Curvature, energies, and first-variation identities on triangle soups.

The discrete mean curvature is defined through the first variation of mass:
for a vertex p, the gradient of total mass with respect to p is the sum of
area gradients of the incident faces (multiplicity-weighted). At interior
vertices H_v A_v = -grad_v M with A_v the lumped (one-third) vertex area; at
boundary vertices the in-plane conormal force of the boundary edges is added
first, so flat patches have H identically zero including at the rim. This
makes the discrete identity

    sum_v <phi_v, grad_v M>  =  - sum_v <phi_v, H_v A_v>  +  boundary term

exact (to round-off) on meshes without junctions; on meshes with junction
curves the junction force is deliberately left on the left-hand side and shows
up as a residual that shrinks under refinement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import (
    DiscreteVarifold,
    EdgeTopology,
    MeshError,
    edge_topology,
    face_normals,
    mesh_scale,
)

__all__ = [
    "CurvatureField",
    "TopologyReport",
    "mean_curvature",
    "willmore_energy",
    "gauss_curvature",
    "second_fundamental_norm",
    "euler_characteristic",
    "helfrich_energy",
    "enclosed_volume",
    "concentrated_volume",
    "first_variation_residual",
]


@dataclass(frozen=True)
class CurvatureField:
    """Per-vertex curvature data.

    H is the mean curvature vector (sum-of-principal-curvatures convention,
    pointing away from the center of an outward-oriented sphere's curvature,
    i.e. inward for a round sphere). vertex_area is the multiplicity-weighted
    lumped area. Vertices under boundary_mask carry the conormal-corrected H;
    junction_mask marks vertices on edges with three or more sheets. K,
    angle_defect, B2 and gauss_relation_residual are filled by the operations
    that compute them and are NaN on masked vertices.
    """

    H: np.ndarray
    vertex_area: np.ndarray
    boundary_mask: np.ndarray
    junction_mask: np.ndarray
    isolated_mask: np.ndarray
    K: np.ndarray | None = None
    angle_defect: np.ndarray | None = None
    B2: np.ndarray | None = None
    gauss_relation_residual: np.ndarray | None = None


@dataclass(frozen=True)
class TopologyReport:
    num_vertices: int
    num_edges: int
    num_faces: int
    chi: int
    defect_chi: float
    orientable: bool
    connected_components: int
    genus: int | None


# ---------------------------------------------------------------------------
# mean curvature


def _scatter_rows(idx: np.ndarray, rows: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n, rows.shape[1]))
    for c in range(rows.shape[1]):
        out[:, c] = np.bincount(idx, weights=rows[:, c], minlength=n)
    return out


def _area_gradients(v: DiscreteVarifold) -> np.ndarray:
    """Gradient of total mass with respect to each vertex position, (V, 3)."""
    p0 = v.vertices[v.faces[:, 0]]
    p1 = v.vertices[v.faces[:, 1]]
    p2 = v.vertices[v.faces[:, 2]]
    nhat, _ = face_normals(v)
    m = v.multiplicity[:, None].astype(np.float64)
    g0 = 0.5 * np.cross(nhat, p2 - p1) * m
    g1 = 0.5 * np.cross(nhat, p0 - p2) * m
    g2 = 0.5 * np.cross(nhat, p1 - p0) * m
    n = v.num_vertices
    grad = _scatter_rows(v.faces[:, 0], g0, n)
    grad += _scatter_rows(v.faces[:, 1], g1, n)
    grad += _scatter_rows(v.faces[:, 2], g2, n)
    return grad


def _vertex_areas(v: DiscreteVarifold, weighted: bool = True) -> np.ndarray:
    """Lumped one-third vertex areas, multiplicity-weighted unless weighted=False."""
    _, areas = face_normals(v)
    w = areas * v.multiplicity if weighted else areas
    n = v.num_vertices
    acc = np.zeros(n)
    for c in range(3):
        acc += np.bincount(v.faces[:, c], weights=w / 3.0, minlength=n)
    return acc


def _boundary_force(v: DiscreteVarifold, topo: EdgeTopology) -> np.ndarray:
    """Half the multiplicity-weighted conormal line force of the boundary edges."""
    force = np.zeros((v.num_vertices, 3))
    be = topo.boundary_edges
    if len(be) == 0:
        return force
    lo = topo.edges[be, 0]
    hi = topo.edges[be, 1]
    f = topo.inc_faces[topo.offsets[be]]
    s = topo.inc_signs[topo.offsets[be]].astype(np.float64)
    nhat, _ = face_normals(v)
    evec = (v.vertices[hi] - v.vertices[lo]) * s[:, None]  # as traversed by the face
    nu = np.cross(evec, nhat[f])  # length |e| times in-plane outward unit conormal
    w = 0.5 * v.multiplicity[f].astype(np.float64)
    contrib = nu * w[:, None]
    force += _scatter_rows(lo, contrib, v.num_vertices)
    force += _scatter_rows(hi, contrib, v.num_vertices)
    return force


def mean_curvature(v: DiscreteVarifold, topo: EdgeTopology | None = None) -> CurvatureField:
    """First-variation mean curvature vectors H_v with lumped vertex areas."""
    if topo is None:
        topo = edge_topology(v)
    grad = _area_gradients(v)
    force = _boundary_force(v, topo)
    area = _vertex_areas(v)
    isolated = area <= 0.0
    H = np.zeros_like(grad)
    ok = ~isolated
    H[ok] = (force[ok] - grad[ok]) / area[ok, None]
    return CurvatureField(
        H=H,
        vertex_area=area,
        boundary_mask=topo.boundary_vertex_mask.copy(),
        junction_mask=topo.junction_vertex_mask.copy(),
        isolated_mask=isolated,
    )


def willmore_energy(v: DiscreteVarifold, field: CurvatureField | None = None) -> float:
    """(1/4) sum |H_v|^2 A_v over non-boundary vertices.

    Junction vertices are included: the balancing of sheets keeps H bounded
    there, and their collar carries genuine energy. Boundary vertices are
    excluded; their first-variation mass belongs to the conormal boundary term.
    """
    if field is None:
        field = mean_curvature(v)
    keep = ~field.boundary_mask & ~field.isolated_mask
    h2 = np.einsum("ij,ij->i", field.H, field.H)
    return 0.25 * math.fsum((h2 * field.vertex_area)[keep])


# ---------------------------------------------------------------------------
# Gauss curvature and topology


def _corner_angles(v: DiscreteVarifold) -> np.ndarray:
    """Interior angles (F, 3) at each face corner."""
    p = v.vertices[v.faces]  # (F, 3, 3)
    out = np.empty((v.num_faces, 3))
    for k in range(3):
        a = p[:, k]
        b = p[:, (k + 1) % 3]
        c = p[:, (k + 2) % 3]
        u, w = b - a, c - a
        cr = np.linalg.norm(np.cross(u, w), axis=1)
        dt = np.einsum("ij,ij->i", u, w)
        out[:, k] = np.arctan2(cr, dt)
    return out


def _angle_defects(v: DiscreteVarifold) -> np.ndarray:
    """2*pi minus the (unweighted) angle sum at each vertex; 0 on unused vertices."""
    ang = _corner_angles(v)
    n = v.num_vertices
    s = np.zeros(n)
    for k in range(3):
        s += np.bincount(v.faces[:, k], weights=ang[:, k], minlength=n)
    used = np.zeros(n, dtype=bool)
    used[v.faces.ravel()] = True
    defect = np.where(used, 2.0 * np.pi - s, 0.0)
    return defect


def gauss_curvature(v: DiscreteVarifold, topo: EdgeTopology | None = None) -> CurvatureField:
    """Angle-defect Gauss curvature K_v = defect_v / (geometric vertex area).

    Boundary and junction vertices are flagged and get NaN (the defect is not
    a curvature there); the defect array itself is kept for all vertices so
    that its total still satisfies the combinatorial Gauss--Bonnet identity on
    closed manifolds.
    """
    if topo is None:
        topo = edge_topology(v)
    base = mean_curvature(v, topo)
    defect = _angle_defects(v)
    area_geom = _vertex_areas(v, weighted=False)
    K = np.full(v.num_vertices, np.nan)
    ok = (
        ~base.boundary_mask
        & ~base.junction_mask
        & ~base.isolated_mask
        & (area_geom > 0.0)
    )
    K[ok] = defect[ok] / area_geom[ok]
    return CurvatureField(
        H=base.H,
        vertex_area=base.vertex_area,
        boundary_mask=base.boundary_mask,
        junction_mask=base.junction_mask,
        isolated_mask=base.isolated_mask,
        K=K,
        angle_defect=defect,
    )


def euler_characteristic(v: DiscreteVarifold, topo: EdgeTopology | None = None) -> TopologyReport:
    """V - E + F with the angle-defect cross-check, orientability, and genus.

    Requires a closed manifold: every edge on exactly two faces. Junction or
    boundary edges raise MeshError naming the first offending edge. Vertex
    count uses vertices actually referenced by faces.
    """
    if topo is None:
        topo = edge_topology(v)
    if len(topo.boundary_edges):
        e = topo.edges[topo.boundary_edges[0]]
        raise MeshError(f"mesh is not closed: edge ({e[0]}, {e[1]}) bounds one face")
    if len(topo.junction_edges):
        e = topo.edges[topo.junction_edges[0]]
        raise MeshError(f"mesh is not manifold: edge ({e[0]}, {e[1]}) has 3+ faces")

    used = np.zeros(v.num_vertices, dtype=bool)
    used[v.faces.ravel()] = True
    nv = int(used.sum())
    ne = len(topo.edges)
    nf = v.num_faces
    chi = nv - ne + nf
    defect_chi = math.fsum(_angle_defects(v)) / (2.0 * math.pi)

    orientable, components = _orient_scan(v, topo)
    genus: int | None = None
    if orientable and components == 1 and (2 - chi) % 2 == 0:
        genus = (2 - chi) // 2
    return TopologyReport(
        num_vertices=nv,
        num_edges=ne,
        num_faces=nf,
        chi=chi,
        defect_chi=defect_chi,
        orientable=orientable,
        connected_components=components,
        genus=genus,
    )


def _orient_scan(v: DiscreteVarifold, topo: EdgeTopology) -> tuple[bool, int]:
    """BFS over face adjacency: orientability parity and component count."""
    nf = v.num_faces
    adj_f: list[list[tuple[int, int]]] = [[] for _ in range(nf)]
    for ei in topo.interior_edges:
        o = topo.offsets[ei]
        f0, f1 = int(topo.inc_faces[o]), int(topo.inc_faces[o + 1])
        s0, s1 = int(topo.inc_signs[o]), int(topo.inc_signs[o + 1])
        # windings are compatible when the two faces traverse the edge oppositely
        parity = 0 if s0 != s1 else 1
        adj_f[f0].append((f1, parity))
        adj_f[f1].append((f0, parity))
    flip = np.full(nf, -1, dtype=np.int8)
    orientable = True
    components = 0
    for start in range(nf):
        if flip[start] >= 0:
            continue
        components += 1
        flip[start] = 0
        stack = [start]
        while stack:
            fcur = stack.pop()
            for fnext, parity in adj_f[fcur]:
                want = flip[fcur] ^ parity
                if flip[fnext] < 0:
                    flip[fnext] = want
                    stack.append(fnext)
                elif flip[fnext] != want:
                    orientable = False
    return orientable, components


# ---------------------------------------------------------------------------
# second fundamental form


def _vertex_normals_unoriented(v: DiscreteVarifold) -> np.ndarray:
    """Area-weighted vertex normals with per-vertex sign fixing (no global orientation)."""
    nhat, areas = face_normals(v)
    nv = v.num_vertices
    order = np.argsort(v.faces.ravel(), kind="stable")
    vert_of = v.faces.ravel()[order]
    face_of = order // 3
    starts = np.searchsorted(vert_of, np.arange(nv))
    ends = np.searchsorted(vert_of, np.arange(nv) + 1)
    out = np.zeros((nv, 3))
    for p in range(nv):
        fs = face_of[starts[p]:ends[p]]
        if len(fs) == 0:
            continue
        ref = nhat[fs[0]]
        sgn = np.where(nhat[fs] @ ref >= 0.0, 1.0, -1.0)
        acc = (nhat[fs] * (areas[fs] * sgn)[:, None]).sum(axis=0)
        nrm = np.linalg.norm(acc)
        out[p] = acc / nrm if nrm > 0 else ref
    return out


def second_fundamental_norm(v: DiscreteVarifold, topo: EdgeTopology | None = None) -> CurvatureField:
    """|B|^2 from the edge-based (dihedral-angle) curvature tensor.

    Per vertex, S_v = (1/area) sum over incident interior edges of
    beta_e (|e|/2) ē ēᵀ with beta_e the signed dihedral angle; the two
    tangent-plane eigenvalues approximate the principal curvatures up to the
    known eigenvector swap, which |B|^2 = k1^2 + k2^2 does not see. Boundary
    and junction vertices are flagged NaN. Also fills K and the residual
    |K - (|H|^2 - |B|^2)/2| of the trace identity.
    """
    if topo is None:
        topo = edge_topology(v)
    g = gauss_curvature(v, topo)
    nv = v.num_vertices
    nhat, _ = face_normals(v)

    S = np.zeros((nv, 6))  # xx, yy, zz, xy, xz, yz
    ie = topo.interior_edges
    if len(ie):
        o = topo.offsets[ie]
        f0 = topo.inc_faces[o]
        f1 = topo.inc_faces[o + 1]
        s0 = topo.inc_signs[o].astype(np.float64)
        lo = topo.edges[ie, 0]
        hi = topo.edges[ie, 1]
        evec = v.vertices[hi] - v.vertices[lo]
        elen = np.linalg.norm(evec, axis=1)
        ebar = evec / elen[:, None]
        # signed dihedral: angle from n0 to n1 around the edge as f0 traverses it
        ef0 = ebar * s0[:, None]
        n0, n1 = nhat[f0], nhat[f1]
        beta = np.arctan2(np.einsum("ij,ij->i", np.cross(n0, n1), ef0),
                          np.einsum("ij,ij->i", n0, n1))
        w = beta * elen / 2.0
        t = np.stack(
            [
                w * ebar[:, 0] * ebar[:, 0],
                w * ebar[:, 1] * ebar[:, 1],
                w * ebar[:, 2] * ebar[:, 2],
                w * ebar[:, 0] * ebar[:, 1],
                w * ebar[:, 0] * ebar[:, 2],
                w * ebar[:, 1] * ebar[:, 2],
            ],
            axis=1,
        )
        S += _scatter_rows(lo, t, nv)
        S += _scatter_rows(hi, t, nv)

    area_geom = _vertex_areas(v, weighted=False)
    normals = _vertex_normals_unoriented(v)
    B2 = np.full(nv, np.nan)
    ok = ~g.boundary_mask & ~g.junction_mask & ~g.isolated_mask & (area_geom > 0)
    idx = np.nonzero(ok)[0]
    if len(idx):
        Sm = np.empty((len(idx), 3, 3))
        Sm[:, 0, 0] = S[idx, 0]
        Sm[:, 1, 1] = S[idx, 1]
        Sm[:, 2, 2] = S[idx, 2]
        Sm[:, 0, 1] = Sm[:, 1, 0] = S[idx, 3]
        Sm[:, 0, 2] = Sm[:, 2, 0] = S[idx, 4]
        Sm[:, 1, 2] = Sm[:, 2, 1] = S[idx, 5]
        Sm /= area_geom[idx, None, None]
        n = normals[idx]
        # tangent frame
        pick = np.where(np.abs(n[:, 0]) < 0.9, 0, 1)
        seed = np.zeros_like(n)
        seed[np.arange(len(idx)), pick] = 1.0
        t1 = np.cross(n, seed)
        t1 /= np.linalg.norm(t1, axis=1)[:, None]
        t2 = np.cross(n, t1)
        p = np.einsum("ni,nij,nj->n", t1, Sm, t1)
        r = np.einsum("ni,nij,nj->n", t2, Sm, t2)
        q = np.einsum("ni,nij,nj->n", t1, Sm, t2)
        mean = 0.5 * (p + r)
        dev = np.sqrt(np.maximum(0.25 * (p - r) ** 2 + q * q, 0.0))
        l1, l2 = mean + dev, mean - dev
        B2[idx] = l1 * l1 + l2 * l2

    resid = np.full(nv, np.nan)
    h2 = np.einsum("ij,ij->i", g.H, g.H)
    resid[ok] = np.abs(g.K[ok] - 0.5 * (h2[ok] - B2[ok]))
    return CurvatureField(
        H=g.H,
        vertex_area=g.vertex_area,
        boundary_mask=g.boundary_mask,
        junction_mask=g.junction_mask,
        isolated_mask=g.isolated_mask,
        K=g.K,
        angle_defect=g.angle_defect,
        B2=B2,
        gauss_relation_residual=resid,
    )


# ---------------------------------------------------------------------------
# oriented-surface functionals


def _require_consistent_orientation(v: DiscreteVarifold, topo: EdgeTopology) -> None:
    if not v.oriented:
        raise MeshError("operation requires an oriented mesh (oriented=True)")
    if len(topo.junction_edges):
        e = topo.edges[topo.junction_edges[0]]
        raise MeshError(f"operation requires a manifold: edge ({e[0]}, {e[1]}) has 3+ faces")
    ie = topo.interior_edges
    if len(ie):
        s0 = topo.inc_signs[topo.offsets[ie]]
        s1 = topo.inc_signs[topo.offsets[ie] + 1]
        bad = np.nonzero(s0 == s1)[0]
        if len(bad):
            e = topo.edges[ie[bad[0]]]
            raise MeshError(f"face windings disagree across edge ({e[0]}, {e[1]})")


def oriented_vertex_normals(v: DiscreteVarifold, topo: EdgeTopology | None = None) -> np.ndarray:
    """Area-and-multiplicity-weighted unit vertex normals of an oriented mesh."""
    if topo is None:
        topo = edge_topology(v)
    _require_consistent_orientation(v, topo)
    nhat, areas = face_normals(v)
    w = (areas * v.multiplicity)[:, None] * nhat
    acc = np.zeros((v.num_vertices, 3))
    for c in range(3):
        acc += _scatter_rows(v.faces[:, c], w, v.num_vertices)
    nrm = np.linalg.norm(acc, axis=1)
    ok = nrm > 0
    acc[ok] /= nrm[ok, None]
    return acc


def helfrich_energy(v: DiscreteVarifold, c0: float) -> float:
    """(1/4) sum |H_v - c0 n_v|^2 A_v with n_v the oriented vertex normal.

    At c0 = 0 this reduces to the same sum as willmore_energy, term for term.
    Requires a consistently oriented manifold mesh.
    """
    topo = edge_topology(v)
    normals = oriented_vertex_normals(v, topo)
    field = mean_curvature(v, topo)
    keep = ~field.boundary_mask & ~field.isolated_mask
    d = field.H - c0 * normals
    vals = np.einsum("ij,ij->i", d, d) * field.vertex_area
    return 0.25 * math.fsum(vals[keep])


def enclosed_volume(v: DiscreteVarifold) -> float:
    """Signed enclosed volume (1/3) sum mult A_f <centroid_f, n_f>.

    Positive for closed surfaces whose windings give outward normals; flip the
    orientation to negate. Requires a closed, consistently oriented mesh.
    """
    topo = edge_topology(v)
    _require_consistent_orientation(v, topo)
    if len(topo.boundary_edges):
        e = topo.edges[topo.boundary_edges[0]]
        raise MeshError(f"mesh is not closed: edge ({e[0]}, {e[1]}) bounds one face")
    nhat, areas = face_normals(v)
    cen = v.vertices[v.faces].mean(axis=1)
    vals = (areas * v.multiplicity) * np.einsum("ij,ij->i", cen, nhat)
    return math.fsum(vals) / 3.0


def concentrated_volume(v: DiscreteVarifold, x0: np.ndarray) -> float:
    """- sum_f mult A_f <x - x0, n_f>/|x - x0|^2 by midpoint-rule quadrature.

    x0 must stay away from the surface (raises MeshError within 1e-7 of the
    mesh scale). For any closed surface oriented outward around x0 the value
    is -4*pi times the enclosed winding; for the unit sphere about its center,
    -4*pi.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    d = point_surface_distance(v, x0)
    scale = mesh_scale(v)
    if d < 1e-7 * scale:
        raise MeshError(f"concentrated volume singular: x0 is on the surface (distance {d:.3e})")
    nhat, areas = face_normals(v)
    p = v.vertices[v.faces]  # (F, 3, 3)
    mids = 0.5 * (p + np.roll(p, -1, axis=1)) - x0  # (F, 3, 3) edge midpoints
    g = np.einsum("fkj,fj->fk", mids, nhat) / np.einsum("fkj,fkj->fk", mids, mids)
    vals = (areas * v.multiplicity) * g.mean(axis=1)
    return -math.fsum(vals)


def point_surface_distance(v: DiscreteVarifold, x0: np.ndarray) -> float:
    """Exact distance from x0 to the union of the triangles."""
    a = v.vertices[v.faces[:, 0]]
    b = v.vertices[v.faces[:, 1]]
    c = v.vertices[v.faces[:, 2]]
    p = np.asarray(x0, dtype=np.float64)
    # Ericson-style closest point on triangle, vectorized over faces
    ab, ac, ap = b - a, c - a, p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2
    denom = va + vb + vc
    with np.errstate(divide="ignore", invalid="ignore"):
        w1 = np.clip(np.where(denom != 0, vb / denom, 0.0), 0.0, 1.0)
        w2 = np.clip(np.where(denom != 0, vc / denom, 0.0), 0.0, 1.0)
    cand = a + w1[:, None] * ab + w2[:, None] * ac
    best = np.linalg.norm(cand - p, axis=1)
    # edge and vertex regions: clamp barycentric projections on each edge
    for (s, evec) in ((a, ab), (a, ac), (b, c - b)):
        t = np.einsum("ij,ij->i", p - s, evec) / np.einsum("ij,ij->i", evec, evec)
        t = np.clip(t, 0.0, 1.0)
        best = np.minimum(best, np.linalg.norm(s + t[:, None] * evec - p, axis=1))
    return float(best.min()) if len(best) else math.inf


def first_variation_residual(
    v: DiscreteVarifold,
    phi: np.ndarray | Callable[[np.ndarray], np.ndarray],
) -> float:
    """Defect of the first-variation identity for the vertex field phi.

    residual = | d/dt M(v + t phi)  +  sum_{smooth v} <phi_v, H_v A_v>
                 - sum_{boundary e} mult |e| <phi_mid, nu_e> |

    where "smooth" excludes boundary and junction vertices and nu_e is the
    outward in-plane conormal. Zero to round-off on closed junction-free
    meshes and on flat patches; the untreated junction force remains as a
    residual that shrinks under refinement.
    """
    if callable(phi):
        phi = np.asarray(phi(v.vertices), dtype=np.float64)
    else:
        phi = np.asarray(phi, dtype=np.float64)
    if phi.shape != v.vertices.shape:
        raise MeshError(f"phi must have shape {v.vertices.shape}, got {phi.shape}")
    topo = edge_topology(v)
    grad = _area_gradients(v)
    dots = np.einsum("ij,ij->i", phi, grad)
    div_term = math.fsum(dots)
    smooth = ~topo.boundary_vertex_mask & ~topo.junction_vertex_mask
    h_term = -math.fsum(dots[smooth])  # <phi, H A> = -<phi, grad M> at smooth vertices

    bdry_term = 0.0
    be = topo.boundary_edges
    if len(be):
        lo = topo.edges[be, 0]
        hi = topo.edges[be, 1]
        f = topo.inc_faces[topo.offsets[be]]
        s = topo.inc_signs[topo.offsets[be]].astype(np.float64)
        nhat, _ = face_normals(v)
        evec = (v.vertices[hi] - v.vertices[lo]) * s[:, None]
        nu = np.cross(evec, nhat[f])  # |e| * unit outward conormal
        mid_phi = 0.5 * (phi[lo] + phi[hi])
        bdry_term = math.fsum(v.multiplicity[f] * np.einsum("ij,ij->i", mid_phi, nu))
    return abs(div_term + h_term - bdry_term)
