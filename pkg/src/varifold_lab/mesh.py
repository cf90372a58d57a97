"""Triangle-soup varifolds: immutable mesh container, topology, refinement.

A discrete 2-varifold is a triangle soup with a positive integer multiplicity
per face. Edges may bound one face (boundary), two faces (manifold interior),
or three and more (junctions, e.g. soap-film triple lines); all of these are
legal inputs everywhere unless an operation documents otherwise.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "MeshError",
    "DiscreteVarifold",
    "EdgeTopology",
    "make_varifold",
    "validate",
    "load_varifold",
    "load_mesh_file",
    "save_varifold",
    "load_obj",
    "edge_topology",
    "face_areas",
    "face_normals",
    "total_mass",
    "mesh_scale",
    "refine",
    "junction_sheet_angles",
]

Projector = Callable[[np.ndarray, np.ndarray], np.ndarray]


class MeshError(ValueError):
    """Raised for structurally invalid meshes (bad indices, degenerate faces, ...)."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DiscreteVarifold:
    """Immutable triangle soup with per-face multiplicity.

    Attributes
    ----------
    vertices : (V, 3) float64
    faces : (F, 3) int64, indices into vertices
    multiplicity : (F,) int64, each >= 1
    oriented : whether face windings are declared globally consistent
    face_patches : optional (F,) int64 labels of smooth pieces, used by
        refinement to decide which feature curve a new midpoint belongs to
    """

    vertices: np.ndarray
    faces: np.ndarray
    multiplicity: np.ndarray
    oriented: bool = False
    face_patches: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", _frozen(np.asarray(self.vertices, dtype=np.float64)))
        object.__setattr__(self, "faces", _frozen(np.asarray(self.faces, dtype=np.int64)))
        object.__setattr__(self, "multiplicity", _frozen(np.asarray(self.multiplicity, dtype=np.int64)))
        if self.face_patches is not None:
            object.__setattr__(self, "face_patches", _frozen(np.asarray(self.face_patches, dtype=np.int64)))

    @property
    def num_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def num_faces(self) -> int:
        return int(self.faces.shape[0])


@dataclass(frozen=True)
class EdgeTopology:
    """Undirected edges of a varifold with their face incidences.

    ``edges[i]`` is a sorted vertex pair. The faces incident to edge ``i`` are
    ``inc_faces[offsets[i]:offsets[i+1]]``; ``inc_signs`` says whether that
    face traverses the edge as (lo, hi) (+1) or (hi, lo) (-1) in its winding.
    """

    edges: np.ndarray
    counts: np.ndarray
    offsets: np.ndarray
    inc_faces: np.ndarray
    inc_signs: np.ndarray
    boundary_edges: np.ndarray = field(repr=False)
    interior_edges: np.ndarray = field(repr=False)
    junction_edges: np.ndarray = field(repr=False)
    boundary_vertex_mask: np.ndarray = field(repr=False)
    junction_vertex_mask: np.ndarray = field(repr=False)

    def faces_of_edge(self, i: int) -> np.ndarray:
        return self.inc_faces[self.offsets[i]:self.offsets[i + 1]]


def make_varifold(
    vertices: np.ndarray,
    faces: np.ndarray,
    multiplicity: np.ndarray | None = None,
    oriented: bool = False,
    face_patches: np.ndarray | None = None,
    check: bool = True,
) -> DiscreteVarifold:
    """Build a DiscreteVarifold, validating structure unless check=False."""
    faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    if multiplicity is None:
        multiplicity = np.ones(len(faces), dtype=np.int64)
    v = DiscreteVarifold(vertices, faces, multiplicity, oriented, face_patches)
    if check:
        validate(v)
    return v


def validate(v: DiscreteVarifold) -> None:
    """Raise MeshError on structural problems, naming the offending face."""
    if v.vertices.ndim != 2 or v.vertices.shape[1] != 3:
        raise MeshError(f"vertices must be (V, 3), got {v.vertices.shape}")
    if v.faces.ndim != 2 or v.faces.shape[1] != 3:
        raise MeshError(f"faces must be (F, 3), got {v.faces.shape}")
    if not np.all(np.isfinite(v.vertices)):
        raise MeshError("vertices contain non-finite coordinates")
    if len(v.multiplicity) != len(v.faces):
        raise MeshError("multiplicity length does not match face count")
    if len(v.faces) == 0:
        return
    if v.faces.min() < 0 or v.faces.max() >= len(v.vertices):
        bad = int(np.nonzero((v.faces < 0) | (v.faces >= len(v.vertices)))[0][0])
        raise MeshError(f"face {bad} has a vertex index out of range")
    same = (
        (v.faces[:, 0] == v.faces[:, 1])
        | (v.faces[:, 1] == v.faces[:, 2])
        | (v.faces[:, 2] == v.faces[:, 0])
    )
    if same.any():
        raise MeshError(f"face {int(np.nonzero(same)[0][0])} repeats a vertex index")
    if (v.multiplicity < 1).any():
        bad = int(np.nonzero(v.multiplicity < 1)[0][0])
        raise MeshError(f"face {bad} has multiplicity < 1")
    areas = face_areas(v)
    scale = mesh_scale(v)
    tiny = areas < 1e-14 * scale * scale
    if tiny.any():
        raise MeshError(f"face {int(np.nonzero(tiny)[0][0])} is degenerate (zero area)")


def face_normals(v: DiscreteVarifold) -> tuple[np.ndarray, np.ndarray]:
    """Unit face normals and face areas, as (normals (F,3), areas (F,))."""
    a = v.vertices[v.faces[:, 0]]
    n = np.cross(v.vertices[v.faces[:, 1]] - a, v.vertices[v.faces[:, 2]] - a)
    nn = np.linalg.norm(n, axis=1)
    areas = 0.5 * nn
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = n / nn[:, None]
    unit[nn == 0.0] = 0.0
    return unit, areas


def face_areas(v: DiscreteVarifold) -> np.ndarray:
    return face_normals(v)[1]


def total_mass(v: DiscreteVarifold) -> float:
    """Total measure: sum of multiplicity-weighted face areas."""
    return math.fsum(v.multiplicity.astype(np.float64) * face_areas(v))


def mesh_scale(v: DiscreteVarifold) -> float:
    """Bounding-box diagonal, the length scale used in relative tolerances."""
    if v.num_vertices == 0:
        return 1.0
    ext = v.vertices.max(axis=0) - v.vertices.min(axis=0)
    d = float(np.linalg.norm(ext))
    return d if d > 0.0 else 1.0


def edge_topology(v: DiscreteVarifold) -> EdgeTopology:
    """Group the 3F half-edges into undirected edges and classify them."""
    f = v.faces
    he = np.stack([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]], axis=1).reshape(-1, 2)
    lo = np.minimum(he[:, 0], he[:, 1])
    hi = np.maximum(he[:, 0], he[:, 1])
    und = np.stack([lo, hi], axis=1)
    edges, inv, counts = np.unique(und, axis=0, return_inverse=True, return_counts=True)
    order = np.argsort(inv, kind="stable")
    offsets = np.zeros(len(edges) + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    inc_faces = (order // 3).astype(np.int64)
    inc_signs = np.where(he[order, 0] == edges[inv[order], 0], 1, -1).astype(np.int64)

    boundary = np.nonzero(counts == 1)[0]
    interior = np.nonzero(counts == 2)[0]
    junction = np.nonzero(counts >= 3)[0]
    bmask = np.zeros(v.num_vertices, dtype=bool)
    jmask = np.zeros(v.num_vertices, dtype=bool)
    if len(boundary):
        bmask[edges[boundary].ravel()] = True
    if len(junction):
        jmask[edges[junction].ravel()] = True
    return EdgeTopology(
        edges=_frozen(edges),
        counts=_frozen(counts.astype(np.int64)),
        offsets=_frozen(offsets),
        inc_faces=_frozen(inc_faces),
        inc_signs=_frozen(inc_signs),
        boundary_edges=_frozen(boundary),
        interior_edges=_frozen(interior),
        junction_edges=_frozen(junction),
        boundary_vertex_mask=_frozen(bmask),
        junction_vertex_mask=_frozen(jmask),
    )


def refine(v: DiscreteVarifold, projector: Projector | None = None) -> DiscreteVarifold:
    """Split every face 4-to-1 at edge midpoints (midpoints welded across faces).

    Children inherit the parent multiplicity, patch label, and winding. When a
    projector is given, it is applied to the new midpoints only, with a label
    per midpoint: the shared patch label when all incident faces agree and the
    edge is interior, else -1 (feature edges: boundaries, junctions, patch
    seams) so the projector can snap those onto the feature curve.
    """
    topo = edge_topology(v)
    e = topo.edges
    mids = 0.5 * (v.vertices[e[:, 0]] + v.vertices[e[:, 1]])

    patches = v.face_patches if v.face_patches is not None else np.zeros(v.num_faces, dtype=np.int64)
    inc_patch = patches[topo.inc_faces]
    pmin = np.minimum.reduceat(inc_patch, topo.offsets[:-1])
    pmax = np.maximum.reduceat(inc_patch, topo.offsets[:-1])
    labels = np.where((pmin == pmax) & (topo.counts >= 2), pmin, -1)
    if projector is not None:
        mids = np.asarray(projector(mids, labels), dtype=np.float64)

    # index of the midpoint vertex for each (face, corner pair)
    f = v.faces
    he = np.stack([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]], axis=1).reshape(-1, 2)
    lo = np.minimum(he[:, 0], he[:, 1])
    hi = np.maximum(he[:, 0], he[:, 1])
    und = np.stack([lo, hi], axis=1)
    _, inv = np.unique(und, axis=0, return_inverse=True)
    mid_idx = (v.num_vertices + inv).reshape(-1, 3)  # per face: [m01, m12, m20]

    a, b, c = f[:, 0], f[:, 1], f[:, 2]
    mab, mbc, mca = mid_idx[:, 0], mid_idx[:, 1], mid_idx[:, 2]
    new_faces = np.concatenate(
        [
            np.stack([a, mab, mca], axis=1),
            np.stack([b, mbc, mab], axis=1),
            np.stack([c, mca, mbc], axis=1),
            np.stack([mab, mbc, mca], axis=1),
        ]
    )
    tile = lambda arr: np.concatenate([arr, arr, arr, arr])  # noqa: E731
    return DiscreteVarifold(
        vertices=np.vstack([v.vertices, mids]),
        faces=new_faces,
        multiplicity=tile(v.multiplicity),
        oriented=v.oriented,
        face_patches=tile(patches) if v.face_patches is not None else None,
    )


def junction_sheet_angles(v: DiscreteVarifold, topo: EdgeTopology | None = None) -> np.ndarray:
    """Pairwise angles (degrees) between the sheets at each 3-sheet junction edge.

    Returns an array (J, 3): for every junction edge with exactly three
    incident faces, the sorted angles between the in-plane directions that
    point from the edge into each face. Junction edges with more than three
    sheets are skipped.
    """
    if topo is None:
        topo = edge_topology(v)
    rows = []
    for ei in topo.junction_edges:
        fs = topo.faces_of_edge(int(ei))
        if len(fs) != 3:
            continue
        p, q = v.vertices[topo.edges[ei, 0]], v.vertices[topo.edges[ei, 1]]
        ehat = q - p
        ehat = ehat / np.linalg.norm(ehat)
        m = 0.5 * (p + q)
        dirs = []
        for fi in fs:
            corners = v.faces[fi]
            opp = [x for x in corners if x != topo.edges[ei, 0] and x != topo.edges[ei, 1]][0]
            w = v.vertices[opp] - m
            w = w - (w @ ehat) * ehat
            dirs.append(w / np.linalg.norm(w))
        angs = []
        for i in range(3):
            for j in range(i + 1, 3):
                d = float(np.clip(dirs[i] @ dirs[j], -1.0, 1.0))
                angs.append(math.degrees(math.acos(d)))
        rows.append(sorted(angs))
    return np.asarray(rows, dtype=np.float64).reshape(-1, 3)


# ---------------------------------------------------------------------------
# serialization


def save_varifold(v: DiscreteVarifold, path: str, analytic: dict | None = None) -> None:
    """Write the canonical JSON mesh format (sorted keys, no timestamps)."""
    doc: dict = {
        "vertices": v.vertices.tolist(),
        "faces": v.faces.tolist(),
        "multiplicity": v.multiplicity.tolist(),
        "oriented": bool(v.oriented),
    }
    if v.face_patches is not None:
        doc["face_patches"] = v.face_patches.tolist()
    if analytic is not None:
        doc["analytic"] = analytic
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_mesh_file(path: str) -> tuple[DiscreteVarifold, dict | None]:
    """Load a mesh JSON file; returns (varifold, analytic-block-or-None)."""
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("vertices", "faces", "multiplicity"):
        if key not in doc:
            raise MeshError(f"mesh file {path!r} is missing the {key!r} array")
    patches = doc.get("face_patches")
    v = make_varifold(
        np.asarray(doc["vertices"], dtype=np.float64),
        np.asarray(doc["faces"], dtype=np.int64),
        np.asarray(doc["multiplicity"], dtype=np.int64),
        oriented=bool(doc.get("oriented", False)),
        face_patches=None if patches is None else np.asarray(patches, dtype=np.int64),
    )
    return v, doc.get("analytic")


def load_varifold(path: str) -> DiscreteVarifold:
    """Load a mesh JSON file, validating structure."""
    return load_mesh_file(path)[0]


def load_obj(path: str) -> DiscreteVarifold:
    """Minimal Wavefront OBJ import: v/f records, fan-triangulated, multiplicity 1."""
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(tok.split("/")[0]) - 1 for tok in parts[1:]]
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
    if not faces:
        raise MeshError(f"OBJ file {path!r} contains no faces")
    return make_varifold(np.asarray(verts), np.asarray(faces))
