import math

import numpy as np
import pytest

from varifold_lab import mesh
from varifold_lab.mesh import DiscreteVarifold, MeshError, make_varifold

from conftest import triple_fan, two_triangle_square


def test_make_varifold_defaults_multiplicity_to_one():
    v, f = two_triangle_square()
    var = make_varifold(v, f)
    assert var.multiplicity.tolist() == [1, 1]
    assert var.num_vertices == 4 and var.num_faces == 2


def test_arrays_are_frozen():
    v, f = two_triangle_square()
    var = make_varifold(v, f)
    with pytest.raises(ValueError):
        var.vertices[0, 0] = 5.0


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda v, f, m: (v, [[0, 1, 9]], m[:1]), "out of range"),
        (lambda v, f, m: (v, [[0, 1, 1]], m[:1]), "repeats a vertex"),
        (lambda v, f, m: (v, f, [1, 0]), "multiplicity < 1"),
        (lambda v, f, m: (np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]]), [[0, 1, 2]], m[:1]),
         "degenerate"),
        (lambda v, f, m: (v * np.nan, f, m), "non-finite"),
        (lambda v, f, m: (v, f, m[:1]), "does not match"),
    ],
)
def test_validate_rejects_bad_meshes(mutate, fragment):
    v, f = two_triangle_square()
    bad_v, bad_f, bad_m = mutate(v, f, np.array([1, 1]))
    with pytest.raises(MeshError, match=fragment):
        make_varifold(bad_v, bad_f, bad_m)


def test_total_mass_counts_multiplicity():
    vertices = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    faces = np.array([[0, 1, 2]])
    assert mesh.total_mass(make_varifold(vertices, faces)) == pytest.approx(0.5)
    doubled = make_varifold(vertices, faces, np.array([2]))
    assert mesh.total_mass(doubled) == pytest.approx(1.0)


def test_edge_topology_square():
    var = make_varifold(*two_triangle_square())
    topo = mesh.edge_topology(var)
    assert len(topo.edges) == 5
    assert len(topo.boundary_edges) == 4
    assert len(topo.interior_edges) == 1
    assert len(topo.junction_edges) == 0
    assert topo.boundary_vertex_mask.all()  # every vertex touches the rim


def test_edge_topology_triple_junction():
    var = make_varifold(*triple_fan())
    topo = mesh.edge_topology(var)
    assert len(topo.junction_edges) == 1
    shared = topo.edges[topo.junction_edges[0]]
    assert sorted(shared.tolist()) == [0, 1]
    assert len(topo.faces_of_edge(int(topo.junction_edges[0]))) == 3
    assert topo.junction_vertex_mask[[0, 1]].all()
    assert not topo.junction_vertex_mask[2:].any()


def test_refine_quadruples_faces_and_preserves_flat_mass():
    var = make_varifold(*two_triangle_square())
    fine = mesh.refine(var)
    assert fine.num_faces == 4 * var.num_faces
    assert mesh.total_mass(fine) == pytest.approx(mesh.total_mass(var), abs=1e-14)


def test_refine_projector_keeps_sphere_vertices_on_sphere(sphere3):
    v = sphere3.varifold
    fine = mesh.refine(
        v, projector=lambda p, labels: p / np.linalg.norm(p, axis=1)[:, None]
    )
    assert np.linalg.norm(fine.vertices, axis=1) == pytest.approx(1.0, abs=1e-12)


def test_save_load_roundtrip(tmp_path, sphere3):
    path = tmp_path / "s.json"
    mesh.save_varifold(sphere3.varifold, str(path), analytic=sphere3.analytic)
    var, analytic = mesh.load_mesh_file(str(path))
    np.testing.assert_array_equal(var.faces, sphere3.varifold.faces)
    np.testing.assert_allclose(var.vertices, sphere3.varifold.vertices, atol=0)
    assert analytic["willmore_energy"] == pytest.approx(4 * math.pi)


def test_load_obj(tmp_path):
    path = tmp_path / "tri.obj"
    path.write_text(
        "# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\nf 2 4 3\n"
    )
    var = mesh.load_obj(str(path))
    assert var.num_vertices == 4 and var.num_faces == 2
    assert mesh.total_mass(var) == pytest.approx(1.0)


def test_load_obj_triangulates_quads(tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    var = mesh.load_obj(str(path))
    assert var.num_faces == 2
    assert mesh.total_mass(var) == pytest.approx(1.0)


def test_mesh_scale_is_bbox_diagonal():
    vertices = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    var = make_varifold(vertices, np.array([[0, 1, 2]]))
    assert mesh.mesh_scale(var) == pytest.approx(math.sqrt(2))
