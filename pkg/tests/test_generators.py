import math

import numpy as np
import pytest

from varifold_lab import blowup, generators
from varifold_lab.generators import (
    GENERATORS,
    gen_branched_patch,
    gen_cap,
    gen_double_bubble,
    gen_double_bubble_flat,
    gen_flat_disk,
    gen_singular_pair,
    gen_sphere,
    gen_torus,
    gen_triple_bubble,
)
from varifold_lab.mesh import total_mass

TETRA_DENSITY = 3.0 * math.acos(-1.0 / 3.0) / math.pi


def test_registry_names():
    assert sorted(GENERATORS) == [
        "branched-patch",
        "cap",
        "double-bubble",
        "double-bubble-flat",
        "flat-disk",
        "singular-pair",
        "sphere",
        "torus",
        "triple-bubble",
    ]


# ---------------------------------------------------------------------------
# round surfaces


def test_sphere_metadata():
    out = gen_sphere(2.0, 2)
    a = out.analytic
    assert a["area"] == pytest.approx(16 * math.pi, abs=1e-12)
    assert a["willmore_energy"] == pytest.approx(4 * math.pi, abs=1e-12)
    assert a["enclosed_volume"] == pytest.approx(32 * math.pi / 3, abs=1e-12)
    assert a["chi"] == 2 and a["genus"] == 0
    np.testing.assert_allclose(
        np.linalg.norm(out.varifold.vertices, axis=1), 2.0, atol=1e-12
    )


def test_sphere_validation():
    with pytest.raises(ValueError):
        gen_sphere(0.0, 2)
    with pytest.raises(ValueError):
        gen_sphere(1.0, -1)


def test_cap_metadata():
    R, theta = 1.0, 1.2
    out = gen_cap(R, theta, 2)
    a = out.analytic
    assert a["area"] == pytest.approx(2 * math.pi * R**2 * (1 - math.cos(theta)), rel=1e-12)
    assert a["willmore_energy"] == pytest.approx(a["area"] / R**2, rel=1e-12)
    assert a["conormal_plane_angle"] == pytest.approx(theta, abs=1e-15)
    circle = a["boundary_circles"][0]
    assert circle["radius"] == pytest.approx(R * math.sin(theta), rel=1e-12)
    np.testing.assert_allclose(circle["normal"], [0.0, 0.0, 1.0], atol=1e-15)
    apex = a["density_points"][0]
    assert apex["point"][2] == pytest.approx(R * (1 - math.cos(theta)), rel=1e-12)


def test_cap_validation():
    with pytest.raises(ValueError):
        gen_cap(1.0, 0.0, 2)
    with pytest.raises(ValueError):
        gen_cap(1.0, 3.5, 2)


def test_torus_metadata():
    R, r = 2.0, 0.7
    out = gen_torus(R, r, 2)
    a = out.analytic
    assert a["area"] == pytest.approx(4 * math.pi**2 * R * r, rel=1e-12)
    assert a["enclosed_volume"] == pytest.approx(2 * math.pi**2 * R * r**2, rel=1e-12)
    assert a["willmore_energy"] == pytest.approx(
        math.pi**2 * R**2 / (r * math.sqrt(R**2 - r**2)), rel=1e-12
    )
    assert a["chi"] == 0 and a["genus"] == 1


def test_torus_validation():
    with pytest.raises(ValueError):
        gen_torus(1.0, 1.0, 2)
    with pytest.raises(ValueError):
        gen_torus(1.0, 0.0, 2)


def test_flat_disk_metadata():
    out = gen_flat_disk(1.5, 2)
    a = out.analytic
    assert a["area"] == pytest.approx(math.pi * 1.5**2, rel=1e-12)
    assert a["willmore_energy"] == 0.0
    assert a["boundary_circles"][0]["radius"] == 1.5


# ---------------------------------------------------------------------------
# bubble clusters


@pytest.mark.parametrize("theta2", [0.4, 0.7, 1.0])
def test_double_bubble_angle_condition(theta2):
    out = gen_double_bubble(theta2, 1.0, 2)
    a = out.analytic
    assert abs(a["cos_sum"]) < 1e-12
    assert math.fsum(math.cos(t) for t in a["angles"]) == pytest.approx(0.0, abs=1e-12)
    assert a["angles"][1] == theta2


@pytest.mark.parametrize("theta2", [0.4, 0.7, 1.0])
def test_double_bubble_energy_is_six_pi(theta2):
    a = gen_double_bubble(theta2, 1.0, 2).analytic
    assert a["willmore_energy"] == pytest.approx(6 * math.pi, rel=1e-12)
    assert a["area"] == pytest.approx(math.fsum(a["cap_areas"]), rel=1e-12)
    caps_over_r2 = math.fsum(
        ca / rr**2 for ca, rr in zip(a["cap_areas"], a["radii"])
    )
    assert caps_over_r2 == pytest.approx(6 * math.pi, rel=1e-12)


def test_double_bubble_junction_ring_is_shared(double_bubble4):
    circle = double_bubble4.analytic["junction_circles"][0]
    idx = circle["vertex_indices"]
    assert len(idx) == 4 * 2**4
    ring = double_bubble4.varifold.vertices[idx]
    np.testing.assert_allclose(np.linalg.norm(ring[:, :2], axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(ring[:, 2], 0.0, atol=1e-12)


def test_double_bubble_li_yau_equality(double_bubble4):
    ly = double_bubble4.analytic["li_yau"]
    assert ly["theta_max"] == 1.5
    assert ly["w_over_4pi"] == pytest.approx(1.5, rel=1e-12)


def test_double_bubble_discrete_mass_and_energy(double_bubble4):
    from varifold_lab.curvature import willmore_energy

    a = double_bubble4.analytic
    assert total_mass(double_bubble4.varifold) == pytest.approx(a["area"], rel=0.01)
    assert willmore_energy(double_bubble4.varifold) == pytest.approx(
        6 * math.pi, rel=0.01
    )


def test_double_bubble_flat_interface_routing():
    with pytest.raises(ValueError, match="gen_double_bubble_flat"):
        gen_double_bubble(math.pi / 3, 1.0, 2)
    with pytest.raises(ValueError):
        gen_double_bubble(0.0, 1.0, 2)
    with pytest.raises(ValueError):
        gen_double_bubble(2 * math.pi / 3, 1.0, 2)
    with pytest.raises(ValueError):
        gen_double_bubble(0.7, -1.0, 2)


def test_double_bubble_flat_metadata():
    a = gen_double_bubble_flat(1.0, 2).analytic
    assert a["cap_areas"][0] == pytest.approx(a["cap_areas"][1], rel=1e-12)
    assert a["area"] == pytest.approx(9 * math.pi, rel=1e-12)
    assert a["willmore_energy"] == pytest.approx(6 * math.pi, rel=1e-12)
    assert a["junction_circles"][0]["density"] == 1.5


def test_triple_bubble_metadata():
    a = gen_triple_bubble(2).analytic
    assert a["willmore_energy"] == pytest.approx(12 * math.acos(-1 / 3), rel=1e-12)
    assert a["spherical_area"] == pytest.approx(a["willmore_energy"], rel=1e-12)
    assert a["area"] == pytest.approx(a["spherical_area"] + a["flat_area"], rel=1e-12)
    ly = a["li_yau"]
    assert ly["theta_max"] == pytest.approx(TETRA_DENSITY, abs=1e-12)
    assert ly["w_over_4pi"] == pytest.approx(TETRA_DENSITY, rel=1e-12)


def test_triple_bubble_tetrahedral_points():
    pts = gen_triple_bubble(2).analytic["density_points"]
    by_label = {p["label"]: p for p in pts}
    x1 = np.asarray(by_label["tetrahedral point x1"]["point"])
    x2 = np.asarray(by_label["tetrahedral point x2"]["point"])
    np.testing.assert_allclose(
        x1, [0.816496580927726, -0.5773502691896258, 0.0], atol=1e-12
    )
    np.testing.assert_allclose(x2, x1 * [-1.0, 1.0, 1.0], atol=1e-12)
    assert by_label["tetrahedral point x1"]["density"] == pytest.approx(
        TETRA_DENSITY, abs=1e-12
    )
    assert by_label["junction arc"]["density"] == 1.5


def test_triple_bubble_mirror_symmetry():
    out = gen_triple_bubble(3)
    v = out.varifold
    pts = {p["label"]: np.asarray(p["point"]) for p in out.analytic["density_points"]}
    t1 = blowup.density(v, pts["tetrahedral point x1"]).theta
    t2 = blowup.density(v, pts["tetrahedral point x2"]).theta
    assert t1 == pytest.approx(t2, abs=1e-3)


# ---------------------------------------------------------------------------
# singular models


@pytest.mark.parametrize("r", [0.1, 0.25, 0.5])
def test_branched_patch_exact_double_mass(r):
    v = gen_branched_patch(0.0, 1.0, 4).varifold
    mass = blowup.ball_mass(v, np.zeros(3), r)
    assert mass == pytest.approx(2 * math.pi * r**2, rel=1e-6)


def test_branched_patch_metadata():
    a = gen_branched_patch(0.0, 1.0, 3).analytic
    assert a["area"] == pytest.approx(2 * math.pi, rel=1e-12)
    assert a["willmore_energy"] == 0.0
    assert a["density_points"][0]["density"] == 2.0
    with pytest.raises(ValueError):
        gen_branched_patch(-0.1, 1.0, 3)
    with pytest.raises(ValueError):
        gen_branched_patch(0.0, 0.0, 3)


def test_branched_patch_offset_keeps_branch_density():
    out = gen_branched_patch(0.1, 1.0, 4)
    rep = blowup.density(out.varifold, [0.0, 0.0, 0.0])
    assert rep.theta == pytest.approx(2.0, abs=0.03)


def test_singular_pair_metadata():
    out = gen_singular_pair([[0.0, 0.0], [0.5, 0.0]], [0.3, 0.2], 0.2, level=3)
    a = out.analytic
    assert a["chi"] == 2
    assert a["contact_disks"] == [
        {"center": [0.0, 0.0], "radius": 0.3},
        {"center": [0.5, 0.0], "radius": 0.2},
    ]
    for p in a["density_points"]:
        if p["density"] == 2.0:
            assert "r_max" not in p  # contact disks: density 2 at every scale
        else:
            assert p["r_max"] > 0  # sheets separate beyond this radius


def test_singular_pair_validation():
    with pytest.raises(ValueError):
        gen_singular_pair([[0.0, 0.0]], [0.3], 0.0, level=2)
    with pytest.raises(ValueError):
        gen_singular_pair([[0.0, 0.0]], [0.3, 0.2], 0.2, level=2)
    with pytest.raises(ValueError):
        gen_singular_pair([[0.9, 0.0]], [0.3], 0.2, level=2)


# ---------------------------------------------------------------------------
# cross-cutting: the discrete mass tracks the printed area


@pytest.mark.parametrize(
    "build",
    [
        lambda: gen_sphere(2.0, 3),
        lambda: gen_cap(1.0, 1.2, 3),
        lambda: gen_double_bubble_flat(1.0, 3),
        lambda: gen_triple_bubble(3),
        lambda: gen_flat_disk(1.5, 3),
        lambda: gen_torus(2.0, 0.7, 3),
        lambda: gen_branched_patch(0.0, 1.0, 3),
    ],
    ids=["sphere", "cap", "db-flat", "triple", "disk", "torus", "branched"],
)
def test_mass_matches_area(build):
    out = build()
    assert "area" in out.analytic
    assert total_mass(out.varifold) == pytest.approx(out.analytic["area"], rel=0.02)


def test_density_points_sit_on_support():
    for build in (
        lambda: gen_sphere(1.0, 3),
        lambda: gen_double_bubble(0.7, 1.0, 3),
        lambda: gen_triple_bubble(3),
        lambda: gen_torus(2.0, 0.7, 3),
    ):
        out = build()
        v = out.varifold
        for p in out.analytic["density_points"]:
            x0 = np.asarray(p["point"])
            d = np.linalg.norm(v.vertices - x0, axis=1).min()
            assert d <= blowup.local_edge_scale(v, x0), p["label"]
