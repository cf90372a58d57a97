import math

import numpy as np
import pytest

from varifold_lab.boundary import (
    CircleSpec,
    admissibility_check,
    boundary_measure,
    circle_conormal_integral,
    circle_conormal_integral_quad,
    datum_integral,
    load_datum,
    make_datum,
    save_datum,
    sup_conormal_integral,
)
from varifold_lab.generators import gen_cap, gen_flat_disk
from varifold_lab.mesh import MeshError


def unit_circle(**kw):
    return CircleSpec([0.0, 0.0, 0.0], 1.0, [0.0, 0.0, 1.0], **kw)


def random_circle_and_point(rng):
    """A random circle plus a basepoint kept clear of the singular set."""
    while True:
        circle = CircleSpec(
            center=2.0 * rng.standard_normal(3),
            radius=float(np.exp(rng.uniform(-1.0, 1.0))),
            normal=rng.standard_normal(3),
            m=int(rng.integers(1, 4)),
            conormal_sign=int(rng.choice([-1, 1])),
        )
        x0 = 3.0 * rng.standard_normal(3)
        w = (x0 - circle.center) / circle.radius
        c = w @ circle.normal
        a = np.linalg.norm(w - c * circle.normal)
        if math.hypot(a - 1.0, c) > 1e-2:
            return circle, x0


# ---------------------------------------------------------------------------
# CircleSpec


def test_circle_spec_normalizes_normal():
    c = CircleSpec([0, 0, 0], 2.0, [0, 0, 5.0])
    np.testing.assert_allclose(c.normal, [0.0, 0.0, 1.0], atol=1e-15)
    with pytest.raises(ValueError):
        c.normal[0] = 1.0


@pytest.mark.parametrize(
    "kw",
    [
        {"radius": 0.0},
        {"radius": -1.0},
        {"m": 0},
        {"conormal_sign": 2},
        {"normal": [0.0, 0.0, 0.0]},
    ],
)
def test_circle_spec_validation(kw):
    base = {"center": [0, 0, 0], "radius": 1.0, "normal": [0, 0, 1]}
    base.update(kw)
    with pytest.raises(ValueError):
        CircleSpec(**base)


# ---------------------------------------------------------------------------
# the closed form


def test_value_at_the_poles():
    c = unit_circle()
    assert circle_conormal_integral(c, [0, 0, 1]) == pytest.approx(-math.pi, abs=1e-15)
    assert circle_conormal_integral(c, [0, 0, -1]) == pytest.approx(math.pi, abs=1e-15)


def test_closed_form_matches_quadrature(rng):
    rng = np.random.default_rng(7)
    for _ in range(20):
        circle, x0 = random_circle_and_point(rng)
        exact = circle_conormal_integral(circle, x0)
        quad = circle_conormal_integral_quad(circle, x0, n_samples=2048)
        assert exact == pytest.approx(quad, abs=1e-10)


def test_single_circle_bounded_by_m_pi(rng):
    for _ in range(50):
        circle, x0 = random_circle_and_point(rng)
        assert abs(circle_conormal_integral(circle, x0)) <= circle.m * math.pi + 1e-12


def test_multiplicity_and_sign_are_linear():
    x0 = [0.3, -0.2, 0.8]
    base = circle_conormal_integral(unit_circle(), x0)
    assert circle_conormal_integral(unit_circle(m=3), x0) == pytest.approx(
        3 * base, abs=1e-14
    )
    assert circle_conormal_integral(unit_circle(conormal_sign=-1), x0) == pytest.approx(
        -base, abs=1e-14
    )


def test_rigid_motion_invariance(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q *= np.sign(np.diag(r))
    t = rng.standard_normal(3)
    for _ in range(10):
        circle, x0 = random_circle_and_point(rng)
        moved = CircleSpec(
            q @ circle.center + t, circle.radius, q @ circle.normal,
            circle.m, circle.conormal_sign,
        )
        assert circle_conormal_integral(moved, q @ x0 + t) == pytest.approx(
            circle_conormal_integral(circle, x0), abs=1e-12
        )


def test_on_circle_is_singular():
    with pytest.raises(MeshError, match="integrand singular"):
        circle_conormal_integral(unit_circle(), [1.0, 0.0, 0.0])
    with pytest.raises(MeshError, match="integrand singular"):
        circle_conormal_integral_quad(unit_circle(), [1.0, 0.0, 0.0])


def test_quadrature_options():
    with pytest.raises(ValueError):
        circle_conormal_integral_quad(unit_circle(), [0, 0, 1], n_samples=8)
    # nu0 equal to the plane conormal reproduces the default
    a = circle_conormal_integral_quad(unit_circle(), [0, 0, 1])
    b = circle_conormal_integral_quad(unit_circle(), [0, 0, 1], nu0=[0, 0, 1])
    assert a == b
    # a tilted conormal is outside the closed form but fine for quadrature
    tilted = circle_conormal_integral_quad(unit_circle(), [0, 0, 1], nu0=[1, 0, 1])
    assert math.isfinite(tilted)


def test_datum_integral_sums_circles():
    lower = CircleSpec([0, 0, -0.5], 1.0, [0, 0, 1])
    datum = make_datum([unit_circle(), lower])
    x0 = [0.2, 0.1, 0.7]
    expected = circle_conormal_integral(unit_circle(), x0) + circle_conormal_integral(
        lower, x0
    )
    assert datum_integral(datum, x0) == pytest.approx(expected, abs=1e-14)


# ---------------------------------------------------------------------------
# sup over basepoints


def test_sup_for_one_circle_is_pi():
    sup = sup_conormal_integral(make_datum([unit_circle()]))
    # The maximizers form a whole surface, so only the value is pinned.
    assert sup.value == pytest.approx(math.pi, abs=1e-6)
    assert datum_integral(make_datum([unit_circle()]), sup.argmax) == pytest.approx(
        sup.value, abs=1e-12
    )


def test_sup_scales_with_multiplicity():
    sup = sup_conormal_integral(make_datum([unit_circle(m=2)]))
    assert sup.value == pytest.approx(2 * math.pi, abs=1e-5)


def test_sup_two_parallel_circles_stays_below_two_pi():
    datum = make_datum([unit_circle(), CircleSpec([0, 0, 0.5], 1.0, [0, 0, 1])])
    sup = sup_conormal_integral(datum)
    assert math.pi < sup.value < 2 * math.pi - 1e-3


def test_sup_requires_circles():
    with pytest.raises(ValueError):
        sup_conormal_integral(make_datum([]))


# ---------------------------------------------------------------------------
# admissibility


def test_admissibility_with_room_to_spare():
    rep = admissibility_check(3.0, make_datum([unit_circle()]))
    assert rep.admissible
    assert rep.passes_threshold and rep.passes_p_bound
    assert rep.sup_value == pytest.approx(math.pi, abs=1e-6)
    assert rep.total == pytest.approx(3.0 + 2 * math.pi, abs=1e-5)
    assert rep.slack == pytest.approx(6 * math.pi - 3.0 - 2 * math.pi, abs=1e-5)


def test_admissibility_fails_at_energy_bound():
    rep = admissibility_check(4 * math.pi, make_datum([unit_circle()]))
    assert not rep.passes_p_bound  # the bound is strict
    assert not rep.admissible


def test_admissibility_zero_energy_slack_is_four_pi():
    rep = admissibility_check(0.0, make_datum([unit_circle()]))
    assert rep.slack == pytest.approx(4 * math.pi, abs=1e-5)
    assert rep.admissible


def test_admissibility_thresholds():
    datum = make_datum([unit_circle()])
    rep = admissibility_check(1.0, datum, threshold=8 * math.pi)
    assert rep.threshold == pytest.approx(8 * math.pi)
    with pytest.raises(ValueError):
        admissibility_check(1.0, datum, threshold=7 * math.pi)
    with pytest.raises(ValueError):
        admissibility_check(-1.0, datum)


def test_admissibility_report_serializes():
    import json

    rep = admissibility_check(1.0, make_datum([unit_circle()]))
    doc = rep.to_dict()
    json.dumps(doc)
    assert set(doc) == {
        "p_estimate", "sup_value", "sup_argmax", "total", "threshold",
        "slack", "passes_threshold", "passes_p_bound", "admissible",
    }


# ---------------------------------------------------------------------------
# datum files


def test_datum_roundtrip(tmp_path):
    datum = make_datum(
        [unit_circle(m=2, conormal_sign=-1), CircleSpec([1, 2, 3], 0.5, [1, 1, 0])]
    )
    path = str(tmp_path / "datum.json")
    save_datum(datum, path)
    back = load_datum(path)
    assert len(back.circles) == len(datum.circles)
    for got, want in zip(back.circles, datum.circles):
        np.testing.assert_array_equal(got.center, want.center)
        assert got.radius == want.radius
        # loading re-normalizes the normal, which can move the last bit
        np.testing.assert_allclose(got.normal, want.normal, atol=1e-15)
        assert got.m == want.m and got.conormal_sign == want.conormal_sign


def test_load_datum_defaults(tmp_path):
    path = tmp_path / "d.json"
    path.write_text('{"circles": [{"center": [0,0,0], "radius": 1, "normal": [0,0,1]}]}')
    datum = load_datum(str(path))
    assert datum.circles[0].m == 1
    assert datum.circles[0].conormal_sign == 1


# ---------------------------------------------------------------------------
# discrete boundary measure


def test_closed_mesh_has_empty_boundary(sphere3):
    b = boundary_measure(sphere3.varifold)
    assert len(b.edges) == 0
    assert b.total_length == 0.0


def test_flat_disk_boundary(sphere3):
    rho = 1.5
    out = gen_flat_disk(rho, 3)
    b = boundary_measure(out.varifold)
    assert b.total_length == pytest.approx(2 * math.pi * rho, rel=0.01)
    np.testing.assert_array_equal(b.multiplicity, 1)
    mids = 0.5 * (
        out.varifold.vertices[b.edges[:, 0]] + out.varifold.vertices[b.edges[:, 1]]
    )
    radial = mids / np.linalg.norm(mids, axis=1)[:, None]
    outward = np.einsum("ij,ij->i", b.conormals, radial)
    assert outward.min() > 0.99
    np.testing.assert_allclose(b.conormals[:, 2], 0.0, atol=1e-12)


def test_cap_boundary_conormal_angle():
    theta = 1.2

    def mean_angle(level):
        b = boundary_measure(gen_cap(1.0, theta, level).varifold)
        return float(np.arcsin(np.clip(-b.conormals[:, 2], -1.0, 1.0)).mean())

    # Conormals leave the cap tilted below the boundary plane by the printed
    # contact angle; the per-face estimate converges to it at first order.
    errs = [abs(mean_angle(level) - theta) for level in (3, 4)]
    assert errs[1] < 0.04
    assert errs[1] < 0.6 * errs[0]
    b = boundary_measure(gen_cap(1.0, theta, 3).varifold)
    assert b.total_length == pytest.approx(2 * math.pi * math.sin(theta), rel=0.01)
