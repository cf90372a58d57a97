import math
import os
import subprocess
import sys

import numpy as np
import pytest

from varifold_lab import _kernels, generators
from varifold_lab._kernels import pyfallback

try:
    from varifold_lab._kernels import _clipcore
except ImportError:
    _clipcore = None

BACKENDS = [pyfallback] + ([_clipcore] if _clipcore is not None else [])


def grid_area(ax, ay, bx, by, cx, cy, rho, n=800):
    """Brute-force area(T ∩ D) on a regular grid, the independent oracle."""
    xs = np.linspace(min(ax, bx, cx, -rho), max(ax, bx, cx, rho), n)
    ys = np.linspace(min(ay, by, cy, -rho), max(ay, by, cy, rho), n)
    cell = (xs[1] - xs[0]) * (ys[1] - ys[0])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    # barycentric sign tests against the three edges
    def side(px, py, qx, qy):
        return (qx - px) * (Y - py) - (qy - py) * (X - px)

    s1, s2, s3 = side(ax, ay, bx, by), side(bx, by, cx, cy), side(cx, cy, ax, ay)
    in_tri = (s1 >= 0) & (s2 >= 0) & (s3 >= 0)
    in_disk = X * X + Y * Y <= rho * rho
    return float(np.count_nonzero(in_tri & in_disk)) * cell


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND)
class TestDiskTriArea:
    def test_triangle_inside_disk(self, impl):
        area = impl.disk_tri_area_2d(0.1, 0.1, 0.3, 0.1, 0.1, 0.3, 5.0)
        assert area == pytest.approx(0.02, abs=1e-14)

    def test_disk_inside_triangle(self, impl):
        area = impl.disk_tri_area_2d(-10, -10, 10, -10, 0, 10, 0.5)
        assert area == pytest.approx(math.pi * 0.25, abs=1e-12)

    def test_disjoint(self, impl):
        assert impl.disk_tri_area_2d(2, 2, 3, 2, 2, 3, 0.5) == pytest.approx(0.0, abs=1e-14)

    def test_quarter_disk_at_right_corner(self, impl):
        area = impl.disk_tri_area_2d(0, 0, 2, 0, 0, 2, 0.5)
        assert area == pytest.approx(math.pi * 0.25 / 4, abs=1e-12)

    def test_zero_radius(self, impl):
        assert impl.disk_tri_area_2d(0, 0, 1, 0, 0, 1, 0.0) == 0.0

    def test_against_grid_oracle(self, impl):
        rng = np.random.default_rng(7)
        for _ in range(8):
            pts = rng.uniform(-1.5, 1.5, size=(3, 2))
            # enforce counter-clockwise winding
            e1, e2 = pts[1] - pts[0], pts[2] - pts[0]
            if e1[0] * e2[1] - e1[1] * e2[0] < 0:
                pts = pts[::-1]
            rho = float(rng.uniform(0.3, 1.5))
            exact = impl.disk_tri_area_2d(*pts.ravel(), rho)
            approx = grid_area(*pts.ravel(), rho)
            assert exact == pytest.approx(approx, abs=5e-3)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND)
class TestBallMasses:
    def test_monotone_in_radius(self, impl, sphere3):
        v = sphere3.varifold
        radii = np.linspace(0.05, 2.5, 25)
        masses = impl.ball_masses(
            v.vertices, v.faces, v.multiplicity.astype(float), np.array([0.3, 0.2, 0.9]), radii
        )
        assert (np.diff(masses) >= -1e-12).all()

    def test_additive_in_multiplicity(self, impl, sphere3):
        v = sphere3.varifold
        radii = np.array([0.2, 0.5, 1.0])
        x0 = np.array([0.0, 0.0, 1.0])
        m1 = impl.ball_masses(v.vertices, v.faces, v.multiplicity.astype(float), x0, radii)
        m2 = impl.ball_masses(v.vertices, v.faces, 2.0 * v.multiplicity, x0, radii)
        np.testing.assert_allclose(m2, 2.0 * m1, rtol=0, atol=1e-12)

    def test_flat_patch_ratio_is_one(self, impl):
        disk = generators.gen_flat_disk(1.0, 4).varifold
        radii = np.array([0.1, 0.2, 0.4])
        masses = impl.ball_masses(
            disk.vertices, disk.faces, disk.multiplicity.astype(float), np.zeros(3), radii
        )
        np.testing.assert_allclose(masses / (math.pi * radii**2), 1.0, rtol=1e-9)

    def test_whole_mesh_mass_at_large_radius(self, impl, sphere3):
        from varifold_lab import mesh

        v = sphere3.varifold
        out = impl.ball_masses(
            v.vertices, v.faces, v.multiplicity.astype(float), np.zeros(3), np.array([10.0])
        )
        assert out[0] == pytest.approx(mesh.total_mass(v), rel=1e-12)


@pytest.mark.skipif(_clipcore is None, reason="compiled extension not built")
def test_backend_parity_on_random_queries(sphere3, double_bubble4):
    rng = np.random.default_rng(123)
    for v in (sphere3.varifold, double_bubble4.varifold):
        pts = v.vertices[rng.integers(0, v.num_vertices, size=6)]
        radii = np.geomspace(0.01, 2.0, 8)
        for x0 in pts:
            a = pyfallback.ball_masses(v.vertices, v.faces, v.multiplicity.astype(float), x0, radii)
            b = _clipcore.ball_masses(v.vertices, v.faces, v.multiplicity.astype(float), x0, radii)
            np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_force_fallback_env_selects_fallback():
    code = "import varifold_lab._kernels as k; print(k.BACKEND)"
    env = dict(os.environ, VARIFOLD_LAB_FORCE_FALLBACK="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "fallback"


def test_default_backend_is_reported():
    assert _kernels.BACKEND in ("compiled", "fallback")
    if _clipcore is not None:
        assert _kernels.BACKEND == "compiled"
