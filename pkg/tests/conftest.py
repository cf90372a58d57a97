import numpy as np
import pytest

from varifold_lab import generators


@pytest.fixture(scope="session")
def sphere3():
    """Unit sphere, level 3 (642 vertices)."""
    return generators.gen_sphere(1.0, 3)


@pytest.fixture(scope="session")
def sphere4():
    return generators.gen_sphere(1.0, 4)


@pytest.fixture(scope="session")
def torus3():
    return generators.gen_torus(2.0, 0.7, 3)


@pytest.fixture(scope="session")
def double_bubble4():
    """Standard double bubble, theta2=0.7, level 4."""
    return generators.gen_double_bubble(0.7, 1.0, 4)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260816)


def two_triangle_square():
    """Unit square split along a diagonal: 1 interior edge, 4 boundary edges."""
    vertices = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    faces = np.array([[0, 1, 2], [0, 2, 3]])
    return vertices, faces


def triple_fan():
    """Three half-disc-like triangles sharing one edge (a triple junction)."""
    vertices = np.array(
        [[0, 0, 0], [0, 0, 1], [1, 0, 0], [-0.5, 0.8660254, 0], [-0.5, -0.8660254, 0]]
    )
    faces = np.array([[0, 1, 2], [0, 1, 3], [0, 1, 4]])
    return vertices, faces
