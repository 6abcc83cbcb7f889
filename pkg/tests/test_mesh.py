import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from impulse_morse.galerkin import build_basis, eval_u
from impulse_morse.mesh import (MeshError, build_mesh, gram_matrix, m_element_eval,
                                m_subspace_norms, representer_eval, representer_slope)

from conftest import random_mesh


def test_single_midpoint():
    mesh = build_mesh([0.5])
    assert mesh.m == 1
    assert mesh.subinterval_lengths.tolist() == [0.5, 0.5]


def test_equally_spaced_thirds(thirds_mesh):
    assert thirds_mesh.m == 2
    np.testing.assert_allclose(thirds_mesh.subinterval_lengths, [1 / 3] * 3, atol=1e-15)
    assert thirds_mesh.is_equally_spaced


@pytest.mark.parametrize("points, fragment", [
    ([], "at least one"),
    ([0.5, 0.5], "point 2 .* duplicates"),
    ([0.6, 0.4], "point 2 .* smaller"),
    ([0.0], "point 1 "),
    ([0.3, 1.0], "point 2 "),
    ([0.5, 0.5 + 1e-12], "point 2 .* duplicates"),
    ([1e-12, 0.5], "point 1 .* close to 0"),
])
def test_rejects_bad_points(points, fragment):
    with pytest.raises(MeshError, match=fragment):
        build_mesh(points)


def test_duplicate_and_unsorted_errors_differ():
    with pytest.raises(MeshError) as dup:
        build_mesh([0.5, 0.5])
    with pytest.raises(MeshError) as order:
        build_mesh([0.6, 0.4])
    assert str(dup.value) != str(order.value)


def test_representer_values(half_mesh, thirds_mesh):
    assert representer_eval(half_mesh, 1, 0.5) == 0.25
    assert representer_eval(thirds_mesh, 1, 2 / 3) == pytest.approx(1 / 9, abs=1e-16)
    for j in (1, 2):
        assert representer_eval(thirds_mesh, j, 0.0) == 0.0
        assert representer_eval(thirds_mesh, j, 1.0) == 0.0


def test_representer_index_checked(half_mesh):
    with pytest.raises(MeshError, match="index 2"):
        representer_eval(half_mesh, 2, 0.3)
    with pytest.raises(MeshError):
        representer_eval(half_mesh, 0, 0.3)


def test_representer_kink_is_unit_slope_drop(thirds_mesh):
    for j, xj in enumerate(thirds_mesh.interior_points, start=1):
        left = representer_slope(thirds_mesh, j, xj, side="left")
        right = representer_slope(thirds_mesh, j, xj, side="right")
        assert right - left == pytest.approx(-1.0, abs=1e-15)


def test_gram_examples(half_mesh, thirds_mesh):
    assert gram_matrix(half_mesh).tolist() == [[0.25]]
    np.testing.assert_allclose(gram_matrix(thirds_mesh), [[2 / 9, 1 / 9], [1 / 9, 2 / 9]], atol=1e-16)


def test_gram_is_cached_and_read_only(thirds_mesh):
    assert thirds_mesh.gram is thirds_mesh.gram
    with pytest.raises(ValueError):
        thirds_mesh.gram[0, 0] = 1.0


def test_m_norm_examples(half_mesh, thirds_mesh):
    assert m_subspace_norms(half_mesh, [1.0]) == (0.5, 0.25)
    assert m_subspace_norms(half_mesh, [0.0]) == (0.0, 0.0)
    h, node = m_subspace_norms(thirds_mesh, [1.0, 1.0])
    assert node == pytest.approx(1 / 3, abs=1e-15)
    assert h == pytest.approx(np.sqrt(6) / 3, abs=1e-15)
    with pytest.raises(MeshError):
        m_subspace_norms(thirds_mesh, [1.0])


@given(st.integers(0, 2**32 - 1))
def test_gram_symmetric_positive_definite(seed):
    mesh = random_mesh(np.random.default_rng(seed), m_max=6, min_gap=1e-3)
    G = gram_matrix(mesh)
    assert np.array_equal(G, G.T)
    assert np.linalg.eigvalsh(G)[0] > 0


def test_gram_positive_definite_200_meshes():
    rng = np.random.default_rng(11)
    for _ in range(200):
        mesh = random_mesh(rng, m_max=6, min_gap=1e-4)
        assert np.linalg.eigvalsh(mesh.gram)[0] > 0


def test_node_max_is_global_max():
    rng = np.random.default_rng(3)
    xs = np.linspace(0.0, 1.0, 4001)
    for _ in range(500):
        mesh = random_mesh(rng, m_max=5)
        c = rng.standard_normal(mesh.m)
        xfine = np.unique(np.concatenate((xs, mesh.interior_points)))
        global_max = np.max(np.abs(m_element_eval(mesh, c, xfine)))
        _, node_max = m_subspace_norms(mesh, c)
        assert abs(global_max - node_max) <= 1e-12


def test_reproducing_property_by_quadrature():
    rng = np.random.default_rng(5)
    for _ in range(10):
        mesh = random_mesh(rng, m_max=4)
        basis = build_basis(mesh, 6)
        c = rng.standard_normal(basis.dim)
        for j in range(1, mesh.m + 1):
            total = 0.0
            for s in range(mesh.m + 1):
                x, w = basis.quad_x[s], basis.quad_w[s]
                du = eval_u(basis, c, x, derivative=True)
                total += w @ (du * representer_slope(mesh, j, x))
            assert total == pytest.approx(eval_u(basis, c, mesh.interior_points[j - 1]), abs=1e-10)
