"""Meshes, the orthonormal broken Legendre basis, and L2 projection."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rkdg1d.dgfunction import (
    DGFunction,
    l2_error,
    l2_project,
    quad_points,
    ref_basis_derivs,
    ref_basis_values,
)
from rkdg1d.mesh import Mesh1D, QuadratureRule, build_uniform_mesh


class TestMesh:
    def test_uniform_sizes(self):
        mesh = build_uniform_mesh(8)
        h = 2.0 * np.pi / 8
        assert mesh.n_elements == 8
        assert np.allclose(mesh.element_sizes, h)
        assert np.allclose(mesh.node_sizes, h)
        assert mesh.domain == (0.0, 2.0 * np.pi)
        assert np.isclose(mesh.length, 2.0 * np.pi)

    def test_node_sizes_periodic_wrap(self):
        nodes = np.array([0.0, 1.0, 3.0, 4.0, 2.0 * np.pi])
        mesh = Mesh1D(nodes)
        h = np.diff(nodes)
        # node i sits between element i-1 (periodic wrap) and element i
        expected = 0.5 * (h + np.roll(h, 1))
        assert np.allclose(mesh.node_sizes, expected)

    def test_regularity_guard(self):
        nodes = np.array([0.0, 1e-3, 2.0 * np.pi])
        with pytest.raises(ValueError, match="regularity"):
            Mesh1D(nodes)

    def test_decreasing_nodes_rejected(self):
        with pytest.raises(ValueError):
            Mesh1D(np.array([0.0, 2.0, 1.0]))

    def test_too_few_elements(self):
        with pytest.raises(ValueError):
            build_uniform_mesh(1)

    def test_element_lookup_roundtrip(self):
        mesh = build_uniform_mesh(16)
        rng = np.random.default_rng(3)
        x = rng.uniform(0.0, 2.0 * np.pi, 50)
        elem = mesh.element_of(x)
        xi = mesh.to_reference(x, elem)
        assert np.all((xi >= -1.0 - 1e-14) & (xi <= 1.0 + 1e-14))
        back = mesh.nodes[elem] + 0.5 * mesh.element_sizes[elem] * (xi + 1.0)
        assert np.allclose(back, x, atol=1e-13)

    def test_element_of_outside_domain(self):
        mesh = build_uniform_mesh(4)
        with pytest.raises(ValueError):
            mesh.element_of(7.0)


class TestBasis:
    @pytest.mark.parametrize("q", [0, 1, 2, 3, 4])
    def test_orthonormality(self, q):
        # Gram matrix of the reference basis under exact Gauss quadrature
        rule = QuadratureRule.gauss(q + 2)
        vals = ref_basis_values(q, rule.points)
        gram = np.einsum("p,pi,pj->ij", rule.weights, vals, vals)
        assert np.max(np.abs(gram - np.eye(q + 1))) < 1e-12

    @pytest.mark.parametrize("q", [1, 2, 3])
    def test_derivatives_match_finite_differences(self, q):
        xi = np.linspace(-0.9, 0.9, 7)
        d = 1e-6
        fd = (ref_basis_values(q, xi + d) - ref_basis_values(q, xi - d)) / (2 * d)
        assert np.max(np.abs(fd - ref_basis_derivs(q, xi))) < 1e-8

    def test_physical_orthonormality(self):
        # L2 norm of a dG function equals the Euclidean coefficient norm
        mesh = build_uniform_mesh(6)
        rng = np.random.default_rng(0)
        f = DGFunction(mesh, 2, rng.standard_normal((6, 3, 2)))
        rule = QuadratureRule.gauss(5)
        vals = f.values_at(rule.points)
        h = mesh.element_sizes
        quad = np.sqrt(np.einsum("p,epc->", rule.weights, vals**2 * (h / 2)[:, None, None]))
        assert np.isclose(quad, f.l2_norm(), atol=1e-12)


class TestProjection:
    @pytest.mark.parametrize("q", [1, 2, 3])
    def test_reproduces_polynomials(self, q):
        mesh = build_uniform_mesh(5)
        coefs = np.arange(q + 1, dtype=float) + 1.0

        def g(x):
            return sum(c * x**j for j, c in enumerate(coefs))

        f = l2_project(g, mesh, q)
        err = l2_error(f, g)
        assert err[0] < 1e-11

    def test_optimal_rate_for_sine(self):
        q = 2
        errs = []
        for n in (8, 16):
            f = l2_project(np.sin, build_uniform_mesh(n), q)
            errs.append(float(l2_error(f, np.sin)[0]))
        rate = np.log2(errs[0] / errs[1])
        assert abs(rate - (q + 1)) < 0.1

    def test_projection_is_identity_on_dg_functions(self):
        mesh = build_uniform_mesh(4)
        rng = np.random.default_rng(1)
        f = DGFunction(mesh, 2, rng.standard_normal((4, 3, 1)))

        def g(x):
            shape = x.shape
            return f.eval(x.ravel()).reshape(*shape, 1)

        f2 = l2_project(g, mesh, 2)
        assert np.max(np.abs(f2.coeffs - f.coeffs)) < 1e-12

    def test_bad_component_count(self):
        with pytest.raises(ValueError):
            l2_project(np.sin, build_uniform_mesh(4), 1, n_components=2)


class TestDGFunction:
    def test_integral_uses_only_constant_mode(self):
        mesh = build_uniform_mesh(4)
        c = np.zeros((4, 3, 1))
        c[:, 1:, 0] = 1.7  # oscillatory modes integrate to zero
        assert np.allclose(DGFunction(mesh, 2, c).integral(), 0.0, atol=1e-14)
        c[:, 0, 0] = 2.0
        f = DGFunction(mesh, 2, c)
        expected = 2.0 * np.sum(np.sqrt(mesh.element_sizes))
        assert np.isclose(f.integral()[0], expected)

    def test_traces_and_jumps(self):
        mesh = build_uniform_mesh(8)
        f = l2_project(np.sin, mesh, 3)
        left, right = f.traces()
        nodes = mesh.nodes[:-1]
        assert np.max(np.abs(left[:, 0] - np.sin(nodes))) < 1e-3
        jumps = f.node_jumps()
        # projection of a smooth function has O(h^{q+1}) interface jumps
        assert np.max(np.abs(jumps)) < 1e-3

    def test_eval_sides_at_interior_node(self):
        mesh = build_uniform_mesh(4)
        rng = np.random.default_rng(2)
        f = DGFunction(mesh, 1, rng.standard_normal((4, 2, 1)))
        x = mesh.nodes[2]
        left, right = f.traces()
        assert np.isclose(f.eval(x, side="left")[0, 0], right[1, 0])
        assert np.isclose(f.eval(x, side="right")[0, 0], left[2, 0])

    def test_eval_periodic_wrap_at_domain_ends(self):
        mesh = build_uniform_mesh(4)
        rng = np.random.default_rng(4)
        f = DGFunction(mesh, 1, rng.standard_normal((4, 2, 1)))
        _, right = f.traces()
        assert np.isclose(f.eval(0.0, side="left")[0, 0], right[-1, 0])

    def test_algebra_and_compatibility(self):
        mesh = build_uniform_mesh(4)
        f = DGFunction.zeros(mesh, 1, 1)
        g = l2_project(np.sin, mesh, 1)
        assert np.allclose((f + g).coeffs, g.coeffs)
        assert np.allclose((2.0 * g - g).coeffs, g.coeffs)
        other = DGFunction.zeros(mesh, 2, 1)
        with pytest.raises(ValueError):
            _ = g + other

    def test_quad_points_shape(self):
        mesh = build_uniform_mesh(5)
        rule = QuadratureRule.gauss(3)
        xq = quad_points(mesh, rule)
        assert xq.shape == (5, 3)
        assert np.all((xq > 0) & (xq < 2 * np.pi))


@given(st.integers(2, 40))
@settings(max_examples=25, deadline=None)
def test_uniform_mesh_partitions_domain(n):
    mesh = build_uniform_mesh(n)
    assert np.isclose(mesh.element_sizes.sum(), 2.0 * np.pi, atol=1e-12)
    assert np.isclose(mesh.node_sizes.sum(), 2.0 * np.pi, atol=1e-12)
