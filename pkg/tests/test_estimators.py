"""Estimator sweep, EOC helper, and the class-specific bound assembly."""

import numpy as np
import pytest

from rkdg1d.dgfunction import DGFunction, l2_project
from rkdg1d.estimators import (
    SUP_INFLATION,
    _pad_degree,
    _total_bound,
    _true_error_combo,
    eoc,
    estimate,
)
from rkdg1d.mesh import build_uniform_mesh
from rkdg1d.operators import DiffusionConfig, FluxScheme, SpatialOperators
from rkdg1d.problems import (
    LINEAR_SCALAR,
    LINEAR_SYSTEM,
    LINEAR_WAVE,
    NONLINEAR_SCALAR,
    NONLINEAR_WAVE,
    ProblemSpec,
    nonlinear_wave,
    viscous_burgers,
)
from rkdg1d.stepping import Trajectory, run_simulation
from rkdg1d.tableaus import get_tableau


class TestEOC:
    def test_textbook_example(self):
        # errors 0.04 -> 0.01 under mesh halving 0.2 -> 0.1: order 2
        assert np.isclose(eoc(0.04, 0.01, 0.2, 0.1), 2.0, atol=1e-14)

    def test_first_order(self):
        assert np.isclose(eoc(0.1, 0.05, 0.4, 0.2), 1.0, atol=1e-14)

    def test_validation(self):
        with pytest.raises(ValueError):
            eoc(0.0, 0.01, 0.2, 0.1)
        with pytest.raises(ValueError):
            eoc(0.04, 0.01, 0.1, 0.2)


class TestPadDegree:
    def test_preserves_values(self):
        mesh = build_uniform_mesh(6)
        f = l2_project(np.sin, mesh, 2)
        g = _pad_degree(f, 4)
        assert g.degree == 4
        xs = np.linspace(0.3, 6.0, 17)
        assert np.max(np.abs(f.eval(xs) - g.eval(xs))) < 1e-13

    def test_rejects_lower_degree(self):
        mesh = build_uniform_mesh(4)
        f = l2_project(np.sin, mesh, 2)
        with pytest.raises(ValueError):
            _pad_degree(f, 1)


class TestBoundAssembly:
    """The squared-norm coefficients of each class's total bound."""

    def part(self, cls, eps=0.5, growth=1.0, **one):
        kw = dict(init_sq=0.0, r1_sq=0.0, theta_sq=0.0, fgap_sq=0.0,
                  egap_sq=0.0, growth=growth, extra={})
        kw.update(one)
        return _total_bound(cls, eps, 1.0, **kw)

    def test_linear_scalar_coefficients(self):
        assert np.isclose(self.part(LINEAR_SCALAR, init_sq=1.0), 8.0)
        assert np.isclose(self.part(LINEAR_SCALAR, r1_sq=1.0), 32.0)
        assert np.isclose(self.part(LINEAR_SCALAR, theta_sq=1.0), 4.0)
        assert np.isclose(self.part(LINEAR_SCALAR, fgap_sq=1.0), 2.0)
        assert np.isclose(self.part(LINEAR_SCALAR, egap_sq=1.0), 2.0)

    def test_nonlinear_scalar_coefficients(self):
        assert np.isclose(self.part(NONLINEAR_SCALAR, init_sq=1.0), 8.0)
        assert np.isclose(self.part(NONLINEAR_SCALAR, r1_sq=1.0), 32.0)
        assert np.isclose(self.part(NONLINEAR_SCALAR, theta_sq=1.0), 8.0)
        assert np.isclose(self.part(NONLINEAR_SCALAR, fgap_sq=1.0), 2.0)
        assert np.isclose(self.part(NONLINEAR_SCALAR, egap_sq=1.0), 1.0)
        # the growth factor scales only the Gronwall bracket
        assert np.isclose(self.part(NONLINEAR_SCALAR, r1_sq=1.0, growth=3.0), 96.0)
        assert np.isclose(self.part(NONLINEAR_SCALAR, fgap_sq=1.0, growth=3.0), 2.0)

    def test_linear_system_coefficients(self):
        assert np.isclose(self.part(LINEAR_SYSTEM, init_sq=1.0), 2.0)
        assert np.isclose(self.part(LINEAR_SYSTEM, r1_sq=1.0), 8.0)
        assert np.isclose(self.part(LINEAR_SYSTEM, theta_sq=1.0), 1.0)
        assert np.isclose(self.part(LINEAR_SYSTEM, fgap_sq=1.0), 0.5)
        assert np.isclose(self.part(LINEAR_SYSTEM, egap_sq=1.0), 0.5)

    def test_linear_wave_coefficients(self):
        assert np.isclose(self.part(LINEAR_WAVE, init_sq=1.0), 4.0)
        assert np.isclose(self.part(LINEAR_WAVE, r1_sq=1.0), 4.0)
        assert np.isclose(self.part(LINEAR_WAVE, theta_sq=1.0), 2.0)
        assert np.isclose(self.part(LINEAR_WAVE, fgap_sq=1.0), 2.0)
        assert np.isclose(self.part(LINEAR_WAVE, egap_sq=1.0), 2.0)

    def test_nonlinear_wave_assembly(self):
        extra = dict(c_W=2.0, init_potential=1.0, init_v_sq=2.0,
                     r1_u_weighted_sq=3.0, r1_v_sq=4.0,
                     fgap_u_sq=5.0, fgap_v_sq=6.0)
        val = _total_bound(NONLINEAR_WAVE, 0.5, 1.0,
                           init_sq=0.0, r1_sq=0.0, theta_sq=8.0,
                           fgap_sq=0.0, egap_sq=10.0, growth=2.0, extra=extra)
        bracket = 1.0 + 0.5 * 2.0 + (2.0 / 2.0) * 3.0 + 2.0 * 4.0 + 0.5 * 0.5 * 8.0
        expected = 4.0 * 2.0 * bracket + 0.5 * 2.0 * 5.0 + 0.5 * 6.0 + 0.5 * 10.0
        assert np.isclose(val, expected)

    def test_error_combos(self):
        kw = dict(err_sq=1.0, err_comp_sq=np.array([1.0, 4.0]), energy_sq=2.0)
        assert np.isclose(_true_error_combo(LINEAR_SCALAR, 0.5, extra={}, **kw),
                          1.0 + 2.0 * 0.5 * 2.0)
        assert np.isclose(_true_error_combo(NONLINEAR_SCALAR, 0.5, extra={}, **kw),
                          1.0 + 0.5 * 2.0)
        assert np.isclose(_true_error_combo(LINEAR_SYSTEM, 0.5, extra={}, **kw),
                          0.25 + 0.5 * 0.5 * 2.0)
        assert np.isclose(_true_error_combo(LINEAR_WAVE, 0.5, extra={}, **kw),
                          0.5 + 0.5 * 0.5 * 2.0)
        assert np.isclose(
            _true_error_combo(NONLINEAR_WAVE, 0.5, extra={"c_W": 2.0}, **kw),
            0.25 * 2.0 * 1.0 + 0.25 * 4.0 + 0.5 * 0.5 * 2.0,
        )

    def test_unknown_class_rejected(self):
        with pytest.raises(ValueError):
            self.part("mystery")


def constant_problem(value: float):
    def exact(t, x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape + (1,), value)

    def exact_dx(t, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (1,))

    return ProblemSpec(
        name="constant", n_components=1, problem_class=LINEAR_SCALAR,
        epsilon=1e-3, flux=lambda u: np.asarray(u, dtype=float).copy(),
        flux_jac=lambda u: np.ones(np.asarray(u).shape + (1,)),
        diffusion_mask=(True,), exact=exact, exact_dx=exact_dx,
    )


class TestEstimatorSweep:
    def test_steady_constant_state(self):
        # a constant is a steady state: all residual pieces must vanish
        problem = constant_problem(1.3)
        mesh = build_uniform_mesh(8)
        ops = SpatialOperators(mesh, 1, 1, problem.flux, problem.flux_jac,
                               FluxScheme(lam=0.2),
                               DiffusionConfig(problem.epsilon, (True,)))
        u0 = l2_project(problem.initial, mesh, 1)
        traj = run_simulation(ops, u0, 0.3, 0.1)
        rep = estimate(traj, problem)
        assert rep.r1_norm < 1e-10
        assert rep.theta1 < 1e-10 and rep.theta2 < 1e-10 and rep.theta3 < 1e-10
        assert rep.final_gap < 1e-10
        assert rep.init_error < 1e-10
        assert rep.true_error_linf_l2 < 1e-10
        assert rep.mass_drift < 1e-12

    def test_theta2_single_jump(self):
        # piecewise constant with one bump: theta2 integrates the two jumps
        problem = constant_problem(0.0)
        mesh = build_uniform_mesh(8)
        ops = SpatialOperators(mesh, 1, 1, problem.flux, problem.flux_jac,
                               FluxScheme(lam=0.2),
                               DiffusionConfig(problem.epsilon, (True,)))
        c = np.zeros((8, 2, 1))
        c[0, 0, 0] = 0.7
        f = DGFunction(mesh, 1, c)
        zero = DGFunction.zeros(mesh, 1, 1)
        traj = Trajectory(np.array([0.0, 1.0]), (f, f), (zero, zero),
                          ops, get_tableau())
        rep = estimate(traj, problem)
        v0 = 0.7 * np.sqrt(1.0 / mesh.element_sizes[0])
        expected = np.sqrt(v0**2 / mesh.node_sizes[0] + v0**2 / mesh.node_sizes[1])
        assert np.isclose(rep.theta2, expected, rtol=1e-10)
        assert rep.theta3 < 1e-12  # piecewise constant: no derivative jumps

    def test_burgers_gronwall_constant(self):
        mesh = build_uniform_mesh(16)
        problem = viscous_burgers(1e-3)
        ops = SpatialOperators(mesh, 1, 1, problem.flux, problem.flux_jac,
                               FluxScheme(lam=0.1),
                               DiffusionConfig(1e-3, (True,)))
        u0 = l2_project(problem.initial, mesh, 1)
        traj = run_simulation(ops, u0, 0.2, 0.02, source=problem.source)
        rep = estimate(traj, problem)
        k = rep.entropy_constants["K"]
        assert k > 0
        assert np.isclose(rep.growth_factor, np.exp(8.0 * k * rep.t_final), rtol=1e-12)
        # f'' = 1, so K is the inflated sup of the reconstruction gradient
        assert np.isclose(k, SUP_INFLATION * rep.sup_dx_st[0], rtol=1e-12)

    def test_wave_entropy_constants(self):
        mesh = build_uniform_mesh(16)
        problem = nonlinear_wave(1e-4)
        ops = SpatialOperators(mesh, 1, 2, problem.flux, problem.flux_jac,
                               FluxScheme(lam=0.1),
                               DiffusionConfig(1e-4, problem.diffusion_mask))
        u0 = l2_project(problem.initial, mesh, 1, 2)
        traj = run_simulation(ops, u0, 0.2, 0.02, source=problem.source)
        rep = estimate(traj, problem)
        c_w = rep.entropy_constants["c_W"]
        c_big = rep.entropy_constants["C_W"]
        # convexity constants bracketed by the potential on the solution range
        assert 2.0 * problem.potential.d2w(2.5) / SUP_INFLATION < c_w
        assert c_w < 2.0 * problem.potential.d2w(1.5)
        assert c_big > 0
        assert np.isclose(rep.growth_factor,
                          np.exp(c_big * rep.t_final * rep.sup_dx_st[1]), rtol=1e-12)
        assert rep.init_potential >= 0.0
        assert np.isfinite(rep.total_bound)

    def test_sup_inflation_value(self):
        assert SUP_INFLATION == 1.05
