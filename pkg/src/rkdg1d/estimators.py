"""Residual-based a posteriori error estimators and total error bounds.

The estimator post-processes one trajectory: it builds the space-time
reconstruction, sweeps a composite space-time quadrature grid once, and
accumulates

* the volume residual norm ||r1||_{L1(0,T;L2)},
* the jump/gradient indicators theta1-theta3 for the dual-norm residual,
* the reconstruction gaps (final-time L2 gap and dG-energy gap),
* the true errors against the exact solution,

and assembles the problem-class specific total bound with its Gronwall or
relative-entropy constants.  The unknown dual-norm constant is set to 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dgfunction import DGFunction, default_quadrature, l2_error, quad_points
from .mesh import QuadratureRule
from .operators import energy_density
from .problems import (
    LINEAR_SCALAR,
    LINEAR_SYSTEM,
    LINEAR_WAVE,
    NONLINEAR_SCALAR,
    NONLINEAR_WAVE,
    ProblemSpec,
)
from .reconstruction import SpaceTimeReconstruction
from .stepping import Trajectory

#: Safety inflation applied to sampled sup-norms and sampled state ranges.
SUP_INFLATION = 1.05


def eoc(e_coarse: float, e_fine: float, h_coarse: float, h_fine: float) -> float:
    """Experimental order of convergence between two refinement levels."""
    if min(e_coarse, e_fine, h_coarse, h_fine) <= 0:
        raise ValueError("eoc requires positive errors and mesh sizes")
    if h_coarse <= h_fine:
        raise ValueError("h_coarse must exceed h_fine")
    return float(np.log(e_coarse / e_fine) / np.log(h_coarse / h_fine))


def _pad_degree(f: DGFunction, degree: int) -> DGFunction:
    """Embed f into the degree-`degree` space by zero-padding coefficients."""
    if degree < f.degree:
        raise ValueError("cannot pad to a lower degree")
    M, _, m = f.coeffs.shape
    out = np.zeros((M, degree + 1, m))
    out[:, : f.degree + 1, :] = f.coeffs
    return DGFunction(f.mesh, degree, out)


@dataclass(frozen=True)
class EstimatorReport:
    """All estimator outputs for one run.

    total_bound is the right-hand side of the class's bound (a squared
    quantity); true_error_combo is the matching left-hand-side combination.
    effectivity compares the two on the unsquared (norm) scale.
    """

    problem: str
    problem_class: str
    epsilon: float
    t_final: float
    r1_norm: float
    r1_components: np.ndarray
    r1_entropy_weighted: float
    theta1: float
    theta2: float
    theta3: float
    theta_total: float
    init_error: float
    init_potential: float
    init_v_error: float
    final_gap: float
    final_gap_components: np.ndarray
    energy_gap: float
    growth_factor: float
    entropy_constants: dict
    total_bound: float
    true_error_linf_l2: float
    true_error_components: np.ndarray
    true_error_energy: float
    true_error_combo: float
    effectivity: float
    mass_drift: float
    sup_dx_st: np.ndarray

    @property
    def bound_norm(self) -> float:
        """Total bound on the norm scale (square root of the corollary RHS)."""
        return float(np.sqrt(self.total_bound))


def _total_bound(cls: str, eps: float, t: float, *, init_sq, r1_sq, theta_sq,
                 fgap_sq, egap_sq, growth, extra) -> float:
    """Assemble the class's bound right-hand side from squared norm inputs."""
    if cls == LINEAR_SCALAR:
        return (8.0 * (init_sq + 4.0 * r1_sq + eps * theta_sq)
                + 2.0 * (fgap_sq + 2.0 * eps * egap_sq))
    if cls == NONLINEAR_SCALAR:
        return (2.0 * (4.0 * init_sq + 16.0 * r1_sq + 8.0 * eps * theta_sq) * growth
                + 2.0 * (fgap_sq + eps * egap_sq))
    if cls == LINEAR_SYSTEM:
        return (2.0 * (init_sq + 4.0 * r1_sq + eps * theta_sq)
                + 0.5 * fgap_sq + eps * egap_sq)
    if cls == LINEAR_WAVE:
        return (4.0 * init_sq + 4.0 * r1_sq + 4.0 * eps * theta_sq
                + 2.0 * fgap_sq + 4.0 * eps * egap_sq)
    if cls == NONLINEAR_WAVE:
        c_w = extra["c_W"]
        return (4.0 * growth * (extra["init_potential"]
                                + 0.5 * extra["init_v_sq"]
                                + (2.0 / c_w) * extra["r1_u_weighted_sq"]
                                + 2.0 * extra["r1_v_sq"]
                                + 0.5 * eps * theta_sq)
                + 0.5 * c_w * extra["fgap_u_sq"] + 0.5 * extra["fgap_v_sq"]
                + eps * egap_sq)
    raise ValueError(f"unknown problem class {cls!r}")


def _true_error_combo(cls: str, eps: float, *, err_sq, err_comp_sq,
                      energy_sq, extra) -> float:
    """Left-hand-side combination matching the class's bound."""
    if cls == LINEAR_SCALAR:
        return err_sq + 2.0 * eps * energy_sq
    if cls == NONLINEAR_SCALAR:
        return err_sq + eps * energy_sq
    if cls == LINEAR_SYSTEM:
        return 0.25 * err_sq + 0.5 * eps * energy_sq
    if cls == LINEAR_WAVE:
        return 0.5 * err_sq + 0.5 * eps * energy_sq
    if cls == NONLINEAR_WAVE:
        c_w = extra["c_W"]
        return (0.25 * c_w * err_comp_sq[0] + 0.25 * err_comp_sq[1]
                + 0.5 * eps * energy_sq)
    raise ValueError(f"unknown problem class {cls!r}")


def estimate(traj: Trajectory, problem: ProblemSpec) -> EstimatorReport:
    """Run the full estimator sweep over a finished trajectory."""
    ops = traj.ops
    mesh, q, m = ops.mesh, ops.degree, ops.n_components
    eps = ops.diff.epsilon
    masked = ops.diff.masked_components()
    t_final = float(traj.times[-1])

    st = SpaceTimeReconstruction(traj)
    temporal = st.temporal
    srule = default_quadrature(q)
    trule = QuadratureRule.gauss(q + 2)
    xq = quad_points(mesh, srule)
    h = mesh.element_sizes
    hn = mesh.node_sizes
    elw = 0.5 * h[:, None, None] * srule.weights[None, :, None]

    r1_time = 0.0
    r1_comp_time = np.zeros(m)
    r1_wu_time = 0.0
    th1_sq = th2_sq = th3_sq = th_tot_sq = 0.0
    egap_sq = 0.0
    true_energy_sq = 0.0
    sup_dx = np.zeros(m)
    sup_val = np.zeros(m)
    u_range = np.array([np.inf, -np.inf])

    d2w = problem.potential.d2w if problem.potential is not None else None

    for n in range(traj.n_steps):
        t0, t1 = traj.times[n], traj.times[n + 1]
        tau = t1 - t0
        for wq, tp in zip(trule.weights, trule.points):
            t = t0 + 0.5 * tau * (tp + 1.0)
            tw = 0.5 * tau * wq

            ut = temporal.eval(t)
            ust = st.eval(t)
            dust = st.dt(t)

            vals = ust.values_at(srule.points)
            dvals = ust.derivs_at(srule.points)
            dtvals = dust.values_at(srule.points)
            ah = ops.apply_Ah(ut).values_at(srule.points)
            jac = problem.flux_jac(vals)
            r1 = dtvals + np.einsum("epij,epj->epi", jac, dvals) - eps * ah
            if problem.source is not None:
                r1 = r1 - problem.source(t, xq)

            r1_sq_c = np.einsum("epc,epc->c", r1, r1 * elw)
            r1_comp_time += tw * np.sqrt(r1_sq_c)
            r1_time += tw * np.sqrt(r1_sq_c.sum())
            if d2w is not None:
                wr = d2w(vals[..., 0]) * r1[..., 0]
                r1_wu_time += tw * np.sqrt(np.sum(wr**2 * elw[..., 0]))

            dut = ut.derivs_at(srule.points)
            gd = (dvals[..., masked] - dut[..., masked]) ** 2 * elw
            theta1 = np.sqrt(gd.sum())
            jumps = ut.node_jumps()[:, masked]
            theta2 = np.sqrt(np.sum(jumps**2 / hn[:, None]))
            djumps = ut.node_deriv_jumps()[:, masked]
            theta3 = np.sqrt(np.sum(djumps**2 * hn[:, None]))
            th1_sq += tw * theta1**2
            th2_sq += tw * theta2**2
            th3_sq += tw * theta3**2
            th_tot_sq += tw * (theta1 + theta2 + theta3) ** 2

            egap_sq += tw * energy_density(ust - _pad_degree(ut, q + 1), masked)

            dex = problem.exact_dx(t, xq)
            grad_sq = np.sum((dex[..., masked] - dut[..., masked]) ** 2 * elw)
            jump_sq = np.sum(jumps**2 / hn[:, None])
            true_energy_sq += tw * (grad_sq + jump_sq)

            dl, dr = ust.deriv_traces()
            sup_dx = np.maximum(
                sup_dx,
                np.max(np.abs(np.concatenate([dvals, dl[:, None, :], dr[:, None, :]],
                                             axis=1)), axis=(0, 1)),
            )
            tl, tr = ust.traces()
            allv = np.concatenate([vals, tl[:, None, :], tr[:, None, :]], axis=1)
            sup_val = np.maximum(sup_val, np.max(np.abs(allv), axis=(0, 1)))
            u_range[0] = min(u_range[0], allv[..., 0].min())
            u_range[1] = max(u_range[1], allv[..., 0].max())

    sup_dx *= SUP_INFLATION
    sup_val *= SUP_INFLATION
    center, half = 0.5 * (u_range[0] + u_range[1]), 0.5 * (u_range[1] - u_range[0])
    u_range = np.array([center - SUP_INFLATION * half, center + SUP_INFLATION * half])

    # true L-infinity-in-time L2 error, sampled at the timestep nodes
    err_comp = np.zeros(m)
    err_all = 0.0
    for t, u in zip(traj.times, traj.states):
        e = l2_error(u, lambda x: problem.exact(t, x))
        err_comp = np.maximum(err_comp, e)
        err_all = max(err_all, float(np.sqrt(np.sum(e**2))))

    # initial-data and final-time reconstruction gaps
    ust0 = st.eval(0.0)
    vals0 = ust0.values_at(srule.points)
    ex0 = problem.exact(0.0, xq)
    init_error = float(np.sqrt(np.sum((ex0 - vals0) ** 2 * elw)))
    init_potential = 0.0
    init_v_sq = 0.0
    if problem.potential is not None:
        w_fn, dw_fn = problem.potential.w, problem.potential.dw
        rel = (w_fn(ex0[..., 0]) - w_fn(vals0[..., 0])
               - dw_fn(vals0[..., 0]) * (ex0[..., 0] - vals0[..., 0]))
        init_potential = float(np.sum(rel * elw[..., 0]))
        init_v_sq = float(np.sum((ex0[..., 1] - vals0[..., 1]) ** 2 * elw[..., 0]))

    gap_final = st.eval(t_final) - _pad_degree(traj.states[-1], q + 1)
    fgap_comp = gap_final.component_l2_norms()
    final_gap = gap_final.l2_norm()

    # Gronwall / relative-entropy constants
    cls = problem.problem_class
    growth = 1.0
    constants: dict = {}
    extra: dict = {}
    if cls == NONLINEAR_SCALAR:
        if problem.flux_hessian is None:
            raise ValueError("nonlinear scalar problems need flux Hessian data")
        fpp = np.max(np.abs(problem.flux_hessian(np.linspace(*u_range, 101))))
        fpp *= SUP_INFLATION
        if eps > 0:
            k_const = float(fpp * sup_dx[0])
        else:
            k_const = float(fpp * max(sup_val[0], sup_dx[0]))
        growth = float(np.exp(8.0 * k_const * t_final))
        constants = {"K": k_const}
    elif cls == NONLINEAR_WAVE:
        if problem.potential is None:
            raise ValueError("nonlinear wave problems need potential data")
        ugrid = np.linspace(*u_range, 101)
        c_w = 2.0 * float(np.min(problem.potential.d2w(ugrid))) / SUP_INFLATION
        c_big = 2.0 * float(np.max(np.abs(problem.potential.d3w(ugrid)))) * SUP_INFLATION
        if c_w <= 0:
            raise ValueError("potential not convex on the sampled state range")
        growth = float(np.exp(c_big * t_final * sup_dx[1]))
        constants = {"c_W": c_w, "C_W": c_big}
        extra = {
            "c_W": c_w,
            "init_potential": init_potential,
            "init_v_sq": init_v_sq,
            "r1_u_weighted_sq": r1_wu_time**2,
            "r1_v_sq": r1_comp_time[1] ** 2,
            "fgap_u_sq": float(fgap_comp[0] ** 2),
            "fgap_v_sq": float(fgap_comp[1] ** 2),
        }

    total = _total_bound(
        cls, eps, t_final,
        init_sq=init_error**2,
        r1_sq=r1_time**2,
        theta_sq=th_tot_sq,
        fgap_sq=final_gap**2,
        egap_sq=egap_sq,
        growth=growth,
        extra=extra,
    )
    combo = _true_error_combo(
        cls, eps,
        err_sq=err_all**2,
        err_comp_sq=err_comp**2,
        energy_sq=true_energy_sq,
        extra=extra,
    )
    effectivity = float(np.sqrt(total) / np.sqrt(combo)) if combo > 0 else np.inf

    return EstimatorReport(
        problem=problem.name,
        problem_class=cls,
        epsilon=eps,
        t_final=t_final,
        r1_norm=r1_time,
        r1_components=r1_comp_time,
        r1_entropy_weighted=r1_wu_time,
        theta1=float(np.sqrt(th1_sq)),
        theta2=float(np.sqrt(th2_sq)),
        theta3=float(np.sqrt(th3_sq)),
        theta_total=float(np.sqrt(th_tot_sq)),
        init_error=init_error,
        init_potential=init_potential,
        init_v_error=float(np.sqrt(init_v_sq)),
        final_gap=float(final_gap),
        final_gap_components=fgap_comp,
        energy_gap=float(np.sqrt(egap_sq)),
        growth_factor=growth,
        entropy_constants=constants,
        total_bound=float(total),
        true_error_linf_l2=err_all,
        true_error_components=err_comp,
        true_error_energy=float(np.sqrt(true_energy_sq)),
        true_error_combo=float(np.sqrt(combo)),
        effectivity=effectivity,
        mass_drift=traj.mass_drift(),
        sup_dx_st=sup_dx,
    )
