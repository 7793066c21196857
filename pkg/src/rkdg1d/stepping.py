"""IMEX Runge-Kutta time stepping of the semidiscrete dG system.

The semidiscrete system is du/dt = G_ex(t, u) + G_im(u) with the convection
and source terms treated explicitly and the (linear, stiff) diffusion term
implicitly.  The generic additive stepper below is shared by the PDE driver
and by scalar test equations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dgfunction import DGFunction, l2_project
from .operators import SpatialOperators
from .tableaus import IMEXTableau, get_tableau


class SimulationDiverged(RuntimeError):
    """Raised when the discrete solution stops being finite."""


def imex_step(u, t: float, tau: float, tab: IMEXTableau, f_ex, f_im, solve_im):
    """One additive Runge-Kutta step for du/dt = f_ex(t, u) + f_im(u).

    `solve_im(rhs, c)` must return the solution of (Id - c * Lin) U = rhs,
    where Lin is the linear operator with f_im(u) = Lin u.  The state type
    only needs addition and scalar multiplication, so this works for dG
    functions and plain floats alike.
    """
    s = tab.n_stages
    fex: list = []
    fim: list = []
    for i in range(s):
        rhs = u
        for j in range(i):
            if tab.a_ex[i, j] != 0.0:
                rhs = rhs + (tau * tab.a_ex[i, j]) * fex[j]
            if tab.a_im[i, j] != 0.0:
                rhs = rhs + (tau * tab.a_im[i, j]) * fim[j]
        stage = solve_im(rhs, tau * tab.a_im[i, i])
        fex.append(f_ex(t + tab.c_ex[i] * tau, stage))
        fim.append(f_im(stage))
    out = u
    for i in range(s):
        if tab.b_ex[i] != 0.0:
            out = out + (tau * tab.b_ex[i]) * fex[i]
        if tab.b_im[i] != 0.0:
            out = out + (tau * tab.b_im[i]) * fim[i]
    return out


@dataclass(frozen=True)
class Trajectory:
    """Discrete solution at the time nodes, with the full semidiscrete RHS.

    rhs[n] caches G_ex(t_n, u_n) + G_im(u_n) (convection, projected source,
    and diffusion together); the reconstructions consume exactly this field.
    """

    times: np.ndarray
    states: tuple[DGFunction, ...]
    rhs: tuple[DGFunction, ...]
    ops: SpatialOperators
    tableau: IMEXTableau

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    def step_sizes(self) -> np.ndarray:
        return np.diff(self.times)

    def mass_drift(self) -> float:
        """Largest componentwise drift of the total integral from its t=0 value."""
        m0 = self.states[0].integral()
        return max(float(np.max(np.abs(u.integral() - m0))) for u in self.states)


def run_simulation(
    ops: SpatialOperators,
    u0: DGFunction,
    t_final: float,
    dt: float,
    tableau: IMEXTableau | None = None,
    source: Callable | None = None,
) -> Trajectory:
    """Advance u0 to t_final with nominal step dt (final step truncated).

    `source(t, x)` is a pointwise forcing term, vectorized in x with a
    trailing component axis; it enters the explicit part through its L2
    projection.
    """
    if t_final <= 0 or dt <= 0:
        raise ValueError("t_final and dt must be positive")
    if tableau is None:
        tableau = get_tableau()
    mesh, q, m = ops.mesh, ops.degree, ops.n_components
    eps = ops.diff.epsilon
    diffusive = ops.diff.active

    def project_source(t: float) -> DGFunction | None:
        if source is None:
            return None
        return l2_project(lambda x: source(t, x), mesh, q, m)

    def f_ex(t: float, u: DGFunction) -> DGFunction:
        out = -1.0 * ops.apply_fh(u)
        g = project_source(t)
        return out if g is None else out + g

    if diffusive:
        f_im = lambda u: eps * ops.apply_Ah(u)
        solve_im = lambda rhs, c: ops.implicit_solve(rhs, c * eps)
    else:
        f_im = lambda u: DGFunction.zeros(mesh, q, m)
        solve_im = lambda rhs, c: rhs

    def full_rhs(t: float, u: DGFunction) -> DGFunction:
        return f_ex(t, u) + f_im(u)

    times = [0.0]
    states = [u0]
    rhs = [full_rhs(0.0, u0)]
    t, u = 0.0, u0
    while t < t_final - 1e-12 * t_final:
        tau = min(dt, t_final - t)
        u = imex_step(u, t, tau, tableau, f_ex, f_im, solve_im)
        t = min(t + tau, t_final)
        if not np.all(np.isfinite(u.coeffs)):
            raise SimulationDiverged(f"non-finite state at t = {t:.6g}")
        times.append(t)
        states.append(u)
        rhs.append(full_rhs(t, u))
    return Trajectory(np.array(times), tuple(states), tuple(rhs), ops, tableau)
