"""Space-time reconstructions of the discrete trajectory.

Two stages:

* a temporal reconstruction, piecewise cubic Hermite in time on each step,
  matching the discrete states and the full semidiscrete RHS at the time
  nodes, with values in the same broken space V_q;
* a spatial lift of each time slice into the continuous subspace of
  V_{q+1}: low modes keep their moments, and the two extra degrees of
  freedom per element are fixed by making the function single valued at
  the element interfaces with value w(a, b), the intermediate state of
  the numerical flux.
"""

from __future__ import annotations

import numpy as np

from .dgfunction import DGFunction
from .operators import SpatialOperators
from .stepping import Trajectory


class TemporalReconstruction:
    """C1 piecewise-cubic interpolant of the trajectory in time.

    On [t_n, t_n+1] with s = t - t_n the interpolant is
    c0 + s c1 + s^2 c2 + s^3 c3 with dG-function coefficients chosen so
    that values and time derivatives match (u_n, F_n) and (u_n+1, F_n+1),
    F the cached semidiscrete RHS.
    """

    def __init__(self, traj: Trajectory):
        self.traj = traj
        self.times = traj.times
        self._c = []
        for n in range(traj.n_steps):
            tau = traj.times[n + 1] - traj.times[n]
            u0, u1 = traj.states[n].coeffs, traj.states[n + 1].coeffs
            f0, f1 = traj.rhs[n].coeffs, traj.rhs[n + 1].coeffs
            du = u1 - u0
            c2 = (3.0 * du - tau * (2.0 * f0 + f1)) / tau**2
            c3 = (-2.0 * du + tau * (f0 + f1)) / tau**3
            self._c.append((u0, f0, c2, c3))

    def interval_of(self, t: float) -> int:
        t0, t1 = self.times[0], self.times[-1]
        if not (t0 <= t <= t1 + 1e-12 * max(1.0, abs(t1))):
            raise ValueError(f"time {t} outside trajectory range [{t0}, {t1}]")
        n = int(np.searchsorted(self.times, t, side="right")) - 1
        return min(max(n, 0), len(self._c) - 1)

    def eval(self, t: float) -> DGFunction:
        n = self.interval_of(t)
        s = t - self.times[n]
        c0, c1, c2, c3 = self._c[n]
        coeffs = c0 + s * (c1 + s * (c2 + s * c3))
        tr = self.traj
        return DGFunction(tr.ops.mesh, tr.ops.degree, coeffs)

    def dt(self, t: float) -> DGFunction:
        """Time derivative of the interpolant."""
        n = self.interval_of(t)
        s = t - self.times[n]
        _, c1, c2, c3 = self._c[n]
        coeffs = c1 + s * (2.0 * c2 + 3.0 * s * c3)
        tr = self.traj
        return DGFunction(tr.ops.mesh, tr.ops.degree, coeffs)


class SpaceTimeReconstruction:
    """Continuous-in-space lift of the temporal reconstruction into V_{q+1}.

    Requires degree q >= 1.  The lift of a slice v keeps the moments of v
    against polynomials of degree <= q-1 and interpolates the interface
    state w(v(x_i^-), v(x_i^+)) at both element endpoints, which makes it
    globally continuous.  Its time derivative follows by the chain rule,
    using the same linear construction on dv/dt with endpoint data dw/dt.
    """

    def __init__(self, traj: Trajectory):
        if traj.ops.degree < 1:
            raise ValueError("spatial reconstruction requires degree >= 1")
        self.traj = traj
        self.ops: SpatialOperators = traj.ops
        self.temporal = TemporalReconstruction(traj)
        mesh = self.ops.mesh
        q = self.ops.degree
        # per-element physical basis scales s_j = sqrt((2j+1)/h), j = 0..q+1
        j = np.arange(q + 2)
        self._s = np.sqrt((2.0 * j + 1.0)[None, :] / mesh.element_sizes[:, None])
        self._signs = (-1.0) ** j

    def lift(self, v: DGFunction, w_nodes: np.ndarray) -> DGFunction:
        """Lift a V_q slice into V_{q+1} given interface values w_nodes (M, m)."""
        mesh, q = self.ops.mesh, self.ops.degree
        M, m = mesh.n_elements, v.n_components
        out = np.zeros((M, q + 2, m))
        out[:, :q, :] = v.coeffs[:, :q, :]

        s, sg = self._s, self._signs
        low = out[:, :q, :]
        k_r = np.einsum("ejc,ej->ec", low, s[:, :q])
        k_l = np.einsum("ejc,ej->ec", low, s[:, :q] * sg[None, :q])
        b_l = w_nodes - k_l                       # left endpoint of element e is node e
        b_r = np.roll(w_nodes, -1, axis=0) - k_r  # right endpoint is node e+1

        if q % 2 == 0:
            out[:, q, :] = (b_l + b_r) / (2.0 * s[:, q][:, None])
            out[:, q + 1, :] = (b_r - b_l) / (2.0 * s[:, q + 1][:, None])
        else:
            out[:, q, :] = (b_r - b_l) / (2.0 * s[:, q][:, None])
            out[:, q + 1, :] = (b_l + b_r) / (2.0 * s[:, q + 1][:, None])
        return DGFunction(mesh, q + 1, out)

    def eval(self, t: float) -> DGFunction:
        v = self.temporal.eval(t)
        a, b = self.ops.node_states(v)
        return self.lift(v, self.ops.w(a, b))

    def dt(self, t: float) -> DGFunction:
        v = self.temporal.eval(t)
        vdot = self.temporal.dt(t)
        a, b = self.ops.node_states(v)
        da, db = self.ops.node_states(vdot)
        return self.lift(vdot, self.ops.w_dt(a, b, da, db))
