"""Built-in convection-diffusion test problems with manufactured solutions.

All problems live on the periodic interval [0, 2*pi].  Each spec bundles the
flux, its Jacobian, the diagonal diffusion mask, the exact solution, and the
manufactured source.  State arrays carry a trailing component axis even for
scalar problems.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

LINEAR_SCALAR = "linear-scalar"
NONLINEAR_SCALAR = "nonlinear-scalar"
LINEAR_SYSTEM = "linear-system"
LINEAR_WAVE = "linear-wave"
NONLINEAR_WAVE = "nonlinear-wave"


@dataclass(frozen=True)
class WavePotential:
    """Potential W of a nonlinear wave flux (-v, -W'(u)) and its derivatives."""

    w: Callable
    dw: Callable
    d2w: Callable
    d3w: Callable


@dataclass(frozen=True)
class ProblemSpec:
    """A convection-diffusion system with a known exact solution."""

    name: str
    n_components: int
    problem_class: str
    epsilon: float
    flux: Callable
    flux_jac: Callable
    diffusion_mask: tuple[bool, ...]
    exact: Callable                      # exact(t, x) -> (..., m)
    exact_dx: Callable                   # x-derivative of the exact solution
    source: Callable | None = None       # source(t, x) -> (..., m)
    flux_hessian: Callable | None = None  # scalar problems: f''(u), same shape as u
    potential: WavePotential | None = None

    def initial(self, x):
        return self.exact(0.0, x)


def linear_advection_diffusion(epsilon: float) -> ProblemSpec:
    """u_t + u_x - eps u_xx = 0 with exact solution exp(-eps t) sin(x - t)."""

    def flux(u):
        return np.asarray(u, dtype=float).copy()

    def flux_jac(u):
        u = np.asarray(u, dtype=float)
        return np.ones(u.shape + (1,))

    def exact(t, x):
        x = np.asarray(x, dtype=float)
        return (np.exp(-epsilon * t) * np.sin(x - t))[..., None]

    def exact_dx(t, x):
        x = np.asarray(x, dtype=float)
        return (np.exp(-epsilon * t) * np.cos(x - t))[..., None]

    return ProblemSpec(
        name="linear_advection_diffusion",
        n_components=1,
        problem_class=LINEAR_SCALAR,
        epsilon=epsilon,
        flux=flux,
        flux_jac=flux_jac,
        diffusion_mask=(True,),
        exact=exact,
        exact_dx=exact_dx,
        flux_hessian=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
    )


def viscous_burgers(epsilon: float) -> ProblemSpec:
    """u_t + u u_x - eps u_xx = g with exact solution A(t) sin(x - t).

    A(t) = 1 + 0.1 sin(4 pi t); the source g balances the manufactured
    solution exactly.
    """

    def flux(u):
        u = np.asarray(u, dtype=float)
        return 0.5 * u**2

    def flux_jac(u):
        u = np.asarray(u, dtype=float)
        return u[..., None]

    def amplitude(t):
        return 1.0 + 0.1 * np.sin(4.0 * np.pi * t)

    def exact(t, x):
        x = np.asarray(x, dtype=float)
        return (amplitude(t) * np.sin(x - t))[..., None]

    def exact_dx(t, x):
        x = np.asarray(x, dtype=float)
        return (amplitude(t) * np.cos(x - t))[..., None]

    def source(t, x):
        x = np.asarray(x, dtype=float)
        a = amplitude(t)
        da = 0.4 * np.pi * np.cos(4.0 * np.pi * t)
        s, c = np.sin(x - t), np.cos(x - t)
        g = da * s - a * c + a**2 * s * c + epsilon * a * s
        return g[..., None]

    return ProblemSpec(
        name="viscous_burgers",
        n_components=1,
        problem_class=NONLINEAR_SCALAR,
        epsilon=epsilon,
        flux=flux,
        flux_jac=flux_jac,
        diffusion_mask=(True,),
        exact=exact,
        exact_dx=exact_dx,
        source=source,
        flux_hessian=lambda u: np.ones_like(np.asarray(u, dtype=float)),
    )


def nonlinear_wave(epsilon: float, gamma: float = 1.4) -> ProblemSpec:
    """p-system-type wave equation with viscosity on the velocity component.

    States (u, v) with flux (-v, -W'(u)), W'(u) = -u^(-gamma), and diffusion
    eps * v_xx in the second equation only.  The manufactured solution is
    u = 2 + 0.2 sin(2x - t), v = 1 + 0.3 cos(x + 2t).
    """

    def dw(u):
        return -np.asarray(u, dtype=float) ** (-gamma)

    def d2w(u):
        return gamma * np.asarray(u, dtype=float) ** (-gamma - 1.0)

    def d3w(u):
        return -gamma * (gamma + 1.0) * np.asarray(u, dtype=float) ** (-gamma - 2.0)

    def w(u):
        return np.asarray(u, dtype=float) ** (1.0 - gamma) / (gamma - 1.0)

    def flux(state):
        state = np.asarray(state, dtype=float)
        u, v = state[..., 0], state[..., 1]
        return np.stack([-v, -dw(u)], axis=-1)

    def flux_jac(state):
        state = np.asarray(state, dtype=float)
        u = state[..., 0]
        jac = np.zeros(state.shape[:-1] + (2, 2))
        jac[..., 0, 1] = -1.0
        jac[..., 1, 0] = -d2w(u)
        return jac

    def exact(t, x):
        x = np.asarray(x, dtype=float)
        u = 2.0 + 0.2 * np.sin(2.0 * x - t)
        v = 1.0 + 0.3 * np.cos(x + 2.0 * t)
        return np.stack([u, v], axis=-1)

    def exact_dx(t, x):
        x = np.asarray(x, dtype=float)
        du = 0.4 * np.cos(2.0 * x - t)
        dv = -0.3 * np.sin(x + 2.0 * t)
        return np.stack([du, dv], axis=-1)

    def source(t, x):
        x = np.asarray(x, dtype=float)
        u = 2.0 + 0.2 * np.sin(2.0 * x - t)
        g1 = -0.2 * np.cos(2.0 * x - t) + 0.3 * np.sin(x + 2.0 * t)
        g2 = (
            -0.6 * np.sin(x + 2.0 * t)
            - 0.4 * gamma * u ** (-gamma - 1.0) * np.cos(2.0 * x - t)
            + 0.3 * epsilon * np.cos(x + 2.0 * t)
        )
        return np.stack([g1, g2], axis=-1)

    return ProblemSpec(
        name="nonlinear_wave",
        n_components=2,
        problem_class=NONLINEAR_WAVE,
        epsilon=epsilon,
        flux=flux,
        flux_jac=flux_jac,
        diffusion_mask=(False, True),
        exact=exact,
        exact_dx=exact_dx,
        source=source,
        potential=WavePotential(w=w, dw=dw, d2w=d2w, d3w=d3w),
    )


_BUILDERS = {
    "linear_advection_diffusion": linear_advection_diffusion,
    "viscous_burgers": viscous_burgers,
    "nonlinear_wave": nonlinear_wave,
}


def problem_names() -> list[str]:
    return sorted(_BUILDERS)


def get_problem(name: str, epsilon: float, **kwargs) -> ProblemSpec:
    """Build a registered problem by name for the given diffusion strength."""
    key = name.replace("-", "_")
    try:
        builder = _BUILDERS[key]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; known: {problem_names()}") from None
    return builder(epsilon, **kwargs)
