"""Numerical fluxes, discrete convection and interior-penalty diffusion operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dgfunction import (
    DGFunction,
    default_quadrature,
    ref_basis_derivs,
    ref_basis_values,
)
from .mesh import Mesh1D, QuadratureRule

LAX_WENDROFF = "lax-wendroff"
LAX_FRIEDRICHS = "lax-friedrichs"


@dataclass(frozen=True)
class FluxScheme:
    """Numerical flux family and its grid-ratio parameter lambda."""

    kind: str = LAX_WENDROFF
    lam: float = 1.0

    def __post_init__(self):
        if self.kind not in (LAX_WENDROFF, LAX_FRIEDRICHS):
            raise ValueError(f"unknown flux scheme {self.kind!r}")
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError("lambda must be finite and positive")


@dataclass(frozen=True)
class DiffusionConfig:
    """Constant diagonal diffusion: epsilon * mask, with SIP penalty sigma."""

    epsilon: float = 0.0
    mask: tuple[bool, ...] = (True,)
    sigma: float | None = None  # defaults to 10 q^2 in SpatialOperators

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.sigma is not None and self.sigma <= 0 and any(self.mask):
            raise ValueError("sigma must be positive for diffusing components")

    @property
    def active(self) -> bool:
        return self.epsilon > 0 and any(self.mask)

    def masked_components(self) -> list[int]:
        return [c for c, on in enumerate(self.mask) if on]


def flux_w(a, b, scheme: FluxScheme, f: Callable) -> np.ndarray:
    """Intermediate interface state w(a, b) of the numerical flux."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if scheme.kind == LAX_WENDROFF:
        return 0.5 * (a + b) - 0.5 * scheme.lam * (f(b) - f(a))
    return 0.5 * (a + b)


def flux_w_dt(a, b, da, db, scheme: FluxScheme, df: Callable) -> np.ndarray:
    """Time derivative of w(a(t), b(t)) by the chain rule.

    df maps states (..., m) to Jacobians (..., m, m).
    """
    da = np.asarray(da, dtype=float)
    db = np.asarray(db, dtype=float)
    if scheme.kind == LAX_WENDROFF:
        ja = np.einsum("...ij,...j->...i", df(np.asarray(a, dtype=float)), da)
        jb = np.einsum("...ij,...j->...i", df(np.asarray(b, dtype=float)), db)
        return 0.5 * (da + db) - 0.5 * scheme.lam * (jb - ja)
    return 0.5 * (da + db)


def numerical_flux_F(a, b, scheme: FluxScheme, f: Callable) -> np.ndarray:
    """Single-valued interface flux F(a, b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if scheme.kind == LAX_WENDROFF:
        return f(flux_w(a, b, scheme, f))
    return 0.5 * (f(a) + f(b)) - scheme.lam * (b - a)


class SpatialOperators:
    """Discrete convection and diffusion operators on a fixed mesh and degree.

    Bundles the flux callables of one problem with the mesh-dependent tables:
    quadrature, basis values, the assembled SIP matrix, and a cache of
    factorized implicit-stage systems.
    """

    def __init__(
        self,
        mesh: Mesh1D,
        degree: int,
        n_components: int,
        flux: Callable,
        flux_jac: Callable,
        scheme: FluxScheme,
        diff: DiffusionConfig,
    ):
        if len(diff.mask) != n_components:
            raise ValueError("diffusion mask length must match component count")
        self.mesh = mesh
        self.degree = degree
        self.n_components = n_components
        self.flux = flux
        self.flux_jac = flux_jac
        self.scheme = scheme
        sigma = diff.sigma if diff.sigma is not None else 10.0 * max(degree, 1) ** 2
        self.diff = DiffusionConfig(diff.epsilon, diff.mask, sigma)
        self.rule = default_quadrature(degree)
        self._basis_q = ref_basis_values(degree, self.rule.points)
        self._dbasis_q = ref_basis_derivs(degree, self.rule.points)
        self._sip = self._assemble_sip() if any(diff.mask) else None
        self._solver_cache: dict[float, spla.SuperLU] = {}

    # -- convection ---------------------------------------------------------

    def w(self, a, b):
        return flux_w(a, b, self.scheme, self.flux)

    def w_dt(self, a, b, da, db):
        return flux_w_dt(a, b, da, db, self.scheme, self.flux_jac)

    def numerical_flux(self, a, b):
        return numerical_flux_F(a, b, self.scheme, self.flux)

    def node_states(self, u: DGFunction) -> tuple[np.ndarray, np.ndarray]:
        """Left/right traces (u(x_i^-), u(x_i^+)) at all M periodic nodes."""
        left_end, right_end = u.traces()
        return np.roll(right_end, 1, axis=0), left_end

    def apply_fh(self, u: DGFunction) -> DGFunction:
        """Discrete convection operator: weak divergence of the flux."""
        h = self.mesh.element_sizes
        fq = self.flux(u.values_at(self.rule.points))  # (M, n, m)
        vol = -np.einsum("p,pj,epc->ejc", self.rule.weights, self._dbasis_q, fq)
        vol *= np.sqrt(2.0 / h)[:, None, None]

        a_states, b_states = self.node_states(u)
        f_nodes = self.numerical_flux(a_states, b_states)  # (M, m)
        f_right = np.roll(f_nodes, -1, axis=0)  # flux at right end of each element

        ends = ref_basis_values(self.degree, np.array([-1.0, 1.0]))
        scale = np.sqrt(2.0 / h)
        tl = ends[0] * scale[:, None]  # (M, q+1)
        tr = ends[1] * scale[:, None]
        iface = f_right[:, None, :] * tr[:, :, None] - f_nodes[:, None, :] * tl[:, :, None]
        return DGFunction(self.mesh, self.degree, vol + iface)

    # -- diffusion ----------------------------------------------------------

    def _assemble_sip(self) -> sp.csr_matrix:
        """SIP bilinear form matrix S with <A_h u, psi> = -psi^T S u."""
        mesh, q = self.mesh, self.degree
        M, nb = mesh.n_elements, q + 1
        h = mesh.element_sizes
        sigma = self.diff.sigma

        rule = QuadratureRule.gauss(q + 3)
        dref = ref_basis_derivs(q, rule.points)
        k_ref = np.einsum("p,pi,pj->ij", rule.weights, dref, dref)

        ends = ref_basis_values(q, np.array([-1.0, 1.0]))
        dends = ref_basis_derivs(q, np.array([-1.0, 1.0]))

        rows, cols, vals = [], [], []

        def add_block(ei, ej, block):
            r, c = np.meshgrid(np.arange(nb), np.arange(nb), indexing="ij")
            rows.append((ei * nb + r).ravel())
            cols.append((ej * nb + c).ravel())
            vals.append(block.ravel())

        for e in range(M):
            add_block(e, e, (4.0 / h[e] ** 2) * k_ref)

        for i in range(M):
            a = (i - 1) % M  # element left of node i
            b = i
            tr_a = np.sqrt(2.0 / h[a]) * ends[1]
            tl_b = np.sqrt(2.0 / h[b]) * ends[0]
            dtr_a = (2.0 / h[a]) * np.sqrt(2.0 / h[a]) * dends[1]
            dtl_b = (2.0 / h[b]) * np.sqrt(2.0 / h[b]) * dends[0]
            hi = mesh.node_sizes[i]

            # sparse jump and average-gradient functionals over (a, b) dofs
            elems = [a, b]
            jv = [tr_a, -tl_b]
            gv = [0.5 * dtr_a, 0.5 * dtl_b]
            for ei, vi in zip(elems, jv):
                for ej, vj in zip(elems, gv):
                    add_block(ei, ej, -np.outer(vi, vj))  # -J(psi) G(u)
                    add_block(ej, ei, -np.outer(vj, vi))  # -J(u) G(psi), transposed
            for ei, vi in zip(elems, jv):
                for ej, vj in zip(elems, jv):
                    add_block(ei, ej, (sigma / hi) * np.outer(vi, vj))

        n = M * nb
        s_mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        ).tocsr()
        return s_mat

    def apply_Ah(self, u: DGFunction) -> DGFunction:
        """Interior-penalty diffusion operator (without the epsilon factor)."""
        out = np.zeros_like(u.coeffs)
        if self._sip is None:
            return DGFunction(self.mesh, self.degree, out)
        M, nb = self.mesh.n_elements, self.degree + 1
        for c in self.diff.masked_components():
            vec = u.coeffs[:, :, c].ravel()
            out[:, :, c] = (-(self._sip @ vec)).reshape(M, nb)
        return DGFunction(self.mesh, self.degree, out)

    def implicit_solve(self, rhs: DGFunction, c: float) -> DGFunction:
        """Solve (Id - c * A_h) u = rhs; identity on non-diffusing components."""
        if c == 0.0 or self._sip is None:
            return rhs
        out = rhs.coeffs.copy()
        lu = self._solver_cache.get(c)
        if lu is None:
            n = self._sip.shape[0]
            lu = spla.splu((sp.identity(n, format="csc") + c * self._sip.tocsc()))
            self._solver_cache[c] = lu
        M, nb = self.mesh.n_elements, self.degree + 1
        for comp in self.diff.masked_components():
            out[:, :, comp] = lu.solve(rhs.coeffs[:, :, comp].ravel()).reshape(M, nb)
        return DGFunction(self.mesh, self.degree, out)

    def sip_inner(self, u: DGFunction, v: DGFunction, component: int = 0) -> float:
        """<A_h u, v> for one component (negative semi-definite for default sigma)."""
        if self._sip is None:
            return 0.0
        return float(-v.coeffs[:, :, component].ravel() @ (self._sip @ u.coeffs[:, :, component].ravel()))


# -- dG energy norm ---------------------------------------------------------


def energy_density(f: DGFunction, components: Sequence[int] | None = None) -> float:
    """Broken H1 seminorm squared plus h^-1-weighted squared interface jumps."""
    comps = list(components) if components is not None else list(range(f.n_components))
    rule = default_quadrature(f.degree)
    dv = f.derivs_at(rule.points)[:, :, comps]
    h = f.mesh.element_sizes
    grad_sq = float(np.einsum("p,epc->", rule.weights, dv**2 * (h / 2.0)[:, None, None]))
    jumps = f.node_jumps()[:, comps]
    jump_sq = float(np.sum(jumps**2 / f.mesh.node_sizes[:, None]))
    return grad_sq + jump_sq


def dg_energy_norm(
    v: Callable[[float], DGFunction],
    times: np.ndarray,
    n_time_quad: int,
    components: Sequence[int] | None = None,
) -> float:
    """dG energy norm of t -> v(t) over [times[0], times[-1]].

    Composite Gauss quadrature with n_time_quad points on each subinterval
    of the strictly increasing time grid `times`.
    """
    times = np.asarray(times, dtype=float)
    if len(times) < 2 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing with >= 2 entries")
    trule = QuadratureRule.gauss(n_time_quad)
    total = 0.0
    for t0, t1 in zip(times[:-1], times[1:]):
        tau = t1 - t0
        tq = t0 + 0.5 * tau * (trule.points + 1.0)
        for w, t in zip(trule.weights, tq):
            total += 0.5 * tau * w * energy_density(v(t), components)
    return float(np.sqrt(total))
