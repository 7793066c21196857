"""Piecewise polynomial dG functions in an element-orthonormal Legendre basis.

The basis on element k with size h is phi_j(x) = sqrt((2j+1)/h) * P_j(xi(x)),
xi the affine map of the element onto [-1, 1].  It is orthonormal in the
element L2 inner product, so the mass matrix is the identity and the squared
L2 norm of a dG function is the plain sum of squared coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mesh import Mesh1D, QuadratureRule


def ref_basis_values(q: int, xi: np.ndarray) -> np.ndarray:
    """Orthonormal Legendre values sqrt((2j+1)/2) P_j(xi), shape (len(xi), q+1)."""
    xi = np.asarray(xi, dtype=float)
    vand = np.polynomial.legendre.legvander(xi, q)
    scale = np.sqrt((2.0 * np.arange(q + 1) + 1.0) / 2.0)
    return vand * scale


def ref_basis_derivs(q: int, xi: np.ndarray) -> np.ndarray:
    """d/dxi of the orthonormal reference basis, shape (len(xi), q+1)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.zeros((len(xi), q + 1))
    for j in range(1, q + 1):
        dcoef = np.polynomial.legendre.legder(np.eye(q + 1)[j])
        out[:, j] = np.polynomial.legendre.legval(xi, dcoef)
    scale = np.sqrt((2.0 * np.arange(q + 1) + 1.0) / 2.0)
    return out * scale


@lru_cache(maxsize=64)
def _gauss_tables(q: int, n: int):
    """Reference quadrature and basis tables for degree q with n Gauss points."""
    rule = QuadratureRule.gauss(n)
    vals = ref_basis_values(q, rule.points)
    ders = ref_basis_derivs(q, rule.points)
    ends = ref_basis_values(q, np.array([-1.0, 1.0]))
    dends = ref_basis_derivs(q, np.array([-1.0, 1.0]))
    return rule, vals, ders, ends, dends


def default_quadrature(q: int) -> QuadratureRule:
    """The module-wide Gauss rule: q+3 points per element."""
    return _gauss_tables(q, q + 3)[0]


@dataclass(frozen=True)
class DGFunction:
    """A member of the broken polynomial space (V_q^s)^m.

    coeffs has shape (M, q+1, m): element x basis index x component.
    """

    mesh: Mesh1D
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.mesh.n_elements, self.degree + 1, self.n_components):
            raise ValueError(f"bad coefficient shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_components(self) -> int:
        return self.coeffs.shape[2]

    @classmethod
    def zeros(cls, mesh: Mesh1D, degree: int, n_components: int = 1) -> "DGFunction":
        return cls(mesh, degree, np.zeros((mesh.n_elements, degree + 1, n_components)))

    # -- elementwise evaluation on quadrature grids -------------------------

    def _scale(self) -> np.ndarray:
        # physical-basis scale factor sqrt(2/h) per element
        return np.sqrt(2.0 / self.mesh.element_sizes)[:, None, None]

    def values_at(self, xi: np.ndarray) -> np.ndarray:
        """Values at reference points xi on every element, shape (M, len(xi), m)."""
        basis = ref_basis_values(self.degree, xi)
        return np.einsum("pj,ejc->epc", basis, self.coeffs) * self._scale()

    def derivs_at(self, xi: np.ndarray) -> np.ndarray:
        """x-derivative at reference points xi on every element, (M, len(xi), m)."""
        basis = ref_basis_derivs(self.degree, xi)
        vals = np.einsum("pj,ejc->epc", basis, self.coeffs) * self._scale()
        return vals * (2.0 / self.mesh.element_sizes)[:, None, None]

    def traces(self) -> tuple[np.ndarray, np.ndarray]:
        """One-sided limits at element endpoints: (left_end, right_end), (M, m)."""
        ends = ref_basis_values(self.degree, np.array([-1.0, 1.0]))
        v = np.einsum("pj,ejc->epc", ends, self.coeffs) * self._scale()
        return v[:, 0, :], v[:, 1, :]

    def deriv_traces(self) -> tuple[np.ndarray, np.ndarray]:
        """x-derivative one-sided limits at element endpoints, (M, m) each."""
        dends = ref_basis_derivs(self.degree, np.array([-1.0, 1.0]))
        v = np.einsum("pj,ejc->epc", dends, self.coeffs) * self._scale()
        v = v * (2.0 / self.mesh.element_sizes)[:, None, None]
        return v[:, 0, :], v[:, 1, :]

    # -- interface quantities ----------------------------------------------

    def node_jumps(self) -> np.ndarray:
        """Jumps f(x_i^-) - f(x_i^+) at all M periodic nodes, shape (M, m)."""
        left_end, right_end = self.traces()
        return np.roll(right_end, 1, axis=0) - left_end

    def node_avgs(self) -> np.ndarray:
        left_end, right_end = self.traces()
        return 0.5 * (np.roll(right_end, 1, axis=0) + left_end)

    def node_deriv_jumps(self) -> np.ndarray:
        dl, dr = self.deriv_traces()
        return np.roll(dr, 1, axis=0) - dl

    def jump_avg(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """(jump, average) at periodic node i."""
        if not self.mesh.periodic:
            raise ValueError("jump_avg requires a periodic mesh")
        i = i % self.mesh.n_elements
        return self.node_jumps()[i], self.node_avgs()[i]

    # -- pointwise evaluation ----------------------------------------------

    def eval(self, x, side: str = "interior") -> np.ndarray:
        """Evaluate at physical coordinates; `side` picks the trace at nodes.

        side="left" evaluates on the element left of x when x is a node
        (periodic wrap at the domain ends); "right"/"interior" use the
        element to the right.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.mesh.domain
        if np.any(x < lo) or np.any(x > hi):
            raise ValueError("evaluation point outside domain")
        if side == "left":
            elem = np.searchsorted(self.mesh.nodes, x, side="left") - 1
            if self.mesh.periodic:
                elem = np.where(elem < 0, self.mesh.n_elements - 1, elem)
                x = np.where(elem == self.mesh.n_elements - 1,
                             np.where(np.isclose(x, lo), hi, x), x)
            elem = np.clip(elem, 0, self.mesh.n_elements - 1)
        elif side in ("right", "interior"):
            elem = self.mesh.element_of(x)
        else:
            raise ValueError(f"unknown side {side!r}")
        xi = self.mesh.to_reference(x, elem)
        basis = ref_basis_values(self.degree, xi)  # (npts, q+1)
        scale = np.sqrt(2.0 / self.mesh.element_sizes[elem])
        out = np.einsum("pj,pjc->pc", basis, self.coeffs[elem]) * scale[:, None]
        return out

    # -- norms and algebra --------------------------------------------------

    def l2_norm(self) -> float:
        """L2 norm over the domain; exact by orthonormality."""
        return float(np.sqrt(np.sum(self.coeffs**2)))

    def component_l2_norms(self) -> np.ndarray:
        return np.sqrt(np.sum(self.coeffs**2, axis=(0, 1)))

    def integral(self) -> np.ndarray:
        """Componentwise integral over the domain."""
        # only the constant mode integrates to a nonzero value:
        # integral of phi_0 = sqrt(1/h) * h = sqrt(h)
        sqrt_h = np.sqrt(self.mesh.element_sizes)
        return np.einsum("e,ec->c", sqrt_h, self.coeffs[:, 0, :])

    def __add__(self, other: "DGFunction") -> "DGFunction":
        self._check_compatible(other)
        return DGFunction(self.mesh, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: "DGFunction") -> "DGFunction":
        self._check_compatible(other)
        return DGFunction(self.mesh, self.degree, self.coeffs - other.coeffs)

    def __mul__(self, a: float) -> "DGFunction":
        return DGFunction(self.mesh, self.degree, self.coeffs * float(a))

    __rmul__ = __mul__

    def _check_compatible(self, other: "DGFunction"):
        if other.mesh is not self.mesh and not np.array_equal(
            other.mesh.nodes, self.mesh.nodes
        ):
            raise ValueError("mesh mismatch")
        if other.degree != self.degree or other.n_components != self.n_components:
            raise ValueError("degree/component mismatch")


def quad_points(mesh: Mesh1D, rule: QuadratureRule) -> np.ndarray:
    """Physical quadrature points, shape (M, n)."""
    xl = mesh.nodes[:-1][:, None]
    h = mesh.element_sizes[:, None]
    return xl + 0.5 * h * (rule.points[None, :] + 1.0)


def l2_project(
    g,
    mesh: Mesh1D,
    degree: int,
    n_components: int = 1,
    rule: QuadratureRule | None = None,
) -> DGFunction:
    """L2 projection of a pointwise function onto (V_q^s)^m.

    `g` maps an array of coordinates (shape (...,)) to values of shape
    (..., m) (an extra trailing axis is added for scalar-valued g).
    """
    if rule is None:
        rule = default_quadrature(degree)
    xq = quad_points(mesh, rule)
    gv = np.asarray(g(xq), dtype=float)
    if gv.shape == xq.shape:
        gv = gv[..., None]
    if gv.shape != (*xq.shape, n_components):
        raise ValueError(f"projected function returned shape {gv.shape}")
    basis = ref_basis_values(degree, rule.points)  # (n, q+1)
    h = mesh.element_sizes
    # int g phi_j dx = (h/2) sum_p w_p g(x_p) sqrt(2/h) ref_j(xi_p)
    w = rule.weights[:, None] * basis  # (n, q+1)
    coeffs = np.einsum("epc,pj->ejc", gv, w) * np.sqrt(h / 2.0)[:, None, None]
    return DGFunction(mesh, degree, coeffs)


def l2_error(f: DGFunction, g, rule: QuadratureRule | None = None) -> np.ndarray:
    """Componentwise L2 distance between a dG function and a pointwise one."""
    if rule is None:
        rule = default_quadrature(f.degree + 1)
    xq = quad_points(f.mesh, rule)
    gv = np.asarray(g(xq), dtype=float)
    if gv.shape == xq.shape:
        gv = gv[..., None]
    fv = f.values_at(rule.points)
    d2 = (fv - gv) ** 2
    h = f.mesh.element_sizes
    integ = np.einsum("epc,p->c", d2 * (h / 2.0)[:, None, None], rule.weights)
    return np.sqrt(integ)
