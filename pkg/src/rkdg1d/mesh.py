"""Meshes of the periodic interval and Gauss-Legendre quadrature."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Default bound on h_max / h_min accepted at mesh construction.
DEFAULT_MESH_REGULARITY = 20.0


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on the reference interval [-1, 1]."""

    points: np.ndarray
    weights: np.ndarray

    @classmethod
    def gauss(cls, n: int) -> "QuadratureRule":
        if n < 1:
            raise ValueError(f"quadrature rule needs at least one point, got {n}")
        pts, wts = np.polynomial.legendre.leggauss(n)
        return cls(points=pts, weights=wts)

    @property
    def n(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Mesh1D:
    """Partition of an interval into M elements, optionally periodic.

    Element k is (nodes[k], nodes[k+1]) with size h_{k+1/2} = element_sizes[k].
    The node size h_k = (h_{k-1/2} + h_{k+1/2}) / 2 wraps periodically; nodes
    are indexed 0..M-1 with node 0 identified with node M on periodic meshes.
    """

    nodes: np.ndarray
    periodic: bool = True
    regularity_bound: float = DEFAULT_MESH_REGULARITY
    element_sizes: np.ndarray = field(init=False)
    node_sizes: np.ndarray = field(init=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 2:
            raise ValueError("mesh needs at least two nodes")
        h = np.diff(nodes)
        if np.any(h <= 0.0):
            raise ValueError("mesh nodes must be strictly increasing")
        if h.max() / h.min() > self.regularity_bound:
            raise ValueError(
                f"mesh regularity violated: h_max/h_min = {h.max() / h.min():.3g} "
                f"> {self.regularity_bound}"
            )
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "element_sizes", h)
        if self.periodic:
            h_prev = np.roll(h, 1)
        else:
            # one-sided sizes at the boundary nodes of a non-periodic mesh
            h_prev = np.concatenate([[h[0]], h[:-1]])
        object.__setattr__(self, "node_sizes", 0.5 * (h + h_prev))

    @property
    def n_elements(self) -> int:
        return len(self.element_sizes)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.nodes[0]), float(self.nodes[-1])

    @property
    def length(self) -> float:
        return float(self.nodes[-1] - self.nodes[0])

    @property
    def h_max(self) -> float:
        return float(self.element_sizes.max())

    @property
    def h_min(self) -> float:
        return float(self.element_sizes.min())

    def element_of(self, x: np.ndarray | float) -> np.ndarray:
        """Index of the element containing each x (right-open convention)."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any(x < lo) or np.any(x > hi):
            raise ValueError("coordinate outside mesh domain")
        idx = np.searchsorted(self.nodes, x, side="right") - 1
        return np.clip(idx, 0, self.n_elements - 1)

    def to_reference(self, x: np.ndarray, elem: np.ndarray) -> np.ndarray:
        """Map physical coordinates to [-1, 1] on their elements."""
        xl = self.nodes[elem]
        h = self.element_sizes[elem]
        return 2.0 * (np.asarray(x) - xl) / h - 1.0


def build_uniform_mesh(
    n_elements: int,
    domain: tuple[float, float] = (0.0, 2.0 * np.pi),
    periodic: bool = True,
) -> Mesh1D:
    """Uniform partition of `domain` into `n_elements` equal elements."""
    if n_elements < 2:
        raise ValueError(f"need at least 2 elements, got {n_elements}")
    a, b = float(domain[0]), float(domain[1])
    if not b > a:
        raise ValueError(f"empty domain [{a}, {b}]")
    nodes = np.linspace(a, b, n_elements + 1)
    return Mesh1D(nodes=nodes, periodic=periodic)
