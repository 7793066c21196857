"""Additive (IMEX) Runge-Kutta tableaus and a plain-text tableau file format.

A tableau file consists of labeled blocks::

    ORDER 3
    A_EX
    0
    0.5 0
    ...
    B_EX
    ...

Blocks A_EX / A_IM hold the lower-triangular stage matrices row by row
(one row per line, missing trailing entries are zero), B_EX / B_IM the
weights, C_EX / C_IM the abscissae.  Lines starting with '#' are comments.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np


@dataclass(frozen=True)
class IMEXTableau:
    """An additive Runge-Kutta pair (explicit part, diagonally implicit part)."""

    name: str
    a_ex: np.ndarray
    b_ex: np.ndarray
    c_ex: np.ndarray
    a_im: np.ndarray
    b_im: np.ndarray
    c_im: np.ndarray
    order: int

    def __post_init__(self):
        s = self.n_stages
        for mat in (self.a_ex, self.a_im):
            if mat.shape != (s, s):
                raise ValueError("stage matrices must be square and consistent")
            if np.any(np.abs(np.triu(mat, 1)) > 0):
                raise ValueError("stage matrices must be lower triangular")
        if np.any(np.abs(np.diag(self.a_ex)) > 0):
            raise ValueError("explicit part must have a zero diagonal")
        for vec in (self.b_ex, self.c_ex, self.b_im, self.c_im):
            if vec.shape != (s,):
                raise ValueError("weight/abscissa length must match stage count")
        for a, c in ((self.a_ex, self.c_ex), (self.a_im, self.c_im)):
            if not np.allclose(a.sum(axis=1), c, atol=1e-13):
                raise ValueError("row sums of A must equal c")
        if not (np.isclose(self.b_ex.sum(), 1.0) and np.isclose(self.b_im.sum(), 1.0)):
            raise ValueError("weights must sum to one")

    @property
    def n_stages(self) -> int:
        return len(self.b_ex)

    @property
    def stiffly_accurate(self) -> bool:
        """Last implicit stage row equals the implicit weights."""
        return bool(np.allclose(self.a_im[-1], self.b_im))


def _first_order_tableau() -> IMEXTableau:
    """Forward/backward Euler IMEX pair (one implicit solve per step)."""
    return IMEXTableau(
        name="imex-euler",
        a_ex=np.array([[0.0, 0.0], [1.0, 0.0]]),
        b_ex=np.array([1.0, 0.0]),
        c_ex=np.array([0.0, 1.0]),
        a_im=np.array([[0.0, 0.0], [0.0, 1.0]]),
        b_im=np.array([0.0, 1.0]),
        c_im=np.array([0.0, 1.0]),
        order=1,
    )


def parse_tableau_text(text: str, name: str) -> IMEXTableau:
    """Parse the labeled-block tableau format described in the module docstring."""
    blocks: dict[str, list[list[float]]] = {}
    current: list[list[float]] | None = None
    order: int | None = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        upper = line.upper()
        if upper.startswith("ORDER"):
            order = int(line.split()[1])
            current = None
        elif upper in ("A_EX", "B_EX", "C_EX", "A_IM", "B_IM", "C_IM"):
            current = blocks.setdefault(upper, [])
        elif current is not None:
            current.append([float(tok) for tok in line.split()])
        else:
            raise ValueError(f"unexpected line outside any block: {raw!r}")
    missing = {"A_EX", "B_EX", "C_EX", "A_IM", "B_IM", "C_IM"} - set(blocks)
    if missing or order is None:
        raise ValueError(f"tableau file incomplete: missing {sorted(missing) or 'ORDER'}")

    def matrix(key: str) -> np.ndarray:
        rows = blocks[key]
        s = len(rows)
        out = np.zeros((s, s))
        for i, row in enumerate(rows):
            if len(row) > i + 1:
                raise ValueError(f"{key} row {i} has too many entries")
            out[i, : len(row)] = row
        return out

    def vector(key: str) -> np.ndarray:
        flat = [x for row in blocks[key] for x in row]
        return np.array(flat, dtype=float)

    return IMEXTableau(
        name=name,
        a_ex=matrix("A_EX"),
        b_ex=vector("B_EX"),
        c_ex=vector("C_EX"),
        a_im=matrix("A_IM"),
        b_im=vector("B_IM"),
        c_im=vector("C_IM"),
        order=order,
    )


def load_tableau_file(path, name: str | None = None) -> IMEXTableau:
    """Load a tableau from a file in the labeled-block text format."""
    path = str(path)
    with open(path) as fh:
        text = fh.read()
    if name is None:
        name = path.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return parse_tableau_text(text, name)


_BUILTIN_FILES = {
    "imex-ark3": "ark324.txt",
}


def get_tableau(name: str = "imex-ark3") -> IMEXTableau:
    """Look up a tableau by name: 'imex-ark3' (default) or 'imex-euler'."""
    if name == "imex-euler":
        return _first_order_tableau()
    fname = _BUILTIN_FILES.get(name)
    if fname is None:
        raise KeyError(f"unknown tableau {name!r}; known: "
                       f"{sorted(['imex-euler', *_BUILTIN_FILES])}")
    text = resources.files("rkdg1d.data").joinpath(fname).read_text()
    return parse_tableau_text(text, name)
