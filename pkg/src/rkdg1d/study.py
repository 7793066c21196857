"""Convergence-study harness: run sweeps, tabulate EOCs, emit CSV and plots."""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field, replace

import numpy as np

from .dgfunction import l2_project
from .estimators import EstimatorReport, eoc, estimate
from .mesh import build_uniform_mesh
from .operators import DiffusionConfig, FluxScheme, SpatialOperators, LAX_WENDROFF
from .problems import get_problem
from .stepping import run_simulation
from .tableaus import get_tableau

CSV_COLUMNS = [
    "problem", "eps", "q", "N", "h", "dt",
    "err_linf_l2", "err_energy", "r1_l1l2", "theta_l2",
    "bound_total", "effectivity",
    "eoc_err", "eoc_energy", "eoc_r1", "eoc_theta",
]


@dataclass(frozen=True)
class StudyConfig:
    """One convergence study: sweeps over epsilon, degree, and element count."""

    problem: str
    eps_list: tuple[float, ...]
    q_list: tuple[int, ...]
    elements: tuple[int, ...]
    dt_factor: float = 0.1
    t_final: float = 0.5
    flux: str = LAX_WENDROFF
    sigma: float | None = None
    tableau: str = "imex-ark3"
    jobs: int = 1

    def __post_init__(self):
        if self.t_final <= 0 or self.dt_factor <= 0:
            raise ValueError("t_final and dt_factor must be positive")
        if any(n < 2 for n in self.elements):
            raise ValueError("element counts must be at least 2")
        if list(self.elements) != sorted(self.elements):
            raise ValueError("element counts must be sorted ascending")

    def cases(self) -> list[tuple]:
        return [
            (self.problem, eps, q, n, self.dt_factor, self.t_final,
             self.flux, self.sigma, self.tableau)
            for eps in self.eps_list
            for q in self.q_list
            for n in self.elements
        ]


@dataclass(frozen=True)
class StudyRow:
    """One (problem, eps, q, N) result; EOC cells filled during tabulation."""

    problem: str
    eps: float
    q: int
    n_elements: int
    h: float
    dt: float
    err_linf_l2: float = np.nan
    err_energy: float = np.nan
    r1_l1l2: float = np.nan
    theta_l2: float = np.nan
    bound_total: float = np.nan
    effectivity: float = np.nan
    mass_drift: float = np.nan
    eoc_err: float | None = None
    eoc_energy: float | None = None
    eoc_r1: float | None = None
    eoc_theta: float | None = None
    error: str | None = None
    report: EstimatorReport | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def run_case(problem_name: str, eps: float, q: int, n_elements: int,
             dt_factor: float, t_final: float, flux_kind: str = LAX_WENDROFF,
             sigma: float | None = None, tableau_name: str = "imex-ark3") -> StudyRow:
    """Run one simulation and its estimator sweep, returning a table row."""
    problem = get_problem(problem_name, eps)
    mesh = build_uniform_mesh(n_elements)
    h = mesh.h_max
    dt = dt_factor * h
    scheme = FluxScheme(flux_kind, lam=dt / mesh.h_min)
    diff = DiffusionConfig(eps, problem.diffusion_mask, sigma)
    ops = SpatialOperators(mesh, q, problem.n_components,
                           problem.flux, problem.flux_jac, scheme, diff)
    u0 = l2_project(problem.initial, mesh, q, problem.n_components)
    traj = run_simulation(ops, u0, t_final, dt,
                          get_tableau(tableau_name), problem.source)
    rep = estimate(traj, problem)
    return StudyRow(
        problem=problem_name, eps=eps, q=q, n_elements=n_elements, h=h, dt=dt,
        err_linf_l2=rep.true_error_linf_l2,
        err_energy=rep.true_error_energy,
        r1_l1l2=rep.r1_norm,
        theta_l2=rep.theta_total,
        bound_total=rep.bound_norm,
        effectivity=rep.effectivity,
        mass_drift=rep.mass_drift,
        report=rep,
    )


def _run_case_tuple(args: tuple) -> StudyRow:
    try:
        return run_case(*args)
    except Exception as exc:  # isolate per-run failures
        problem, eps, q, n, dt_factor, t_final = args[:6]
        h = 2.0 * np.pi / n
        return StudyRow(problem=problem, eps=eps, q=q, n_elements=n,
                        h=h, dt=dt_factor * h, error=f"{type(exc).__name__}: {exc}")


@dataclass(frozen=True)
class ConvergenceTable:
    """Sorted study rows with pairwise EOC columns filled per refinement group."""

    rows: tuple[StudyRow, ...]

    @property
    def n_failed(self) -> int:
        return sum(r.failed for r in self.rows)

    def groups(self) -> dict[tuple, list[StudyRow]]:
        out: dict[tuple, list[StudyRow]] = {}
        for r in self.rows:
            out.setdefault((r.problem, r.eps, r.q), []).append(r)
        return out


def _safe_eoc(prev: StudyRow, row: StudyRow, attr: str) -> float | None:
    a, b = getattr(prev, attr), getattr(row, attr)
    if not (np.isfinite(a) and np.isfinite(b) and a > 0 and b > 0):
        return None
    return eoc(a, b, prev.h, row.h)


def tabulate(rows: list[StudyRow]) -> ConvergenceTable:
    """Sort rows and fill the pairwise EOC columns within each (eps, q) group."""
    rows = sorted(rows, key=lambda r: (r.problem, r.eps, r.q, r.n_elements))
    out: list[StudyRow] = []
    prev: StudyRow | None = None
    for r in rows:
        if (prev is not None and not r.failed and not prev.failed
                and (prev.problem, prev.eps, prev.q) == (r.problem, r.eps, r.q)):
            r = replace(
                r,
                eoc_err=_safe_eoc(prev, r, "err_linf_l2"),
                eoc_energy=_safe_eoc(prev, r, "err_energy"),
                eoc_r1=_safe_eoc(prev, r, "r1_l1l2"),
                eoc_theta=_safe_eoc(prev, r, "theta_l2"),
            )
        out.append(r)
        prev = r
    return ConvergenceTable(tuple(out))


def run_study(config: StudyConfig) -> ConvergenceTable:
    """Execute every case of the study, optionally across a process pool."""
    cases = config.cases()
    if config.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(config.jobs) as pool:
            rows = list(pool.map(_run_case_tuple, cases))
    else:
        rows = [_run_case_tuple(c) for c in cases]
    return tabulate(rows)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if np.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def emit_csv(table: ConvergenceTable, path) -> None:
    """Write the table in the fixed schema with shortest round-trip floats."""
    if not table.rows:
        raise ValueError("cannot emit an empty table")
    lines = [",".join(CSV_COLUMNS)]
    for r in table.rows:
        lines.append(",".join([
            r.problem, _fmt(float(r.eps)), str(r.q), str(r.n_elements),
            _fmt(float(r.h)), _fmt(float(r.dt)),
            _fmt(float(r.err_linf_l2)), _fmt(float(r.err_energy)),
            _fmt(float(r.r1_l1l2)), _fmt(float(r.theta_l2)),
            _fmt(float(r.bound_total)), _fmt(float(r.effectivity)),
            _fmt(r.eoc_err), _fmt(r.eoc_energy), _fmt(r.eoc_r1), _fmt(r.eoc_theta),
        ]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_csv(path) -> list[dict]:
    """Read an emitted CSV back into a list of per-row dicts."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        out = []
        for line in fh:
            out.append(dict(zip(header, line.rstrip("\n").split(","))))
    return out


def emit_metadata(config: StudyConfig, path, extra: dict | None = None) -> None:
    """Write every effective config value as key=value lines."""
    items = {
        "problem": config.problem,
        "eps": ",".join(repr(e) for e in config.eps_list),
        "q": ",".join(str(q) for q in config.q_list),
        "elements": ",".join(str(n) for n in config.elements),
        "dt_factor": repr(config.dt_factor),
        "T": repr(config.t_final),
        "flux": config.flux,
        "sigma": "default" if config.sigma is None else repr(config.sigma),
        "tableau": config.tableau,
        "jobs": str(config.jobs),
        "lambda_rule": "dt/h_min",
    }
    if extra:
        items.update({k: str(v) for k, v in extra.items()})
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={v}\n")


def emit_plot(table: ConvergenceTable, path) -> list[str]:
    """Write one log-log SVG per (problem, q); returns the file names.

    `path` is treated as a filename stem; plots are written as
    <stem>_<problem>_q<q>.svg with one line per (series, eps).
    """
    if not table.rows:
        raise ValueError("cannot plot an empty table")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = [("err_linf_l2", "o"), ("err_energy", "s"),
              ("r1_l1l2", "^"), ("theta_l2", "v"), ("bound_total", "x")]
    by_pq: dict[tuple, list[StudyRow]] = {}
    for r in table.rows:
        if not r.failed:
            by_pq.setdefault((r.problem, r.q), []).append(r)

    stem = str(path)
    if stem.endswith(".svg"):
        stem = stem[:-4]
    written = []
    for (prob, q), rows in sorted(by_pq.items()):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        for eps in sorted({r.eps for r in rows}):
            sub = sorted([r for r in rows if r.eps == eps], key=lambda r: r.h)
            hs = [r.h for r in sub]
            for name, marker in series:
                ys = [getattr(r, name) for r in sub]
                if all(np.isfinite(ys)) and all(y > 0 for y in ys):
                    ax.loglog(hs, ys, marker=marker, label=f"{name}, eps={eps:g}")
        ax.set_xlabel("h")
        ax.set_ylabel("error / estimator")
        ax.set_title(f"{prob}, q={q}")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=7)
        fname = f"{stem}_{prob}_q{q}.svg"
        fig.savefig(fname)
        plt.close(fig)
        written.append(fname)
    return written
