"""Command-line interface: single runs, convergence studies, plots, validation."""

from __future__ import annotations

import argparse
import configparser
import sys

import numpy as np

from .operators import LAX_FRIEDRICHS, LAX_WENDROFF
from .problems import get_problem, problem_names
from .study import (
    ConvergenceTable,
    StudyConfig,
    StudyRow,
    emit_csv,
    emit_metadata,
    emit_plot,
    parse_csv,
    run_case,
    run_study,
    tabulate,
)


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in s.split(",") if tok.strip())


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in s.split(",") if tok.strip())


def _add_study_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI config file ([study] section)")
    p.add_argument("--problem", help=f"one of {problem_names()}")
    p.add_argument("--eps", help="comma list of diffusion strengths")
    p.add_argument("--q", help="comma list of polynomial degrees")
    p.add_argument("--elements", help="comma list of element counts")
    p.add_argument("--dt-factor", type=float, help="timestep = factor * h")
    p.add_argument("--T", type=float, help="final time")
    p.add_argument("--flux", choices=[LAX_WENDROFF, LAX_FRIEDRICHS])
    p.add_argument("--sigma", type=float, help="SIP penalty (default 10 q^2)")
    p.add_argument("--tableau", help="imex-ark3 (default) or imex-euler")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--jobs", type=int, help="parallel worker processes")


def _load_config(args) -> StudyConfig:
    """Merge INI values (if any) with CLI flags; flags win."""
    ini: dict[str, str] = {}
    if args.config:
        cp = configparser.ConfigParser()
        with open(args.config) as fh:
            cp.read_file(fh)
        section = "study" if cp.has_section("study") else cp.default_section
        ini = dict(cp[section])

    def pick(flag, key, conv=lambda x: x):
        if flag is not None:
            return flag
        if key in ini:
            return conv(ini[key])
        return None

    problem = pick(args.problem, "problem")
    if problem is None:
        raise SystemExit("a problem must be given via --problem or the config file")
    kwargs = dict(
        problem=problem,
        eps_list=pick(_floats(args.eps) if args.eps else None, "eps", _floats)
        or (1e-8,),
        q_list=pick(_ints(args.q) if args.q else None, "q", _ints) or (1,),
        elements=pick(_ints(args.elements) if args.elements else None,
                      "elements", _ints) or (64, 128, 256),
    )
    for attr, key, conv in [
        ("dt_factor", "dt_factor", float),
        ("t_final", "t", float),
        ("flux", "flux", str),
        ("sigma", "sigma", float),
        ("tableau", "tableau", str),
        ("jobs", "jobs", int),
    ]:
        flag = getattr(args, "T" if attr == "t_final" else attr, None)
        val = pick(flag, key, conv)
        if val is not None:
            kwargs[attr] = val
    out = pick(args.out, "out") or "study.csv"
    return StudyConfig(**kwargs), out


def _print_table(table: ConvergenceTable):
    cols = ["eps", "q", "N", "err_linf_l2", "eoc_err", "r1_l1l2", "eoc_r1",
            "theta_l2", "eoc_theta", "effectivity"]
    print("  ".join(f"{c:>12}" for c in cols))
    for r in table.rows:
        if r.failed:
            print(f"{r.eps:12.3g}  {r.q:12d}  {r.n_elements:12d}  FAILED: {r.error}")
            continue
        vals = [f"{r.eps:12.3g}", f"{r.q:12d}", f"{r.n_elements:12d}",
                f"{r.err_linf_l2:12.4e}",
                f"{r.eoc_err:12.2f}" if r.eoc_err is not None else " " * 12,
                f"{r.r1_l1l2:12.4e}",
                f"{r.eoc_r1:12.2f}" if r.eoc_r1 is not None else " " * 12,
                f"{r.theta_l2:12.4e}",
                f"{r.eoc_theta:12.2f}" if r.eoc_theta is not None else " " * 12,
                f"{r.effectivity:12.3g}"]
        print("  ".join(vals))


def cmd_run(args) -> int:
    config, out = _load_config(args)
    rc = 0
    rows = []
    for eps in config.eps_list:
        for q in config.q_list:
            for n in config.elements:
                try:
                    row = run_case(config.problem, eps, q, n, config.dt_factor,
                                   config.t_final, config.flux, config.sigma,
                                   config.tableau)
                    rows.append(row)
                    rep = row.report
                    print(f"{config.problem} eps={eps:g} q={q} N={n}: "
                          f"err={rep.true_error_linf_l2:.4e} "
                          f"r1={rep.r1_norm:.4e} theta={rep.theta_total:.4e} "
                          f"bound={rep.bound_norm:.4e} "
                          f"effectivity={rep.effectivity:.3g}")
                except Exception as exc:
                    print(f"{config.problem} eps={eps:g} q={q} N={n}: "
                          f"FAILED ({exc})", file=sys.stderr)
                    rc = 1
    if args.out and rows:
        emit_csv(tabulate(rows), out)
        emit_metadata(config, out + ".meta")
    return rc


def cmd_convergence(args) -> int:
    config, out = _load_config(args)
    table = run_study(config)
    emit_csv(table, out)
    emit_metadata(config, out + ".meta", extra={"failed_runs": table.n_failed})
    _print_table(table)
    print(f"wrote {out}")
    return 1 if table.n_failed else 0


def cmd_plot(args) -> int:
    raw = parse_csv(args.csv)
    rows = []
    for d in raw:
        rows.append(StudyRow(
            problem=d["problem"], eps=float(d["eps"]), q=int(d["q"]),
            n_elements=int(d["N"]), h=float(d["h"]), dt=float(d["dt"]),
            err_linf_l2=float(d["err_linf_l2"]), err_energy=float(d["err_energy"]),
            r1_l1l2=float(d["r1_l1l2"]), theta_l2=float(d["theta_l2"]),
            bound_total=float(d["bound_total"]),
            effectivity=float(d["effectivity"]),
        ))
    written = emit_plot(ConvergenceTable(tuple(rows)), args.out or args.csv)
    for f in written:
        print(f"wrote {f}")
    return 0


def validate_problem(name: str, epsilon: float = 1e-3,
                     n_samples: int = 200, seed: int = 0) -> list[str]:
    """Finite-difference oracle checks for one problem; returns failure messages."""
    rng = np.random.default_rng(seed)
    problem = get_problem(name, epsilon)
    m = problem.n_components
    failures = []

    # state samples inside the solutions' actual range
    ts = rng.uniform(0.0, 1.0, n_samples)
    xs = rng.uniform(0.0, 2.0 * np.pi, n_samples)
    states = np.array([problem.exact(t, x) for t, x in zip(ts, xs)]).reshape(-1, m)

    # flux Jacobian vs central differences
    fd_h = 1e-6
    jac = problem.flux_jac(states)
    for j in range(m):
        step = np.zeros(m)
        step[j] = fd_h
        fd = (problem.flux(states + step) - problem.flux(states - step)) / (2 * fd_h)
        scale = np.maximum(np.abs(jac[..., j]), 1.0)
        if np.max(np.abs(fd - jac[..., j]) / scale) > 1e-5:
            failures.append(f"{name}: flux Jacobian column {j} mismatch")

    # exact solution periodicity in x
    for t in (0.0, 0.37, 1.0):
        gap = np.abs(problem.exact(t, 0.0) - problem.exact(t, 2.0 * np.pi))
        if np.max(gap) > 1e-12:
            failures.append(f"{name}: exact solution not 2*pi-periodic at t={t}")

    # exact_dx vs central differences
    dx = np.array([problem.exact_dx(t, x) for t, x in zip(ts, xs)])
    fd = np.array([
        (problem.exact(t, x + fd_h) - problem.exact(t, x - fd_h)) / (2 * fd_h)
        for t, x in zip(ts, xs)
    ])
    if np.max(np.abs(dx - fd)) > 1e-5:
        failures.append(f"{name}: exact_dx mismatch")

    # manufactured source residual via finite differences
    h = 1e-4
    worst = 0.0
    mask = np.array(problem.diffusion_mask, dtype=float)
    for t, x in zip(ts, xs):
        ut = (problem.exact(t + h, x) - problem.exact(t - h, x)) / (2 * h)
        fx = (problem.flux(problem.exact(t, x + h))
              - problem.flux(problem.exact(t, x - h))) / (2 * h)
        uxx = (problem.exact(t, x + h) - 2 * problem.exact(t, x)
               + problem.exact(t, x - h)) / h**2
        res = ut + fx - epsilon * mask * uxx
        if problem.source is not None:
            res = res - problem.source(t, x)
        worst = max(worst, float(np.max(np.abs(res))))
    if worst > 1e-6:
        failures.append(f"{name}: manufactured source residual {worst:.2e} > 1e-6")

    return failures


def cmd_validate(args) -> int:
    names = [args.problem] if args.problem else problem_names()
    rc = 0
    for name in names:
        failures = validate_problem(name)
        if failures:
            rc = 1
            for msg in failures:
                print(f"FAIL  {msg}")
        else:
            print(f"ok    {name}")
    return rc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rkdg1d",
        description="1D RKdG convection-diffusion solver with a posteriori "
                    "error estimators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run individual cases and print reports")
    _add_study_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("convergence", help="run a full convergence study")
    _add_study_flags(p_conv)
    p_conv.set_defaults(func=cmd_convergence)

    p_plot = sub.add_parser("plot", help="render SVG convergence plots from a CSV")
    p_plot.add_argument("csv", help="CSV file produced by `convergence`")
    p_plot.add_argument("--out", help="output filename stem")
    p_plot.set_defaults(func=cmd_plot)

    p_val = sub.add_parser("validate", help="check problem specs against oracles")
    p_val.add_argument("--problem", help="validate a single problem")
    p_val.set_defaults(func=cmd_validate)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
