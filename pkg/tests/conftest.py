"""Shared fixtures: the full convergence studies are run once per session."""

import pytest

from rkdg1d.study import StudyConfig, run_case, run_study


@pytest.fixture(scope="session")
def linear_study():
    cfg = StudyConfig(
        problem="linear_advection_diffusion",
        eps_list=(1e-8,),
        q_list=(1, 2),
        elements=(64, 128, 256, 512),
        dt_factor=0.1,
        t_final=0.5,
    )
    return run_study(cfg)


@pytest.fixture(scope="session")
def burgers_study():
    cfg = StudyConfig(
        problem="viscous_burgers",
        eps_list=(1e-8,),
        q_list=(1, 2),
        elements=(64, 128, 256, 512),
        dt_factor=0.033,
        t_final=0.5,
    )
    return run_study(cfg)


@pytest.fixture(scope="session")
def wave_study():
    cfg = StudyConfig(
        problem="nonlinear_wave",
        eps_list=(1e-6,),
        q_list=(1, 2),
        elements=(64, 128, 256, 512),
        dt_factor=0.1,
        t_final=0.5,
    )
    return run_study(cfg)


@pytest.fixture(scope="session")
def robustness_rows(linear_study):
    """N = 128, q = 1 linear runs across epsilon, reusing the study's 1e-8 row."""
    rows = {}
    for eps in (1e-6, 1e-7):
        rows[eps] = run_case("linear_advection_diffusion", eps, 1, 128, 0.1, 0.5)
    for r in linear_study.rows:
        if r.q == 1 and r.n_elements == 128:
            rows[1e-8] = r
    return rows
