"""1D Runge-Kutta discontinuous Galerkin solver with a posteriori error estimators.

The package provides:

* piecewise-orthonormal-Legendre dG function spaces on periodic 1D meshes,
* discrete convection (numerical flux) and interior-penalty diffusion operators,
* IMEX Runge-Kutta time stepping,
* cubic-Hermite-in-time and flux-constrained-in-space reconstructions of the
  discrete trajectory,
* residual-based error estimators with problem-class dependent total bounds,
* a convergence-study harness with CSV/SVG output.
"""

from .mesh import Mesh1D, QuadratureRule, build_uniform_mesh
from .dgfunction import DGFunction, l2_project
from .operators import (
    DiffusionConfig,
    FluxScheme,
    SpatialOperators,
    dg_energy_norm,
)
from .tableaus import IMEXTableau, load_tableau_file, get_tableau
from .stepping import Trajectory, run_simulation, SimulationDiverged
from .reconstruction import TemporalReconstruction, SpaceTimeReconstruction
from .problems import (
    ProblemSpec,
    linear_advection_diffusion,
    viscous_burgers,
    nonlinear_wave,
    get_problem,
)
from .estimators import EstimatorReport, estimate, eoc
from .study import StudyConfig, ConvergenceTable, run_study, emit_csv, emit_plot

__version__ = "0.1.0"
