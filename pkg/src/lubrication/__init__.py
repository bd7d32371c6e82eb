"""Reynolds lubrication solvers with exact piecewise coupling.

* :mod:`lubrication.geometry` -- film heights and their PWC/PWL samples
* :mod:`lubrication.core` -- boundary data, velocities, flux, pressure drop
* :mod:`lubrication.pwc` / :mod:`lubrication.pwl` -- exact piecewise solvers
* :mod:`lubrication.fd` -- finite-difference baseline
* :mod:`lubrication.stokes` -- 2D Stokes comparison solver
* :mod:`lubrication.analysis` -- convergence, timing and comparison studies

Set ``LUBRICATION_DISABLE_NUMBA=1`` to run every kernel on its numpy twin.
"""
__version__ = "0.1.0"

from ._accel import DEFAULT_BACKEND, HAVE_NUMBA  # noqa: E402
from .core import (BoundaryConditions, LinearPressure, LubricationRegime,  # noqa: E402
                   PressureSolution, dirichlet_to_flux, flux_at, pressure_drop, resolve_flux,
                   velocity_u, velocity_v)
from .errors import *  # noqa: E402,F401,F403
from .fd import FDSystem, assemble_fd, fd_pressure, solve_fd  # noqa: E402
from .geometry import (AnalyticProfile, GeometrySpec, HeightProfile,  # noqa: E402
                       PiecewiseConstant, PiecewiseLinear, build_profile, eval_height,
                       sample_pwc, sample_pwl)
from .pwc import (PWCSystem, TridiagInverse, assemble_pwc, pwc_pressure,  # noqa: E402
                  solve_pwc, tridiag_inverse)
from .pwl import (PWLPressure, PWLSolution, PWLSystem, assemble_pwl,  # noqa: E402
                  eval_pressure_pwl, pwl_pressure, solve_pwl)
from .stokes import (StokesConfig, StokesField, StokesGrid, build_stokes_grid,  # noqa: E402
                     inlet_stream, iterate_biharmonic, recover_pressure, recover_velocity,
                     solve_stokes)
