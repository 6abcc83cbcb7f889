"""Morse-theoretic tools for second-order problems with impulses.

The model problem is ``-u'' = f(x, u)`` on (0, 1), ``u(0) = u(1) = 0``, with
jumps ``u'(x_j+) - u'(x_j-) = -i_j(u(x_j))`` at interior nodes ``x_j``.
"""

from .galerkin import (BasisError, CoefficientVector, GalerkinBasis, build_basis, energy,
                       eval_u, gradient, hessian)
from .io import RunReport, SchemaError, parse_problem, parse_problem_file
from .mesh import ImpulseMesh, MeshError, build_mesh, gram_matrix, representer_eval
from .nonlinearity import CATALOG, NonlinearityEntry, get_entry, user_entry
from .problem import ProblemSpec, make_problem, benchmark_problem
from .resonance import (Certificate, MorseReport, ResonanceValue, corollary_threshold,
                        hessian_at_zero, morse_report, nontriviality_certificate,
                        resonance_det, resonance_path_scan)
from .shooting import (IntegrationError, ResidualReport, SampledFunction, Trajectory,
                       bisect_solutions, linear_transfer, shoot, shooting_map,
                       verify_solution)
from .solver import (CriticalPoint, SolverOptions, newton_critical_point, refine_and_verify,
                     saddle_search)
from .spectral import SpectralReport, spectral_report, subinterval_eigenvalue

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
