"""Dominant invariant subspaces of symmetric matrices via accelerated
Riemannian gradient descent on the Grassmann manifold, with classical
baselines, geometry/convexity verification suites, and a benchmark harness.
"""

from . import bench, grassmann, matops, rayleigh, solvers, verify
from .errors import GrasseigError
from .grassmann import SubspacePoint, TangentVector, distance, exp, log, random_point
from .matops import (
    DenseOperator,
    Fd3dSpec,
    SparseOperator,
    SymmetricOperator,
    analytic_fd3d_eigenvalues,
    build_fd3d,
    dense_eig_oracle,
    load_matrix_market,
    shift,
)
from .rayleigh import C_Q, SpectralParams, derive_params, f_value, grad
from .solvers import LineSearchConfig, Reference, SolverConfig, SolverTrace, run

__version__ = "0.1.0"

__all__ = [
    "C_Q",
    "DenseOperator",
    "Fd3dSpec",
    "GrasseigError",
    "LineSearchConfig",
    "Reference",
    "SolverConfig",
    "SolverTrace",
    "SparseOperator",
    "SpectralParams",
    "SubspacePoint",
    "SymmetricOperator",
    "TangentVector",
    "analytic_fd3d_eigenvalues",
    "bench",
    "build_fd3d",
    "dense_eig_oracle",
    "derive_params",
    "distance",
    "exp",
    "f_value",
    "grad",
    "grassmann",
    "load_matrix_market",
    "log",
    "matops",
    "random_point",
    "rayleigh",
    "run",
    "shift",
    "solvers",
    "verify",
]
