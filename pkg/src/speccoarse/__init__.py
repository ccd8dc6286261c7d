"""Spectrum-preserving graph coarsening and graph-limit checks for invariant networks."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .graph import (
    Graph,
    combinatorial_laplacian,
    conductance,
    degree_vector,
    doubly_weighted_laplacian,
    normalized_laplacian,
    quadratic_form,
    rayleigh_quotient,
)
from .eigen import EigenDecomposition, sym_eig
from .coarsening import (
    CoarseningResult,
    Method,
    VertexMap,
    coarsen,
    induced_coarse_graph,
    lift_matrix,
    projection_matrix,
)
from .operators import OperatorChoice, coarse_operator, lift, project
from .losses import (
    LossReport,
    compute_loss,
    conductance_loss,
    eigenerror,
    improvement,
    normalized_quadratic_loss,
    quadratic_loss,
    rayleigh_loss,
)
from .optimizer import OptimizerTrace, WeightVector, align_spectrum
