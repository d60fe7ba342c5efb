"""Spectral distances between states of finite spectral triples, with transport costs built from them."""
from .linalg import DomainError, commutator, kernel_basis, operator_norm
from .metric import (
    CostMatrix,
    DistanceResult,
    NonConvergenceError,
    SolverOptions,
    cost_matrix,
    sampled_cost_matrix,
    spectral_distance,
)
from .transport import (
    DualPotential,
    TransportPlan,
    kantorovich_dual,
    spectral_wasserstein,
    wasserstein_primal,
)
from .triple import (
    Commutative,
    DensityState,
    Diagonal,
    FiniteSpectralTriple,
    FullMatrix,
    MatrixElement,
    ProbabilityState,
    bloch_pure,
    evaluate,
    pure_state,
    represent,
)

__version__ = "0.1.0"
