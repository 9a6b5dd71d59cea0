"""Lattice theta series, Epstein zeta functions and the reverse Minkowski inequality."""

from .decomposition import DecompositionResult, decompose, is_isomorphic_to_Zn
from .errors import (
    ContainmentError,
    DegenerateBasisError,
    DivergenceError,
    DomainError,
    EnumerationBudgetError,
    InsufficientRadiusError,
    LatticeError,
    NotSemistableError,
    OutOfRangeError,
    PrimitivityError,
    ToleranceError,
)
from .harness import VerificationReport, general_case_reduction, random_stable_lattice, verify_theorem
from .laplacian import (
    SplitLattice,
    SymmetricPerturbation,
    direct_sum_dominance,
    epsilon_functional,
    laplacian_positivity_check,
    laplacian_S,
    laplacian_S0,
    second_derivative,
)
from .lattice import (
    LatticeBasis,
    Tolerances,
    d4_lattice,
    determinant,
    diagonal_lattice,
    direct_sum,
    dual,
    enumerate_vectors,
    fcc_lattice,
    hexagonal_lattice,
    integer_lattice,
    lambda1,
    lll_reduce,
    quotient,
)
from .special import bessel_k, gamma, kbar, kbar_recurrence_gap
from .stability import StabilityCertificate, is_stable, min_sublattice_det, on_stable_boundary, stabilize
from .sums import (
    SummationResult,
    theta,
    theta_from_zeta_limit,
    zeta_from_theta_quadrature,
    zeta_prime,
    zeta_prime_direct,
    zeta_q,
    zeta_q_psf,
)

__version__ = "0.1.0"
