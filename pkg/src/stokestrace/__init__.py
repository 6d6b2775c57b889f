"""Finite dimensional two-variable spectral shift and trace formula toolkit.

Modules
-------
linalg
    Hermitian certification, Jacobi eigensolver, joint diagonalization.
fields
    Piecewise polynomial scalar fields on rectangles.
spectral
    Spectral projections, functional calculus, dyadic bands.
operator_integrals
    Operator-valued Riemann-Stieltjes and double operator integrals.
berg
    Finite-rank commuting approximations of commuting tuples.
trace_formula
    Perturbed pairs, spectral shift field and the trace identity paths.
harness
    Seeded generators, experiment configs and verification suites.
"""

from .berg import (
    BergDiagnostics,
    BergSequence,
    CornerSpace,
    OrthonormalBasis,
    berg_diagnostics,
    build_bn,
    build_corner_space,
)
from .exceptions import (
    CommutationError,
    DomainError,
    HermiticityError,
    NumericalFailure,
    StokesTraceError,
)
from .fields import ScalarField2D
from .harness import ExperimentConfig, Report, gen_commuting_pair, gen_perturbed_system, run_suite
from .linalg import (
    CommutingTuple,
    HermitianOperator,
    JointSpectralDecomposition,
    SpectralDecomposition,
    certify_hermitian,
    commuting_tuple,
    eigh,
    joint_eigh,
    operator_norm,
    schatten_norm,
)
from .operator_integrals import (
    OperatorCurve,
    Partition,
    doi_pairing,
    line_integral,
    rs_integral_exact,
    rs_integral_partition,
)
from .spectral import apply_function, cumulative_projector, dyadic_band, dyadic_partial_sum
from .trace_formula import (
    AntiderivativePair,
    PerturbedSystem,
    SpectralShiftField,
    berg_reduction_experiment,
    lhs_closed_form_poly,
    lhs_spectral_integral,
    rhs_divided_difference,
    rhs_xi_integral,
    xi_field,
)

__version__ = "0.1.0"

__all__ = [
    "AntiderivativePair",
    "BergDiagnostics",
    "BergSequence",
    "CommutationError",
    "CommutingTuple",
    "CornerSpace",
    "DomainError",
    "ExperimentConfig",
    "HermitianOperator",
    "HermiticityError",
    "JointSpectralDecomposition",
    "NumericalFailure",
    "OperatorCurve",
    "OrthonormalBasis",
    "Partition",
    "PerturbedSystem",
    "Report",
    "ScalarField2D",
    "SpectralDecomposition",
    "SpectralShiftField",
    "StokesTraceError",
    "apply_function",
    "berg_diagnostics",
    "berg_reduction_experiment",
    "build_bn",
    "build_corner_space",
    "certify_hermitian",
    "commuting_tuple",
    "cumulative_projector",
    "doi_pairing",
    "dyadic_band",
    "dyadic_partial_sum",
    "eigh",
    "gen_commuting_pair",
    "gen_perturbed_system",
    "joint_eigh",
    "lhs_closed_form_poly",
    "lhs_spectral_integral",
    "line_integral",
    "operator_norm",
    "rhs_divided_difference",
    "rhs_xi_integral",
    "rs_integral_exact",
    "rs_integral_partition",
    "run_suite",
    "schatten_norm",
    "xi_field",
]
