"""Lie symmetries and exact solutions of ``u_t = x**(2 - 1/a) u_xx``."""

from .errors import DomainError, ParameterError, ParameterMismatchError, PowheatError, RangeError
from .flows import FlowStep, flow_point
from .grid import GridSpec, ResidualReport
from .lie_algebra import (
    AdjointInvariants,
    AdjointMap,
    Generator,
    InfinitesimalCoefficients,
    OptimalClass,
    PowerLawParameter,
    adjoint_coefficients,
    check_determining_equations,
    classify,
    commutator,
    invariants,
)
from .solutions import (
    SolutionDescriptor,
    evaluate,
    evaluate_grid,
    format_csv,
    from_dict,
    make_polynomial,
    make_projective,
    make_scale_invariant,
    make_separable,
    make_stationary,
    parse_csv,
    superpose,
)
from .special_functions import OdeBasisSpec, SpecialValue
from .transforms import pushforward, verify_transformed
from .verify import (
    FdConfig,
    convergence_study,
    fd_solve,
    invariant_surface_residual,
    reflection_residual,
    residual,
    residual_report,
)

__version__ = "0.1.0"

__all__ = [
    "AdjointInvariants",
    "AdjointMap",
    "DomainError",
    "FdConfig",
    "FlowStep",
    "Generator",
    "GridSpec",
    "InfinitesimalCoefficients",
    "OdeBasisSpec",
    "OptimalClass",
    "ParameterError",
    "ParameterMismatchError",
    "PowerLawParameter",
    "PowheatError",
    "RangeError",
    "ResidualReport",
    "SolutionDescriptor",
    "SpecialValue",
    "adjoint_coefficients",
    "check_determining_equations",
    "classify",
    "commutator",
    "convergence_study",
    "evaluate",
    "evaluate_grid",
    "fd_solve",
    "flow_point",
    "format_csv",
    "from_dict",
    "invariant_surface_residual",
    "invariants",
    "make_polynomial",
    "make_projective",
    "make_scale_invariant",
    "make_separable",
    "make_stationary",
    "parse_csv",
    "pushforward",
    "reflection_residual",
    "residual",
    "residual_report",
    "superpose",
    "verify_transformed",
]
