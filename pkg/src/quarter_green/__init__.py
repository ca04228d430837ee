"""Green functions of killed zero-drift walks in the quarter plane with a harmonic cubic."""
from .asymptotics import (
    AsymptoticModel,
    absorption_asymptotic,
    constant_C,
    green_asymptotic,
    green_asymptotic_two_term,
    orbit_cubic_coefficient,
)
from .curve import BranchPoints, CurvePolynomials, branch_points, discriminant_d, discriminant_dt, q_eval
from .estimator import GreenFunctionModel
from .exceptions import QuarterGreenError
from .green_integral import (
    GreenEstimate,
    RayContour,
    SeriesCoefficients,
    green_integrand,
    green_value,
    green_values,
    nu_coefficients,
    rho,
)
from .martin import MartinDiagnostic, martin_kernel, martin_limit_diagnostic
from .oracle import (
    SimulationConfig,
    TruncationConfig,
    absorption_truncated,
    functional_equation_residual,
    green_truncated,
    simulate,
)
from .uniformization import (
    GroupElement,
    UniformizationData,
    group_elements,
    orbit_sum,
    uniformize,
    verify_on_curve,
    x_of_z,
    y_of_z,
)
from .walk_model import (
    SU3,
    CubicFamilyParams,
    JumpKernel,
    LatticePoint,
    cubic_harmonic,
    harmonicity_residual,
    kernel_from_cubic_family,
    validate_kernel,
)

__version__ = "0.1.0"
