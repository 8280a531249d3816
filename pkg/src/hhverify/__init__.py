"""Numerical verification of Hermite-Hadamard-type inequalities for operator convex functions."""

from .catalog import (
    ConvexityClass,
    Monotonicity,
    ScalarFunction,
    Synchrony,
    builtin_catalog,
    certify_operator_convex,
    check_synchronous,
    get_function,
)
from .hermitian import (
    HermitianMatrix,
    Relation,
    UnitVector,
    apply_function,
    loewner_compare,
    quadratic_form,
    segment_point,
    spectral_decompose,
)
from .inequalities import (
    InequalityReport,
    Tolerance,
    check_cebysev,
    check_cross_product,
    check_hh_chain,
    check_midpoint_product,
    check_mnp_chain,
    check_phi_convexity,
    check_product_upper,
    check_remark_bounds,
    compute_mnp,
    run_worked_example,
)
from .quadrature import (
    QuadratureSpec,
    integrate_operator_segment,
    integrate_scalar_form,
    integrate_scalar_product_form,
)
from .sampling import derive_subseed, random_hermitian, random_unit_vector

__version__ = "0.1.0"
