"""latticescape: landscape functions for tight-binding lattice Hamiltonians.

Solves the landscape equation Hu = 1 for H = -Laplacian + V on periodic
tori and Dirichlet cubes, builds effective potentials and Agmon distance
fields from 1/u, computes eigenpairs with the high-energy duality
transform, and numerically certifies the identities, inequalities, and
exponential decay bounds the theory provides.
"""

__version__ = "0.1.0"

from .agmon import AgmonField, agmon_distance_field, agmon_field, agmon_metric, brute_force_metric, weight_field, wells
from .errors import (
    AlreadyDual,
    DimensionMismatch,
    EigenSolverFailed,
    EmptyWells,
    HypothesisNotMet,
    IndexOutOfRange,
    InvalidAlpha,
    InvalidPotential,
    LatticescapeError,
    NotApplicable,
    OddPeriodicDual,
    SolverDiverged,
    TooLargeForOracle,
)
from .landscape import LandscapeField, dual_landscape, solve_landscape
from .lattice import (
    BoundaryCondition,
    LatticeGeometry,
    SiteIndex,
    boundary_deficiency,
    inner_boundary,
    neighbors,
    site_index,
    to_coords,
    to_linear,
)
from .operators import (
    HamiltonianOperator,
    OperatorForm,
    PotentialField,
    antiperiodic_apply_1d,
    apply,
    dual_operator,
    gradient,
    green_gradient_form,
    inner,
    to_dense,
    to_sparse,
)
from .random_media import Bernoulli, Constant, FromFile, PotentialSpec, Uniform, generate
from .report import CheckKind, CheckResult, identity_check, inequality_check
from .spectral import (
    Eigenpair,
    check_duality,
    count_eigenvalues_below,
    dual_transform,
    eigenpairs,
    mirror_spectrum_check,
)
from .verify import (
    DecayBoundParams,
    DecayProfile,
    agmon_test_function,
    calibrate_decay_params,
    check_decay_bound,
    check_eigen_identity,
    check_green,
    check_lipschitz,
    check_max_principle,
    check_uncertainty,
    decay_profile,
    estimate_C_abs,
)
