"""Two-body scattering for singular repulsive potentials, the linearized
Boltzmann and Landau collision operators built on it, and convergence
studies of the grazing-collisions and hard-potential limits."""

from .constants import (
    DiffusionConstant,
    c_phi_fourier,
    c_phi_measured,
    c_phi_radial,
    timescale,
)
from .moments import MomentSet, cube_moment, sin2_moment, vhat_moments
from .operators import (
    OperatorValue,
    TestFunction,
    apply_linearized_boltzmann,
    apply_linearized_landau,
    apply_noncutoff_boltzmann,
    get_test_function,
    quadratic_form,
    test_function_names,
)
from .potential import (
    Potential,
    envelope_k,
    eval_phi,
    eval_phi_derivatives,
    fourier_transform,
)
from .quad import DEFAULT_SPEC, NonConvergenceError, QuadSpec
from .scattering import (
    CollisionGeometry,
    CollisionOutcome,
    born_angle,
    deflection_angle,
    deflection_angle_ode,
    outgoing_velocities,
    r_min,
    scatter,
)
from .studies import (
    StudyReport,
    angle_bound_study,
    coulomb_log_study,
    grazing_study,
    hard_potential_study,
)

__all__ = [
    "CollisionGeometry",
    "CollisionOutcome",
    "DEFAULT_SPEC",
    "DiffusionConstant",
    "MomentSet",
    "NonConvergenceError",
    "OperatorValue",
    "Potential",
    "QuadSpec",
    "StudyReport",
    "TestFunction",
    "angle_bound_study",
    "apply_linearized_boltzmann",
    "apply_linearized_landau",
    "apply_noncutoff_boltzmann",
    "born_angle",
    "c_phi_fourier",
    "c_phi_measured",
    "c_phi_radial",
    "coulomb_log_study",
    "cube_moment",
    "deflection_angle",
    "deflection_angle_ode",
    "envelope_k",
    "eval_phi",
    "eval_phi_derivatives",
    "fourier_transform",
    "get_test_function",
    "grazing_study",
    "hard_potential_study",
    "outgoing_velocities",
    "quadratic_form",
    "r_min",
    "scatter",
    "sin2_moment",
    "test_function_names",
    "timescale",
    "vhat_moments",
]
