"""Symplectic-momentum integrators built from discretization maps."""

from .cotangent_lift import (
    HamiltonianSystem,
    LagrangianSystem,
    build_hamiltonian_step,
    build_lagrangian_step,
    cotangent_lift_point,
    hamiltonian_generator,
)
from .discretization import (
    DiscretizationMap,
    MatrixGroupMidpointMap,
    adjoint_map,
    check_axioms,
    check_symmetry_preservation,
    custom_map,
    midpoint_map,
    theta_map,
)
from .errors import MaxIterExceeded, SingularJacobian, StepFailure
from .geometry_core import (
    CotangentOfCotangent,
    CotangentOfTangent,
    PhasePoint,
    ProductCovector,
    TangentPoint,
    VectorField,
)
from .integrator import (
    CompositionScheme,
    Method,
    NewtonConfig,
    Trajectory,
    adjoint_step,
    composed_step,
    integrate,
    newton_solve,
    step,
    triple_jump,
)
from .problems import get_problem, registry

__version__ = "0.1.0"
