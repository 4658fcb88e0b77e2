"""Phase-space subsystem dynamics.

Numerics for linear symplectic geometry and subsystem evolution: block
decompositions and Schur complements, Williamson normal forms and symplectic
capacities, shadows of symplectic balls on subsystem phase spaces,
nearby-orbit propagation of Hamiltonian dynamics, and Gaussian states in the
covariance picture with purity/entropy/capacity time series.
"""

from .config import TOLERANCES, Tolerances, active_tolerances
from .core import (
    BlockSplit,
    Dimensions,
    Ellipsoid,
    SingularBlockError,
    block_split,
    direct_sum,
    layout_permutation,
    load_matrix_text,
    reproject_symplectic,
    save_matrix_text,
    schur_complement,
    spd_inverse,
    spd_solve,
    symplectic_form,
    symplecticity_defect,
)
from .dynamics import (
    AffineFlow,
    DivergenceError,
    ReferenceOrbit,
    apply_flow,
    evolve_ball,
    flow_at,
    flow_generator,
    integrate_orbit,
    local_hamiltonian,
)
from .gaussian import (
    GaussianState,
    SubsystemTrace,
    density,
    partial_trace,
    propagate,
    purity,
    shape_from_xy,
    state_from_symplectic_ball,
    subsystem_evolution,
)
from .generators import (
    mode_rotation,
    mode_squeeze,
    random_symplectic,
    two_mode_rotation,
    two_mode_squeeze,
)
from .models import (
    CATALOG,
    HamiltonianModel,
    KineticPotential,
    bilinear_bath,
    catalog_model,
    coupled_oscillators,
    custom_model,
    free_particle,
    harmonic_oscillator,
    kinetic_potential_model,
    quadratic_model,
    quartic_oscillator,
)
from .projection import (
    ProjectionResult,
    containment_check,
    entropy_increase,
    project_ball,
    shadow_area,
)
from .williamson import (
    WilliamsonDecomposition,
    quantum_condition,
    symplectic_capacity,
    symplectic_eigenvalues,
    williamson,
)

__version__ = "0.1.0"
