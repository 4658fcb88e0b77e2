"""Centralized numerical tolerances.

Every threshold used by the library and its test suite lives in one
:class:`Tolerances` record so that library checks and tests cannot drift
apart.  The environment variable ``PHASESHADOW_TOLERANCES`` selects a
profile (``default``, ``strict`` or ``loose``) that rescales the *input
gates* (symplecticity and conditioning thresholds applied to caller-supplied
data); internal cross-check tolerances are never loosened.
"""

import os
from dataclasses import dataclass, replace

__all__ = ["Tolerances", "TOLERANCES", "active_tolerances"]


@dataclass(frozen=True)
class Tolerances:
    # exact algebraic identities of the standard form (J^2 = -I etc.)
    form_identity: float = 1e-14
    # accept a matrix as symplectic (outputs of this library)
    symplectic_defect: float = 1e-9
    # input gate for project_ball
    projection_input_defect: float = 1e-8
    # input gate for matrix files fed through the CLI
    cli_input_defect: float = 1e-6
    # reciprocal-condition floor below which an SPD block counts as singular
    rcond_floor: float = 1e-12
    # max |M - M^T| (relative to max(1, |M|)) accepted as symmetric
    symmetry: float = 1e-10
    # positive-definiteness floor for smallest eigenvalue (relative)
    definiteness: float = 0.0
    # non-squeezing bound: symplectic eigenvalues may exceed 1 by this much
    spectrum_slack: float = 1e-9
    # membership slack in Monte-Carlo containment checks
    containment_slack: float = 1e-9
    # dual-route consistency (entropy det vs spectrum, purity proj vs det)
    cross_check: float = 1e-8
    # quantum condition acceptance: lambda_min >= 1 - quantum_margin
    quantum_margin: float = 1e-10
    # Williamson: spectral gap below which eigenvalues count as degenerate
    degenerate_gap: float = 1e-10
    # Williamson reconstruction residual, relative
    reconstruction: float = 1e-8
    # integrator: defect that triggers symplectic reprojection when enabled
    reproject_trigger: float = 1e-8
    # integrator: defect target after reprojection
    reproject_target: float = 1e-12
    # partial trace: Schur-inverse block identity
    block_identity: float = 1e-10


TOLERANCES = Tolerances()

_PROFILES = {
    "default": TOLERANCES,
    # tighter input gates for workflows that must fail loudly
    "strict": replace(
        TOLERANCES,
        projection_input_defect=1e-10,
        cli_input_defect=1e-8,
        symmetry=1e-12,
    ),
    # forgiving gates for matrices produced by low-accuracy external tools
    "loose": replace(
        TOLERANCES,
        projection_input_defect=1e-6,
        cli_input_defect=1e-4,
        symmetry=1e-8,
        rcond_floor=1e-14,
    ),
}


def active_tolerances() -> Tolerances:
    """Tolerance record selected by the PHASESHADOW_TOLERANCES env var."""
    name = os.environ.get("PHASESHADOW_TOLERANCES", "default").strip().lower()
    try:
        return _PROFILES[name]
    except KeyError:
        raise ValueError(
            f"unknown tolerance profile {name!r}; "
            f"expected one of {sorted(_PROFILES)}"
        ) from None
