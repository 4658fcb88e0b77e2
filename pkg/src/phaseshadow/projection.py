"""Shadows of symplectic balls on subsystem phase spaces.

A linear symplectic image S(B_R) of a phase-space ball is the ellipsoid
{z : P z^2 <= R^2} with P = (S S^T)^{-1}.  Its orthogonal projection onto
subsystem A is again an ellipsoid, with shape matrix the Schur complement
P/P_BB, and it always contains a symplectic ball of the same radius: the
symplectic eigenvalues of P/P_BB never exceed 1.  This module computes the
projected ellipsoid, the embedded symplectic ball, and the volume/entropy
observables attached to them, plus a Monte-Carlo witness of the inclusion.

Entropies are returned in units of k_B (k_B = 1 internally).
"""

from dataclasses import dataclass

import numpy as np

from .config import TOLERANCES, Tolerances
from .core import (
    Dimensions,
    Ellipsoid,
    block_split,
    schur_complement,
    spd_inverse,
    symplecticity_defect,
)
from .williamson import williamson

__all__ = [
    "ProjectionResult",
    "project_ball",
    "containment_check",
    "shadow_area",
    "entropy_increase",
]


@dataclass(frozen=True)
class ProjectionResult:
    """Shadow of a symplectic ball on subsystem A.

    Attributes:
        omega_a: the projected ellipsoid on subsystem A.
        s_a: symplectic matrix of the embedded ball S_A(B_R).
        spectrum: symplectic eigenvalues of the shadow's shape matrix,
            descending; all are <= 1 up to numerical slack.
        volume_ratio: Vol(omega_a) / Vol(B_R), equal to 1/prod(spectrum);
            always >= 1 up to slack.
        entropy_increase: -sum(ln spectrum) in units of k_B; >= 0 up to
            slack, and 0 exactly when A and B do not mix.
    """

    omega_a: Ellipsoid
    s_a: np.ndarray
    spectrum: np.ndarray
    volume_ratio: float
    entropy_increase: float


def _logdet_spd(matrix: np.ndarray) -> float:
    chol = np.linalg.cholesky(matrix)
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def project_ball(
    s: np.ndarray,
    dims: Dimensions,
    radius: float = 1.0,
    center: np.ndarray | None = None,
    defect_gate: float | None = None,
    tol: Tolerances = TOLERANCES,
) -> ProjectionResult:
    """Project the symplectic ball S(B_R(center)) onto subsystem A.

    Args:
        s: symplectic 2n x 2n matrix in the (x_A, p_A, x_B, p_B) layout.
        dims: bipartite split with n_b >= 1.
        radius: ball radius R > 0.
        center: center of the source ball; the shadow is centered at the
            A-projection of S @ center.  Defaults to the origin.
        defect_gate: maximum accepted symplecticity defect of ``s``
            (defaults to the configured projection gate).

    Returns:
        :class:`ProjectionResult`; the shadow shape is the Schur complement
        of the BB block of P = (S S^T)^{-1} and the embedded ball comes from
        its Williamson decomposition.

    Raises:
        ValueError: non-symplectic input or invalid radius/split.
        SingularBlockError: numerically corrupt P_BB (cannot occur for a
            genuinely symplectic S).
    """
    s = np.asarray(s, dtype=float)
    if dims.n_b < 1:
        raise ValueError("projection needs a non-trivial subsystem B (n_b >= 1)")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    gate = tol.projection_input_defect if defect_gate is None else defect_gate
    defect = symplecticity_defect(s, dims)
    if defect > gate:
        raise ValueError(
            f"matrix is not symplectic for this layout (defect {defect:.3e} > {gate:g})"
        )

    p = spd_inverse(s @ s.T, tol=tol, what="S S^T")
    blocks = block_split(p, dims)
    shape_a = schur_complement(blocks, tol=tol)
    wd = williamson(shape_a, tol=tol)
    spectrum = wd.spectrum
    if spectrum[0] > 1.0 + tol.spectrum_slack:
        raise ValueError(
            f"largest symplectic eigenvalue {spectrum[0]:.12f} exceeds the "
            "non-squeezing bound; input matrix is numerically corrupt"
        )

    entropy = float(-np.sum(np.log(spectrum)))
    # determinant route: det(P/P_BB) det(P_BB) = 1 makes the shadow volume
    # ratio sqrt(det P_BB), i.e. the entropy is (1/2) ln det P_BB
    entropy_det = 0.5 * _logdet_spd(blocks.bb)
    if abs(entropy - entropy_det) > tol.cross_check * max(1.0, abs(entropy)):
        raise ArithmeticError(
            f"entropy cross-check failed: spectrum route {entropy!r} vs "
            f"determinant route {entropy_det!r}"
        )
    volume_ratio = float(np.exp(entropy))

    if center is None:
        center_a = np.zeros(2 * dims.n_a)
    else:
        center = np.asarray(center, dtype=float)
        if center.shape != (dims.dim,):
            raise ValueError(
                f"center length {center.shape} does not match phase-space dimension {dims.dim}"
            )
        center_a = (s @ center)[dims.a_slice]

    omega_a = Ellipsoid(center=center_a, shape=shape_a, radius=radius)
    return ProjectionResult(
        omega_a=omega_a,
        s_a=wd.s,
        spectrum=spectrum,
        volume_ratio=volume_ratio,
        entropy_increase=entropy,
    )


def containment_check(
    result: ProjectionResult,
    radius: float,
    samples: int,
    rng: np.random.Generator,
    tol: Tolerances = TOLERANCES,
) -> bool:
    """Monte-Carlo witness that the embedded ball sits inside the shadow.

    Draws points uniformly on the boundary sphere of B_R in subsystem A,
    maps them through the embedded ball's symplectic matrix, translates to
    the shadow center, and tests membership with the configured slack.

    Returns:
        True iff every sampled boundary point lies in ``result.omega_a``.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    dim = result.omega_a.dim
    raw = rng.standard_normal((samples, dim))
    norms = np.linalg.norm(raw, axis=1)
    norms[norms == 0.0] = 1.0
    sphere = radius * raw / norms[:, None]
    mapped = sphere @ result.s_a.T + result.omega_a.center
    slack = tol.containment_slack * max(1.0, radius**2)
    return bool(np.all(result.omega_a.contains(mapped, slack=slack)))


def shadow_area(
    s: np.ndarray,
    mode: int,
    radius: float = 1.0,
    tol: Tolerances = TOLERANCES,
) -> float:
    """Area of the shadow of S(B_R) on one (x_j, p_j) plane.

    The matrix is taken in the single-system layout (x_1..x_n, p_1..p_n)
    and ``mode`` is 0-based.  The area is always >= pi R^2 for symplectic S,
    with equality e.g. for any single-mode map of the plane itself.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2 != 0:
        raise ValueError(f"expected a square even-sided matrix, got shape {s.shape}")
    n = s.shape[0] // 2
    if not 0 <= mode < n:
        raise ValueError(f"mode {mode} out of range for n = {n}")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")

    # permute the chosen conjugate pair to the front, the rest behind
    order = [mode, n + mode] + [i for i in range(2 * n) if i not in (mode, n + mode)]
    p = spd_inverse(s @ s.T, tol=tol, what="S S^T")
    p = p[np.ix_(order, order)]
    if n == 1:
        shape = p
    else:
        shape = schur_complement(block_split(p, Dimensions(1, n - 1)), tol=tol)
    det = float(np.linalg.det(shape))
    return float(np.pi * radius**2 / np.sqrt(det))


def entropy_increase(spectrum: np.ndarray, tol: Tolerances = TOLERANCES) -> float:
    """Entropy increase -sum(ln lambda_j) in units of k_B.

    The spectrum must consist of positive values not exceeding 1 by more
    than the configured slack (the non-squeezing bound).
    """
    spectrum = np.atleast_1d(np.asarray(spectrum, dtype=float))
    if np.any(spectrum <= 0):
        raise ValueError("symplectic eigenvalues must be positive")
    if np.any(spectrum > 1.0 + tol.spectrum_slack):
        raise ValueError(
            f"spectrum exceeds the non-squeezing bound: max {spectrum.max()!r}"
        )
    return float(-np.sum(np.log(spectrum)))
