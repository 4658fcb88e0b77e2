"""Gaussian Wigner states in covariance form and subsystem evolution.

A state is (mean, Sigma, hbar) with Sigma symmetric positive definite and
subject to the quantum condition: all symplectic eigenvalues of
(2/hbar) Sigma at least 1.  Purity, partial traces and propagation under
affine symplectic flows are closed-form operations on (mean, Sigma); the
normalization prefactor of the density is never materialized except by
:func:`density`, which exists for quadrature oracles.

``subsystem_evolution`` runs the full pipeline: integrate the reference
orbit of a model, form P_t = (S_t S_t^T)^{-1} per knot, reduce to subsystem A
by the Schur complement, and record purity, entropy and capacity time
series.  The purity is computed as 1/sqrt(det P_BB) and cross-checked
against sqrt(det M_A) at every knot.
"""

from dataclasses import dataclass

import numpy as np

from .config import TOLERANCES, Tolerances
from .core import (
    Dimensions,
    SingularBlockError,
    block_split,
    check_symmetric,
    schur_complement,
    spd_inverse,
    symplectic_form,
    symplecticity_defect,
)
from .dynamics import AffineFlow, DivergenceError, integrate_orbit
from .models import HamiltonianModel
from .williamson import quantum_condition, symplectic_eigenvalues_stack

__all__ = [
    "GaussianState",
    "SubsystemTrace",
    "state_from_symplectic_ball",
    "shape_from_xy",
    "purity",
    "partial_trace",
    "propagate",
    "density",
    "subsystem_evolution",
]

# |S S^T| beyond which subsystem observables are declared divergent; for
# symplectic S the condition number of S S^T is its squared magnitude, so
# this keeps the inversions well-posed (and purities above ~1e-7)
_GRAM_LIMIT = 1e7
# |S S^T| above which a failed purity cross-check counts as conditioning
# breakdown (divergence) rather than an internal error
_CROSSCHECK_TRUST = 1e4


class GaussianState:
    """Gaussian Wigner state (mean, covariance, hbar).

    ``dims`` names the bipartite layout of the coordinates (defaults to a
    monopartite system of the right size).  Construction validates symmetry,
    positive definiteness and the quantum condition; ``check=False`` skips
    the quantum condition for classical workflows (covariances of evolved
    balls without quantum semantics).
    """

    def __init__(
        self,
        mean,
        covariance,
        hbar: float = 1.0,
        dims: Dimensions | None = None,
        *,
        check: bool = True,
        tol: Tolerances = TOLERANCES,
    ):
        if not hbar > 0:
            raise ValueError(f"hbar must be positive, got {hbar}")
        covariance = check_symmetric(covariance, tol=tol, what="covariance")
        if np.linalg.eigvalsh(covariance)[0] <= 0:
            raise ValueError("covariance must be positive definite")
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        if mean.shape != (covariance.shape[0],):
            raise ValueError(
                f"mean length {mean.shape} does not match covariance side {covariance.shape[0]}"
            )
        if dims is None:
            dims = Dimensions(covariance.shape[0] // 2, 0)
        elif dims.dim != covariance.shape[0]:
            raise ValueError(
                f"dims (2n = {dims.dim}) do not match covariance side {covariance.shape[0]}"
            )
        if check:
            ok, margin = quantum_condition(covariance, hbar, dims=dims, tol=tol)
            if not ok:
                raise ValueError(
                    f"covariance violates the quantum condition (margin {margin:.3e})"
                )
        self.mean = mean
        self.covariance = covariance
        self.hbar = float(hbar)
        self.dims = dims

    @property
    def n(self) -> int:
        return self.covariance.shape[0] // 2

    def shape_matrix(self, tol: Tolerances = TOLERANCES) -> np.ndarray:
        """M = (hbar/2) Sigma^{-1}, the Wigner-ellipsoid shape matrix."""
        return 0.5 * self.hbar * spd_inverse(self.covariance, tol=tol, what="covariance")


def state_from_symplectic_ball(
    s: np.ndarray,
    center=None,
    hbar: float = 1.0,
    dims: Dimensions | None = None,
    tol: Tolerances = TOLERANCES,
) -> GaussianState:
    """Pure Gaussian state whose Wigner ellipsoid is S(B_sqrt(hbar)).

    The covariance is Sigma = (hbar/2) S S^T; the identity gives the
    standard coherent state.  ``dims`` fixes the layout of the symplectic
    form used to validate ``s`` (single-system by default).
    """
    s = np.asarray(s, dtype=float)
    defect = symplecticity_defect(s, dims)
    if defect > tol.symplectic_defect:
        raise ValueError(f"matrix is not symplectic (defect {defect:.3e})")
    if center is None:
        center = np.zeros(s.shape[0])
    return GaussianState(center, 0.5 * hbar * (s @ s.T), hbar, dims=dims, tol=tol)


def shape_from_xy(x_block: np.ndarray, y_block: np.ndarray, tol: Tolerances = TOLERANCES) -> np.ndarray:
    """Symmetric symplectic shape G = R^T R of a complex-width wavepacket.

    For a Gaussian wavefunction with width matrix X + iY (X SPD, Y
    symmetric), R = [[X^{1/2}, 0], [X^{-1/2} Y, X^{-1/2}]] and G = R^T R is
    symmetric, positive definite and symplectic with det G = 1.
    """
    x_block = check_symmetric(x_block, tol=tol, what="X")
    y_block = check_symmetric(y_block, tol=tol, what="Y")
    if x_block.shape != y_block.shape:
        raise ValueError("X and Y must have equal shapes")
    w, v = np.linalg.eigh(x_block)
    if w[0] <= 0:
        raise ValueError("X must be positive definite")
    x_root = (v * np.sqrt(w)) @ v.T
    x_root_inv = (v / np.sqrt(w)) @ v.T
    n = x_block.shape[0]
    r = np.block([[x_root, np.zeros((n, n))], [x_root_inv @ y_block, x_root_inv]])
    g = r.T @ r
    return 0.5 * (g + g.T)


def purity(state: GaussianState) -> float:
    """mu = (hbar/2)^n det(Sigma)^{-1/2}; equals 1 iff the state is pure."""
    sign, logdet = np.linalg.slogdet(state.covariance)
    if sign <= 0:
        raise ValueError("covariance must have positive determinant")
    return float(np.exp(state.n * np.log(0.5 * state.hbar) - 0.5 * logdet))


def partial_trace(state: GaussianState, dims: Dimensions | None = None, tol: Tolerances = TOLERANCES) -> GaussianState:
    """Reduced Gaussian state of subsystem A.

    Marginalizing the Wigner density over z_B reduces the shape matrix
    M = (hbar/2) Sigma^{-1} to its Schur complement M/M_BB, so the reduced
    covariance is the AA block of Sigma.  Both routes are computed and must
    agree to the configured block-identity tolerance; the reduced state
    always satisfies the quantum condition.  ``dims`` defaults to the
    state's own layout.
    """
    if dims is None:
        dims = state.dims
    if state.covariance.shape[0] != dims.dim:
        raise ValueError(
            f"state dimension {state.covariance.shape[0]} does not match dims (2n = {dims.dim})"
        )
    if dims.n_b < 1:
        raise ValueError("partial trace needs a non-trivial subsystem B")
    m = state.shape_matrix(tol=tol)
    m_a = schur_complement(block_split(m, dims), tol=tol)
    sigma_a = 0.5 * state.hbar * spd_inverse(m_a, tol=tol, what="reduced shape")
    sigma_aa = state.covariance[dims.a_slice, dims.a_slice]
    mismatch = np.abs(sigma_a - sigma_aa).max()
    if mismatch > tol.block_identity * max(1.0, np.abs(sigma_aa).max()):
        raise ArithmeticError(
            f"Schur-inverse identity violated (mismatch {mismatch:.3e}); "
            "covariance is numerically corrupt"
        )
    return GaussianState(state.mean[dims.a_slice], sigma_a, state.hbar, tol=tol)


def propagate(state: GaussianState, flow: AffineFlow, tol: Tolerances = TOLERANCES) -> GaussianState:
    """Push a Gaussian state through an affine symplectic flow.

    The mean follows the flow and the covariance maps to S Sigma S^T;
    purity is invariant.
    """
    if flow.z0.shape != state.mean.shape:
        raise ValueError("flow dimension does not match the state")
    mean = flow.z_t + flow.s_t @ (state.mean - flow.z0)
    cov = flow.s_t @ state.covariance @ flow.s_t.T
    return GaussianState(mean, 0.5 * (cov + cov.T), state.hbar, dims=state.dims, tol=tol)


def density(state: GaussianState, points: np.ndarray) -> np.ndarray:
    """Normalized Wigner density at the given points (quadrature oracle aid)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = pts - state.mean
    sigma_inv = np.linalg.inv(state.covariance)
    q = np.einsum("...i,ij,...j->...", d, sigma_inv, d)
    sign, logdet = np.linalg.slogdet(state.covariance)
    n = state.covariance.shape[0] // 2
    norm = np.exp(-n * np.log(2.0 * np.pi) - 0.5 * logdet)
    out = norm * np.exp(-0.5 * q)
    return out if np.asarray(points).ndim > 1 else float(out[0])


@dataclass(frozen=True)
class SubsystemTrace:
    """Per-knot subsystem observables along a reference orbit.

    ``shapes[k]`` is the reduced shape matrix M_{A,t_k}; ``spectra[k]`` its
    symplectic eigenvalues (descending).  ``entropy_kb`` is -2 ln(purity) in
    units of k_B and ``capacity`` the symplectic capacity of the reduced
    covariance ellipsoid, never below pi hbar.
    """

    times: np.ndarray
    points: np.ndarray
    shapes: np.ndarray
    spectra: np.ndarray
    purity: np.ndarray
    entropy_kb: np.ndarray
    capacity: np.ndarray
    defects: np.ndarray
    hbar: float
    dims: Dimensions


def subsystem_evolution(
    model: HamiltonianModel,
    z0: np.ndarray,
    times,
    hbar: float = 1.0,
    scheme: str = "rk4",
    reproject: bool = False,
    frozen_hessian: bool = False,
    initial_ball: np.ndarray | None = None,
    tol: Tolerances = TOLERANCES,
) -> SubsystemTrace:
    """Semiclassical time series of subsystem A for a coherent initial state.

    Starting from the coherent state at z_0 (Wigner ellipsoid = ball of
    radius sqrt(hbar)), the nearby-orbit propagator keeps the total state
    Gaussian with covariance (hbar/2) S_t S_t^T.  Per knot this computes
    P_t = (S_t S_t^T)^{-1}, the reduced shape M_{A,t} = P_t / P_{BB,t}, the
    purity 1/sqrt(det P_BB) (cross-checked against sqrt(det M_A)), the
    entropy -2 ln(purity) and the capacity of the reduced ellipsoid.

    ``initial_ball`` optionally replaces the coherent state by the pure
    Gaussian with Wigner ellipsoid S_0(B_sqrt(hbar)); this extension is
    validated by internal consistency only.
    """
    dims = model.dims
    if dims.n_b < 1:
        raise ValueError("subsystem evolution needs a non-trivial subsystem B")
    if not hbar > 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    orbit = integrate_orbit(
        model, z0, times, scheme=scheme, reproject=reproject,
        frozen_hessian=frozen_hessian, tol=tol,
    )
    g0 = None
    if initial_ball is not None:
        initial_ball = np.asarray(initial_ball, dtype=float)
        defect = symplecticity_defect(initial_ball, dims)
        if defect > tol.symplectic_defect:
            raise ValueError(f"initial ball matrix is not symplectic (defect {defect:.3e})")
        g0 = initial_ball @ initial_ball.T

    j = symplectic_form(dims)
    a, b = dims.a_slice, dims.b_slice
    s_stack = orbit.monodromy
    s_t = np.swapaxes(s_stack, 1, 2)
    with np.errstate(over="ignore", invalid="ignore"):
        gram = s_stack @ s_t if g0 is None else s_stack @ g0 @ s_t

    # the observables stop being computable once the tangent map's Gram
    # matrix leaves the numerically trustworthy range (strong instability,
    # where the local-quadratic approximation has broken down anyway)
    mag = np.abs(gram).max(axis=(1, 2))
    good = np.isfinite(mag) & (mag <= _GRAM_LIMIT)
    k_stop = int(np.argmin(good)) if not good.all() else gram.shape[0]
    if k_stop == 0:
        raise DivergenceError(
            f"tangent map unusable at t = {orbit.times[0]:.6g}", time=float(orbit.times[0])
        )
    gram = gram[:k_stop]

    try:
        p = np.linalg.inv(gram)
        # the Schur complement P/P_BB equals the inverse of the AA block of
        # P^{-1} = S S^T (block-inverse identity)
        shapes = np.linalg.inv(gram[:, a, a])
    except np.linalg.LinAlgError as exc:
        raise SingularBlockError(f"degenerate tangent map along the orbit: {exc}") from exc
    shapes = 0.5 * (shapes + np.swapaxes(shapes, 1, 2))
    p_bb = p[:, b, b]
    p_bb = 0.5 * (p_bb + np.swapaxes(p_bb, 1, 2))

    # purity route 1: 1/sqrt(det P_BB) from the blocks of P
    w_bb = np.linalg.eigvalsh(p_bb)
    w_aa = np.linalg.eigvalsh(shapes)
    mu = np.where(w_bb[:, 0] > 0, np.exp(-0.5 * np.sum(np.log(np.abs(w_bb)), axis=1)), np.nan)
    # purity route 2: sqrt(det M_A) from the reduced shape matrix
    sign, logdet_ma = np.linalg.slogdet(shapes)
    mu_det = np.where(sign > 0, np.exp(0.5 * logdet_ma), np.nan)
    gap = np.abs(mu - mu_det) / np.maximum(1.0, np.abs(mu))
    healthy = (w_bb[:, 0] > 0) & (w_aa[:, 0] > 0) & np.isfinite(gap) & (gap <= tol.cross_check)
    if not healthy.all():
        k_bad = int(np.argmin(healthy))
        s_bad = s_stack[k_bad]
        defect_bad = np.abs(s_bad.T @ j @ s_bad - j).max()
        if mag[k_bad] > _CROSSCHECK_TRUST or defect_bad > tol.cross_check:
            # explained by conditioning or by loss of symplecticity in the
            # integration: report as divergence, not as an internal error
            raise DivergenceError(
                f"subsystem observables lost accuracy at t = {orbit.times[k_bad]:.6g}",
                time=float(orbit.times[k_bad]),
            )
        raise ArithmeticError(
            f"purity cross-check failed at t = {orbit.times[k_bad]:.6g}: "
            f"{mu[k_bad]!r} vs {mu_det[k_bad]!r}"
        )
    if k_stop < s_stack.shape[0]:
        raise DivergenceError(
            f"tangent map unusable at t = {orbit.times[k_stop]:.6g}",
            time=float(orbit.times[k_stop]),
        )

    spectra = symplectic_eigenvalues_stack(shapes)
    capacity = np.pi * hbar / spectra[:, 0]
    defects = np.abs(s_t @ j @ s_stack - j).max(axis=(1, 2))

    return SubsystemTrace(
        times=orbit.times,
        points=orbit.points,
        shapes=shapes,
        spectra=spectra,
        purity=mu,
        entropy_kb=-2.0 * np.log(mu),
        capacity=capacity,
        defects=defects,
        hbar=float(hbar),
        dims=dims,
    )
