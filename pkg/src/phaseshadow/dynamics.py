"""Reference-orbit integration and the affine nearby-orbit propagator.

The orbit z_t solves Hamilton's equation zdot = J grad H(z, t); alongside it
the tangent map S_t(z_0) solves the variational equation
Sdot = J H''(z_t, t) S with S_0 = I.  Truncating H to second order around the
moving point z_t makes the flow exactly affine,
U_t(z_0): z -> z_t + S_t(z_0) (z - z_0), which this module represents as an
:class:`AffineFlow`.  The default integrator is the classic fixed-step
4th-order one-step scheme on the coupled (z, S) system; kinetic-plus-potential
models can instead use a leapfrog splitting whose tangent map is a product of
exactly symplectic factors.
"""

from dataclasses import dataclass

import numpy as np

from .config import TOLERANCES, Tolerances
from .core import Dimensions, Ellipsoid, reproject_symplectic, spd_inverse, symplectic_form
from .models import HamiltonianModel

__all__ = [
    "ReferenceOrbit",
    "AffineFlow",
    "DivergenceError",
    "local_hamiltonian",
    "integrate_orbit",
    "flow_at",
    "apply_flow",
    "evolve_ball",
    "flow_generator",
]


class DivergenceError(RuntimeError):
    """The integration produced a non-finite state."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class ReferenceOrbit:
    """Sampled reference orbit with its tangent maps.

    ``points[k]`` is z at ``times[k]``; ``monodromy[k]`` is S_{t_k}(z_0)
    with ``monodromy[0] = I``.
    """

    times: np.ndarray
    points: np.ndarray
    monodromy: np.ndarray
    z0: np.ndarray
    dims: Dimensions

    def knot(self, t: float) -> int:
        """Index of the grid knot nearest to t (t must lie in range)."""
        times = self.times
        if t < times[0] - 1e-12 or t > times[-1] + 1e-12:
            raise ValueError(
                f"time {t} outside the orbit range [{times[0]}, {times[-1]}]"
            )
        return int(np.argmin(np.abs(times - t)))

    def max_defect(self) -> float:
        j = symplectic_form(self.dims)
        return float(
            max(
                np.abs(s.T @ j @ s - j).max() for s in self.monodromy
            )
        )


@dataclass(frozen=True)
class AffineFlow:
    """The affine propagator z -> z_t + S_t (z - z_0) at one time."""

    z0: np.ndarray
    z_t: np.ndarray
    s_t: np.ndarray
    time: float


def local_hamiltonian(
    model: HamiltonianModel,
    z_ref: np.ndarray,
    t: float = 0.0,
    hessian_at: np.ndarray | None = None,
) -> HamiltonianModel:
    """Second-order Taylor model of H around the point ``z_ref``.

    Value, gradient and Hessian agree exactly with the source model at
    ``z_ref``; for quadratic models the expansion reproduces H everywhere.
    ``hessian_at`` freezes the Hessian at a different point (typically the
    initial point z_0), trading accuracy for fewer Hessian evaluations.
    """
    z_ref = np.asarray(z_ref, dtype=float)
    h0 = model.value(z_ref, t)
    g0 = model.gradient(z_ref, t)
    hess = model.hessian(z_ref if hessian_at is None else hessian_at, t)
    hess = 0.5 * (hess + hess.T)

    def value(z, t2, _z=z_ref, _h0=h0, _g=g0, _hess=hess):
        d = z - _z
        return _h0 + _g @ d + 0.5 * d @ _hess @ d

    def gradient(z, t2, _z=z_ref, _g=g0, _hess=hess):
        return _g + _hess @ (z - _z)

    def hessian(z, t2, _hess=hess):
        return _hess

    return HamiltonianModel(model.dims, value, gradient, hessian, kind="quadratic-constant")


def _check_grid(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.shape[0] < 2:
        raise ValueError("time grid needs at least two knots")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return times


def _rk4_step(model, j, t, h, z, s, hess_point):
    def rhs(t_stage, z_stage, s_stage):
        hess = model.hessian(z_stage if hess_point is None else hess_point, t_stage)
        return j @ model.gradient(z_stage, t_stage), j @ hess @ s_stage

    k1z, k1s = rhs(t, z, s)
    k2z, k2s = rhs(t + 0.5 * h, z + 0.5 * h * k1z, s + 0.5 * h * k1s)
    k3z, k3s = rhs(t + 0.5 * h, z + 0.5 * h * k2z, s + 0.5 * h * k2s)
    k4z, k4s = rhs(t + h, z + h * k3z, s + h * k3s)
    z_new = z + (h / 6.0) * (k1z + 2 * k2z + 2 * k3z + k4z)
    s_new = s + (h / 6.0) * (k1s + 2 * k2s + 2 * k3s + k4s)
    return z_new, s_new


def _leapfrog_step(model, dims, t, h, z, s, hess_point):
    split = model.split
    xi, pi = dims.x_indices, dims.p_indices
    n = dims.n
    x, p = z[xi].copy(), z[pi].copy()

    def v_hess(x_now, t_now):
        if hess_point is None:
            return split.potential_hessian(x_now, t_now)
        return split.potential_hessian(hess_point[xi], t_now)

    hess_old = v_hess(x, t)
    p = p - 0.5 * h * split.potential_gradient(x, t)
    x = x + h * (split.mass_inv @ p)
    t_new = t + h
    hess_new = v_hess(x, t_new)
    p = p - 0.5 * h * split.potential_gradient(x, t_new)

    z_new = np.empty_like(z)
    z_new[xi], z_new[pi] = x, p

    # tangent map: kick(t+h) . drift . kick(t), each factor exactly symplectic
    def kick(hess):
        f = np.eye(2 * n)
        f[np.ix_(pi, xi)] = -0.5 * h * hess
        return f

    drift = np.eye(2 * n)
    drift[np.ix_(xi, pi)] = h * split.mass_inv
    s_new = kick(hess_new) @ drift @ kick(hess_old) @ s
    return z_new, s_new


def integrate_orbit(
    model: HamiltonianModel,
    z0: np.ndarray,
    times,
    scheme: str = "rk4",
    reproject: bool = False,
    frozen_hessian: bool = False,
    tol: Tolerances = TOLERANCES,
) -> ReferenceOrbit:
    """Integrate the reference orbit and its tangent maps over a time grid.

    Args:
        model: Hamiltonian model supplying gradient and Hessian evaluators.
        z0: initial phase point.
        times: strictly increasing grid; integration steps knot to knot.
        scheme: ``rk4`` (any model) or ``leapfrog``
            (kinetic-plus-potential models only).
        reproject: when True, project the tangent map back onto the
            symplectic group whenever its defect exceeds the configured
            trigger.
        frozen_hessian: evaluate the Hessian at z_0 instead of along the
            orbit (cheaper, less accurate local model).

    Raises:
        DivergenceError: the state left the finite range; carries the
            failure time.
    """
    times = _check_grid(times)
    dims = model.dims
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (dims.dim,):
        raise ValueError(f"z0 length {z0.shape} does not match dims (2n = {dims.dim})")
    if scheme not in ("rk4", "leapfrog"):
        raise ValueError(f"unknown scheme {scheme!r}; expected 'rk4' or 'leapfrog'")
    if scheme == "leapfrog" and model.split is None:
        raise ValueError("leapfrog needs a kinetic-plus-potential model")

    j = symplectic_form(dims)
    hess_point = z0 if frozen_hessian else None
    k_total = times.shape[0]
    points = np.empty((k_total, dims.dim))
    monodromy = np.empty((k_total, dims.dim, dims.dim))
    z = z0.copy()
    s = np.eye(dims.dim)
    points[0] = z
    monodromy[0] = s

    # for a constant-Hessian quadratic model the coupled system is linear
    # with zdot = A z, Sdot = A S, and the classic 4th-order step is exactly
    # one multiplication by the degree-4 Taylor polynomial of exp(h A)
    linear_step = None
    if scheme == "rk4" and model.kind == "quadratic-constant":
        a_mat = j @ model.hessian(z0, float(times[0]))

        def linear_step(h, _cache={}):
            phi = _cache.get(h)
            if phi is None:
                ha = h * a_mat
                phi = np.eye(dims.dim) + ha
                term = ha
                for order in (2.0, 3.0, 4.0):
                    term = term @ ha / order
                    phi = phi + term
                _cache[h] = phi
            return phi

    with np.errstate(all="ignore"):
        for k in range(1, k_total):
            t, h = times[k - 1], times[k] - times[k - 1]
            if linear_step is not None:
                phi = linear_step(h)
                z = phi @ z
                s = phi @ s
            elif scheme == "rk4":
                z, s = _rk4_step(model, j, t, h, z, s, hess_point)
            else:
                z, s = _leapfrog_step(model, dims, t, h, z, s, hess_point)
            if not (np.all(np.isfinite(z)) and np.all(np.isfinite(s))):
                raise DivergenceError(
                    f"orbit diverged near t = {times[k]:.6g}", time=float(times[k])
                )
            if reproject:
                defect = np.abs(s.T @ j @ s - j).max()
                if defect > tol.reproject_trigger:
                    s = reproject_symplectic(s, dims, target=tol.reproject_target)
            points[k] = z
            monodromy[k] = s

    return ReferenceOrbit(times=times, points=points, monodromy=monodromy, z0=z0, dims=dims)


def flow_at(orbit: ReferenceOrbit, t: float) -> AffineFlow:
    """Affine propagator at the grid knot nearest to t (no interpolation).

    The snapped knot time is reported in the returned flow.
    """
    k = orbit.knot(t)
    return AffineFlow(
        z0=orbit.z0,
        z_t=orbit.points[k].copy(),
        s_t=orbit.monodromy[k].copy(),
        time=float(orbit.times[k]),
    )


def apply_flow(flow: AffineFlow, z: np.ndarray) -> np.ndarray:
    """Evaluate z_t + S_t (z - z_0); exact for quadratic Hamiltonians."""
    z = np.asarray(z, dtype=float)
    if z.shape != flow.z0.shape:
        raise ValueError(f"point shape {z.shape} does not match flow dimension {flow.z0.shape}")
    return flow.z_t + flow.s_t @ (z - flow.z0)


def evolve_ball(flow: AffineFlow, radius: float, tol: Tolerances = TOLERANCES) -> Ellipsoid:
    """Image of the ball B_R(z_0) under the affine flow.

    The result is the ellipsoid centered at z_t with shape (S_t S_t^T)^{-1};
    it has the same volume as the ball.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    shape = spd_inverse(flow.s_t @ flow.s_t.T, tol=tol, what="S S^T")
    return Ellipsoid(center=flow.z_t.copy(), shape=shape, radius=radius)


def flow_generator(times, s_path, k: int) -> tuple[np.ndarray, float]:
    """Quadratic generator of a symplectic path by central differences.

    For a smooth symplectic path S(t), the matrix Q = -J Sdot S^{-1} is
    symmetric and generates the path through zdot = J Q z.  The derivative is
    approximated with a central difference at knot ``k``, so at least the
    knots k-1, k, k+1 must exist and the result carries an O(h^2) error.

    Returns:
        ``(q, asymmetry)`` with q symmetrized and ``asymmetry`` the max-entry
        antisymmetric part of the raw product, as a finite-difference
        diagnostic.
    """
    times = np.asarray(times, dtype=float)
    s_path = np.asarray(s_path, dtype=float)
    if s_path.ndim != 3 or s_path.shape[0] != times.shape[0]:
        raise ValueError("s_path must stack one square matrix per knot")
    if not 1 <= k <= times.shape[0] - 2:
        raise ValueError(
            f"knot {k} needs neighbors on both sides (grid has {times.shape[0]} knots)"
        )
    span = times[k + 1] - times[k - 1]
    s_dot = (s_path[k + 1] - s_path[k - 1]) / span
    j = symplectic_form(s_path.shape[1] // 2)
    raw = -j @ s_dot @ np.linalg.inv(s_path[k])
    asymmetry = float(np.abs(raw - raw.T).max())
    return 0.5 * (raw + raw.T), asymmetry
