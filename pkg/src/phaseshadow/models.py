"""Hamiltonian models: evaluators for H, grad H and the Hessian H''.

A model bundles the bipartite split with callables ``value(z, t)``,
``gradient(z, t)`` and ``hessian(z, t)`` over phase points in the
(x_A, p_A, x_B, p_B) layout.  Models of the physical form
H = p m^{-1} p / 2 + V(x, t) additionally carry a :class:`KineticPotential`
split record, which enables the leapfrog integrator.

The bundled catalog covers the desk-scale systems used by the tests and the
CLI: free particle, harmonic modes, two linearly coupled oscillators, a
quartic oscillator and a one-mode-to-bath bilinear coupling.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Dimensions, check_symmetric

__all__ = [
    "HamiltonianModel",
    "KineticPotential",
    "quadratic_model",
    "quadratic_kinetic_potential",
    "kinetic_potential_model",
    "custom_model",
    "free_particle",
    "harmonic_oscillator",
    "coupled_oscillators",
    "quartic_oscillator",
    "bilinear_bath",
    "catalog_model",
    "CATALOG",
]


@dataclass(frozen=True)
class KineticPotential:
    """Structure record for H = p m^{-1} p / 2 + V(x, t)."""

    mass_inv: np.ndarray
    potential: Callable
    potential_gradient: Callable
    potential_hessian: Callable


class HamiltonianModel:
    """Evaluators for a Hamiltonian on a bipartite phase space.

    ``kind`` is one of ``quadratic-constant``, ``quadratic-time-dependent``,
    ``kinetic-plus-potential`` or ``custom``.
    """

    def __init__(self, dims: Dimensions, value, gradient, hessian, kind: str = "custom", split: KineticPotential | None = None):
        self.dims = dims
        self._value = value
        self._gradient = gradient
        self._hessian = hessian
        self.kind = kind
        self.split = split

    def value(self, z: np.ndarray, t: float = 0.0) -> float:
        return float(self._value(np.asarray(z, dtype=float), t))

    def gradient(self, z: np.ndarray, t: float = 0.0) -> np.ndarray:
        return np.asarray(self._gradient(np.asarray(z, dtype=float), t), dtype=float)

    def hessian(self, z: np.ndarray, t: float = 0.0) -> np.ndarray:
        return np.asarray(self._hessian(np.asarray(z, dtype=float), t), dtype=float)


def quadratic_model(dims: Dimensions, matrix, kind: str | None = None) -> HamiltonianModel:
    """H(z, t) = z M(t) z / 2 for a constant or time-dependent symmetric M."""
    if callable(matrix):
        mat_of_t = lambda t: check_symmetric(matrix(t), what="quadratic form")
        return HamiltonianModel(
            dims,
            value=lambda z, t: 0.5 * z @ mat_of_t(t) @ z,
            gradient=lambda z, t: mat_of_t(t) @ z,
            hessian=lambda z, t: mat_of_t(t),
            kind=kind or "quadratic-time-dependent",
        )
    const = check_symmetric(matrix, what="quadratic form")
    if const.shape != (dims.dim, dims.dim):
        raise ValueError(f"quadratic form shape {const.shape} does not match dims")
    return HamiltonianModel(
        dims,
        value=lambda z, t: 0.5 * z @ const @ z,
        gradient=lambda z, t: const @ z,
        hessian=lambda z, t: const,
        kind=kind or "quadratic-constant",
    )


def _mass_matrix(n: int, mass) -> np.ndarray:
    mass = np.asarray(mass, dtype=float)
    if mass.ndim == 0:
        mass = np.eye(n) * float(mass)
    elif mass.ndim == 1:
        mass = np.diag(mass)
    mass = check_symmetric(mass, what="mass matrix")
    if np.linalg.eigvalsh(mass)[0] <= 0:
        raise ValueError("mass matrix must be positive definite")
    return mass


def quadratic_kinetic_potential(dims: Dimensions, mass, spring) -> HamiltonianModel:
    """H = p m^{-1} p / 2 + x K x / 2 with constant mass and spring matrices.

    Builds the constant phase-space Hessian once, so evaluations are single
    matrix products; the kinetic-plus-potential split is attached for the
    leapfrog integrator.
    """
    n = dims.n
    mass = _mass_matrix(n, mass)
    mass_inv = np.linalg.inv(mass)
    spring = check_symmetric(spring, what="spring matrix")
    if spring.shape != (n, n):
        raise ValueError(f"spring matrix shape {spring.shape} does not match n = {n}")
    full = np.zeros((2 * n, 2 * n))
    xi, pi = dims.x_indices, dims.p_indices
    full[np.ix_(xi, xi)] = spring
    full[np.ix_(pi, pi)] = mass_inv
    split = KineticPotential(
        mass_inv,
        potential=lambda x, t: 0.5 * x @ spring @ x,
        potential_gradient=lambda x, t: spring @ x,
        potential_hessian=lambda x, t: spring,
    )
    model = quadratic_model(dims, full, kind="quadratic-constant")
    model.split = split
    return model


def kinetic_potential_model(
    dims: Dimensions,
    mass,
    potential,
    potential_gradient,
    potential_hessian,
    kind: str = "kinetic-plus-potential",
) -> HamiltonianModel:
    """Assemble H = p m^{-1} p / 2 + V(x, t) in the phase-space layout.

    ``mass`` is a scalar, a length-n diagonal or an SPD n x n matrix; the
    potential callables take (x, t) with x in mode order.
    """
    n = dims.n
    mass = _mass_matrix(n, mass)
    mass_inv = np.linalg.inv(mass)
    xi, pi = dims.x_indices, dims.p_indices

    def value(z, t):
        x, p = z[xi], z[pi]
        return 0.5 * p @ mass_inv @ p + potential(x, t)

    def gradient(z, t):
        g = np.zeros_like(z)
        g[xi] = potential_gradient(z[xi], t)
        g[pi] = mass_inv @ z[pi]
        return g

    def hessian(z, t):
        h = np.zeros((2 * n, 2 * n))
        h[np.ix_(xi, xi)] = potential_hessian(z[xi], t)
        h[np.ix_(pi, pi)] = mass_inv
        return h

    split = KineticPotential(mass_inv, potential, potential_gradient, potential_hessian)
    return HamiltonianModel(dims, value, gradient, hessian, kind=kind, split=split)


def custom_model(dims: Dimensions, value, gradient, hessian=None, fd_step: float = 1e-6) -> HamiltonianModel:
    """Model from explicit callables; the Hessian may be finite-differenced.

    Without an analytic ``hessian``, central differences of the gradient with
    step ``fd_step * max(1, |z|_inf)`` are used and the result symmetrized.
    """
    if hessian is None:

        def hessian(z, t, _grad=gradient, _h=fd_step):
            z = np.asarray(z, dtype=float)
            step = _h * max(1.0, np.abs(z).max())
            dim = z.shape[0]
            out = np.empty((dim, dim))
            for i in range(dim):
                zp = z.copy()
                zm = z.copy()
                zp[i] += step
                zm[i] -= step
                out[:, i] = (np.asarray(_grad(zp, t)) - np.asarray(_grad(zm, t))) / (2 * step)
            return 0.5 * (out + out.T)

    return HamiltonianModel(dims, value, gradient, hessian, kind="custom")


def free_particle(dims: Dimensions, mass=1.0) -> HamiltonianModel:
    """H = p m^{-1} p / 2."""
    return quadratic_kinetic_potential(dims, mass, np.zeros((dims.n, dims.n)))


def harmonic_oscillator(dims: Dimensions, omegas=None, mass=1.0) -> HamiltonianModel:
    """n independent modes H = sum p_k^2/2m + m omega_k^2 x_k^2 / 2."""
    n = dims.n
    if omegas is None:
        omegas = np.ones(n)
    omegas = np.broadcast_to(np.asarray(omegas, dtype=float), (n,)).copy()
    mass = float(mass)
    return quadratic_kinetic_potential(dims, mass, np.diag(mass * omegas**2))


def coupled_oscillators(epsilon: float, omega_a: float = 1.0, omega_b: float = 1.0) -> HamiltonianModel:
    """Two unit-mass modes with bilinear coupling epsilon x_A x_B.

    H = (p_A^2 + omega_A^2 x_A^2)/2 + (p_B^2 + omega_B^2 x_B^2)/2
        + epsilon x_A x_B, on dims (1, 1).
    """
    dims = Dimensions(1, 1)
    spring = np.array([[omega_a**2, epsilon], [epsilon, omega_b**2]])
    return quadratic_kinetic_potential(dims, 1.0, spring)


def quartic_oscillator(mass: float = 1.0, stiffness: float = 1.0) -> HamiltonianModel:
    """Single anharmonic mode H = p^2/2m + stiffness x^4/4 on dims (1, 0)."""
    dims = Dimensions(1, 0)
    return kinetic_potential_model(
        dims,
        mass,
        potential=lambda x, t: 0.25 * stiffness * float(x[0]) ** 4,
        potential_gradient=lambda x, t: stiffness * x**3,
        potential_hessian=lambda x, t: np.array([[3.0 * stiffness * float(x[0]) ** 2]]),
    )


def bilinear_bath(
    n_bath: int,
    omega_a: float = 1.0,
    bath_omegas=None,
    couplings=None,
) -> HamiltonianModel:
    """One A-mode linearly coupled to ``n_bath`` harmonic bath modes.

    H = (p_A^2 + omega_A^2 x_A^2)/2 + sum_k (p_k^2 + omega_k^2 x_k^2)/2
        + sum_k c_k x_A x_k, on dims (1, n_bath).
    """
    if n_bath < 1:
        raise ValueError(f"n_bath must be >= 1, got {n_bath}")
    dims = Dimensions(1, n_bath)
    if bath_omegas is None:
        bath_omegas = 1.0 + 0.5 * np.arange(1, n_bath + 1) / n_bath
    bath_omegas = np.broadcast_to(np.asarray(bath_omegas, dtype=float), (n_bath,))
    if couplings is None:
        couplings = np.full(n_bath, 0.1)
    couplings = np.broadcast_to(np.asarray(couplings, dtype=float), (n_bath,))

    spring = np.diag(np.concatenate([[omega_a**2], bath_omegas**2]))
    spring[0, 1:] = couplings
    spring[1:, 0] = couplings
    return quadratic_kinetic_potential(dims, 1.0, spring)


def _build_free(dims, params):
    return free_particle(dims, mass=params.get("mass", 1.0))


def _build_harmonic(dims, params):
    omegas = params.get("omegas")
    if omegas is None and "omega" in params:
        omegas = np.full(dims.n, params["omega"])
    return harmonic_oscillator(dims, omegas=omegas, mass=params.get("mass", 1.0))


def _build_coupled(dims, params):
    if (dims.n_a, dims.n_b) != (1, 1):
        raise ValueError("coupled_oscillators requires n_A = n_B = 1")
    return coupled_oscillators(
        epsilon=params.get("epsilon", 0.0),
        omega_a=params.get("omega_a", 1.0),
        omega_b=params.get("omega_b", 1.0),
    )


def _build_quartic(dims, params):
    if (dims.n_a, dims.n_b) != (1, 0):
        raise ValueError("quartic_oscillator requires n_A = 1, n_B = 0")
    return quartic_oscillator(
        mass=params.get("mass", 1.0), stiffness=params.get("stiffness", 1.0)
    )


def _build_bath(dims, params):
    if dims.n_a != 1 or dims.n_b < 1:
        raise ValueError("bilinear_bath requires n_A = 1 and n_B >= 1")
    return bilinear_bath(
        dims.n_b,
        omega_a=params.get("omega_a", 1.0),
        bath_omegas=params.get("bath_omegas"),
        couplings=params.get("couplings"),
    )


CATALOG = {
    "free_particle": _build_free,
    "harmonic_oscillator": _build_harmonic,
    "coupled_oscillators": _build_coupled,
    "quartic_oscillator": _build_quartic,
    "bilinear_bath": _build_bath,
}


def catalog_model(name: str, dims: Dimensions, params: dict) -> HamiltonianModel:
    """Instantiate a bundled model by name with a flat parameter dict."""
    try:
        builder = CATALOG[name]
    except KeyError:
        raise ValueError(
            f"unknown model {name!r}; available: {sorted(CATALOG)}"
        ) from None
    return builder(dims, params)
