"""Elementary symplectic factors and a seeded random symplectic sampler.

The random construction composes elementary factors (one-mode squeezes,
one-mode phase rotations, two-mode mixing rotations and two-mode squeezes)
drawn from a caller-supplied :class:`numpy.random.Generator`, so ensembles
are reproducible.  Squeeze strengths are kept moderate by default to bound
the conditioning of downstream Schur complements.
"""

import numpy as np

from .core import Dimensions

__all__ = [
    "mode_rotation",
    "mode_squeeze",
    "two_mode_rotation",
    "two_mode_squeeze",
    "random_symplectic",
]


def _as_dims(dims) -> Dimensions:
    if isinstance(dims, Dimensions):
        return dims
    return Dimensions(int(dims))


def mode_rotation(dims, mode: int, angle: float) -> np.ndarray:
    """Phase rotation by ``angle`` in the (x, p) plane of one mode."""
    dims = _as_dims(dims)
    s = np.eye(dims.dim)
    i, k = dims.x_index(mode), dims.p_index(mode)
    c, sn = np.cos(angle), np.sin(angle)
    s[i, i] = c
    s[i, k] = sn
    s[k, i] = -sn
    s[k, k] = c
    return s


def mode_squeeze(dims, mode: int, r: float) -> np.ndarray:
    """Squeeze diag(e^r, e^-r) on one mode."""
    dims = _as_dims(dims)
    s = np.eye(dims.dim)
    s[dims.x_index(mode), dims.x_index(mode)] = np.exp(r)
    s[dims.p_index(mode), dims.p_index(mode)] = np.exp(-r)
    return s


def two_mode_rotation(dims, mode_a: int, mode_b: int, angle: float) -> np.ndarray:
    """Beam-splitter-like mixing of two modes (orthogonal and symplectic)."""
    dims = _as_dims(dims)
    if mode_a == mode_b:
        raise ValueError("two_mode_rotation needs distinct modes")
    s = np.eye(dims.dim)
    c, sn = np.cos(angle), np.sin(angle)
    for idx in (dims.x_index, dims.p_index):
        i, k = idx(mode_a), idx(mode_b)
        s[i, i] = c
        s[i, k] = sn
        s[k, i] = -sn
        s[k, k] = c
    return s


def two_mode_squeeze(dims, mode_a: int, mode_b: int, r: float) -> np.ndarray:
    """Two-mode squeeze with parameter r, correlating the two modes."""
    dims = _as_dims(dims)
    if mode_a == mode_b:
        raise ValueError("two_mode_squeeze needs distinct modes")
    s = np.eye(dims.dim)
    c, sh = np.cosh(r), np.sinh(r)
    xa, pa = dims.x_index(mode_a), dims.p_index(mode_a)
    xb, pb = dims.x_index(mode_b), dims.p_index(mode_b)
    s[xa, xa] = s[xb, xb] = c
    s[pa, pa] = s[pb, pb] = c
    s[xa, xb] = s[xb, xa] = sh
    s[pa, pb] = s[pb, pa] = -sh
    return s


def random_symplectic(
    dims,
    rng: np.random.Generator,
    factors: int | None = None,
    squeeze_scale: float = 0.3,
    max_squeeze: float = 1.2,
) -> np.ndarray:
    """Random symplectic matrix as a product of elementary factors.

    Draws ``factors`` elementary operations (default 3n) uniformly among
    one-mode rotations, one-mode squeezes and, when n > 1, two-mode rotations
    and two-mode squeezes.  Rotation angles are uniform on [0, 2 pi); squeeze
    parameters are normal with standard deviation ``squeeze_scale`` and
    clipped to ``max_squeeze``.

    Args:
        dims: :class:`Dimensions` or mode count fixing the layout.
        rng: explicit random generator (determinism contract).

    Returns:
        2n x 2n symplectic matrix for the layout of ``dims``.
    """
    dims = _as_dims(dims)
    n = dims.n
    if factors is None:
        factors = 3 * n
    s = np.eye(dims.dim)
    kinds = ("rotation", "squeeze") if n == 1 else ("rotation", "squeeze", "mix", "tms")
    for _ in range(factors):
        kind = kinds[rng.integers(len(kinds))]
        if kind == "rotation":
            s = mode_rotation(dims, int(rng.integers(n)), rng.uniform(0.0, 2.0 * np.pi)) @ s
        elif kind == "squeeze":
            r = float(np.clip(rng.normal(0.0, squeeze_scale), -max_squeeze, max_squeeze))
            s = mode_squeeze(dims, int(rng.integers(n)), r) @ s
        else:
            a, b = rng.choice(n, size=2, replace=False)
            if kind == "mix":
                s = two_mode_rotation(dims, int(a), int(b), rng.uniform(0.0, 2.0 * np.pi)) @ s
            else:
                r = float(np.clip(rng.normal(0.0, squeeze_scale), -max_squeeze, max_squeeze))
                s = two_mode_squeeze(dims, int(a), int(b), r) @ s
    return s
