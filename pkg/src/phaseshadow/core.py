"""Phase-space primitives: layout, symplectic form, blocks, Schur complements.

Coordinates are stored in the order ``(x_A, p_A, x_B, p_B)``: each subsystem
keeps its positions followed by its momenta, and subsystem A precedes
subsystem B.  In this layout the symplectic form is the direct sum
``J_A (+) J_B`` of the per-subsystem standard forms, and the rows/columns of
subsystem A occupy the leading contiguous block of every phase-space matrix.
Matrices produced elsewhere in a global (x, p) ordering must be permuted at
the boundary (see :func:`layout_permutation`).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag, cho_factor, cho_solve

from .config import TOLERANCES, Tolerances

__all__ = [
    "Dimensions",
    "BlockSplit",
    "Ellipsoid",
    "SingularBlockError",
    "symplectic_form",
    "symplecticity_defect",
    "reproject_symplectic",
    "block_split",
    "schur_complement",
    "direct_sum",
    "layout_permutation",
    "spd_inverse",
    "spd_solve",
    "check_symmetric",
    "save_matrix_text",
    "load_matrix_text",
]


class SingularBlockError(ValueError):
    """An SPD solve hit a numerically singular block."""


@dataclass(frozen=True)
class Dimensions:
    """Bipartite split (n_a, n_b) of an n-degree-of-freedom system.

    ``n_a`` must be at least 1; ``n_b`` may be 0 for a monopartite system.
    Phase-space vectors have length ``2 n`` with ``n = n_a + n_b``.
    """

    n_a: int
    n_b: int = 0

    def __post_init__(self):
        if self.n_a < 1:
            raise ValueError(f"n_a must be >= 1, got {self.n_a}")
        if self.n_b < 0:
            raise ValueError(f"n_b must be >= 0, got {self.n_b}")

    @property
    def n(self) -> int:
        return self.n_a + self.n_b

    @property
    def dim(self) -> int:
        """Phase-space dimension 2n."""
        return 2 * self.n

    @property
    def a_slice(self) -> slice:
        return slice(0, 2 * self.n_a)

    @property
    def b_slice(self) -> slice:
        return slice(2 * self.n_a, 2 * self.n)

    def x_index(self, mode: int) -> int:
        """Global coordinate index of x for the given 0-based mode."""
        self._check_mode(mode)
        if mode < self.n_a:
            return mode
        return 2 * self.n_a + (mode - self.n_a)

    def p_index(self, mode: int) -> int:
        """Global coordinate index of p for the given 0-based mode."""
        self._check_mode(mode)
        if mode < self.n_a:
            return self.n_a + mode
        return 2 * self.n_a + self.n_b + (mode - self.n_a)

    @property
    def x_indices(self) -> np.ndarray:
        return np.array([self.x_index(k) for k in range(self.n)])

    @property
    def p_indices(self) -> np.ndarray:
        return np.array([self.p_index(k) for k in range(self.n)])

    def _check_mode(self, mode: int):
        if not 0 <= mode < self.n:
            raise ValueError(f"mode {mode} out of range for n = {self.n}")


@dataclass(frozen=True)
class BlockSplit:
    """The four subsystem blocks of a phase-space matrix."""

    aa: np.ndarray
    ab: np.ndarray
    ba: np.ndarray
    bb: np.ndarray

    def reassemble(self) -> np.ndarray:
        return np.block([[self.aa, self.ab], [self.ba, self.bb]])


def _one_form(m: int) -> np.ndarray:
    zero = np.zeros((m, m))
    eye = np.eye(m)
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_form(dims) -> np.ndarray:
    """Standard symplectic form J for ``dims``.

    ``dims`` may be a positive integer m (single system, J maps
    (x, p) -> (p, -x)) or a :class:`Dimensions`, in which case the result is
    the direct sum of the per-subsystem forms in the storage layout.
    Satisfies J^2 = -I and J^T J = I.
    """
    if isinstance(dims, Dimensions):
        if dims.n_b == 0:
            return _one_form(dims.n_a)
        return block_diag(_one_form(dims.n_a), _one_form(dims.n_b))
    m = int(dims)
    if m < 1:
        raise ValueError(f"dimension must be a positive integer, got {dims}")
    return _one_form(m)


def _square_even(s: np.ndarray) -> int:
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {s.shape}")
    if s.shape[0] % 2 != 0:
        raise ValueError(f"matrix side must be even, got {s.shape[0]}")
    return s.shape[0] // 2


def symplecticity_defect(s: np.ndarray, dims: Dimensions | None = None) -> float:
    """Max-entry norm of S^T J S - J; zero iff S is exactly symplectic.

    ``dims`` fixes the block layout of the form; without it the matrix is
    taken in the single-system layout of its size.
    """
    s = np.asarray(s, dtype=float)
    m = _square_even(s)
    j = symplectic_form(dims if dims is not None else m)
    if j.shape != s.shape:
        raise ValueError(f"dims {dims} incompatible with matrix side {2 * m}")
    return float(np.abs(s.T @ j @ s - j).max())


def reproject_symplectic(
    s: np.ndarray,
    dims: Dimensions | None = None,
    target: float = TOLERANCES.reproject_target,
    max_iter: int = 8,
) -> np.ndarray:
    """Project a near-symplectic matrix back onto the symplectic group.

    Applies the multiplicative Newton correction S <- S (I + J D / 2) with
    D = S^T J S - J, which converges quadratically and leaves exactly
    symplectic matrices fixed.
    """
    s = np.asarray(s, dtype=float).copy()
    m = _square_even(s)
    j = symplectic_form(dims if dims is not None else m)
    for _ in range(max_iter):
        delta = s.T @ j @ s - j
        if np.abs(delta).max() <= target:
            return s
        s = s @ (np.eye(2 * m) + 0.5 * (j @ delta))
    return s


def block_split(matrix: np.ndarray, dims: Dimensions) -> BlockSplit:
    """Split a 2n x 2n matrix into its subsystem blocks.

    The storage layout keeps subsystem A's coordinates first, so the split is
    a contiguous slice; reassembling the blocks reproduces the input exactly.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (dims.dim, dims.dim):
        raise ValueError(
            f"matrix shape {matrix.shape} does not match dims "
            f"(n_a={dims.n_a}, n_b={dims.n_b}) requiring side {dims.dim}"
        )
    a, b = dims.a_slice, dims.b_slice
    return BlockSplit(
        aa=matrix[a, a].copy(),
        ab=matrix[a, b].copy(),
        ba=matrix[b, a].copy(),
        bb=matrix[b, b].copy(),
    )


def _rcond(sym: np.ndarray) -> float:
    w = np.linalg.eigvalsh(sym)
    if w[-1] <= 0:
        return 0.0
    return float(w[0] / w[-1])


def spd_solve(
    sym: np.ndarray,
    rhs: np.ndarray,
    tol: Tolerances = TOLERANCES,
    what: str = "matrix",
) -> np.ndarray:
    """Solve sym @ x = rhs for SPD ``sym`` via Cholesky.

    Raises :class:`SingularBlockError` when the reciprocal condition estimate
    falls below the configured floor or the factorization fails.
    """
    sym = np.asarray(sym, dtype=float)
    if _rcond(sym) < tol.rcond_floor:
        raise SingularBlockError(
            f"{what} is numerically singular "
            f"(reciprocal condition below {tol.rcond_floor:g})"
        )
    try:
        factor = cho_factor(sym, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularBlockError(f"{what} is not positive definite: {exc}") from exc
    return cho_solve(factor, rhs)


def spd_inverse(sym: np.ndarray, tol: Tolerances = TOLERANCES, what: str = "matrix") -> np.ndarray:
    """SPD inverse by Cholesky solve against the identity, symmetrized."""
    sym = np.asarray(sym, dtype=float)
    inv = spd_solve(sym, np.eye(sym.shape[0]), tol=tol, what=what)
    return 0.5 * (inv + inv.T)


def schur_complement(blocks: BlockSplit, tol: Tolerances = TOLERANCES) -> np.ndarray:
    """Schur complement of the BB block: AA - AB BB^-1 BA.

    BB must be symmetric positive definite; the solve uses a Cholesky
    factorization and raises :class:`SingularBlockError` below the
    conditioning floor.  For a symmetric source the result is symmetrized
    against roundoff.  The determinant identity
    det(source) = det(result) det(BB) holds.
    """
    x = spd_solve(blocks.bb, blocks.ba, tol=tol, what="BB block")
    out = blocks.aa - blocks.ab @ x
    if np.allclose(blocks.ba, blocks.ab.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(blocks.ab).max(initial=0.0))):
        out = 0.5 * (out + out.T)
    return out


def direct_sum(s_a: np.ndarray, s_b: np.ndarray) -> np.ndarray:
    """Block-diagonal assembly respecting the storage layout."""
    s_a = np.asarray(s_a, dtype=float)
    s_b = np.asarray(s_b, dtype=float)
    _square_even(s_a)
    _square_even(s_b)
    return block_diag(s_a, s_b)


def layout_permutation(dims: Dimensions) -> np.ndarray:
    """Index array mapping global (x_1..x_n, p_1..p_n) order to the layout.

    ``perm[i]`` is the global-order position stored at layout position ``i``;
    for a matrix M in global order, ``M[np.ix_(perm, perm)]`` is the same
    operator in the (x_A, p_A, x_B, p_B) layout.
    """
    n = dims.n
    perm = np.empty(2 * n, dtype=int)
    for mode in range(n):
        perm[dims.x_index(mode)] = mode
        perm[dims.p_index(mode)] = n + mode
    return perm


def check_symmetric(matrix: np.ndarray, tol: Tolerances = TOLERANCES, what: str = "matrix") -> np.ndarray:
    """Validate (and return) a symmetric matrix with finite entries."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{what} must be square, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError(f"{what} has non-finite entries")
    scale = max(1.0, np.abs(matrix).max(initial=0.0))
    asym = np.abs(matrix - matrix.T).max(initial=0.0)
    if asym > tol.symmetry * scale:
        raise ValueError(f"{what} is not symmetric (asymmetry {asym:.3e})")
    return 0.5 * (matrix + matrix.T)


@dataclass(frozen=True)
class Ellipsoid:
    """The set {z : shape (z - center)^2 <= radius^2}.

    ``shape`` is symmetric positive definite; the ball of radius R is
    recovered with ``shape = I``.
    """

    center: np.ndarray
    shape: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        shape = check_symmetric(self.shape, what="ellipsoid shape")
        if center.shape != (shape.shape[0],):
            raise ValueError(
                f"center length {center.shape} does not match shape side {shape.shape[0]}"
            )
        if shape.shape[0] % 2 != 0:
            raise ValueError("ellipsoid lives in even-dimensional phase space")
        w = np.linalg.eigvalsh(shape)
        if w[0] <= 0:
            raise ValueError(f"ellipsoid shape is not positive definite (min eig {w[0]:.3e})")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def volume(self) -> float:
        """Vol = Vol(B_R) det(shape)^{-1/2} in dimension 2m."""
        m = self.dim // 2
        ball = np.pi**m * self.radius ** (2 * m) / math.factorial(m)
        sign, logdet = np.linalg.slogdet(self.shape)
        if sign <= 0:
            raise ValueError("ellipsoid shape must have positive determinant")
        return float(ball * np.exp(-0.5 * logdet))

    def contains(self, points: np.ndarray, slack: float = 0.0) -> np.ndarray:
        """Membership test; ``points`` has shape (..., dim)."""
        d = np.asarray(points, dtype=float) - self.center
        q = np.einsum("...i,ij,...j->...", d, self.shape, d)
        return q <= self.radius**2 + slack


def save_matrix_text(path, matrix: np.ndarray):
    """Write a matrix as rows of whitespace-separated decimals."""
    np.savetxt(path, np.asarray(matrix, dtype=float), fmt="%.17g")


def load_matrix_text(path) -> np.ndarray:
    """Read a matrix written by :func:`save_matrix_text`."""
    matrix = np.atleast_2d(np.loadtxt(path, dtype=float))
    return matrix
