"""Symplectic spectra, Williamson normal form, capacities, quantum condition.

For a symmetric positive-definite 2m x 2m matrix M the symplectic
eigenvalues are the positive numbers lambda_j such that +/- i lambda_j is an
eigenvalue of J M.  They are computed here from the skew-symmetric matrix
K = M^{1/2} J M^{1/2} (similar to J M) through the symmetric eigenproblem of
-K^2, whose eigenvalues are the doubly degenerate lambda_j^2; this avoids
non-symmetric eigensolvers entirely.  The same pairing yields a symplectic S
with M = (S^{-1})^T D S^{-1} and D = diag(Lambda, Lambda).
"""

from dataclasses import dataclass

import numpy as np

from .config import TOLERANCES, Tolerances
from .core import Ellipsoid, check_symmetric, layout_permutation, symplectic_form

__all__ = [
    "WilliamsonDecomposition",
    "symplectic_eigenvalues",
    "williamson",
    "symplectic_capacity",
    "quantum_condition",
]


def _checked_spd(matrix: np.ndarray, tol: Tolerances, what: str):
    matrix = check_symmetric(matrix, tol=tol, what=what)
    if matrix.shape[0] % 2 != 0:
        raise ValueError(f"{what} must have even side, got {matrix.shape[0]}")
    w, v = np.linalg.eigh(matrix)
    if w[0] <= tol.definiteness * max(1.0, w[-1]):
        raise ValueError(f"{what} is not positive definite (min eig {w[0]:.3e})")
    return matrix, w, v


def _skew_k(matrix: np.ndarray, tol: Tolerances, what: str):
    """K = M^{1/2} J M^{1/2} and its squared spectrum, via eigh only."""
    matrix, w, v = _checked_spd(matrix, tol, what)
    root = (v * np.sqrt(w)) @ v.T
    j = symplectic_form(matrix.shape[0] // 2)
    k = root @ j @ root
    k = 0.5 * (k - k.T)
    # -K^2 = K^T K is symmetric PSD with eigenvalues lambda_j^2, each twice
    ksq = k.T @ k
    ksq = 0.5 * (ksq + ksq.T)
    w2, v2 = np.linalg.eigh(ksq)
    return k, np.sqrt(np.clip(w2, 0.0, None)), v2, root


def symplectic_eigenvalues(matrix: np.ndarray, tol: Tolerances = TOLERANCES) -> np.ndarray:
    """Symplectic spectrum of an SPD matrix, sorted descending.

    Args:
        matrix: symmetric positive-definite matrix of even side 2m.

    Returns:
        array of the m positive symplectic eigenvalues, descending.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape == (2, 2):
        # exact 2x2 identity: M^{1/2} J M^{1/2} = sqrt(det M) J
        matrix = check_symmetric(matrix, tol=tol, what="matrix")
        det = matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0]
        if matrix[0, 0] <= 0 or det <= 0:
            raise ValueError("matrix is not positive definite")
        return np.array([np.sqrt(det)])
    _, lam, _, _ = _skew_k(matrix, tol, "matrix")
    # eigenvalues come in near-identical pairs (ascending); average each pair
    paired = 0.5 * (lam[0::2] + lam[1::2])
    return paired[::-1].copy()


def symplectic_eigenvalues_stack(stack: np.ndarray) -> np.ndarray:
    """Symplectic spectra of a stack of SPD matrices, descending per row.

    Batched variant of :func:`symplectic_eigenvalues` (same algorithm,
    vectorized over the leading axis); inputs are trusted to be symmetric
    positive definite.
    """
    stack = np.asarray(stack, dtype=float)
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise ValueError(f"expected a stack of square matrices, got shape {stack.shape}")
    if stack.shape[1] == 2:
        det = stack[:, 0, 0] * stack[:, 1, 1] - stack[:, 0, 1] * stack[:, 1, 0]
        if np.any(det <= 0):
            raise ValueError("stack contains a non-positive-definite matrix")
        return np.sqrt(det)[:, None]
    w, v = np.linalg.eigh(stack)
    if np.any(w[:, 0] <= 0):
        raise ValueError("stack contains a non-positive-definite matrix")
    vt = np.swapaxes(v, 1, 2)
    root = (v * np.sqrt(w)[:, None, :]) @ vt
    j = symplectic_form(stack.shape[1] // 2)
    k = root @ j @ root
    ksq = np.swapaxes(k, 1, 2) @ k
    w2 = np.linalg.eigvalsh(0.5 * (ksq + np.swapaxes(ksq, 1, 2)))
    lam = np.sqrt(np.clip(w2, 0.0, None))
    paired = 0.5 * (lam[:, 0::2] + lam[:, 1::2])
    return paired[:, ::-1].copy()


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """Williamson normal form M = (S^{-1})^T D S^{-1}.

    ``spectrum`` holds the symplectic eigenvalues in descending order and
    ``d`` is diag(spectrum, spectrum).  ``degenerate`` flags (near-)repeated
    symplectic eigenvalues, for which S is not unique.
    """

    s: np.ndarray
    spectrum: np.ndarray
    degenerate: bool

    @property
    def d(self) -> np.ndarray:
        return np.diag(np.concatenate([self.spectrum, self.spectrum]))

    def reconstruct(self) -> np.ndarray:
        s_inv = np.linalg.inv(self.s)
        return s_inv.T @ self.d @ s_inv


def williamson(matrix: np.ndarray, tol: Tolerances = TOLERANCES) -> WilliamsonDecomposition:
    """Compute the Williamson diagonalization of an SPD matrix.

    The skew matrix K = M^{1/2} J M^{1/2} is block-diagonalized by an
    orthogonal U obtained from paired eigenvectors of -K^2: for each
    eigenvector u with -K^2 u = lambda^2 u, the partner v = -K u / lambda
    completes an invariant plane with u^T K v = lambda.  Degenerate
    eigenspaces are resolved by deterministic greedy pairing of the eigh
    basis.  Then S = J M^{1/2} U D^{-1/2} is symplectic and satisfies
    M = (S^{-1})^T D S^{-1}.

    Returns:
        :class:`WilliamsonDecomposition` with descending spectrum.
    """
    matrix = check_symmetric(matrix, tol=tol, what="matrix")
    k, lam_all, vecs, root = _skew_k(matrix, tol, "matrix")
    two_m = matrix.shape[0]
    m = two_m // 2

    # group near-equal eigenvalues (ascending from eigh)
    groups: list[list[int]] = [[0]]
    for i in range(1, two_m):
        if abs(lam_all[i] - lam_all[i - 1]) <= tol.degenerate_gap * max(1.0, lam_all[i]):
            groups[-1].append(i)
        else:
            groups.append([i])
    degenerate = any(len(g) > 2 for g in groups)

    pairs = []  # (lambda, u, v)
    for group in groups:
        if len(group) % 2 != 0:
            raise ValueError(
                "symplectic eigenvalue pairing failed; the input is too "
                "ill-conditioned for a reliable Williamson decomposition"
            )
        lam = float(np.mean(lam_all[group]))
        basis = vecs[:, group]
        remaining = basis
        for _ in range(len(group) // 2):
            u = remaining[:, 0]
            u = u / np.linalg.norm(u)
            v = -(k @ u) / lam
            v = v - (v @ u) * u
            v = v / np.linalg.norm(v)
            pairs.append((lam, u, v))
            if remaining.shape[1] > 1:
                rest = remaining[:, 1:]
                rest = rest - np.outer(u, u @ rest) - np.outer(v, v @ rest)
                # orthonormal basis of what is left; directions swallowed by
                # the extracted pair show up as (near-)zero singular values
                u_svd, sig, _ = np.linalg.svd(rest, full_matrices=False)
                remaining = u_svd[:, sig > 0.5]
            else:
                remaining = remaining[:, :0]

    pairs.sort(key=lambda t: -t[0])
    spectrum = np.array([p[0] for p in pairs])
    u_mat = np.column_stack([p[1] for p in pairs] + [p[2] for p in pairs])

    d_inv_root = np.concatenate([spectrum, spectrum]) ** -0.5
    j = symplectic_form(m)
    s = (j @ root @ u_mat) * d_inv_root
    return WilliamsonDecomposition(s=s, spectrum=spectrum, degenerate=degenerate)


def symplectic_capacity(ellipsoid: Ellipsoid, tol: Tolerances = TOLERANCES) -> float:
    """Symplectic capacity pi R^2 / lambda_max of an ellipsoid.

    All normalized symplectic capacities agree on ellipsoids; the value is
    translation invariant, so the center is ignored.  A ball (shape = I) has
    capacity pi R^2.
    """
    lam = symplectic_eigenvalues(ellipsoid.shape, tol=tol)
    return float(np.pi * ellipsoid.radius**2 / lam[0])


def quantum_condition(
    sigma: np.ndarray,
    hbar: float,
    dims=None,
    tol: Tolerances = TOLERANCES,
) -> tuple[bool, float]:
    """Test Sigma + (i hbar / 2) J >= 0 in symplectic-spectrum form.

    The condition holds iff every symplectic eigenvalue of (2/hbar) Sigma is
    at least 1 (equivalently, all symplectic eigenvalues of
    (hbar/2) Sigma^{-1} are at most 1).  ``dims`` names the block layout of
    ``sigma``; bipartite covariances are permuted to the canonical
    (x_1..x_n, p_1..p_n) order before the spectrum is taken.

    Returns:
        ``(ok, margin)`` where margin = lambda_min((2/hbar) Sigma) - 1 and
        ``ok`` allows the configured numerical slack.
    """
    if not hbar > 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    sigma = np.asarray(sigma, dtype=float)
    if dims is not None and dims.n_b > 0:
        pos = np.argsort(layout_permutation(dims))
        sigma = sigma[np.ix_(pos, pos)]
    lam = symplectic_eigenvalues(sigma * (2.0 / hbar), tol=tol)
    margin = float(lam[-1] - 1.0)
    return margin >= -tol.quantum_margin, margin
