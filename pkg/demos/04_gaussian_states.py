"""Gaussian states in the covariance picture: purity, traces, propagation.

A Gaussian state is (mean, Sigma, hbar) with the quantum condition
Sigma + (i hbar/2) J >= 0, i.e. all symplectic eigenvalues of (2/hbar) Sigma
at least 1.  Partial traces reduce the shape matrix by a Schur complement
and can never violate that condition.  This script checks the closed-form
purity of a two-mode squeezed state against a brute-force quadrature of its
Wigner density, and shows purity invariance under symplectic propagation.

Run:  python demos/04_gaussian_states.py
"""

import numpy as np

import phaseshadow as ps

dims = ps.Dimensions(1, 1)

print("=== two-mode squeezed states: reduced purity is 1/cosh(2r) ===")
print(f"{'r':>5} {'purity':>9} {'1/cosh2r':>9} {'margin':>10}")
for r in [0.1, 0.3, 0.6, 1.0]:
    state = ps.state_from_symplectic_ball(
        ps.two_mode_squeeze(dims, 0, 1, r), dims=dims
    )
    reduced = ps.partial_trace(state)
    ok, margin = ps.quantum_condition(reduced.covariance, reduced.hbar)
    print(f"{r:>5.2f} {ps.purity(reduced):>9.6f} {1/np.cosh(2*r):>9.6f} {margin:>10.2e}")

print()
print("=== quadrature check of one reduced covariance ===")
state = ps.state_from_symplectic_ball(
    ps.two_mode_squeeze(dims, 0, 1, 0.5), center=np.array([0.2, -0.1, 0.0, 0.3]),
    dims=dims,
)
reduced = ps.partial_trace(state)

# marginalize the 4D density over z_B on a grid and take moments over z_A;
# the quadratic form splits as qa(w_a) + 2 w_a Q_AB w_b + qb(w_b), so the
# z_B sum vectorizes per x_B slice
q = np.linalg.inv(state.covariance)
n_pts, extent = 128, 7.0
ax = [np.linspace(-extent * np.sqrt(state.covariance[i, i]),
                  extent * np.sqrt(state.covariance[i, i]), n_pts) for i in range(4)]
ga, gb = np.meshgrid(ax[0], ax[1], indexing="ij")
wa = np.stack([ga.ravel(), gb.ravel()], axis=1)
qa = np.einsum("ki,ij,kj->k", wa, q[:2, :2], wa)
cross = wa @ q[:2, 2:]  # (n^2, 2)
rho = np.zeros(wa.shape[0])
db = (ax[2][1] - ax[2][0]) * (ax[3][1] - ax[3][0])
for xb in ax[2]:
    wb = np.stack([np.full(n_pts, xb), ax[3]], axis=1)  # (n, 2)
    qb = np.einsum("ki,ij,kj->k", wb, q[2:, 2:], wb)
    arg = qa[:, None] + 2.0 * (cross @ wb.T) + qb[None, :]
    rho += np.exp(-0.5 * arg).sum(axis=1) * db
da = (ax[0][1] - ax[0][0]) * (ax[1][1] - ax[1][0])
mass = rho.sum() * da
mean_a = (wa * rho[:, None]).sum(axis=0) * da / mass
cen = wa - mean_a
cov_a = np.einsum("ki,kj,k->ij", cen, cen, rho) * da / mass
mean_a = mean_a + state.mean[:2]
print("reduced covariance (Schur):    ", np.round(reduced.covariance, 6).tolist())
print("reduced covariance (quadrature):", np.round(cov_a, 6).tolist())
print("max entry gap:", f"{np.abs(cov_a - reduced.covariance).max():.2e}")

print()
print("=== purity is invariant under symplectic propagation ===")
rng = np.random.default_rng(3)
flow = ps.AffineFlow(
    z0=np.zeros(4), z_t=rng.standard_normal(4),
    s_t=ps.random_symplectic(dims, rng), time=1.0,
)
moved = ps.propagate(state, flow)
print(f"purity before {ps.purity(state):.12f}, after {ps.purity(moved):.12f}")
