"""Nearby-orbit propagation: a reference orbit plus its tangent map.

Expanding a Hamiltonian to second order around the moving point z_t makes
the flow affine: z -> z_t + S_t (z - z_0), where S_t solves the variational
equation Sdot = J H''(z_t) S.  This script integrates a quartic oscillator,
checks the tangent map against a finite-difference Jacobian of the exact
flow, shows how well symplecticity is preserved, and evolves a small ball.

Run:  python demos/02_nearby_orbit.py
"""

import numpy as np

import phaseshadow as ps

model = ps.quartic_oscillator()
z0 = np.array([1.0, 0.4])
h = 1e-3
times = h * np.arange(int(round(10.0 / h)) + 1)

orbit = ps.integrate_orbit(model, z0, times)
print(f"quartic oscillator, z0 = {z0}, t in [0, 10], step {h}")
print(f"  energy drift       : {max(abs(model.value(z) - model.value(z0)) for z in orbit.points[::500]):.2e}")
print(f"  monodromy defect   : {orbit.max_defect():.2e}")

orbit_reproj = ps.integrate_orbit(model, z0, times, reproject=True)
print(f"  defect, reprojected: {orbit_reproj.max_defect():.2e}")

# tangent map vs finite differences of the exact flow at t = 1
short = h * np.arange(1001)
orbit1 = ps.integrate_orbit(model, z0, short)
step = 1e-5
jac = np.empty((2, 2))
for i in range(2):
    zp, zm = z0.copy(), z0.copy()
    zp[i] += step
    zm[i] -= step
    jac[:, i] = (
        ps.integrate_orbit(model, zp, short).points[-1]
        - ps.integrate_orbit(model, zm, short).points[-1]
    ) / (2 * step)
gap = np.abs(jac - orbit1.monodromy[-1]).max()
print(f"  FD Jacobian vs S_t : {gap:.2e} at t = 1")

# the affine propagator moves nearby points with the tangent map
flow = ps.flow_at(orbit1, 1.0)
nearby = z0 + np.array([0.05, -0.02])
exact = ps.integrate_orbit(model, nearby, short).points[-1]
approx = ps.apply_flow(flow, nearby)
print(f"  nearby-orbit error : {np.abs(exact - approx).max():.2e} "
      f"for displacement {np.linalg.norm(nearby - z0):.3f}")

ball = ps.evolve_ball(flow, 0.1)
print(f"  ball at t=1        : center {np.round(ball.center, 4)}, "
      f"volume / initial = {ball.volume() / (np.pi * 0.01):.6f}")

# the quadratic generator recovered from the tangent-map path
q, asym = ps.flow_generator(orbit1.times, orbit1.monodromy, 500)
print(f"  generator at t=0.5 : {np.round(q, 4).tolist()} (asymmetry {asym:.1e})")
print(f"  Hessian at z_0.5   : {np.round(model.hessian(orbit1.points[500]), 4).tolist()}")
