"""Shadows of symplectic balls never squeeze below their source.

A linear symplectic map S sends the unit ball to an ellipsoid whose
orthogonal projection ("shadow") onto a subsystem's phase plane always
contains a symplectic ball of the same radius.  This script builds random
symplectic maps, projects them, and reports the quantities that witness the
inclusion: the shadow's symplectic spectrum (all <= 1), its volume ratio
(>= 1), its capacity (>= pi R^2), and a Monte-Carlo membership check.

Run:  python demos/01_symplectic_shadows.py
"""

import numpy as np

import phaseshadow as ps

rng = np.random.default_rng(2024)

print("=== random symplectic maps, split (n_A, n_B) = (1, 2) ===")
dims = ps.Dimensions(1, 2)
print(f"{'seed':>4} {'lam_max':>10} {'vol_ratio':>10} {'entropy_kB':>11} "
      f"{'capacity/pi':>12} {'contained':>9}")
for seed in range(8):
    s = ps.random_symplectic(dims, np.random.default_rng(seed))
    res = ps.project_ball(s, dims)
    cap = ps.symplectic_capacity(res.omega_a)
    inside = ps.containment_check(res, 1.0, 5000, rng)
    print(f"{seed:>4} {res.spectrum[0]:>10.6f} {res.volume_ratio:>10.6f} "
          f"{res.entropy_increase:>11.6f} {cap / np.pi:>12.6f} {str(inside):>9}")

print()
print("=== analytic family: squeeze mode A by e^r, then mix A and B ===")
print("the shadow eigenvalue is exactly 1/cosh(r):")
dims = ps.Dimensions(1, 1)
print(f"{'r':>5} {'lambda':>10} {'1/cosh(r)':>10} {'entropy_kB':>11}")
for r in [0.0, 0.25, 0.5, 1.0, 2.0]:
    s = ps.two_mode_rotation(dims, 0, 1, np.pi / 4) @ ps.mode_squeeze(dims, 0, r)
    res = ps.project_ball(s, dims)
    print(f"{r:>5.2f} {res.spectrum[0]:>10.6f} {1/np.cosh(r):>10.6f} "
          f"{res.entropy_increase:>11.6f}")

print()
print("=== one-plane shadow areas are bounded below by pi R^2 ===")
s = ps.random_symplectic(3, np.random.default_rng(5))
for mode in range(3):
    area = ps.shadow_area(s, mode, 1.0)
    print(f"mode {mode}: area / (pi R^2) = {area / np.pi:.6f}")
