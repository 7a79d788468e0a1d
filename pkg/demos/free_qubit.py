"""
A qubit evolving against a finite clock
=======================================

A stationary state of qubit plus clock still contains the familiar
Schrodinger evolution: condition on a clock reading and the qubit sits at
the rotated state for that time.
"""

# %%
# Build a 64-reading cyclic clock spanning two full periods of H = sigma_x/2.
import numpy as np
from scipy.linalg import expm

from pagewootters import UniverseSpec, condition, history_state_pure, make_cyclic_clock, stationarity_residual
from pagewootters.linalg import SX

d = 64
clock = make_cyclic_clock(d, t0=0.0, delta=4 * np.pi / d)
spec = UniverseSpec(SX / 2, clock)
psi0 = np.array([1, 0], dtype=complex)
hist = history_state_pure(spec, psi0)

# %%
# The global state does not move: it is annihilated by the total constraint.
print(f"stationarity residual: {stationarity_residual(hist):.2e}")

# %%
# Yet each clock reading carries a different qubit state.
for k in range(0, d, 8):
    t = clock.grid[k]
    psi = condition(hist, k)
    target = expm(-1j * SX / 2 * t) @ psi0
    print(f"t = {t:6.3f}  <sz> = {np.vdot(psi, np.diag([1, -1]) @ psi).real:+.4f}"
          f"  fidelity = {abs(np.vdot(target, psi)) ** 2:.15f}")
