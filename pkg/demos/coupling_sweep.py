"""
Clock-system coupling renormalises the qubit frequency
======================================================

With a gravitational-type coupling of scale lambda the qubit's effective
Hamiltonian is phi + omega sigma_x / 2. The frequency omega changes sign
between -1/2 and 1/2 and diverges at the edges of that window.
"""

# %%
import numpy as np

from pagewootters.models import ORACLE, PIPELINE, TwoLevelParams, max_disagreement, sweep

base = TwoLevelParams(lam=1.0)
lams = np.array([-3.0, -1.0, -0.51, -0.49, -0.25, 0.25, 0.49, 0.51, 1.0, 3.0])
for row in sweep(lams, base):
    print(f"lambda = {row.lam:+.2f}  omega = {row.omega:+12.4f}  phi = {row.phi:+12.4f}")

# %%
# The closed forms agree with the eigenvalues of the numerically built
# effective Hamiltonian across a dense grid.
grid = np.linspace(-3, 3, 601)
print("oracle vs pipeline:", max_disagreement(sweep(grid, base, ORACLE), sweep(grid, base, PIPELINE)))

# %%
# Adding a rest energy moves the singular points to -m c^2 +- E_I / 2.
massive = TwoLevelParams(lam=1.0, mass_energy=2.0, e_internal=1.0)
print("poles with m c^2 = 2:", massive.poles())
