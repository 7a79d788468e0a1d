"""
The smallest clock
==================

A two-level clock with readings t0 and t1 is enough to carry one step of
evolution. Here the Heisenberg-picture state |0>|+> is mapped back to the
Schrodinger picture and conditioned on the second reading.
"""

# %%
import numpy as np

from pagewootters import UniverseSpec, condition, make_two_level_clock, sp_hp_map
from pagewootters.clock import uniform_clock_state
from pagewootters.linalg import SX, bloch_vector
from pagewootters.models import qubit_clock_reference

for dt in (np.pi / 4, np.pi / 2, np.pi):
    clock = make_two_level_clock(0.0, dt)
    spec = UniverseSpec(SX / 2, clock)
    pmap = sp_hp_map(spec, t_ref=0.0)
    heis = np.kron([1, 0], uniform_clock_state(clock)).astype(complex)
    psi = condition(pmap.u @ heis, 1, spec.dims)
    rho = np.outer(psi, psi.conj())
    err = np.abs(rho - qubit_clock_reference(dt)).max()
    print(f"dt = {dt:.4f}  Bloch = {np.round(bloch_vector(rho), 6)}  max error vs closed form = {err:.1e}")

# %%
# At dt = pi the qubit has been flipped completely to |1>.
