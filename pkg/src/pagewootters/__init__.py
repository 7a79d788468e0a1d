"""Relational quantum dynamics with finite clocks.

A system and a clock share a stationary state of a universe Hamiltonian;
the system's evolution is recovered by conditioning on clock readings, or
equivalently by moving all time dependence into clock-dependent
observables.
"""
__version__ = "0.1.0"

from .clock import ClockModel, make_cyclic_clock, make_two_level_clock, timeline_state  # noqa: E402
from .interactions import (  # noqa: E402
    InteractionSpec,
    SingularSectorError,
    effective_hamiltonian,
    kraus_evolution,
    validate_interaction,
)
from .models import TwoLevelParams, coherence_time, phi_omega, phi_omega_massive  # noqa: E402
from .pictures import (  # noqa: E402
    NoPictureMapError,
    no_evolution_check,
    reduced_relative_observable,
    sp_hp_map,
    to_heisenberg_state,
    to_hp_observable,
)
from .universe import (  # noqa: E402
    UniverseSpec,
    UnphysicalReadingError,
    assemble_hamiltonian,
    condition,
    history_state_mixed,
    history_state_pure,
    stationarity_residual,
)

__all__ = [
    "ClockModel", "make_cyclic_clock", "make_two_level_clock", "timeline_state",
    "InteractionSpec", "SingularSectorError", "effective_hamiltonian", "kraus_evolution", "validate_interaction",
    "TwoLevelParams", "coherence_time", "phi_omega", "phi_omega_massive",
    "NoPictureMapError", "no_evolution_check", "reduced_relative_observable", "sp_hp_map",
    "to_heisenberg_state", "to_hp_observable",
    "UniverseSpec", "UnphysicalReadingError", "assemble_hamiltonian", "condition",
    "history_state_mixed", "history_state_pure", "stationarity_residual",
]
