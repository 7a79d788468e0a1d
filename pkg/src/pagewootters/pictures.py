"""Moving encoded time dependence between states and observables.

The picture map ``U = sum_k exp(-i H_eff (t_k - t_ref)) (x) |t_k><t_k|``
takes a history state to a product ``psi0 (x) |TL>`` (the Heisenberg state)
and takes system observables ``O (x) 1`` to clock-dependent operators whose
blocks are the Heisenberg-evolved ``exp(i H_eff t_k) O exp(-i H_eff t_k)``.
For mixtures over several constraint eigensectors the map becomes a set of
Kraus operators, which exists only when every sector carries the same
initial system state.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clock import CYCLIC, ClockModel, central_band_projector, timeline_state, uniform_clock_state
from .interactions import EffectiveHamiltonian, effective_hamiltonian
from .linalg import (
    check_density,
    clock_projector,
    fix_global_phase,
    is_hermitian,
    max_norm,
    partial_trace_clock,
    partial_trace_system,
    schmidt_rank,
)
from .universe import (
    HistoryState,
    MixedUniverse,
    UniverseSpec,
    UnphysicalReadingError,
    ZERO_READING_TOL,
    picture_unitary,
)

UNITARY = "unitary"
KRAUS = "kraus"
# tolerance of the encoded-evolution predicate
NO_EVOLUTION_TOL = 1e-9


class NoPictureMapError(ValueError):
    """Sectors carry different initial states, so no map to a product state exists."""


@dataclass(frozen=True, eq=False)
class PictureMap:
    """A unitary or a weighted Kraus set on system (x) clock.

    ``ops`` holds ``(U,)`` for the unitary kind and ``(sqrt(p_k) U_k, ...)``
    for the Kraus kind.
    """

    kind: str
    ops: tuple
    weights: tuple
    h_eff_per_sector: tuple
    clock: ClockModel
    dims: tuple
    t_ref: float = 0.0

    @property
    def u(self) -> np.ndarray:
        if self.kind != UNITARY:
            raise AttributeError("a Kraus picture map has no single unitary")
        return self.ops[0]

    @property
    def kraus_ops(self) -> tuple:
        return self.ops

    def completeness(self) -> float:
        """``max | sum B^dagger B - 1 |``."""
        n = self.ops[0].shape[0]
        return max_norm(sum(b.conj().T @ b for b in self.ops) - np.eye(n))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Heisenberg-to-Schroedinger direction: ``sum B rho B^dagger``."""
        return sum(b @ rho @ b.conj().T for b in self.ops)

    def adjoint(self, o: np.ndarray) -> np.ndarray:
        """``sum B^dagger O B``."""
        return sum(b.conj().T @ o @ b for b in self.ops)


def _single_sector_map(heff: EffectiveHamiltonian, clock: ClockModel, dims, t_ref: float) -> PictureMap:
    u = picture_unitary(heff.op, clock, t_ref)
    return PictureMap(UNITARY, (u,), (1.0,), (heff,), clock, tuple(dims), t_ref)


def sp_hp_map(source, t_ref: float = 0.0, absorb_energy: bool = True) -> PictureMap:
    """Picture map for a universe spec or a sector mixture.

    Parameters
    ----------
    source : UniverseSpec or MixedUniverse
        A single sector (the spec's constraint eigenvalue) or a mixture whose
        ``components`` list the sectors.
    t_ref : float
        Clock time at which the Heisenberg and Schroedinger states coincide.
    absorb_energy : bool
        With ``True`` the generator is ``H_eff`` including the ``-E`` shift and
        a history state maps to ``psi0 (x) |TL_0>``. With ``False`` (free
        universes only) the generator is the bare ``H`` and the image is
        ``psi0 (x) |TL_E>``.

    Raises
    ------
    NoPictureMapError
        Several sectors with different initial system states.
    """
    if isinstance(source, UniverseSpec):
        spec, components = source, ()
    elif isinstance(source, MixedUniverse):
        spec, components = source.spec, source.components
    else:
        raise TypeError(f"expected UniverseSpec or MixedUniverse, got {type(source).__name__}")
    dims = spec.dims
    if not absorb_energy and spec.interaction is not None:
        raise ValueError("the bare generator is only available without interaction")

    def heff_for(energy: float) -> EffectiveHamiltonian:
        if absorb_energy:
            return spec.h_eff(energy)
        return effective_hamiltonian(spec.h_system, None, 0.0)

    if len(components) <= 1:
        energy = components[0][1] if components else spec.energy
        return _single_sector_map(heff_for(energy), spec.clock, dims, t_ref)

    rho_ref = components[0][2]
    if any(max_norm(c[2] - rho_ref) > 1e-12 for c in components[1:]):
        raise NoPictureMapError(
            "sectors carry different initial system states: "
            "no picture map takes this mixture to a product state"
        )
    ops, heffs = [], []
    for p, energy, _ in components:
        heff = heff_for(energy)
        ops.append(np.sqrt(p) * picture_unitary(heff.op, spec.clock, t_ref))
        heffs.append(heff)
    return PictureMap(KRAUS, tuple(ops), tuple(c[0] for c in components), tuple(heffs), spec.clock, dims, t_ref)


@dataclass(frozen=True, eq=False)
class HeisenbergState:
    """Universe state in the Heisenberg picture.

    ``rho`` is always populated; ``vec`` only for pure states.
    ``separability_certificate`` records whether the state was verified to be
    a system-clock product.
    """

    rho: np.ndarray
    dims: tuple
    vec: np.ndarray | None = None
    separability_certificate: bool = False

    @property
    def is_pure(self) -> bool:
        return self.vec is not None

    def clock_state(self) -> np.ndarray:
        return partial_trace_system(self.rho, *self.dims)

    def system_state(self) -> np.ndarray:
        return partial_trace_clock(self.rho, *self.dims)


def _product_certificate(rho: np.ndarray, dims, tol: float = NO_EVOLUTION_TOL) -> bool:
    rs = partial_trace_clock(rho, *dims)
    rc = partial_trace_system(rho, *dims)
    return max_norm(rho - np.kron(rs, rc)) <= tol


def heisenberg_from_vector(vec: np.ndarray, dims) -> HeisenbergState:
    vec = np.asarray(vec, dtype=complex)
    rank1 = schmidt_rank(vec, *dims) == 1
    return HeisenbergState(np.outer(vec, vec.conj()), tuple(dims), vec, rank1)


def heisenberg_from_density(rho: np.ndarray, dims) -> HeisenbergState:
    rho = check_density(rho)
    return HeisenbergState(rho, tuple(dims), None, _product_certificate(rho, dims))


def product_heisenberg_state(system, clock: ClockModel, energy: float = 0.0) -> HeisenbergState:
    """``psi0 (x) |TL_E>`` for a vector, or ``rho0 (x) |TL_E><TL_E|`` for a density.

    Two-level clocks only support ``energy = 0`` (the uniform superposition).
    """
    if clock.kind == CYCLIC:
        tl = timeline_state(clock, energy)
    elif energy != 0:
        raise ValueError("only the energy-0 timeline exists for a two-level clock")
    else:
        tl = uniform_clock_state(clock)
    system = np.asarray(system, dtype=complex)
    dims = (system.shape[0], clock.dim)
    if system.ndim == 1:
        return heisenberg_from_vector(np.kron(system, tl), dims)
    return heisenberg_from_density(np.kron(check_density(system), np.outer(tl, tl.conj())), dims)


def to_heisenberg_state(state, pmap: PictureMap) -> HeisenbergState:
    """Transport a history state (or mixture) to the Heisenberg picture.

    The unitary kind applies ``U^dagger``. The Kraus kind returns the product
    state ``rho0 (x) |TL><TL|`` whose image under the Kraus map is ``state``,
    and checks that it is.
    """
    if isinstance(state, HistoryState):
        if pmap.kind != UNITARY:
            raise ValueError("pure history states use a unitary picture map")
        return heisenberg_from_vector(pmap.u.conj().T @ state.vec, pmap.dims)
    if not isinstance(state, MixedUniverse):
        raise TypeError(f"expected HistoryState or MixedUniverse, got {type(state).__name__}")
    if pmap.kind == UNITARY:
        u = pmap.u
        return heisenberg_from_density(u.conj().T @ state.assembled @ u, pmap.dims)
    if not state.components:
        raise ValueError("mixture does not list its sectors")
    tl = uniform_clock_state(pmap.clock)
    rho_h = np.kron(state.components[0][2], np.outer(tl, tl.conj()))
    if max_norm(pmap.apply(rho_h) - state.assembled) > 1e-9:
        raise NoPictureMapError("Kraus map does not reproduce the mixture from a product state")
    return heisenberg_from_density(rho_h, pmap.dims)


def to_hp_observable(o_sys: np.ndarray, pmap: PictureMap) -> np.ndarray:
    """``U^dagger (O (x) 1) U`` or ``sum B^dagger (O (x) 1) B``."""
    o_sys = np.asarray(o_sys, dtype=complex)
    n, d = pmap.dims
    if o_sys.shape != (n, n):
        raise ValueError(f"system observable has shape {o_sys.shape}, expected {(n, n)}")
    if not is_hermitian(o_sys):
        raise ValueError("system observable must be Hermitian")
    out = pmap.adjoint(np.kron(o_sys, np.eye(d)))
    return 0.5 * (out + out.conj().T)


def _split_dims(o: np.ndarray, clock) -> tuple[int, int]:
    d = clock if isinstance(clock, (int, np.integer)) else clock.dim
    if o.shape[0] % d:
        raise ValueError(f"operator dimension {o.shape[0]} is not a multiple of the clock dimension {d}")
    return o.shape[0] // d, d


def relative_observable(o_hp: np.ndarray, k: int, clock) -> np.ndarray:
    """``O (1 (x) |t_k><t_k|)``; ``clock`` is a :class:`ClockModel` or its dimension."""
    n, d = _split_dims(o_hp, clock)
    if not 0 <= k < d:
        raise IndexError(f"clock reading {k} out of range for dimension {d}")
    return o_hp @ clock_projector(k, n, d)


def reduced_relative_observable(o_hp: np.ndarray, k: int, hstate: HeisenbergState) -> np.ndarray:
    """``Tr_C[(O Pi_k)(1 (x) rho_C)] / Tr[rho_C Pi_k]`` with ``rho_C`` the clock state of ``hstate``."""
    n, d = hstate.dims
    rel = relative_observable(o_hp, k, d)
    rho_c = hstate.clock_state()
    weight = rho_c[k, k].real
    if weight < ZERO_READING_TOL:
        raise UnphysicalReadingError(f"clock state has no support on reading {k}")
    return partial_trace_clock(rel @ np.kron(np.eye(n), rho_c), n, d) / weight


def relative_expectation(o_hp: np.ndarray, k: int, hstate: HeisenbergState) -> float:
    """``<O Pi_k> / <Pi_k>`` in the Heisenberg state."""
    n, d = hstate.dims
    proj = clock_projector(k, n, d)
    weight = np.trace(proj @ hstate.rho).real
    if weight < ZERO_READING_TOL:
        raise UnphysicalReadingError(f"state has no support on clock reading {k}")
    return float(np.trace(relative_observable(o_hp, k, d) @ hstate.rho).real / weight)


@dataclass(frozen=True)
class NoEvolutionResult:
    passed: bool
    deviation: float

    def __bool__(self) -> bool:
        return self.passed


def _resolve(state, clock, dims):
    if isinstance(state, (HistoryState, MixedUniverse)):
        data = state.vec if isinstance(state, HistoryState) else state.assembled
        return data, state.dims
    if isinstance(state, HeisenbergState):
        return (state.vec if state.is_pure else state.rho), state.dims
    data = np.asarray(state, dtype=complex)
    if dims is None:
        if clock is None:
            raise ValueError("pass the clock (or dims) for raw arrays")
        dims = (data.shape[0] // clock.dim, clock.dim)
    return data, tuple(dims)


def no_evolution_check(state, clock: ClockModel | None = None, tol: float = NO_EVOLUTION_TOL, dims=None) -> NoEvolutionResult:
    """Whether the state encodes no time evolution.

    Pure states pass when all nonzero slices ``<t_k|Psi>`` are parallel; the
    deviation is the largest phase-aligned distance between normalized
    slices. Mixed states pass when all conditioned densities agree; the
    deviation is the largest entrywise difference.
    """
    data, (n, d) = _resolve(state, clock, dims)
    if data.ndim == 1:
        slices = data.reshape(n, d).T
        norms = np.linalg.norm(slices, axis=1)
        live = norms ** 2 >= ZERO_READING_TOL
        if not live.any():
            raise ValueError("state vanishes")
        unit = slices[live] / norms[live, None]
        ref = unit[int(np.argmax(norms[live]))]
        overlaps = unit.conj() @ ref
        # align each slice's phase to the reference before differencing
        phases = np.where(np.abs(overlaps) > 0, overlaps / np.maximum(np.abs(overlaps), 1e-300), 1.0)
        dev = float(np.linalg.norm(unit * phases[:, None] - ref, axis=1).max())
    else:
        r = data.reshape(n, d, n, d)
        conds = []
        for k in range(d):
            block = r[:, k, :, k]
            w = np.trace(block).real
            if w >= ZERO_READING_TOL:
                conds.append(block / w)
        if not conds:
            raise ValueError("state vanishes")
        dev = max(max_norm(c - conds[0]) for c in conds)
    return NoEvolutionResult(dev <= tol, dev)


def gauge_shift(steps: int, clock: ClockModel, dim_s: int = 1) -> np.ndarray:
    """``1 (x) exp(-i h steps delta) = 1 (x) S^steps``.

    Conjugating a Heisenberg observable, ``G^dagger O(t) G``, yields
    ``O(t + steps delta)`` on the cyclic grid.
    """
    clock.require_cyclic("gauge_shift")
    s = np.linalg.matrix_power(clock.shift, int(steps) % clock.dim)
    return np.kron(np.eye(dim_s), s)


def group_average(o_hp: np.ndarray, clock: ClockModel) -> np.ndarray:
    """Average of ``G_k^dagger O G_k`` over all cyclic clock shifts."""
    clock.require_cyclic("group_average")
    n, d = _split_dims(o_hp, clock)
    r = np.asarray(o_hp).reshape(n, d, n, d)
    # a shift by k moves clock indices (i, j) -> (i + k, j + k); average along diagonals
    out = np.zeros_like(r, dtype=complex)
    for k in range(d):
        out += np.roll(r, shift=(-k, -k), axis=(1, 3))
    return (out / d).reshape(n * d, n * d)


def _slice_difference(psi: np.ndarray, clock: ClockModel, n: int, scheme: str) -> np.ndarray:
    s = psi.reshape(n, clock.dim)
    fwd = np.roll(s, -1, axis=1)
    if scheme == "symmetric":
        out = (fwd - np.roll(s, 1, axis=1)) / (2 * clock.delta)
    elif scheme == "forward":
        out = (fwd - s) / clock.delta
    else:
        raise ValueError(f"unknown difference scheme {scheme!r}")
    return out.reshape(-1)


def time_op_derivative_state(psi: np.ndarray, clock: ClockModel, scheme: str = "symmetric") -> np.ndarray:
    """Finite-difference derivative of a state along the clock readings (cyclic).

    Approximates ``i (1 (x) h) psi`` to second order for smooth slices.
    """
    clock.require_cyclic("time_op_derivative_state")
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.size % clock.dim:
        raise ValueError(f"expected a state vector with length a multiple of {clock.dim}")
    return _slice_difference(psi, clock, psi.size // clock.dim, scheme)


def time_op_derivative_op(a: np.ndarray, clock: ClockModel, scheme: str = "symmetric") -> np.ndarray:
    """Finite-difference derivative of an operator with respect to the time operator.

    ``symmetric``: ``(S^dagger a S - S a S^dagger) / (2 delta)``;
    ``forward``: ``(S^dagger a S - a) / delta``, with ``S = 1 (x) shift``.
    """
    clock.require_cyclic("time_op_derivative_op")
    n, _ = _split_dims(a, clock)
    s = gauge_shift(1, clock, n)
    up = s.conj().T @ a @ s
    if scheme == "symmetric":
        return (up - s @ a @ s.conj().T) / (2 * clock.delta)
    if scheme == "forward":
        return (up - a) / clock.delta
    raise ValueError(f"unknown difference scheme {scheme!r}")


def hp_generator_deviation(pmap: PictureMap, band_fraction: float | None = None) -> float:
    """``max | U^dagger (1 (x) h) U - (1 (x) h - H_eff (x) 1) |``.

    Zero only for an exact canonical pair. Over the full clock band the
    deviation equals the spectral radius of ``H_eff`` at every ``d``, because
    clock modes within that distance of the band edge wrap around. With
    ``band_fraction`` both sides are compressed to the clock energies
    ``|eps| <= band_fraction * max|eps|``; for grid-commensurate spectra that
    compression is exact as soon as the band stays clear of the edge.
    """
    if pmap.kind != UNITARY:
        raise ValueError("generator deviation needs a unitary picture map")
    n, d = pmap.dims
    clock = pmap.clock
    hc = np.kron(np.eye(n), clock.h_op)
    diff = pmap.u.conj().T @ hc @ pmap.u - (hc - np.kron(pmap.h_eff_per_sector[0].op, np.eye(d)))
    if band_fraction is not None:
        p = np.kron(np.eye(n), central_band_projector(clock, band_fraction))
        diff = p @ diff @ p
    return max_norm(diff)


@dataclass(frozen=True)
class InteractionPictureResult:
    vec: np.ndarray
    residual: float


def interaction_picture_state(spec: UniverseSpec, psi: HistoryState) -> InteractionPictureResult:
    """Remove the free evolution from an interacting history state.

    Returns ``U_0^dagger Psi`` with ``U_0`` the free picture unitary, and the
    norm of ``i D Psi_I - (V_I - E) Psi_I`` where ``D`` is the symmetric
    clock difference and ``V_I = U_0^dagger V U_0``. The residual is
    second order in the clock spacing when the sector energies lie on the
    clock frequency grid.
    """
    if spec.interaction is None:
        raise ValueError("interaction picture needs an interaction")
    n, d = spec.dims
    u0 = picture_unitary(spec.h_system, spec.clock)
    psi_i = u0.conj().T @ psi.vec
    v_i = u0.conj().T @ spec.interaction_op() @ u0
    lhs = 1j * time_op_derivative_state(psi_i, spec.clock)
    res = lhs - (v_i @ psi_i - spec.energy * psi_i)
    return InteractionPictureResult(psi_i, float(np.linalg.norm(res)))


def phase_aligned(v: np.ndarray) -> np.ndarray:
    """Normalized copy of ``v`` with the global phase fixed."""
    v = np.asarray(v, dtype=complex)
    return fix_global_phase(v / np.linalg.norm(v))


__all__ = [
    "PictureMap",
    "HeisenbergState",
    "NoPictureMapError",
    "NoEvolutionResult",
    "InteractionPictureResult",
    "sp_hp_map",
    "heisenberg_from_vector",
    "heisenberg_from_density",
    "product_heisenberg_state",
    "to_heisenberg_state",
    "to_hp_observable",
    "relative_observable",
    "reduced_relative_observable",
    "relative_expectation",
    "no_evolution_check",
    "gauge_shift",
    "group_average",
    "time_op_derivative_state",
    "time_op_derivative_op",
    "hp_generator_deviation",
    "interaction_picture_state",
    "phase_aligned",
]
