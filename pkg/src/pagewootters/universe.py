"""Universe Hamiltonians, history states and conditioning on clock readings."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .clock import CYCLIC, ClockModel, uniform_clock_state
from .interactions import (
    SINGULAR_TOL,
    EffectiveHamiltonian,
    InteractionSpec,
    SingularSectorError,
    build_interaction,
    effective_hamiltonian,
    excluded_weight,
    validate_interaction,
)
from .linalg import (
    STRUCT_TOL,
    check_density,
    commutator,
    eigensector,
    eigh,
    is_hermitian,
    max_norm,
    partial_inner_clock,
    partial_trace_clock,
    propagator,
)

DIRECT = "direct"
SOLVER = "solver"
# Tr[R Pi_k] below this is treated as a reading with no support
ZERO_READING_TOL = 1e-14


class UnphysicalReadingError(ValueError):
    """The state gives zero probability to the requested clock reading."""


@dataclass(frozen=True, eq=False)
class UniverseSpec:
    """System Hamiltonian, clock, optional interaction and constraint eigenvalue."""

    h_system: np.ndarray
    clock: ClockModel
    interaction: InteractionSpec | None = None
    energy: float = 0.0

    def __post_init__(self):
        h = np.asarray(self.h_system, dtype=complex)
        if not is_hermitian(h):
            raise ValueError("system Hamiltonian must be Hermitian")
        object.__setattr__(self, "h_system", h)
        if self.interaction is not None:
            report = validate_interaction(self.interaction_op(), h, self.clock)
            if not report.ok:
                raise ValueError("interaction rejected: " + "; ".join(report.failures()))

    @property
    def dim_s(self) -> int:
        return self.h_system.shape[0]

    @property
    def dim_c(self) -> int:
        return self.clock.dim

    @property
    def dims(self) -> tuple[int, int]:
        return self.dim_s, self.dim_c

    def interaction_op(self) -> np.ndarray:
        n, d = self.dims
        if self.interaction is None:
            return np.zeros((n * d, n * d), dtype=complex)
        return build_interaction(self.interaction, self.h_system, self.clock)

    def h_eff(self, energy: float | None = None) -> EffectiveHamiltonian:
        return effective_hamiltonian(self.h_system, self.interaction, self.energy if energy is None else energy)

    def with_energy(self, energy: float) -> "UniverseSpec":
        return UniverseSpec(self.h_system, self.clock, self.interaction, energy)


def assemble_hamiltonian(spec: UniverseSpec) -> np.ndarray:
    """``H (x) 1 + 1 (x) h + V``."""
    n, d = spec.dims
    return np.kron(spec.h_system, np.eye(d)) + np.kron(np.eye(n), spec.clock.h_op) + spec.interaction_op()


@dataclass(frozen=True, eq=False)
class HistoryState:
    """A unit vector on system (x) clock together with the spec that built it."""

    vec: np.ndarray
    spec: UniverseSpec
    psi0: np.ndarray | None = None
    mode: str = DIRECT

    @property
    def dims(self) -> tuple[int, int]:
        return self.spec.dims

    def slices(self) -> np.ndarray:
        """Unnormalized system states ``<t_k|Psi>`` as rows, shape ``(d, n)``."""
        n, d = self.dims
        return self.vec.reshape(n, d).T.copy()


@dataclass(frozen=True, eq=False)
class MixedUniverse:
    """A stationary-candidate density operator of the universe.

    ``components`` lists ``(p_k, E_k, rho0_k)`` for eigensector mixtures and
    is empty for states assembled some other way.
    """

    assembled: np.ndarray
    spec: UniverseSpec
    components: tuple = field(default_factory=tuple)

    @property
    def dims(self) -> tuple[int, int]:
        return self.spec.dims


def _normalize_state(psi0) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValueError(f"initial state must have unit norm, got {np.linalg.norm(psi0)!r}")
    return psi0


def _slice_propagators(heff: np.ndarray, grid: np.ndarray) -> np.ndarray:
    w, v = eigh(heff)
    phases = np.exp(-1j * np.outer(grid, w))
    return np.einsum("ij,kj,lj->kil", v, phases, v.conj())


def history_state_pure(spec: UniverseSpec, psi0, mode: str = DIRECT, tol: float = 1e-9) -> HistoryState:
    """History state whose clock-conditioned slices are ``exp(-i H_eff t_k) psi0``.

    ``mode="direct"`` writes the slices down; ``mode="solver"`` instead takes
    the eigenspace of the universe Hamiltonian at the constraint eigenvalue
    and picks the vector whose first slice matches. The solver route only
    succeeds when the clock-energy sectors fall on the clock's frequency grid.
    """
    spec.clock.require_cyclic("history_state_pure")
    psi0 = _normalize_state(psi0)
    n, d = spec.dims
    if psi0.shape != (n,):
        raise ValueError(f"initial state has shape {psi0.shape}, expected {(n,)}")
    heff = spec.h_eff()
    if excluded_weight(psi0, spec.h_system, heff, tol) > tol:
        raise SingularSectorError(
            f"initial state populates eigenvalues {heff.excluded_eigenvalues} where f(E) = -1"
        )
    props = _slice_propagators(heff.op, spec.clock.grid)
    slices = props @ psi0 / np.sqrt(d)
    direct = slices.T.reshape(-1)
    if mode == DIRECT:
        return HistoryState(direct, spec, psi0, DIRECT)
    if mode != SOLVER:
        raise ValueError(f"unknown construction mode {mode!r}")

    _, basis = eigensector(assemble_hamiltonian(spec), spec.energy, tol)
    if basis.shape[1] == 0:
        raise ValueError(f"universe Hamiltonian has no eigenvalue within {tol:g} of {spec.energy:g}")
    first = basis.reshape(n, d, -1)[:, 0, :]
    coeffs, *_ = np.linalg.lstsq(first, slices[0], rcond=None)
    vec = basis @ coeffs
    if abs(np.vdot(slices[0], first @ coeffs)) < 1e-12 or np.linalg.norm(first @ coeffs - slices[0]) > 1e-8:
        raise ValueError("constraint eigenspace cannot reproduce the initial state; "
                         "are the sector energies on the clock frequency grid?")
    vec = vec / np.linalg.norm(vec)
    return HistoryState(vec, spec, psi0, SOLVER)


def history_state_mixed(components: Sequence[tuple[float, float, np.ndarray]], base: UniverseSpec) -> MixedUniverse:
    """``sum_k p_k U_k (rho0_k (x) |TL><TL|) U_k^dagger`` with ``U_k = exp(-i H_eff(E_k) (x) t)``."""
    base.clock.require_cyclic("history_state_mixed")
    n, d = base.dims
    weights = np.array([c[0] for c in components], dtype=float)
    if weights.size == 0 or np.any(weights <= 0) or abs(weights.sum() - 1) > 1e-12:
        raise ValueError("sector weights must be positive and sum to 1")
    tl = uniform_clock_state(base.clock)
    clock_proj = np.outer(tl, tl.conj())
    total = np.zeros((n * d, n * d), dtype=complex)
    comps = []
    for p, energy, rho0 in components:
        rho0 = check_density(rho0)
        heff = base.h_eff(energy)
        w, v = eigh(rho0)
        for lam_j, vec_j in zip(w, v.T):
            if lam_j > 1e-12 and excluded_weight(vec_j, base.h_system, heff) > 1e-9:
                raise SingularSectorError(f"sector E={energy:g} populates an eigenvalue with f(E) = -1")
        u = picture_unitary(heff.op, base.clock)
        total += p * u @ np.kron(rho0, clock_proj) @ u.conj().T
        comps.append((float(p), float(energy), rho0))
    return MixedUniverse(0.5 * (total + total.conj().T), base, tuple(comps))


def picture_unitary(heff: np.ndarray, clock: ClockModel, t_ref: float = 0.0) -> np.ndarray:
    """Block-diagonal ``sum_k exp(-i H_eff (t_k - t_ref)) (x) |t_k><t_k|``."""
    n, d = heff.shape[0], clock.dim
    props = _slice_propagators(heff, clock.grid - t_ref)
    u = np.zeros((n, d, n, d), dtype=complex)
    for k in range(d):
        u[:, k, :, k] = props[k]
    return u.reshape(n * d, n * d)


def separable_history_mixture(spec: UniverseSpec, rho0) -> MixedUniverse:
    """Clock-diagonal mixture ``sum_k rho(t_k) (x) |t_k><t_k| / d``.

    Conditioning it reproduces the unitary evolution of ``rho0`` under the
    effective Hamiltonian, although the state is separable.
    """
    rho0 = check_density(rho0)
    n, d = spec.dims
    props = _slice_propagators(spec.h_eff().op, spec.clock.grid)
    r = np.zeros((n, d, n, d), dtype=complex)
    for k in range(d):
        r[:, k, :, k] = props[k] @ rho0 @ props[k].conj().T / d
    return MixedUniverse(r.reshape(n * d, n * d), spec)


def decohered_state(state, spec: UniverseSpec | None = None) -> MixedUniverse:
    """Remove all coherences between clock readings: ``sum_k <t_k|R|t_k> (x) |t_k><t_k|``."""
    rho, spec = _as_density(state, spec)
    n, d = spec.dims
    r = rho.reshape(n, d, n, d)
    out = np.zeros_like(r)
    for k in range(d):
        out[:, k, :, k] = r[:, k, :, k]
    out = out.reshape(n * d, n * d)
    return MixedUniverse(out / np.trace(out).real, spec)


def _as_density(state, spec: UniverseSpec | None) -> tuple[np.ndarray, UniverseSpec]:
    if isinstance(state, HistoryState):
        return np.outer(state.vec, state.vec.conj()), spec or state.spec
    if isinstance(state, MixedUniverse):
        return state.assembled, spec or state.spec
    raise TypeError(f"expected HistoryState or MixedUniverse, got {type(state).__name__}")


def stationarity_residual(state, spec: UniverseSpec | None = None) -> float:
    """``||(H_univ - E) Psi||`` for a pure state, ``max|[R, H_univ]|`` for a mixed one."""
    if isinstance(state, HistoryState):
        spec = spec or state.spec
        hu = assemble_hamiltonian(spec)
        return float(np.linalg.norm(hu @ state.vec - spec.energy * state.vec))
    rho, spec = _as_density(state, spec)
    return max_norm(commutator(rho, assemble_hamiltonian(spec)))


def translation_residual(state, spec: UniverseSpec | None = None) -> float:
    """``max|[R, exp(-i H_univ delta)]|``: invariance under one clock step.

    This is the form of stationarity the finite cyclic clock can honour for
    clock-diagonal states; see :func:`stationarity_residual` for the generator form.
    """
    rho, spec = _as_density(state, spec)
    spec.clock.require_cyclic("translation_residual")
    step = propagator(assemble_hamiltonian(spec), spec.clock.delta)
    return max_norm(commutator(rho, step))


def condition(state, k: int, dims: tuple[int, int] | None = None):
    """System state relative to clock reading ``k``.

    Pure input (a :class:`HistoryState` or a vector with ``dims``) gives a
    normalized vector; mixed input gives ``Tr_C[R Pi_k] / Tr[R Pi_k]``.
    """
    if isinstance(state, HistoryState):
        vec, dims = state.vec, state.dims
    elif isinstance(state, MixedUniverse):
        vec, dims = state.assembled, state.dims
    else:
        if dims is None:
            raise ValueError("dims=(dim_s, dim_c) required for raw arrays")
        vec = np.asarray(state)
    n, d = dims
    if not 0 <= k < d:
        raise IndexError(f"clock reading {k} out of range for dimension {d}")
    if vec.ndim == 1:
        s = partial_inner_clock(k, vec, n, d)
        norm = np.linalg.norm(s)
        if norm ** 2 < ZERO_READING_TOL:
            raise UnphysicalReadingError(f"state has no support on clock reading {k}")
        return s / norm
    block = vec.reshape(n, d, n, d)[:, k, :, k]
    weight = np.trace(block).real
    if weight < ZERO_READING_TOL:
        raise UnphysicalReadingError(f"state has no support on clock reading {k}")
    return block / weight


def physical_inner(a: HistoryState, b: HistoryState, k: int = 0) -> complex:
    """Physical inner product ``d <<a| (1 (x) |t_k><t_k|) |b>>``.

    The factor ``d`` undoes the ``1/sqrt(d)`` slice normalization so that a
    history state has physical norm 1.
    """
    if a.spec is not b.spec and a.dims != b.dims:
        raise ValueError("history states belong to different universes")
    n, d = a.dims
    sa = partial_inner_clock(k, a.vec, n, d)
    sb = partial_inner_clock(k, b.vec, n, d)
    return complex(d * np.vdot(sa, sb))


@dataclass(frozen=True)
class ConstraintSector:
    system_energy: float
    clock_energy: float


@dataclass(frozen=True)
class SectorTable:
    sectors: tuple
    excluded: tuple


def constraint_sectors(spec: UniverseSpec, tol: float = 1e-9) -> SectorTable:
    """Pairs ``(E, eps)`` of system and clock eigenvalues with ``E + eps + f(E) eps = energy``.

    Eigenvalues where ``f(E) = -1`` have no solution and are listed as excluded.
    """
    spec.clock.require_cyclic("constraint_sectors")
    e_vals = np.unique(np.round(eigh(spec.h_system).eigenvalues, 12))
    f = (lambda e: np.zeros_like(e)) if spec.interaction is None else spec.interaction
    sectors, excluded = [], []
    for e in e_vals:
        fe = float(f(np.array([e]))[0])
        if abs(1 + fe) <= SINGULAR_TOL:
            excluded.append(float(e))
            continue
        for eps in spec.clock.frequencies:
            if abs(e + eps + fe * eps - spec.energy) <= tol:
                sectors.append(ConstraintSector(float(e), float(eps)))
    return SectorTable(tuple(sectors), tuple(excluded))


def conditioned_states(state) -> list:
    """``condition(state, k)`` for every clock reading."""
    return [condition(state, k) for k in range(state.dims[1])]


def reduced_system(state) -> np.ndarray:
    rho, spec = _as_density(state, None)
    return partial_trace_clock(rho, *spec.dims)


__all__ = [
    "UniverseSpec",
    "HistoryState",
    "MixedUniverse",
    "UnphysicalReadingError",
    "assemble_hamiltonian",
    "history_state_pure",
    "history_state_mixed",
    "picture_unitary",
    "separable_history_mixture",
    "decohered_state",
    "stationarity_residual",
    "translation_residual",
    "condition",
    "physical_inner",
    "constraint_sectors",
    "conditioned_states",
    "reduced_system",
    "CYCLIC",
    "STRUCT_TOL",
]
