"""System-clock interactions of the form ``f(H) (x) h`` and their consequences.

An interaction that conserves ``H + h``, does not depend on the time
operator and is at most linear in ``h`` leaves the system with a
self-adjoint effective Hamiltonian in each eigensector ``E_univ`` of the
universe Hamiltonian:

    H_eff(E_univ) = (H - E_univ) (1 + f(H))^-1

Mixtures of sectors evolve through a Kraus channel built from these.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .clock import ClockModel
from .linalg import (
    STRUCT_TOL,
    check_density,
    commutator,
    eigh,
    func_of_hermitian,
    max_norm,
    propagator,
    purity,
)

GRAVITATIONAL = "gravitational"
CUSTOM = "custom_f"

# |1 + f(E)| below this counts as singular
SINGULAR_TOL = 1e-12


class SingularSectorError(ValueError):
    """``f(E) = -1`` on an eigenvalue that must be used: no constraint solution."""


@dataclass(frozen=True)
class InteractionSpec:
    """The function ``f`` of an interaction ``V = f(H) (x) h``.

    ``f`` is applied to arrays of eigenvalues of the system Hamiltonian.
    Use :meth:`gravitational` for ``f(E) = E / lam``.
    """

    f: Callable[[np.ndarray], np.ndarray]
    tag: str
    kind: str = CUSTOM
    lam: float | None = None

    @classmethod
    def gravitational(cls, lam: float) -> "InteractionSpec":
        if lam == 0 or not np.isfinite(lam):
            raise ValueError(f"coupling scale must be finite and nonzero, got {lam}")
        lam = float(lam)
        return cls(f=lambda e: np.asarray(e, dtype=float) / lam, tag=f"E/{lam:g}", kind=GRAVITATIONAL, lam=lam)

    @classmethod
    def custom(cls, f: Callable[[np.ndarray], np.ndarray], tag: str) -> "InteractionSpec":
        return cls(f=f, tag=tag, kind=CUSTOM)

    def __call__(self, e):
        return np.asarray(self.f(np.asarray(e, dtype=float)), dtype=float)


@dataclass(frozen=True)
class InteractionReport:
    """Commutator diagnostics of a candidate interaction.

    ``conservation``: ``||[H (x) 1 + 1 (x) h, V]||``;
    ``time_independence``: ``||[1 (x) h, V]||``;
    ``linearity``: largest second divided difference of ``V`` along the
    ``h`` spectrum (zero when ``V`` is affine in ``h``).
    """

    conservation: float
    time_independence: float
    linearity: float
    tol: float = STRUCT_TOL

    @property
    def conserves_energy(self) -> bool:
        return self.conservation <= self.tol

    @property
    def time_independent(self) -> bool:
        return self.time_independence <= self.tol

    @property
    def linear_in_h(self) -> bool:
        return self.linearity <= self.tol

    @property
    def ok(self) -> bool:
        return self.conserves_energy and self.time_independent and self.linear_in_h

    def failures(self) -> list[str]:
        out = []
        if not self.conserves_energy:
            out.append(f"does not conserve H + h (residual {self.conservation:.3e})")
        if not self.time_independent:
            out.append(f"depends on the time operator (residual {self.time_independence:.3e})")
        if not self.linear_in_h:
            out.append(f"is not linear in h (curvature {self.linearity:.3e})")
        return out


def _clock_eigenbasis(clock: ClockModel) -> tuple[np.ndarray, np.ndarray]:
    if clock.fourier is not None:
        return clock.frequencies, clock.fourier
    return eigh(clock.h_op)


def validate_interaction(v: np.ndarray, h_sys: np.ndarray, clock: ClockModel, tol: float = STRUCT_TOL) -> InteractionReport:
    n = h_sys.shape[0]
    d = clock.dim
    if v.shape != (n * d, n * d):
        raise ValueError(f"interaction has shape {v.shape}, expected {(n * d, n * d)}")
    ident_s = np.eye(n)
    h_clock = np.kron(ident_s, clock.h_op)
    free = np.kron(h_sys, np.eye(d)) + h_clock
    conservation = max_norm(commutator(free, v))
    time_dep = max_norm(commutator(h_clock, v))

    # clock-diagonal blocks B(eps) = <eps| V |eps> in the h eigenbasis, sorted by eps
    eps, basis = _clock_eigenbasis(clock)
    order = np.argsort(eps)
    eps, basis = eps[order], basis[:, order]
    w = np.kron(ident_s, basis)
    vb = (w.conj().T @ v @ w).reshape(n, d, n, d)
    blocks = np.stack([vb[:, m, :, m] for m in range(d)])
    curvature = 0.0
    for m in range(1, d - 1):
        h1, h2 = eps[m] - eps[m - 1], eps[m + 1] - eps[m]
        second = 2 * (
            (blocks[m + 1] - blocks[m]) / h2 - (blocks[m] - blocks[m - 1]) / h1
        ) / (h1 + h2)
        curvature = max(curvature, max_norm(second))
    return InteractionReport(conservation, time_dep, curvature, tol)


def build_interaction(spec: InteractionSpec, h_sys: np.ndarray, clock: ClockModel) -> np.ndarray:
    """``f(H) (x) h``."""
    w = eigh(h_sys).eigenvalues
    fw = spec(w)
    if not np.all(np.isfinite(fw)):
        raise ValueError(f"interaction function {spec.tag} is undefined on the spectrum {w}")
    return np.kron(func_of_hermitian(h_sys, spec), clock.h_op)


def g_function(e: float, spec: InteractionSpec | None, energy: float = 0.0) -> float:
    """Clock energy solving ``E + eps + f(E) eps = energy``: ``-(E - energy) / (1 + f(E))``."""
    fe = 0.0 if spec is None else float(spec(np.array([e]))[0])
    if abs(1 + fe) <= SINGULAR_TOL:
        raise SingularSectorError(f"f({e:g}) = -1: no clock energy satisfies the constraint")
    return -(e - energy) / (1 + fe)


@dataclass(frozen=True, eq=False)
class EffectiveHamiltonian:
    """``-g(H)`` for one eigensector; eigenvalues with ``f(E) = -1`` are excluded.

    Excluded eigenspaces are assigned 0 in ``op`` and listed in
    ``excluded_eigenvalues``; a state populating them has no valid history.
    """

    op: np.ndarray
    spec: InteractionSpec | None
    energy: float
    excluded_eigenvalues: tuple = field(default_factory=tuple)


def effective_hamiltonian(h_sys: np.ndarray, spec: InteractionSpec | None, energy: float = 0.0) -> EffectiveHamiltonian:
    w, v = eigh(h_sys)
    fw = np.zeros_like(w) if spec is None else spec(w)
    denom = 1 + fw
    singular = np.abs(denom) <= SINGULAR_TOL
    if singular.all():
        raise SingularSectorError("f(E) = -1 on every eigenvalue of the system Hamiltonian")
    vals = np.where(singular, 0.0, (w - energy) / np.where(singular, 1.0, denom))
    op = (v * vals) @ v.conj().T
    excluded = tuple(float(e) for e in np.unique(np.round(w[singular], 12)))
    return EffectiveHamiltonian(op=0.5 * (op + op.conj().T), spec=spec, energy=energy, excluded_eigenvalues=excluded)


def excluded_weight(psi0: np.ndarray, h_sys: np.ndarray, heff: EffectiveHamiltonian, tol: float = 1e-9) -> float:
    """Probability that ``psi0`` populates an excluded eigenvalue of ``h_sys``."""
    if not heff.excluded_eigenvalues:
        return 0.0
    w, v = eigh(h_sys)
    amps = np.abs(v.conj().T @ psi0) ** 2
    bad = np.zeros_like(w, dtype=bool)
    for e in heff.excluded_eigenvalues:
        bad |= np.abs(w - e) <= tol
    return float(amps[bad].sum())


@dataclass(frozen=True)
class KrausSet:
    """Weighted Kraus operators ``sqrt(p_k) exp(-i H_k t)``."""

    weights: tuple
    ops: tuple

    def completeness(self) -> float:
        n = self.ops[0].shape[0]
        return max_norm(sum(b.conj().T @ b for b in self.ops) - np.eye(n))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(b @ rho @ b.conj().T for b in self.ops)


def _check_weights(weights) -> np.ndarray:
    p = np.asarray(weights, dtype=float)
    if p.size == 0 or np.any(p <= 0):
        raise ValueError("sector weights must be positive")
    if abs(p.sum() - 1) > 1e-12:
        raise ValueError(f"sector weights must sum to 1, got {p.sum()!r}")
    return p


def _as_op(h) -> np.ndarray:
    return h.op if isinstance(h, EffectiveHamiltonian) else np.asarray(h)


def kraus_set(sectors: Sequence[tuple[float, np.ndarray]], t: float) -> KrausSet:
    p = _check_weights([s[0] for s in sectors])
    ops = tuple(np.sqrt(pk) * propagator(_as_op(h), t) for pk, (_, h) in zip(p, sectors))
    return KrausSet(tuple(p), ops)


def kraus_evolution(rho0: np.ndarray, sectors: Sequence[tuple[float, np.ndarray]], t: float) -> np.ndarray:
    """``sum_k p_k exp(-i H_k t) rho0 exp(i H_k t)``."""
    rho0 = check_density(rho0)
    return kraus_set(sectors, t).apply(rho0)


@dataclass(frozen=True)
class SectorOverlap:
    exact: float
    approx: float

    @property
    def gap(self) -> float:
        return abs(self.exact - self.approx)


def sector_overlap(psi0: np.ndarray, h_sys: np.ndarray, lam: float, energy: float, energy_other: float, t: float) -> SectorOverlap:
    """Overlap of the system histories in two eigensectors under ``f(E) = E / lam``.

    ``exact`` uses the two effective Hamiltonians; ``approx`` is the
    large-``lam`` estimate ``|<psi0| exp(i (E' - E) H t / lam) |psi0>|``.
    """
    spec = InteractionSpec.gravitational(lam)
    h1 = effective_hamiltonian(h_sys, spec, energy)
    h2 = effective_hamiltonian(h_sys, spec, energy_other)
    for h in (h1, h2):
        if excluded_weight(psi0, h_sys, h) > 0:
            raise SingularSectorError("initial state populates a singular eigenvalue")
    a = propagator(h1.op, t) @ psi0
    b = propagator(h2.op, t) @ psi0
    exact = abs(np.vdot(b, a))
    approx = abs(np.vdot(psi0, propagator(h_sys, -(energy_other - energy) * t / lam) @ psi0))
    return SectorOverlap(float(exact), float(approx))


def nonunitarity_report(times, rhos) -> dict[str, np.ndarray]:
    """Purity, trace distance to the maximally mixed state and smallest eigenvalue per time."""
    times = np.asarray(times, dtype=float)
    if len(times) < 2 or len(times) != len(rhos):
        raise ValueError("need at least two (time, density) samples")
    n = rhos[0].shape[0]
    mixed = np.eye(n) / n
    pur, dist, lmin = [], [], []
    for rho in rhos:
        herm = 0.5 * (rho + rho.conj().T)
        pur.append(purity(rho))
        dist.append(0.5 * float(np.abs(np.linalg.eigvalsh(herm - mixed)).sum()))
        lmin.append(float(np.linalg.eigvalsh(herm).min()))
    return {"t": times, "purity": np.array(pur), "trace_distance_to_mixed": np.array(dist), "min_eigenvalue": np.array(lmin)}
