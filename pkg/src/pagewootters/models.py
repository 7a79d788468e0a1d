"""Closed-form results for qubit systems coupled to a clock.

The coupling is gravitational, ``f(E) = E / lam``, and the system Hamiltonian is
``mc2 + E_I sigma_x / 2``. The effective Hamiltonian in sector ``E`` is then
``phi * 1 + omega * sigma_x / 2``. Energies are in arbitrary units with
``hbar = 1`` unless a function says otherwise. SI evaluations draw their
constants from :data:`CONSTANTS`.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from types import MappingProxyType
from typing import Iterable

import numpy as np
from scipy.optimize import minimize_scalar

from .interactions import InteractionSpec, effective_hamiltonian, kraus_evolution
from .linalg import I2, SX, SY, SZ, max_norm, purity

# CODATA 2018, SI units; frozen so results do not drift with library versions
CONSTANTS = MappingProxyType({
    "c": 299792458.0,
    "G": 6.67430e-11,
    "hbar": 1.054571817e-34,
    "eV": 1.602176634e-19,
    "m_p": 1.67262192369e-27,
})

# published orders of magnitude for tau_D / tau at d = 1e-10 m
PUBLISHED_RATIO_ORDERS = MappingProxyType({"10 eV": 51, "proton rest energy": 41})
REFERENCE_DISTANCE = 1e-10

# distance in lam from a pole below which a point is reported singular
SINGULAR_LAMBDA_TOL = 1e-9


class SingularParameterError(ValueError):
    """The effective Hamiltonian diverges at this coupling."""


@dataclass(frozen=True)
class TwoLevelParams:
    """Coupling ``lam``, sector energy, rest energy ``mc2`` and level splitting ``e_internal``."""

    lam: float
    energy: float = 0.0
    mass_energy: float = 0.0
    e_internal: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.mass_energy < 0:
            raise ValueError("rest energy must be non-negative")
        if not self.e_internal > 0:
            raise ValueError("internal energy splitting must be positive")

    @property
    def delta(self) -> float:
        """``(1 + mc2 / lam)^2 - E_I^2 / (4 lam^2)``."""
        lam = self.lam
        return (1 + self.mass_energy / lam) ** 2 - self.e_internal ** 2 / (4 * lam ** 2)

    def poles(self) -> tuple[float, float]:
        """Couplings where the effective Hamiltonian diverges, ``-mc2 -+ E_I / 2``."""
        return (-self.mass_energy - self.e_internal / 2, -self.mass_energy + self.e_internal / 2)

    def is_singular(self, tol: float = SINGULAR_LAMBDA_TOL) -> bool:
        return abs(self.lam) <= tol or min(abs(self.lam - p) for p in self.poles()) <= tol

    def with_lam(self, lam: float) -> "TwoLevelParams":
        return replace(self, lam=float(lam))

    def system_hamiltonian(self) -> np.ndarray:
        return self.mass_energy * I2 + self.e_internal * SX / 2


@dataclass(frozen=True)
class SweepRow:
    """One sample of a coupling sweep; singular rows carry no values."""

    lam: float
    omega: float | None
    phi: float | None
    singular: bool


def _require_regular(p: TwoLevelParams) -> None:
    if p.is_singular():
        raise SingularParameterError(f"phi and omega diverge at lam = {p.lam:g}")


def phi_omega(p: TwoLevelParams) -> tuple[float, float]:
    """``phi`` and ``omega`` for a massless qubit.

    Examples
    --------
    >>> phi_omega(TwoLevelParams(lam=1.0))
    (-0.3333333333333333, 1.3333333333333333)
    """
    if p.mass_energy != 0:
        raise ValueError("phi_omega is the massless case; use phi_omega_massive")
    _require_regular(p)
    lam, e, ei = p.lam, p.energy, p.e_internal
    delta = p.delta
    phi = -(e + ei ** 2 / (4 * lam)) / delta
    omega = ei * (1 + e / lam) / delta
    return phi, omega


def phi_omega_massive(p: TwoLevelParams) -> tuple[float, float]:
    """``phi_m`` and ``omega_m`` for ``H = mc2 + E_I sigma_x / 2``."""
    _require_regular(p)
    lam, e, m, ei = p.lam, p.energy, p.mass_energy, p.e_internal
    delta = p.delta
    # written without dividing by mc2 so that mc2 = 0 is allowed
    phi = (m * (1 + (m - e) / lam) - (e + ei ** 2 / (4 * lam))) / delta
    omega = ei * (1 + e / lam) / delta
    return phi, omega


def pipeline_phi_omega(p: TwoLevelParams) -> tuple[float, float]:
    """``phi`` and ``omega`` read off the numerically built effective Hamiltonian."""
    _require_regular(p)
    heff = effective_hamiltonian(p.system_hamiltonian(), InteractionSpec.gravitational(p.lam), p.energy)
    if heff.excluded_eigenvalues:
        raise SingularParameterError(f"eigenvalue excluded at lam = {p.lam:g}")
    return float(np.trace(heff.op).real / 2), float(np.trace(heff.op @ SX).real)


ORACLE = "oracle"
PIPELINE = "pipeline"


def sweep(lams: Iterable[float], base: TwoLevelParams, backend: str = ORACLE) -> list[SweepRow]:
    """Evaluate ``(omega, phi)`` at each coupling, in input order."""
    if backend == ORACLE:
        fn = phi_omega_massive
    elif backend == PIPELINE:
        fn = pipeline_phi_omega
    else:
        raise ValueError(f"unknown backend {backend!r}")
    rows = []
    for lam in lams:
        p = base.with_lam(lam)
        if p.is_singular():
            rows.append(SweepRow(float(lam), None, None, True))
            continue
        phi, omega = fn(p)
        rows.append(SweepRow(float(lam), omega, phi, False))
    if not rows:
        raise ValueError("empty sweep range")
    return rows


def locate_singularities(lams: np.ndarray, base: TwoLevelParams) -> list[float]:
    """Couplings on a sorted grid where ``omega`` changes sign through a pole.

    Brackets are found where ``Delta`` changes sign between neighbouring
    samples and ``lam`` does not; each is reported as the midpoint, so the
    location is accurate to half the grid spacing.
    """
    lams = np.asarray(sorted(lams), dtype=float)
    lams = lams[lams != 0]
    deltas = np.array([base.with_lam(x).delta for x in lams])
    found = []
    for a, b, da, db in zip(lams[:-1], lams[1:], deltas[:-1], deltas[1:]):
        if np.sign(a) != np.sign(b):
            continue
        if da == 0:
            found.append(float(a))
        elif da * db < 0:
            found.append(float(0.5 * (a + b)))
    if len(deltas) and deltas[-1] == 0:
        found.append(float(lams[-1]))
    return sorted(set(found))


def critical_distances(mass: float, e_internal: float) -> tuple[float, float, float]:
    """Distances (SI) at which the gravitational coupling hits a pole.

    Returns ``(d_minus, d_plus, R_S)`` with ``d = R_S / 2 -+ E_I G / (2 c^4)``
    and ``R_S = 2 G m / c^2``. ``mass`` in kg, ``e_internal`` in joules.
    """
    if not mass > 0:
        raise ValueError("critical distances need a positive mass")
    g, c = CONSTANTS["G"], CONSTANTS["c"]
    rs = 2 * g * mass / c ** 2
    shift = e_internal * g / (2 * c ** 4)
    return rs / 2 - shift, rs / 2 + shift, rs


def gravitational_lambda(distance: float) -> float:
    """Coupling scale ``d c^4 / G`` in joules for a clock at ``distance`` metres."""
    return distance * CONSTANTS["c"] ** 4 / CONSTANTS["G"]


def coherence_time(p: TwoLevelParams) -> tuple[float, float, float]:
    """``(tau_D, tau, tau_D / tau)`` for two equally weighted sectors ``0`` and ``energy``.

    ``tau_D = pi hbar Delta lam / (E_I E)`` is when the system becomes
    maximally mixed and ``tau = 2 pi hbar Delta / E_I`` is the free period.
    """
    if p.energy == 0:
        raise ValueError("a single energy sector never decoheres (tau_D is infinite)")
    _require_regular(p)
    tau_d = np.pi * p.hbar * p.delta * p.lam / (p.e_internal * p.energy)
    tau = 2 * np.pi * p.hbar * p.delta / p.e_internal
    return float(tau_d), float(tau), float(tau_d / tau)


def coherence_ratio(lam: float, energy: float) -> float:
    """``tau_D / tau = lam / (2 E)``, independent of ``E_I``, ``mc2`` and ``hbar``."""
    if energy == 0:
        raise ValueError("ratio is infinite for E = 0")
    return lam / (2 * energy)


def gravitational_ratio(distance: float, energy_j: float) -> float:
    """``tau_D / tau`` for a clock at ``distance`` metres and sector energy in joules."""
    return coherence_ratio(gravitational_lambda(distance), energy_j)


@dataclass(frozen=True)
class RatioReport:
    label: str
    energy_j: float
    computed: float
    published_order: int

    @property
    def computed_order(self) -> int:
        return int(np.floor(np.log10(self.computed)))

    @property
    def agrees_with_published(self) -> bool:
        return self.computed_order == self.published_order


def reference_ratios(distance: float = REFERENCE_DISTANCE) -> list[RatioReport]:
    """Ratios for a 10 eV sector and a proton-rest-energy sector, with published orders."""
    ev, c, mp = CONSTANTS["eV"], CONSTANTS["c"], CONSTANTS["m_p"]
    cases = {"10 eV": 10 * ev, "proton rest energy": mp * c ** 2}
    return [
        RatioReport(label, e, gravitational_ratio(distance, e), PUBLISHED_RATIO_ORDERS[label])
        for label, e in cases.items()
    ]


def two_sector_purity(p: TwoLevelParams, t, rho0: np.ndarray | None = None) -> np.ndarray:
    """Purity of the equal mixture of sectors ``0`` and ``p.energy`` after time(s) ``t``."""
    rho0 = np.diag([1.0, 0.0]).astype(complex) if rho0 is None else rho0
    h = p.system_hamiltonian()
    spec = InteractionSpec.gravitational(p.lam)
    sectors = [(0.5, effective_hamiltonian(h, spec, 0.0)), (0.5, effective_hamiltonian(h, spec, p.energy))]
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.array([purity(kraus_evolution(rho0, sectors, tk / p.hbar)) for tk in ts])
    return out if np.ndim(t) else out[0]


def decoherence_time_numeric(p: TwoLevelParams, t_max: float | None = None, n_grid: int = 2001) -> float:
    """First minimum of the two-sector purity, found on a grid then refined."""
    if t_max is None:
        t_max = 2 * coherence_time(p)[0]
    ts = np.linspace(0, t_max, n_grid)
    pur = two_sector_purity(p, ts)
    interior = np.where((pur[1:-1] <= pur[:-2]) & (pur[1:-1] <= pur[2:]))[0]
    if interior.size == 0:
        raise ValueError("purity has no minimum in the scanned window")
    j = interior[0] + 1
    res = minimize_scalar(
        lambda t: float(two_sector_purity(p, t)),
        bounds=(ts[j - 1], ts[j + 1]),
        method="bounded",
        options={"xatol": 1e-13},
    )
    return float(res.x)


def qubit_clock_reference(delta_t: float) -> np.ndarray:
    """System density at the second reading of the two-level clock model."""
    c, s = np.cos(delta_t), np.sin(delta_t)
    return 0.5 * np.array([[1 + c, 1j * s], [-1j * s, 1 - c]], dtype=complex)


def free_generators_reference(t: float) -> tuple[np.ndarray, np.ndarray]:
    """Heisenberg ``sigma_x`` and ``sigma_z`` at time ``t`` for ``H = sigma_x / 2``."""
    return SX.copy(), SZ * np.cos(t) + SY * np.sin(t)


def max_disagreement(a: list[SweepRow], b: list[SweepRow]) -> float:
    """Largest ``|omega|`` or ``|phi|`` gap between two sweeps over the same grid."""
    worst = 0.0
    for ra, rb in zip(a, b, strict=True):
        if ra.lam != rb.lam or ra.singular != rb.singular:
            raise ValueError(f"sweeps disagree on grid or singular tags at lam = {ra.lam}")
        if not ra.singular:
            worst = max(worst, abs(ra.omega - rb.omega), abs(ra.phi - rb.phi))
    return worst


__all__ = [
    "CONSTANTS",
    "PUBLISHED_RATIO_ORDERS",
    "TwoLevelParams",
    "SweepRow",
    "SingularParameterError",
    "phi_omega",
    "phi_omega_massive",
    "pipeline_phi_omega",
    "sweep",
    "locate_singularities",
    "critical_distances",
    "gravitational_lambda",
    "coherence_time",
    "coherence_ratio",
    "gravitational_ratio",
    "reference_ratios",
    "two_sector_purity",
    "decoherence_time_numeric",
    "qubit_clock_reference",
    "free_generators_reference",
    "max_disagreement",
    "max_norm",
]
