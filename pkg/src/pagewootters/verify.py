"""Invariant battery run by ``pagewootters verify``.

Each suite returns its worst residual against a threshold. Clocks are built
through an injectable factory so that a deliberately broken clock can be
shown to trip the suites that depend on it.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .clock import ClockModel, canonical_defect, make_cyclic_clock, make_two_level_clock, shift_residual
from .interactions import (
    InteractionSpec,
    build_interaction,
    effective_hamiltonian,
    kraus_set,
    validate_interaction,
)
from .linalg import (
    SX,
    SY,
    SZ,
    commutator,
    eigh,
    max_norm,
    pure_fidelity,
    propagator,
    random_hermitian,
)
from .models import (
    TwoLevelParams,
    coherence_time,
    decoherence_time_numeric,
    phi_omega_massive,
    pipeline_phi_omega,
    reference_ratios,
)
from .pictures import (
    group_average,
    hp_generator_deviation,
    reduced_relative_observable,
    sp_hp_map,
    to_heisenberg_state,
    to_hp_observable,
    time_op_derivative_state,
)
from .universe import UniverseSpec, condition, history_state_pure, physical_inner, stationarity_residual

ClockFactory = Callable[..., ClockModel]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    residual: float
    threshold: float
    detail: str

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual)) and self.residual <= self.threshold


def flipped_generator_clock(d: int, t0: float = 0.0, delta: float = 1.0) -> ClockModel:
    """Cyclic clock whose generator has the wrong sign (fault injection)."""
    c = make_cyclic_clock(d, t0, delta)
    return replace(c, h_op=-c.h_op, frequencies=-c.frequencies)


def _worst(pairs: dict[str, float]) -> tuple[float, str]:
    name = max(pairs, key=pairs.get)
    return pairs[name], name


def suite_linalg(rng: np.random.Generator) -> SuiteResult:
    res = {}
    for n in (2, 3, 6):
        h = random_hermitian(n, rng)
        f = eigh(h)
        res[f"reconstruct n={n}"] = max_norm(f.reconstruct() - h)
        res[f"propagator vs expm n={n}"] = max_norm(propagator(h, 0.7) - expm(-0.7j * h))
    worst, name = _worst(res)
    return SuiteResult("linalg", worst, 1e-12, name)


def suite_clock(factory: ClockFactory) -> SuiteResult:
    res = {}
    for d in (8, 16, 33):
        c = factory(d, 0.0, 0.3)
        res[f"shift d={d}"] = shift_residual(c)
    # smooth packet well inside the window: the canonical relation holds
    c = factory(128, 0.0, 0.25)
    t = c.grid
    packet = np.exp(-((t - t.mean()) ** 2) / (2 * 2.0 ** 2)).astype(complex)
    res["canonical defect on packet"] = canonical_defect(c, packet / np.linalg.norm(packet))
    worst, name = _worst(res)
    return SuiteResult("clock", worst, 1e-9, name)


def suite_universe(factory: ClockFactory) -> SuiteResult:
    res = {}
    h = SX / 2
    c = factory(64, 0.0, 4 * np.pi / 64)
    spec = UniverseSpec(h, c)
    psi0 = np.array([1, 0], dtype=complex)
    hist = history_state_pure(spec, psi0)
    res["round trip"] = max(1 - pure_fidelity(condition(hist, k), expm(-1j * h * t) @ psi0) for k, t in enumerate(c.grid))
    res["stationarity (on grid)"] = stationarity_residual(hist)
    solver = history_state_pure(spec, psi0, mode="solver")
    res["direct vs solver"] = 1 - abs(np.vdot(solver.vec, hist.vec))
    norms = [physical_inner(hist, hist, k).real for k in range(c.dim)]
    res["physical norm"] = max(abs(x - 1) for x in norms)
    worst, name = _worst(res)
    return SuiteResult("universe", worst, 1e-10, name)


def suite_hp_observables(factory: ClockFactory) -> SuiteResult:
    res = {}
    h = SX / 2
    c = factory(32, 0.0, 4 * np.pi / 32)
    spec = UniverseSpec(h, c)
    pmap = sp_hp_map(spec)
    hs = to_heisenberg_state(history_state_pure(spec, np.array([1, 0], dtype=complex)), pmap)
    worst_obs = 0.0
    for o in (SX, SY, SZ):
        o_hp = to_hp_observable(o, pmap)
        for k, t in enumerate(c.grid):
            u = expm(-1j * h * t)
            worst_obs = max(worst_obs, max_norm(reduced_relative_observable(o_hp, k, hs) - u.conj().T @ o @ u))
        res["group average commutes with clock generator"] = max(
            res.get("group average commutes with clock generator", 0.0),
            max_norm(commutator(group_average(o_hp, c), np.kron(np.eye(2), c.h_op))),
        )
    res["reduced relative observables"] = worst_obs
    res["HP generator deviation (central band)"] = hp_generator_deviation(pmap, band_fraction=0.5)
    worst, name = _worst(res)
    return SuiteResult("hp-observables", worst, 1e-10, name)


def suite_interactions(factory: ClockFactory) -> SuiteResult:
    c = factory(8, 0.0, 0.5)
    h = SX / 2
    good = validate_interaction(build_interaction(InteractionSpec.gravitational(1.0), h, c), h, c)
    faults = {
        "sigma_z (x) h": np.kron(SZ, c.h_op),
        "H (x) t": np.kron(h, c.t_op),
        "H (x) h^2": np.kron(h, c.h_op @ c.h_op),
    }
    res = {"gravitational coupling accepted": 0.0 if good.ok else 1.0}
    for name, v in faults.items():
        res[f"fault {name} rejected"] = 1.0 if validate_interaction(v, h, c).ok else 0.0
    w = eigh(effective_hamiltonian(h, InteractionSpec.gravitational(1.0), 0.0).op).eigenvalues
    res["H_eff spectrum"] = max_norm(w - np.array([-1.0, 1 / 3]))
    ks = kraus_set([(0.3, h), (0.7, -h)], 1.3)
    res["Kraus completeness"] = ks.completeness()
    worst, name = _worst(res)
    return SuiteResult("interactions", worst, 1e-10, name)


def suite_models(rng: np.random.Generator) -> SuiteResult:
    res = {}
    rel = 0.0
    for _ in range(20):
        lam = rng.choice([-1, 1]) * rng.uniform(0.6, 5.0)
        p = TwoLevelParams(lam, rng.uniform(-1, 1), rng.uniform(0, 2), rng.uniform(0.2, 1.5))
        if p.is_singular(1e-3):
            continue
        oracle = phi_omega_massive(p)
        pipe = pipeline_phi_omega(p)
        rel = max(rel, abs(oracle[1] - pipe[1]) / max(abs(oracle[1]), 1e-300), abs(oracle[0] - pipe[0]) / max(abs(oracle[0]), 1.0))
    res["oracle vs pipeline"] = rel
    p = TwoLevelParams(1.0, 0.5)
    tau_d = coherence_time(p)[0]
    res["numeric decoherence time"] = abs(decoherence_time_numeric(p) - tau_d) / tau_d
    worst, name = _worst(res)
    return SuiteResult("models", worst, 1e-6, name)


def suite_derivatives(factory: ClockFactory) -> SuiteResult:
    h = SX / 2
    errs = []
    for d in (32, 64):
        c = factory(d, 0.0, 4 * np.pi / d)
        hist = history_state_pure(UniverseSpec(h, c), np.array([1, 0], dtype=complex))
        exact = -1j * np.kron(h, np.eye(d)) @ hist.vec
        errs.append(np.linalg.norm(time_op_derivative_state(hist.vec, c) - exact))
    ratio = errs[0] / errs[1]
    return SuiteResult("derivatives", abs(ratio - 4.0), 0.5, f"refinement ratio {ratio:.4f}")


def info_lines() -> list[str]:
    lines = []
    for r in reference_ratios():
        tag = "matches" if r.agrees_with_published else "DIFFERS from"
        lines.append(
            f"INFO tau_D/tau for {r.label}: computed {r.computed:.4g} (order 10^{r.computed_order}), "
            f"{tag} published order 10^{r.published_order}"
        )
    return lines


def run_all(clock_factory: ClockFactory = make_cyclic_clock, seed: int = 0) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    suites = [
        ("linalg", lambda: suite_linalg(rng)),
        ("clock", lambda: suite_clock(clock_factory)),
        ("universe", lambda: suite_universe(clock_factory)),
        ("hp-observables", lambda: suite_hp_observables(clock_factory)),
        ("interactions", lambda: suite_interactions(clock_factory)),
        ("models", lambda: suite_models(rng)),
        ("derivatives", lambda: suite_derivatives(clock_factory)),
    ]
    out = []
    for name, fn in suites:
        try:
            out.append(fn())
        except (ValueError, np.linalg.LinAlgError) as exc:
            out.append(SuiteResult(name, float("inf"), 0.0, f"raised {type(exc).__name__}: {exc}"))
    return out


def two_level_commutator_check() -> float:
    """``max | [t, h] - (i dt / 2) sigma_y |`` on the two-level clock."""
    c = make_two_level_clock(0.0, 1.3)
    return max_norm(commutator(c.t_op, c.h_op) - 1j * 1.3 / 2 * SY)
