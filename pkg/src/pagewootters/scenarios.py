"""Named qubit scenarios: configuration, validation and per-reading output rows."""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .clock import make_cyclic_clock, make_two_level_clock, uniform_clock_state
from .interactions import InteractionSpec
from .linalg import SX, SY, SZ, STRUCT_TOL, bloch_vector, purity
from .models import CONSTANTS, TwoLevelParams, coherence_time, gravitational_ratio
from .pictures import heisenberg_from_vector, sp_hp_map
from .universe import UniverseSpec, condition, history_state_mixed, history_state_pure

SCENARIOS = ("free-qubit", "qubit-clock", "interacting-qubit", "massive-qubit", "mixed-decoherence")
FORMATS = ("json", "csv")
DEFAULT_CLOCK_DIM = 64
DEFAULT_TOL = 1e-9


class ConfigError(ValueError):
    """Invalid scenario configuration; ``field`` names the offending option."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


_ENERGY_RE = re.compile(r"^\s*([-+]?[0-9.]+(?:[eE][-+]?\d+)?)\s*(eV|J)?\s*$")


def parse_energy(text: str, field_name: str = "energy") -> float:
    """Parse ``"1.5"``, ``"10eV"`` or ``"2e-18J"``.

    A suffix converts to joules (``eV``) or marks joules (``J``); bare
    numbers are taken in the working units of the scenario.
    """
    m = _ENERGY_RE.match(str(text))
    if not m:
        raise ConfigError(field_name, f"cannot parse energy {text!r}")
    value = float(m.group(1))
    return value * CONSTANTS["eV"] if m.group(2) == "eV" else value


def parse_sector(text: str) -> tuple[float, float]:
    """``"p:E"`` -> ``(p, E)``."""
    parts = str(text).split(":")
    if len(parts) != 2:
        raise ConfigError("sector", f"expected p:E, got {text!r}")
    try:
        p = float(parts[0])
    except ValueError:
        raise ConfigError("sector", f"weight {parts[0]!r} is not a number") from None
    return p, parse_energy(parts[1], "sector")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    clock_dim: int = DEFAULT_CLOCK_DIM
    t0: float = 0.0
    dt: float | None = None
    lam: float | None = None
    energy: float = 0.0
    mass_energy: float = 0.0
    e_internal: float = 1.0
    sectors: tuple = field(default_factory=tuple)
    distance: float | None = None
    fmt: str = "json"
    tol: float = DEFAULT_TOL

    def validate(self) -> "ScenarioConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if self.fmt not in FORMATS:
            raise ConfigError("format", f"must be one of {FORMATS}")
        if self.scenario != "qubit-clock" and (int(self.clock_dim) != self.clock_dim or self.clock_dim < 2):
            raise ConfigError("clock-dim", "must be an integer >= 2")
        if self.dt is not None and (not np.isfinite(self.dt) or self.dt == 0):
            raise ConfigError("dt", "must be finite and nonzero")
        if self.dt is not None and self.scenario != "qubit-clock" and self.dt < 0:
            raise ConfigError("dt", "clock spacing must be positive")
        if self.lam is not None and (self.lam == 0 or not np.isfinite(self.lam)):
            raise ConfigError("lambda", "must be finite and nonzero")
        if self.scenario in ("interacting-qubit", "massive-qubit") and self.lam is None:
            raise ConfigError("lambda", f"required for scenario {self.scenario}")
        if self.mass_energy < 0:
            raise ConfigError("mass-energy", "must be non-negative")
        if not self.e_internal > 0:
            raise ConfigError("e-internal", "must be positive")
        if not self.tol > 0:
            raise ConfigError("tol", "must be positive")
        if self.sectors:
            if self.scenario != "mixed-decoherence":
                raise ConfigError("sector", "only used by mixed-decoherence")
            w = np.array([s[0] for s in self.sectors])
            if np.any(w <= 0) or abs(w.sum() - 1) > 1e-12:
                raise ConfigError("sector", f"weights must be positive and sum to 1, got {w.tolist()}")
        if self.distance is not None and not self.distance > 0:
            raise ConfigError("distance", "must be positive")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sectors"] = [list(s) for s in self.sectors]
        return d

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()


def _row(k: int, t: float, rho: np.ndarray) -> dict:
    return {
        "k": int(k),
        "t": float(t),
        "bloch": bloch_vector(rho).tolist(),
        "purity": purity(rho),
        "expect_sx": float(np.trace(rho @ SX).real),
        "expect_sy": float(np.trace(rho @ SY).real),
        "expect_sz": float(np.trace(rho @ SZ).real),
        "rho": rho,
    }


def _cyclic(cfg: ScenarioConfig):
    d = int(cfg.clock_dim)
    dt = cfg.dt if cfg.dt is not None else 4 * np.pi / d
    return make_cyclic_clock(d, cfg.t0, dt)


def _pure_rows(spec: UniverseSpec) -> list[dict]:
    hist = history_state_pure(spec, np.array([1, 0], dtype=complex))
    rows = []
    for k, t in enumerate(spec.clock.grid):
        psi = condition(hist, k)
        rows.append(_row(k, t, np.outer(psi, psi.conj())))
    return rows


def run_scenario(cfg: ScenarioConfig) -> tuple[dict, list[dict]]:
    """Run a validated scenario; returns ``(extra_metadata, rows)``."""
    cfg.validate()
    extra: dict = {}
    h_free = cfg.e_internal * SX / 2
    if cfg.scenario == "free-qubit":
        rows = _pure_rows(UniverseSpec(h_free, _cyclic(cfg), None, cfg.energy))
    elif cfg.scenario == "interacting-qubit":
        spec = UniverseSpec(h_free, _cyclic(cfg), InteractionSpec.gravitational(cfg.lam), cfg.energy)
        rows = _pure_rows(spec)
    elif cfg.scenario == "massive-qubit":
        h = cfg.mass_energy * np.eye(2) + h_free
        rows = _pure_rows(UniverseSpec(h, _cyclic(cfg), InteractionSpec.gravitational(cfg.lam), cfg.energy))
    elif cfg.scenario == "qubit-clock":
        dt = cfg.dt if cfg.dt is not None else np.pi / 2
        clock = make_two_level_clock(cfg.t0, cfg.t0 + dt)
        spec = UniverseSpec(h_free, clock)
        pmap = sp_hp_map(spec, t_ref=cfg.t0)
        hs = heisenberg_from_vector(np.kron([1, 0], uniform_clock_state(clock)).astype(complex), spec.dims)
        sp_vec = pmap.u @ hs.vec
        rows = []
        for k, t in enumerate(clock.grid):
            psi = condition(sp_vec, k, spec.dims)
            rows.append(_row(k, t, np.outer(psi, psi.conj())))
    else:
        sectors = cfg.sectors or ((0.5, 0.0), (0.5, 0.5))
        interaction = None if cfg.lam is None else InteractionSpec.gravitational(cfg.lam)
        h = cfg.mass_energy * np.eye(2) + h_free
        base = UniverseSpec(h, _cyclic(cfg), interaction, 0.0)
        rho0 = np.diag([1.0, 0.0]).astype(complex)
        mixed = history_state_mixed([(p, e, rho0) for p, e in sectors], base)
        rows = [_row(k, t, condition(mixed, k)) for k, t in enumerate(base.clock.grid)]
        energies = sorted({e for _, e in sectors})
        if cfg.lam is not None and len(energies) == 2 and energies[0] == 0:
            p = TwoLevelParams(cfg.lam, energies[1], cfg.mass_energy, cfg.e_internal)
            if not p.is_singular():
                tau_d, tau, ratio = coherence_time(p)
                extra.update(tau_D=tau_d, tau=tau, ratio=ratio)
        if cfg.distance is not None:
            e_max = max(energies, key=abs)
            if e_max != 0:
                extra["gravitational_ratio"] = gravitational_ratio(cfg.distance, e_max)
    return extra, rows


def metadata(cfg_dict: dict, digest: str, tol: float, command: str) -> dict:
    return {
        "tool": "pagewootters",
        "version": __version__,
        "command": command,
        "config": cfg_dict,
        "config_sha256": digest,
        "tolerances": {"structural": STRUCT_TOL, "comparison": tol},
    }
