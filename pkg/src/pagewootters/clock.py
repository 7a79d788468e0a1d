"""Finite clock models.

The ideal clock pairs a time operator with a conjugate Hamiltonian. No such
pair exists in finite dimension, so the cyclic clock keeps the property that
downstream code actually uses: ``exp(-i h delta)`` translates ``|t_k>`` to
``|t_{k+1}>`` exactly. The canonical commutator then only holds on states
that are smooth and vanish near the ends of the time window (see
:func:`canonical_defect`).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import SX, func_of_hermitian, max_norm

CYCLIC = "cyclic"
TWO_LEVEL = "two_level"


class AliasingWarning(UserWarning):
    """A requested time lies outside one period of the cyclic clock."""


@dataclass(frozen=True, eq=False)
class ClockModel:
    """A finite clock: time grid, time operator, conjugate generator and shift.

    ``frequencies`` (cyclic kind only) holds the eigenvalues of ``h_op`` in the
    same order as the columns of ``fourier``, whose columns are the timeline
    states ``sum_k exp(i eps t_k) |t_k> / sqrt(d)``.
    """

    kind: str
    grid: np.ndarray
    t_op: np.ndarray
    h_op: np.ndarray
    shift: np.ndarray | None = None
    frequencies: np.ndarray | None = None
    fourier: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.grid)

    @property
    def delta(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def period(self) -> float:
        """Length ``d * delta`` after which cyclic evolution wraps around."""
        if self.kind != CYCLIC:
            raise ValueError("period is only defined for the cyclic clock")
        return self.dim * self.delta

    @property
    def frequency_spacing(self) -> float:
        return 2 * np.pi / self.period

    def projector(self, k: int) -> np.ndarray:
        p = np.zeros((self.dim, self.dim), dtype=complex)
        p[k, k] = 1.0
        return p

    def basis(self, k: int) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[k] = 1.0
        return e

    def require_cyclic(self, what: str) -> None:
        if self.kind != CYCLIC:
            raise ValueError(f"{what} requires a cyclic clock, got kind {self.kind!r}")


def make_cyclic_clock(d: int, t0: float = 0.0, delta: float = 1.0) -> ClockModel:
    """Cyclic (Weyl-pair) clock with ``d`` readings ``t_k = t0 + k * delta``.

    The generator ``h_op`` has the centred spectrum ``2 pi m / (d delta)``,
    ``m = -(d // 2), ..., d - 1 - d // 2``, so that ``exp(-i h delta)`` is the
    cyclic shift ``|t_k> -> |t_{k+1 mod d}>``.
    """
    if int(d) != d or d < 2:
        raise ValueError(f"clock dimension must be an integer >= 2, got {d}")
    if not delta > 0:
        raise ValueError(f"clock spacing must be positive, got {delta}")
    d = int(d)
    grid = t0 + delta * np.arange(d)
    m = np.arange(d) - d // 2
    freqs = 2 * np.pi * m / (d * delta)
    fourier = np.exp(1j * np.outer(grid, freqs)) / np.sqrt(d)
    h_op = (fourier * freqs) @ fourier.conj().T
    h_op = 0.5 * (h_op + h_op.conj().T)
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    return ClockModel(
        kind=CYCLIC,
        grid=grid,
        t_op=np.diag(grid).astype(complex),
        h_op=h_op,
        shift=shift,
        frequencies=freqs,
        fourier=fourier,
    )


def make_two_level_clock(t0: float, t1: float) -> ClockModel:
    """Single-qubit clock with ``t_op = diag(t0, t1)`` and ``h_op = -sigma_x / 2``."""
    if t1 == t0:
        raise ValueError("two-level clock needs distinct readings t0 != t1")
    grid = np.array([t0, t1], dtype=float)
    return ClockModel(kind=TWO_LEVEL, grid=grid, t_op=np.diag(grid).astype(complex), h_op=-SX / 2)


def timeline_state(clock: ClockModel, energy: float = 0.0) -> np.ndarray:
    """``sum_k exp(i energy t_k) |t_k> / sqrt(d)``.

    This is an exact eigenvector of ``h_op`` (eigenvalue ``energy``) only when
    ``energy`` sits on the clock's frequency grid; use
    :func:`timeline_residual` to measure how far off it is otherwise.
    """
    clock.require_cyclic("timeline_state")
    return np.exp(1j * energy * clock.grid) / np.sqrt(clock.dim)


def uniform_clock_state(clock: ClockModel) -> np.ndarray:
    """Equal superposition of all readings; the energy-0 timeline for any clock kind."""
    return np.ones(clock.dim, dtype=complex) / np.sqrt(clock.dim)


def timeline_residual(clock: ClockModel, energy: float) -> float:
    tl = timeline_state(clock, energy)
    return float(np.linalg.norm(clock.h_op @ tl - energy * tl))


def on_frequency_grid(clock: ClockModel, energy: float, tol: float = 1e-9) -> bool:
    """Whether ``energy`` is one of the eigenvalues of ``h_op``."""
    clock.require_cyclic("on_frequency_grid")
    return bool(np.min(np.abs(clock.frequencies - energy)) <= tol)


def central_band_projector(clock: ClockModel, fraction: float = 0.5) -> np.ndarray:
    """Projector onto the ``h_op`` eigenvectors with ``|eps| <= fraction * max|eps|``."""
    clock.require_cyclic("central_band_projector")
    keep = np.abs(clock.frequencies) <= fraction * np.abs(clock.frequencies).max() + 1e-12
    f = clock.fourier[:, keep]
    return f @ f.conj().T


def canonical_defect(clock: ClockModel, psi: np.ndarray) -> float:
    """``|| ([t, h] - i) psi ||`` for a clock state ``psi``.

    Cannot vanish as an operator statement in finite dimension; it does go to
    zero for fixed smooth wave packets as the time window grows.
    """
    t, h = clock.t_op, clock.h_op
    c = t @ h - h @ t - 1j * np.eye(clock.dim)
    return float(np.linalg.norm(c @ psi))


def shift_residual(clock: ClockModel) -> float:
    """``max | exp(-i h delta) - shift |``; zero by construction for a healthy clock."""
    clock.require_cyclic("shift_residual")
    return max_norm(func_of_hermitian(clock.h_op, lambda w: np.exp(-1j * w * clock.delta)) - clock.shift)


def warn_if_aliased(clock: ClockModel, t_max: float) -> bool:
    """Warn when ``t_max`` exceeds one clock period. Returns ``True`` if it did."""
    if clock.kind == CYCLIC and t_max - clock.grid[0] > clock.period + 1e-12:
        warnings.warn(
            f"requested time {t_max:g} exceeds the clock period {clock.period:g}; "
            "the finite clock wraps around",
            AliasingWarning,
            stacklevel=2,
        )
        return True
    return False
