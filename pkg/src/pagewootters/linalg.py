"""Dense linear algebra on a bipartite system (x) clock Hilbert space.

Vectors and operators are plain complex ``numpy`` arrays. Every composite
object uses system-major ordering: the index ``(i, k)`` of a system state
``i`` and clock state ``k`` is stored at ``i * dim_c + k``, which is what
``np.kron(system_part, clock_part)`` produces.
"""
from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

# structural checks (hermiticity, unitarity, completeness)
STRUCT_TOL = 1e-10
# density-matrix validity checks
DENSITY_TOL = 1e-8

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)


class Factorization(NamedTuple):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def max_norm(a) -> float:
    """Largest absolute entry of ``a`` (0 for empty input)."""
    a = np.asarray(a)
    return float(np.abs(a).max()) if a.size else 0.0


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_hermitian(m: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and max_norm(m - m.conj().T) <= tol


def is_unitary(m: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return max_norm(m.conj().T @ m - np.eye(m.shape[0])) <= tol


def _require_hermitian(h: np.ndarray, tol: float = STRUCT_TOL) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, tol):
        raise ValueError("matrix is not Hermitian within %.1e" % tol)
    return h


def eigh(h: np.ndarray) -> Factorization:
    """Hermitian eigendecomposition; raises ``ValueError`` on non-Hermitian input."""
    h = _require_hermitian(h)
    # symmetrize so round-off asymmetry does not leak into the spectrum
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return Factorization(w, v)


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with ``a`` as the slow (system) factor."""
    return np.kron(a, b)


def func_of_hermitian(h: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum.

    ``f`` receives the array of eigenvalues and must return an array of the
    same shape. The result is ``V diag(f(w)) V^dagger``.
    """
    w, v = eigh(h)
    fw = np.asarray(f(w), dtype=complex)
    if fw.shape != w.shape:
        fw = np.broadcast_to(fw, w.shape)
    return (v * fw) @ v.conj().T


def propagator(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h``."""
    return func_of_hermitian(h, lambda w: np.exp(-1j * w * t))


def eigensector(h: np.ndarray, target: float, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of ``h`` whose eigenvalue lies within ``tol`` of ``target``.

    Returns ``(eigenvalues, basis)`` with orthonormal basis columns. Both are
    empty (``basis`` has shape ``(n, 0)``) when nothing matches. Within a
    degenerate subspace no particular basis is promised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    w, v = eigh(h)
    mask = np.abs(w - target) <= tol
    return w[mask], v[:, mask]


def partial_trace_clock(m: np.ndarray, dim_s: int, dim_c: int) -> np.ndarray:
    """Trace out the clock factor of an operator on system (x) clock."""
    m = np.asarray(m)
    n = dim_s * dim_c
    if m.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} operator, got shape {m.shape}")
    return np.einsum("ikjk->ij", m.reshape(dim_s, dim_c, dim_s, dim_c))


def partial_trace_system(m: np.ndarray, dim_s: int, dim_c: int) -> np.ndarray:
    """Trace out the system factor of an operator on system (x) clock."""
    m = np.asarray(m)
    n = dim_s * dim_c
    if m.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} operator, got shape {m.shape}")
    return np.einsum("kikj->ij", m.reshape(dim_s, dim_c, dim_s, dim_c))


def partial_inner_clock(k: int, psi: np.ndarray, dim_s: int, dim_c: int) -> np.ndarray:
    """Contract ``psi`` with the clock basis bra ``<k|``. Not renormalized."""
    psi = np.asarray(psi)
    if psi.shape != (dim_s * dim_c,):
        raise ValueError(f"expected a vector of length {dim_s * dim_c}, got shape {psi.shape}")
    if not 0 <= k < dim_c:
        raise IndexError(f"clock index {k} out of range for dimension {dim_c}")
    return psi.reshape(dim_s, dim_c)[:, k].copy()


def clock_projector(k: int, dim_s: int, dim_c: int) -> np.ndarray:
    """``1_S (x) |k><k|``."""
    p = np.zeros((dim_c, dim_c), dtype=complex)
    p[k, k] = 1.0
    return np.kron(np.eye(dim_s), p)


def check_density(rho: np.ndarray, tol: float = DENSITY_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if not is_hermitian(rho, tol):
        raise ValueError("density operator is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError("density operator does not have unit trace")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -tol:
        raise ValueError("density operator is not positive semidefinite")
    return rho


def state_distance(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Trace distance and (squared-root) fidelity between two density matrices.

    Returns ``(0.5 * ||a - b||_1, (Tr sqrt(sqrt(a) b sqrt(a)))**2)``.
    """
    a = check_density(a)
    b = check_density(b)
    diff = a - b
    trace_distance = 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())
    sa = func_of_hermitian(0.5 * (a + a.conj().T), lambda w: np.sqrt(np.clip(w, 0, None)))
    middle = sa @ b @ sa
    ev = np.linalg.eigvalsh(0.5 * (middle + middle.conj().T))
    fidelity = float(np.sqrt(np.clip(ev, 0, None)).sum() ** 2)
    return trace_distance, min(fidelity, 1.0)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def pure_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|^2 / (<a|a><b|b>)``."""
    return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.array([np.real(np.trace(rho @ p)) for p in PAULIS])


def density_from_bloch(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return 0.5 * (I2 + r[0] * SX + r[1] * SY + r[2] * SZ)


def schmidt_coefficients(psi: np.ndarray, dim_s: int, dim_c: int) -> np.ndarray:
    """Singular values of ``psi`` reshaped to a ``dim_s x dim_c`` matrix, descending."""
    psi = np.asarray(psi)
    return np.linalg.svd(psi.reshape(dim_s, dim_c), compute_uv=False)


def schmidt_rank(psi: np.ndarray, dim_s: int, dim_c: int, tol: float = 1e-9) -> int:
    return int((schmidt_coefficients(psi, dim_s, dim_c) > tol).sum())


def fix_global_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude component is real and positive."""
    v = np.asarray(v, dtype=complex)
    flat = v.ravel()
    j = int(np.argmax(np.abs(flat)))
    if flat[j] == 0:
        return v.copy()
    return v * (abs(flat[j]) / flat[j])


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (a + a.conj().T)


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = n if rank is None else rank
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)
