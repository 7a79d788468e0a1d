import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from pagewootters.linalg import (
    SX,
    SY,
    SZ,
    bloch_vector,
    check_density,
    clock_projector,
    density_from_bloch,
    eigensector,
    eigh,
    fix_global_phase,
    func_of_hermitian,
    max_norm,
    partial_inner_clock,
    partial_trace_clock,
    partial_trace_system,
    propagator,
    random_density,
    random_hermitian,
    random_state,
    random_unitary,
    schmidt_rank,
    state_distance,
    tensor,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 6))
def test_eigh_reconstructs(seed, n):
    h = random_hermitian(n, np.random.default_rng(seed))
    f = eigh(h)
    assert max_norm(f.reconstruct() - h) < 1e-12
    assert np.all(np.diff(f.eigenvalues) >= 0)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eigh(np.array([[0, 1], [0, 0]], dtype=complex))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, t=st.floats(-5, 5))
def test_propagator_matches_expm(seed, t):
    h = random_hermitian(4, np.random.default_rng(seed))
    assert max_norm(propagator(h, t) - expm(-1j * h * t)) < 1e-11


def test_func_of_hermitian_square(rng):
    h = random_hermitian(5, rng)
    assert max_norm(func_of_hermitian(h, lambda w: w**2) - h @ h) < 1e-11


@pytest.mark.parametrize("target, count", [(-1.0, 1), (0.0, 2), (1.0, 1), (0.5, 0)])
def test_eigensector_counts(target, count):
    h = np.diag([-1.0, 0.0, 0.0, 1.0]).astype(complex)
    vals, basis = eigensector(h, target, 1e-9)
    assert basis.shape == (4, count)
    assert np.allclose(vals, target)


def test_eigensector_needs_positive_tol():
    with pytest.raises(ValueError):
        eigensector(np.eye(2), 1.0, 0.0)


def test_partial_traces_of_product(rng):
    a, b = random_density(3, rng), random_density(4, rng)
    m = tensor(a, b)
    assert max_norm(partial_trace_clock(m, 3, 4) - a) < 1e-13
    assert max_norm(partial_trace_system(m, 3, 4) - b) < 1e-13


def test_partial_trace_shape_check():
    with pytest.raises(ValueError):
        partial_trace_clock(np.eye(5), 2, 3)


def test_partial_inner_clock_picks_slice(rng):
    s, c = random_state(2, rng), random_state(5, rng)
    psi = np.kron(s, c)
    for k in range(5):
        assert np.allclose(partial_inner_clock(k, psi, 2, 5), c[k] * s)
    with pytest.raises(IndexError):
        partial_inner_clock(5, psi, 2, 5)


def test_clock_projector_resolves_identity():
    assert max_norm(sum(clock_projector(k, 2, 4) for k in range(4)) - np.eye(8)) == 0


@pytest.mark.parametrize(
    "rho",
    [
        np.array([[1, 0], [0, 0.5]]),
        np.array([[1, 1], [0, 0]]),
        np.array([[1.5, 0], [0, -0.5]]),
    ],
    ids=["trace", "hermitian", "positivity"],
)
def test_check_density_rejects(rho):
    with pytest.raises(ValueError):
        check_density(rho)


def test_state_distance_orthogonal_and_equal():
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    assert state_distance(p0, p1) == pytest.approx((1.0, 0.0), abs=1e-12)
    assert state_distance(p0, p0) == pytest.approx((0.0, 1.0), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_bloch_round_trip(seed):
    rho = random_density(2, np.random.default_rng(seed))
    assert max_norm(density_from_bloch(bloch_vector(rho)) - rho) < 1e-12


def test_pauli_algebra():
    assert max_norm(SX @ SY - 1j * SZ) == 0
    assert max_norm(SX @ SX - np.eye(2)) == 0


def test_schmidt_rank(rng):
    assert schmidt_rank(np.kron(random_state(2, rng), random_state(3, rng)), 2, 3) == 1
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert schmidt_rank(bell, 2, 2) == 2


def test_fix_global_phase_is_phase_invariant(rng):
    v = random_state(4, rng)
    assert np.allclose(fix_global_phase(v), fix_global_phase(np.exp(0.7j) * v))


def test_random_unitary_is_unitary(rng):
    u = random_unitary(5, rng)
    assert max_norm(u.conj().T @ u - np.eye(5)) < 1e-12
