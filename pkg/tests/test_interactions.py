import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pagewootters.clock import make_cyclic_clock
from pagewootters.interactions import (
    InteractionSpec,
    SingularSectorError,
    build_interaction,
    effective_hamiltonian,
    g_function,
    kraus_evolution,
    kraus_set,
    nonunitarity_report,
    sector_overlap,
    validate_interaction,
)
from pagewootters.linalg import SX, SZ, commutator, eigh, max_norm, purity, random_density, random_hermitian

CLOCK = make_cyclic_clock(8, 0.0, 0.5)
H = SX / 2


def test_gravitational_coupling_passes_all_checks():
    v = build_interaction(InteractionSpec.gravitational(1.0), H, CLOCK)
    report = validate_interaction(v, H, CLOCK)
    assert report.ok and report.failures() == []
    assert max_norm(v - np.kron(H, CLOCK.h_op)) < 1e-12


@pytest.mark.parametrize(
    "v, failing",
    [
        (np.kron(SZ, CLOCK.h_op), "conserves_energy"),
        (np.kron(H, CLOCK.t_op), "time_independent"),
        (np.kron(H, CLOCK.h_op @ CLOCK.h_op), "linear_in_h"),
    ],
    ids=["non-conserving", "time-dependent", "quadratic-in-h"],
)
def test_fault_injections_rejected(v, failing):
    report = validate_interaction(v, H, CLOCK)
    assert not report.ok
    assert not getattr(report, failing)


def test_quadratic_f_is_allowed():
    spec = InteractionSpec.custom(lambda e: e**2, "E^2")
    assert validate_interaction(build_interaction(spec, H, CLOCK), H, CLOCK).ok


def test_zero_f_gives_zero_interaction():
    spec = InteractionSpec.custom(lambda e: np.zeros_like(e), "0")
    assert max_norm(build_interaction(spec, H, CLOCK)) == 0


def test_undefined_f_is_rejected():
    spec = InteractionSpec.custom(lambda e: 1 / (e - 0.5), "pole")
    with np.errstate(divide="ignore"), pytest.raises(ValueError):
        build_interaction(spec, H, CLOCK)


def test_validate_dimension_check():
    with pytest.raises(ValueError):
        validate_interaction(np.eye(4), H, CLOCK)


@pytest.mark.parametrize(
    "e, spec, energy, expected",
    [
        (0.7, None, 0.0, -0.7),
        (0.5, InteractionSpec.gravitational(1.0), 0.0, -1 / 3),
        (0.5, InteractionSpec.gravitational(2.0), 0.25, -0.2),
    ],
)
def test_g_function(e, spec, energy, expected):
    assert g_function(e, spec, energy) == pytest.approx(expected, abs=1e-15)


def test_g_function_singular():
    with pytest.raises(SingularSectorError):
        g_function(0.5, InteractionSpec.gravitational(-0.5))


@pytest.mark.parametrize("lam", [0.0, np.inf])
def test_gravitational_rejects_bad_scale(lam):
    with pytest.raises(ValueError):
        InteractionSpec.gravitational(lam)


def test_effective_hamiltonian_examples():
    assert max_norm(effective_hamiltonian(H, None, 0.3).op - (H - 0.3 * np.eye(2))) < 1e-14
    w = eigh(effective_hamiltonian(H, InteractionSpec.gravitational(1.0), 0.0).op).eigenvalues
    assert np.allclose(w, [-1.0, 1 / 3], atol=1e-14)
    hm = 2 * np.eye(2) + H
    w = eigh(effective_hamiltonian(hm, InteractionSpec.gravitational(1.0), 0.0).op).eigenvalues
    assert np.allclose(w, [1.5 / 2.5, 2.5 / 3.5], atol=1e-14)


def test_effective_hamiltonian_excludes_singular_eigenvalue():
    heff = effective_hamiltonian(H, InteractionSpec.gravitational(-0.5), 0.0)
    assert heff.excluded_eigenvalues == (0.5,)
    with pytest.raises(SingularSectorError):
        effective_hamiltonian(np.eye(2) * 0.5, InteractionSpec.gravitational(-0.5), 0.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), lam=st.floats(0.6, 20), energy=st.floats(-2, 2))
def test_effective_hamiltonian_commutes_with_h(seed, lam, energy):
    h = random_hermitian(3, np.random.default_rng(seed), scale=0.2)
    heff = effective_hamiltonian(h, InteractionSpec.gravitational(lam), energy)
    assert max_norm(commutator(heff.op, h)) < 1e-12
    assert max_norm(heff.op - heff.op.conj().T) < 1e-12
    expected = (h - energy * np.eye(3)) @ np.linalg.inv(np.eye(3) + h / lam)
    assert max_norm(heff.op - expected) < 1e-10


def test_kraus_single_sector_is_unitary(rng):
    rho0 = random_density(2, rng)
    pur = [purity(kraus_evolution(rho0, [(1.0, H)], t)) for t in np.linspace(0, 10, 20)]
    assert np.ptp(pur) < 1e-12


def test_kraus_equal_energies_reduce_to_unitary(rng):
    rho0 = random_density(2, rng)
    spec = InteractionSpec.gravitational(1.0)
    h1 = effective_hamiltonian(H, spec, 0.3)
    out = kraus_evolution(rho0, [(0.4, h1), (0.6, h1)], 2.1)
    u = kraus_set([(1.0, h1)], 2.1).ops[0]
    assert max_norm(out - u @ rho0 @ u.conj().T) < 1e-12


def test_two_sector_decoherence_reaches_maximally_mixed():
    spec = InteractionSpec.gravitational(1.0)
    sectors = [(0.5, effective_hamiltonian(H, spec, 0.0)), (0.5, effective_hamiltonian(H, spec, 0.5))]
    rho = kraus_evolution(np.diag([1.0, 0.0]), sectors, 1.5 * np.pi)
    assert max_norm(rho - np.eye(2) / 2) < 1e-12


def test_three_sector_channel_is_trace_preserving(rng):
    # H_k that commute with sigma_x
    sectors = [(p, a * np.eye(2) + b * SX) for p, a, b in [(0.2, 0.1, 0.4), (0.5, -0.3, 1.1), (0.3, 0.0, -0.7)]]
    rho0 = random_density(2, rng)
    ks = kraus_set(sectors, 0.9)
    assert ks.completeness() < 1e-12
    times = np.linspace(0, 20, 100)
    rhos = [kraus_evolution(rho0, sectors, t) for t in times]
    assert max(abs(np.trace(r) - 1) for r in rhos) < 1e-12
    report = nonunitarity_report(times, rhos)
    assert report["min_eigenvalue"].min() > -1e-12


def test_kraus_weights_validated():
    with pytest.raises(ValueError):
        kraus_set([(0.5, H), (0.6, H)], 1.0)


def test_sector_overlap():
    psi0 = np.array([1, 0], dtype=complex)
    same = sector_overlap(psi0, H, 3.0, 0.2, 0.2, 4.0)
    assert same.exact == pytest.approx(1.0, abs=1e-12)
    t, de = 3.0, 0.4
    for lam in (10.0, 100.0):
        ov = sector_overlap(psi0, H, lam, 0.0, de, t)
        # <0| exp(i x sigma_x / 2) |0> = cos(x / 2) with x = de * t / lam
        assert ov.approx == pytest.approx(abs(np.cos(de * t / (2 * lam))), abs=1e-12)
    gaps = [sector_overlap(psi0, H, lam, 0.0, de, t).gap for lam in (10.0, 100.0, 1000.0)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_nonunitarity_report_needs_two_samples():
    with pytest.raises(ValueError):
        nonunitarity_report([0.0], [np.eye(2) / 2])
