import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from pagewootters.clock import make_cyclic_clock, make_two_level_clock, timeline_state
from pagewootters.interactions import InteractionSpec
from pagewootters.linalg import (
    SX,
    SY,
    SZ,
    commutator,
    is_unitary,
    max_norm,
    pure_fidelity,
    random_hermitian,
    random_state,
    random_unitary,
    schmidt_rank,
)
from pagewootters.pictures import (
    KRAUS,
    UNITARY,
    NoPictureMapError,
    gauge_shift,
    group_average,
    heisenberg_from_density,
    hp_generator_deviation,
    interaction_picture_state,
    no_evolution_check,
    product_heisenberg_state,
    reduced_relative_observable,
    relative_expectation,
    relative_observable,
    sp_hp_map,
    time_op_derivative_op,
    time_op_derivative_state,
    to_heisenberg_state,
    to_hp_observable,
)
from pagewootters.universe import (
    UniverseSpec,
    UnphysicalReadingError,
    condition,
    history_state_mixed,
    history_state_pure,
)

H = SX / 2
KET0 = np.array([1, 0], dtype=complex)
RHO0 = np.diag([1.0, 0.0]).astype(complex)


def free_setup(d=16, total=4 * np.pi, energy=0.0, psi0=KET0):
    clock = make_cyclic_clock(d, 0.0, total / d)
    spec = UniverseSpec(H, clock, energy=energy)
    hist = history_state_pure(spec, psi0)
    pmap = sp_hp_map(spec)
    return clock, spec, hist, pmap


def blocks(op, n, d):
    r = op.reshape(n, d, n, d)
    return [r[:, k, :, k] for k in range(d)]


def test_two_reading_map_is_block_diagonal():
    clock = make_cyclic_clock(2, 0.0, np.pi)
    pmap = sp_hp_map(UniverseSpec(H, clock))
    assert pmap.kind == UNITARY and is_unitary(pmap.u)
    b = blocks(pmap.u, 2, 2)
    assert max_norm(b[0] - np.eye(2)) < 1e-14
    assert max_norm(b[1] - expm(-1j * SX * np.pi / 2)) < 1e-14
    assert max_norm(pmap.u.reshape(2, 2, 2, 2)[:, 0, :, 1]) == 0


@pytest.mark.parametrize("energy", [0.0, 0.3])
def test_history_maps_to_product(energy):
    clock, spec, hist, pmap = free_setup(energy=energy)
    hs = to_heisenberg_state(hist, pmap)
    assert hs.separability_certificate
    assert abs(np.vdot(np.kron(KET0, timeline_state(clock, 0.0)), hs.vec)) == pytest.approx(1.0, abs=1e-12)
    # without absorbing the energy the clock factor carries it
    bare = sp_hp_map(spec, absorb_energy=False)
    hs_bare = to_heisenberg_state(hist, bare)
    assert abs(np.vdot(np.kron(KET0, timeline_state(clock, energy)), hs_bare.vec)) == pytest.approx(1.0, abs=1e-12)


def test_bare_generator_needs_free_universe(on_grid_clock):
    with pytest.raises(ValueError):
        sp_hp_map(UniverseSpec(H, on_grid_clock, InteractionSpec.gravitational(2.0)), absorb_energy=False)


def test_round_trip(rng):
    clock, spec, _, pmap = free_setup()
    hist = history_state_pure(spec, random_state(2, rng))
    back = pmap.u @ to_heisenberg_state(hist, pmap).vec
    assert abs(np.vdot(back, hist.vec)) ** 2 > 1 - 1e-12


def test_two_sector_kraus_map(on_grid_clock):
    base = UniverseSpec(H, on_grid_clock, InteractionSpec.gravitational(1.0))
    mixed = history_state_mixed([(0.5, 0.0, RHO0), (0.5, 0.5, RHO0)], base)
    pmap = sp_hp_map(mixed)
    assert pmap.kind == KRAUS
    assert pmap.completeness() < 1e-12
    hs = to_heisenberg_state(mixed, pmap)
    assert hs.separability_certificate
    assert max_norm(pmap.apply(hs.rho) - mixed.assembled) < 1e-12


def test_unequal_sector_states_have_no_map(on_grid_clock):
    base = UniverseSpec(H, on_grid_clock, InteractionSpec.gravitational(1.0))
    mixed = history_state_mixed([(0.5, 0.0, RHO0), (0.5, 0.5, np.eye(2) / 2)], base)
    with pytest.raises(NoPictureMapError):
        sp_hp_map(mixed)


def test_hp_observable_examples():
    clock, spec, _, pmap = free_setup()
    d = clock.dim
    assert max_norm(to_hp_observable(np.eye(2), pmap) - np.eye(2 * d)) < 1e-13
    assert max_norm(to_hp_observable(H, pmap) - np.kron(H, np.eye(d))) < 1e-13
    expected = np.kron(SZ, np.diag(np.cos(clock.grid))) + np.kron(SY, np.diag(np.sin(clock.grid)))
    assert max_norm(to_hp_observable(SZ, pmap) - expected) < 1e-13
    # the time operator is untouched by a block-diagonal map
    t_op = np.kron(np.eye(2), clock.t_op)
    assert max_norm(pmap.u.conj().T @ t_op @ pmap.u - t_op) < 1e-13


def test_hp_observable_rejects_non_hermitian():
    *_, pmap = free_setup()
    with pytest.raises(ValueError):
        to_hp_observable(np.array([[0, 1], [0, 0]]), pmap)


def test_relative_observable_algebra(rng):
    clock, _, _, pmap = free_setup()
    o = to_hp_observable(random_hermitian(2, rng), pmap)
    q = to_hp_observable(random_hermitian(2, rng), pmap)
    d = clock.dim
    for k in (0, 5):
        pk = relative_observable(np.eye(2 * d), k, clock)
        ok, qk = relative_observable(o, k, clock), relative_observable(q, k, clock)
        assert max_norm(ok @ pk - pk @ ok) < 1e-13
        assert max_norm(ok @ ok - relative_observable(o @ o, k, clock)) < 1e-12
        assert max_norm(commutator(ok, qk) - relative_observable(commutator(o, q), k, clock)) < 1e-12
    with pytest.raises(IndexError):
        relative_observable(o, d, clock)


def test_reduced_relative_observables_are_heisenberg_evolved(rng):
    clock, _, hist, pmap = free_setup(d=24, total=6.0)
    hs = to_heisenberg_state(hist, pmap)
    for o in (SX, SY, SZ, random_hermitian(2, rng)):
        o_hp = to_hp_observable(o, pmap)
        for k, t in enumerate(clock.grid):
            u = expm(-1j * H * t)
            assert max_norm(reduced_relative_observable(o_hp, k, hs) - u.conj().T @ o @ u) < 1e-12


def test_reduced_relative_on_two_level_clock():
    dt = 0.9
    clock = make_two_level_clock(0.0, dt)
    pmap = sp_hp_map(UniverseSpec(H, clock))
    hs = product_heisenberg_state(KET0, clock)
    red = reduced_relative_observable(to_hp_observable(SZ, pmap), 1, hs)
    assert max_norm(red - (np.cos(dt) * SZ + np.sin(dt) * SY)) < 1e-14
    assert max_norm(reduced_relative_observable(to_hp_observable(H, pmap), 1, hs) - H) < 1e-14


def test_relative_expectation_examples():
    clock, spec, hist, pmap = free_setup(d=8, total=2 * np.pi)
    hs = to_heisenberg_state(hist, pmap)
    o_hp = to_hp_observable(SZ, pmap)
    assert relative_expectation(o_hp, 0, hs) == pytest.approx(1.0, abs=1e-14)
    assert relative_expectation(o_hp, 4, hs) == pytest.approx(-1.0, abs=1e-14)
    for k in range(clock.dim):
        psi = condition(hist, k)
        assert relative_expectation(o_hp, k, hs) == pytest.approx(np.vdot(psi, SZ @ psi).real, abs=1e-12)


def test_mixed_relative_expectation_vanishes_at_coherence_time():
    clock = make_cyclic_clock(8, 0.0, 1.5 * np.pi / 4)
    base = UniverseSpec(H, clock, InteractionSpec.gravitational(1.0))
    mixed = history_state_mixed([(0.5, 0.0, RHO0), (0.5, 0.5, RHO0)], base)
    pmap = sp_hp_map(mixed)
    hs = to_heisenberg_state(mixed, pmap)
    for o in (SX, SY, SZ):
        assert abs(relative_expectation(to_hp_observable(o, pmap), 4, hs)) < 1e-12


def test_zero_reading_raises(on_grid_clock):
    vec = np.kron(KET0, on_grid_clock.basis(0))
    from pagewootters.pictures import heisenberg_from_vector

    hs = heisenberg_from_vector(vec, (2, on_grid_clock.dim))
    with pytest.raises(UnphysicalReadingError):
        relative_expectation(np.eye(2 * on_grid_clock.dim), 3, hs)
    with pytest.raises(UnphysicalReadingError):
        reduced_relative_observable(np.eye(2 * on_grid_clock.dim), 3, hs)


def test_local_unitary_robustness(rng):
    # W_C must commute with the time operator (a phase per reading) for relative data to survive
    clock, _, hist, pmap = free_setup(d=12, total=3.0)
    hs = to_heisenberg_state(hist, pmap)
    for _ in range(5):
        w = np.kron(random_unitary(2, rng), np.diag(np.exp(1j * rng.uniform(0, 6, clock.dim))))
        rho_w = w.conj().T @ hs.rho @ w
        hs_w = heisenberg_from_density(rho_w, hs.dims)
        for o in (SX, SZ):
            o_hp = to_hp_observable(o, pmap)
            o_w = w.conj().T @ o_hp @ w
            for k in range(clock.dim):
                assert relative_expectation(o_w, k, hs_w) == pytest.approx(relative_expectation(o_hp, k, hs), abs=1e-12)


def test_no_evolution_examples(on_grid_clock):
    product = np.kron(KET0, timeline_state(on_grid_clock, 0.0))
    assert no_evolution_check(product, on_grid_clock).passed
    hist = history_state_pure(UniverseSpec(H, on_grid_clock), KET0)
    res = no_evolution_check(hist)
    assert not res.passed and res.deviation > 0.1
    rho = np.kron(RHO0, np.eye(on_grid_clock.dim) / on_grid_clock.dim)
    assert no_evolution_check(rho, on_grid_clock).passed


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), product=st.booleans())
def test_no_evolution_iff_product(seed, product):
    rng = np.random.default_rng(seed)
    if product:
        vec = np.kron(random_state(2, rng), random_state(6, rng))
    else:
        vec = random_state(12, rng)
    res = no_evolution_check(vec, dims=(2, 6))
    assert res.passed == (schmidt_rank(vec, 2, 6) == 1) == product


def test_heisenberg_slices_are_stationary(rng):
    clock = make_cyclic_clock(10, 0.0, 0.4)
    hs = product_heisenberg_state(random_state(3, rng), clock, energy=clock.frequencies[2])
    states = [condition(hs.vec, k, hs.dims) for k in range(clock.dim)]
    assert all(pure_fidelity(s, states[0]) > 1 - 1e-14 for s in states)


def test_gauge_shift_properties():
    clock, _, hist, pmap = free_setup(d=16)
    d = clock.dim
    assert max_norm(gauge_shift(d, clock, 2) - np.eye(2 * d)) == 0
    tl = np.kron(KET0, timeline_state(clock, 0.0))
    assert max_norm(gauge_shift(5, clock, 2) @ tl - tl) < 1e-14
    with pytest.raises(ValueError):
        gauge_shift(1, make_two_level_clock(0, 1))


@pytest.mark.parametrize("steps", [1, 3, 7])
def test_gauge_shift_moves_time_argument(steps):
    # G^dagger O(t) G = O(t + steps * delta) on the cyclic grid
    clock, _, _, pmap = free_setup(d=16)
    g = gauge_shift(steps, clock, 2)
    o_hp = to_hp_observable(SZ, pmap)
    shifted = blocks(g.conj().T @ o_hp @ g, 2, 16)
    for k in range(16):
        t = clock.grid[(k + steps) % 16]
        assert max_norm(shifted[k] - (np.cos(t) * SZ + np.sin(t) * SY)) < 1e-13


def test_group_average(rng):
    clock, _, _, pmap = free_setup(d=16)
    hc = np.kron(np.eye(2), clock.h_op)
    assert max_norm(group_average(np.eye(32), clock) - np.eye(32)) < 1e-14
    hh = np.kron(H, np.eye(16))
    assert max_norm(group_average(hh, clock) - hh) < 1e-14
    avg = group_average(to_hp_observable(SZ, pmap), clock)
    assert max_norm(commutator(avg, hc)) < 1e-12
    arbitrary = random_hermitian(32, rng)
    assert max_norm(commutator(group_average(arbitrary, clock), hc)) < 1e-12


def test_interaction_picture_with_zero_coupling(on_grid_clock):
    spec = UniverseSpec(H, on_grid_clock, InteractionSpec.custom(lambda e: np.zeros_like(e), "0"))
    res = interaction_picture_state(spec, history_state_pure(spec, KET0))
    assert res.residual < 1e-10
    assert no_evolution_check(res.vec, on_grid_clock).passed


def test_interaction_picture_needs_interaction(on_grid_clock):
    spec = UniverseSpec(H, on_grid_clock)
    with pytest.raises(ValueError):
        interaction_picture_state(spec, history_state_pure(spec, KET0))


def test_interaction_picture_converges_and_stays_entangled():
    residuals = []
    for d in (32, 64, 128):
        clock = make_cyclic_clock(d, 0.0, 12 * np.pi / d)
        spec = UniverseSpec(H, clock, InteractionSpec.gravitational(1.0))
        res = interaction_picture_state(spec, history_state_pure(spec, KET0))
        residuals.append(res.residual)
        assert schmidt_rank(res.vec, 2, d) > 1
    ratios = np.array(residuals[:-1]) / np.array(residuals[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))


def test_state_derivative():
    clock, spec, hist, _ = free_setup(d=32)
    tl = np.kron(KET0, timeline_state(clock, 0.0))
    assert np.linalg.norm(time_op_derivative_state(tl, clock)) < 1e-10
    errs = []
    for d in (32, 64, 128):
        clock, spec, hist, _ = free_setup(d=d)
        exact = -1j * np.kron(H, np.eye(d)) @ hist.vec
        errs.append(np.linalg.norm(time_op_derivative_state(hist.vec, clock) - exact))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))
    fwd = time_op_derivative_state(hist.vec, clock, scheme="forward")
    assert np.linalg.norm(fwd - exact) > errs[-1]
    with pytest.raises(ValueError):
        time_op_derivative_state(hist.vec, clock, scheme="backward")


def test_operator_derivative_of_time_operator():
    clock = make_cyclic_clock(16, 0.0, 0.25)
    deriv = time_op_derivative_op(clock.t_op, clock)
    interior = np.arange(1, 15)
    assert np.allclose(np.diag(deriv)[interior], 1.0, atol=1e-12)


def test_operator_derivative_of_heisenberg_state_vanishes():
    clock, _, hist, pmap = free_setup(d=16)
    hs = to_heisenberg_state(hist, pmap)
    assert max_norm(time_op_derivative_op(hs.rho, clock)) < 1e-10


def test_operator_derivative_matches_equation_of_motion():
    errs = []
    for d in (32, 64):
        clock, _, _, pmap = free_setup(d=d)
        a = to_hp_observable(SZ, pmap)
        exact = 1j * commutator(np.kron(H, np.eye(d)), a)
        errs.append(max_norm(time_op_derivative_op(a, clock) - exact))
    assert 3.5 < errs[0] / errs[1] < 4.5
    with pytest.raises(ValueError):
        time_op_derivative_op(a, clock, scheme="central")


def test_hp_generator_deviation():
    # on-grid spectra: exact inside the central band; the full band keeps ||H_eff|| from the wrapped edge modes
    for total in (4 * np.pi, 8 * np.pi):
        for d in (32, 64):
            _, _, _, pmap = free_setup(d=d, total=total)
            assert hp_generator_deviation(pmap, band_fraction=0.5) < 1e-12
            assert hp_generator_deviation(pmap) == pytest.approx(0.5, rel=1e-9)


def test_hp_generator_deviation_band_edge_recedes():
    devs = [hp_generator_deviation(free_setup(d=d, total=16 * np.pi)[3], band_fraction=0.9) for d in (16, 32, 64, 128)]
    assert devs[0] > devs[1] > devs[2] > devs[3]
    assert devs[3] < 1e-12
