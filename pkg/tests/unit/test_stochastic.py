"""Tests for noise generation and the SLN and HOPS ensembles."""
import numpy as np
import pytest

from heomkit.core.fpheom import Truncation, build_index_set, initial_state, propagate
from heomkit.core.integrate import IntegratorConfig, uniform_times
from heomkit.core.modefit import reconstruct_C
from heomkit.core.stochastic import (
    EnsembleError,
    HopsNoiseFactory,
    NoiseGenerationError,
    SlnNoiseFactory,
    _ChunkResult,
    _finalize,
    dump_noise,
    empirical_two_point,
    generate_hops_noise,
    generate_sln_noise,
    hops_ensemble,
    hops_propagate,
    sln_ensemble,
    sln_propagate,
    trajectory_generator,
)
from heomkit.models.modes import ModeSet

from tests.conftest import WINDOW

GRID = uniform_times(1.0, 0.01)


def test_trajectory_streams_are_reproducible_and_distinct():
    first = trajectory_generator(5, 3).standard_normal(4)
    assert np.array_equal(first, trajectory_generator(5, 3).standard_normal(4))
    assert not np.array_equal(first, trajectory_generator(5, 4).standard_normal(4))
    assert not np.array_equal(first, trajectory_generator(6, 3).standard_normal(4))


def test_noise_is_reproducible_per_seed_and_index(weak_modes):
    a = generate_sln_noise(weak_modes, GRID, seed=11, index=2)
    b = generate_sln_noise(weak_modes, GRID, seed=11, index=2)
    c = generate_sln_noise(weak_modes, GRID, seed=11, index=3)
    assert np.array_equal(a.xi, b.xi) and np.array_equal(a.nu, b.nu)
    assert not np.array_equal(a.xi, c.xi)
    assert a.xi.dtype == np.float64 and a.nu.shape == GRID.shape
    hops = generate_hops_noise(weak_modes, GRID, seed=11)
    assert np.array_equal(hops.z, generate_hops_noise(weak_modes, GRID, seed=11).z)


def test_empty_modes_give_silent_noise(empty_modes):
    noise = generate_sln_noise(empty_modes, GRID, seed=1)
    assert np.all(noise.xi == 0) and np.all(noise.nu == 0)
    assert np.all(generate_hops_noise(empty_modes, GRID, seed=1).z == 0)


@pytest.mark.parametrize("times", [np.array([0.0]), np.array([0.0, 0.1, 0.3]), np.array([0.2, 0.1])])
def test_noise_grid_must_be_uniform(weak_modes, times):
    with pytest.raises(NoiseGenerationError):
        SlnNoiseFactory(weak_modes, times)


def test_dump_noise_columns(tmp_path, weak_modes):
    sln_path = dump_noise(generate_sln_noise(weak_modes, GRID, seed=1), tmp_path / "sln.csv")
    hops_path = dump_noise(generate_hops_noise(weak_modes, GRID, seed=1), tmp_path / "hops.csv")
    assert sln_path.read_text().splitlines()[0] == "t,xi,nu_re,nu_im"
    assert hops_path.read_text().splitlines()[0] == "t,z_re,z_im"
    assert len(hops_path.read_text().splitlines()) == len(GRID) + 1


def test_sln_trajectory_without_bath_is_unitary(rabi_system, empty_modes, observables):
    record = sln_propagate(rabi_system, generate_sln_noise(empty_modes, GRID, seed=0), 0.1, observables)
    assert np.allclose(record.observable("sz").real, np.cos(record.times), atol=1e-8)
    assert np.allclose(record.diagnostics["trace_re"], 1.0)


def test_hops_trajectory_without_bath_is_unitary(rabi_system, empty_modes, observables):
    noise = generate_hops_noise(empty_modes, GRID, seed=0)
    record = hops_propagate(rabi_system, empty_modes, noise, Truncation(2), 0.1, observables)
    assert np.allclose(record.observable("sz").real, np.cos(record.times), atol=1e-8)


def test_single_trajectory_ensembles_match_direct_propagation(rabi_system, weak_modes, observables):
    sln = sln_ensemble(rabi_system, weak_modes, 1.0, 0.01, 1, 9, observables, 0.1)
    direct = sln_propagate(rabi_system, generate_sln_noise(weak_modes, GRID, 9, 0), 0.1, observables)
    assert np.allclose(sln.record.observable("sz"), direct.observable("sz"), atol=1e-12)

    hops = hops_ensemble(rabi_system, weak_modes, Truncation(2), 1.0, 0.01, 1, 9, observables, 0.1)
    noise = generate_hops_noise(weak_modes, GRID, 9, 0)
    direct = hops_propagate(rabi_system, weak_modes, noise, Truncation(2), 0.1, observables)
    assert np.allclose(hops.record.observable("sz"), direct.observable("sz"), atol=1e-12)


def test_ensemble_is_independent_of_chunks_and_threads(rabi_system, weak_modes, observables):
    one = sln_ensemble(rabi_system, weak_modes, 1.0, 0.01, 12, 4, observables, 0.1)
    split = sln_ensemble(rabi_system, weak_modes, 1.0, 0.01, 12, 4, observables, 0.1,
                         threads=3, chunk=5)
    assert np.allclose(one.record.observable("sz"), split.record.observable("sz"), atol=1e-12)
    assert np.allclose(one.mean_density, split.mean_density, atol=1e-12)
    assert one.trajectory_count == split.trajectory_count == 12

    one = hops_ensemble(rabi_system, weak_modes, Truncation(2), 1.0, 0.01, 6, 4, observables, 0.1)
    split = hops_ensemble(rabi_system, weak_modes, Truncation(2), 1.0, 0.01, 6, 4, observables,
                          0.1, threads=2, chunk=4)
    assert np.allclose(one.record.observable("sx"), split.record.observable("sx"), atol=1e-12)


def test_ensemble_without_bath_has_zero_spread(rabi_system, empty_modes, observables):
    result = sln_ensemble(rabi_system, empty_modes, 1.0, 0.01, 4, 0, observables, 0.1)
    assert np.allclose(result.record.observable("sz").real, np.cos(result.times), atol=1e-8)
    assert np.allclose(result.record.std_errors["sz"], 0.0)
    assert result.record.trajectories == 4
    assert result.record.max_diagnostic("hermiticity") < 1e-12


def test_ensemble_argument_checks(rabi_system, weak_modes, observables):
    with pytest.raises(EnsembleError):
        sln_ensemble(rabi_system, weak_modes, 1.0, 0.01, 0, 1, observables)
    with pytest.raises(EnsembleError):
        hops_ensemble(rabi_system, weak_modes, Truncation(1), 1.0, 0.01, 2, 1, observables, threads=0)


def _chunk(finite):
    samples, count = 3, len(finite)
    values = {"sz": np.ones((count, samples), dtype=np.complex128)}
    return _ChunkResult(values, np.zeros((samples, 2, 2), dtype=np.complex128) + np.eye(2) * sum(finite) / 2,
                        np.array(finite))


def test_empirical_two_point_averages_over_origins():
    a = np.array([[1.0, 2.0, 3.0], [3.0, 2.0, 1.0]])
    b = np.array([[1j, 1j, 1j], [1.0, 1.0, 1.0]])
    estimate = empirical_two_point(a, b, [0, 2])
    assert estimate[0] == pytest.approx((6j + 6.0) / 6)
    assert estimate[1] == pytest.approx((3j + 1.0) / 2)
    assert empirical_two_point(a, b, [2], conjugate=True)[0] == pytest.approx((-3j + 1.0) / 2)
    with pytest.raises(NoiseGenerationError, match="outside"):
        empirical_two_point(a, b, [3])
    with pytest.raises(NoiseGenerationError, match="shape"):
        empirical_two_point(a, b[:, :2], [0])


def test_failure_fraction():
    times = np.array([0.0, 0.5, 1.0])
    ops = {"sz": np.eye(2)}
    with pytest.raises(EnsembleError, match="non-finite"):
        _finalize([_chunk([True, False])], times, ops, 0, "sln", 0.01)
    result = _finalize([_chunk([True] * 9 + [False])], times, ops, 0, "sln", 0.2)
    assert result.failed_count == 1
    assert result.trajectory_count == 9
    assert result.record.metadata["failed"] == 1
    assert np.allclose(result.record.diagnostics["trace_re"], 1.0)


@pytest.fixture
def lorentzian_mode() -> ModeSet:
    """Real weight, so the noise power is a positive Lorentzian."""
    return ModeSet.from_arrays(np.array([0.02]), np.array([1.0 + 0.5j]), WINDOW)


@pytest.mark.slow
def test_hops_noise_covariance(lorentzian_mode):
    times = uniform_times(20.0, 0.1)
    factory = HopsNoiseFactory(lorentzian_mode, times)
    assert factory.clip_mass < 1e-6
    rng = trajectory_generator(2024, 0)
    draws = np.array([factory.sample(rng) for _ in range(20000)])
    lags = np.arange(6) * 5
    estimate = empirical_two_point(draws, draws, lags, conjugate=True)
    expected = np.conj(reconstruct_C(lorentzian_mode, times[lags]))
    assert np.max(np.abs(estimate - expected)) < 1.5e-3
    assert abs(empirical_two_point(draws, draws, [3])[0]) < 1.5e-3


@pytest.mark.slow
def test_sln_noise_covariance(lorentzian_mode):
    times = uniform_times(20.0, 0.1)
    factory = SlnNoiseFactory(lorentzian_mode, times)
    rng = trajectory_generator(2024, 1)
    pairs = [factory.sample(rng) for _ in range(20000)]
    xi = np.array([p[0] for p in pairs])
    nu = np.array([p[1] for p in pairs])
    corr = reconstruct_C(lorentzian_mode, times[:20])
    assert empirical_two_point(xi, xi, [10])[0] == pytest.approx(corr[10].real, abs=1.5e-3)
    assert empirical_two_point(xi, nu, [10])[0] == pytest.approx(2j * corr[10].imag, abs=1.5e-3)
    # nu only responds to earlier xi
    assert abs(empirical_two_point(nu, xi, [10])[0]) < 1.5e-3
    assert abs(empirical_two_point(nu, nu, [10])[0]) < 1.5e-3


@pytest.mark.slow
@pytest.mark.parametrize("method", ["sln", "hops"])
def test_ensembles_reproduce_the_hierarchy(rabi_system, weak_modes, observables, method):
    index_set = build_index_set(weak_modes.K, Truncation(4))
    reference, _ = propagate(initial_state(rabi_system, index_set), rabi_system, weak_modes,
                             2.0, IntegratorConfig("rk4", step=0.01), 0.1, observables)
    if method == "sln":
        result = sln_ensemble(rabi_system, weak_modes, 2.0, 0.01, 2000, 17, observables, 0.1)
    else:
        result = hops_ensemble(rabi_system, weak_modes, Truncation(4), 2.0, 0.01, 2000, 17,
                               observables, 0.1)
    deviation = np.abs(result.record.observable("sz") - reference.observable("sz"))
    assert np.all(deviation <= 5.0 * result.record.std_errors["sz"] + 5e-3)
