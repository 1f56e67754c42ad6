"""Tests for the Runge-Kutta drivers."""
import numpy as np
import pytest

from heomkit.core.fpheom import Truncation, build_index_set, initial_state, propagate
from heomkit.core.integrate import IntegrationError, IntegratorConfig, integrate, uniform_times


def decay(t, y):
    return -(1.0 + 2.0j) * y


@pytest.mark.parametrize("config, tol", [
    (IntegratorConfig("rk4", step=0.01), 1e-7),
    (IntegratorConfig("rk45", step=0.1, rtol=1e-10, atol=1e-12), 1e-8),
])
def test_exponential_decay(config, tol):
    times = uniform_times(2.0, 0.5)
    seen = []
    final = integrate(decay, np.array([1.0 + 0j]), times, config,
                      observer=lambda t, y: seen.append((t, complex(y[0]))))
    assert [t for t, _ in seen] == pytest.approx(list(times))
    expected = np.exp(-(1.0 + 2.0j) * times)
    assert np.max(np.abs(np.array([v for _, v in seen]) - expected)) < tol
    assert abs(final[0] - expected[-1]) < tol


def test_rk4_error_drops_sixteenfold_when_the_step_halves():
    times = uniform_times(2.0, 0.5)
    expected = np.exp(-(1.0 + 2.0j) * times)

    def error(step):
        seen = []
        integrate(decay, np.array([1.0 + 0j]), times, IntegratorConfig("rk4", step=step),
                  observer=lambda t, y: seen.append(complex(y[0])))
        return np.max(np.abs(np.array(seen) - expected))

    assert 14.0 <= error(0.05) / error(0.025) <= 18.0


def test_rk4_hierarchy_error_drops_sixteenfold_when_the_step_halves(rabi_system, weak_modes,
                                                                    observables):
    index_set = build_index_set(weak_modes.K, Truncation(2))

    def run(step):
        record, _ = propagate(initial_state(rabi_system, index_set), rabi_system, weak_modes,
                              2.0, IntegratorConfig("rk4", step=step), 0.2, observables)
        return record.observable("sz")

    reference = run(0.0025)
    coarse = np.max(np.abs(run(0.04) - reference))
    fine = np.max(np.abs(run(0.02) - reference))
    assert 12.0 <= coarse / fine <= 20.0


def test_rk4_step_does_not_need_to_divide_interval():
    times = np.array([0.0, 0.35])
    final = integrate(decay, np.array([1.0 + 0j]), times, IntegratorConfig("rk4", step=0.1))
    assert abs(final[0] - np.exp(-(1.0 + 2.0j) * 0.35)) < 1e-4


def test_non_finite_state_raises():
    with pytest.raises(IntegrationError, match="non-finite"):
        integrate(lambda t, y: y * 1e200, np.array([1e200 + 0j]), [0.0, 1.0],
                  IntegratorConfig("rk4", step=0.1))


def test_bad_configuration():
    with pytest.raises(IntegrationError):
        IntegratorConfig("euler")
    with pytest.raises(IntegrationError):
        IntegratorConfig("rk4", step=-1.0)
    with pytest.raises(IntegrationError, match="not set"):
        integrate(decay, np.ones(1), [0.0, 1.0], IntegratorConfig("rk4"))
    with pytest.raises(IntegrationError, match="non-decreasing"):
        integrate(decay, np.ones(1), [1.0, 0.0], IntegratorConfig("rk4", step=0.1))


def test_uniform_times_end_exactly():
    times = uniform_times(1.0, 0.3)
    assert times[0] == 0.0 and times[-1] == 1.0
    assert len(times) == 4
    assert list(uniform_times(0.0, 0.1)) == [0.0]
    with pytest.raises(IntegrationError):
        uniform_times(1.0, 0.0)
