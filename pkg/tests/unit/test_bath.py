"""Tests for spectral densities, noise powers and the correlation quadrature."""
import math

import numpy as np
import pytest

from heomkit.core.bath import (
    OHMIC,
    SUB_OHMIC,
    BathError,
    BathSpec,
    LorentzianNoise,
    SpectralDensity,
    correlation_quadrature,
    correlation_series,
    gibbs_deviation,
    gibbs_state,
    load_tabulated,
)

from tests.conftest import SIGMA_X, SIGMA_Z


@pytest.fixture
def ohmic() -> SpectralDensity:
    return SpectralDensity(OHMIC, alpha=0.1, cutoff=5.0)


def test_density_is_odd_and_matches_formula(ohmic):
    w = np.array([0.3, 1.0, 7.5])
    assert np.allclose(ohmic(-w), -ohmic(w))
    assert np.allclose(ohmic(w), 0.1 * w * np.exp(-w / 5.0))
    assert ohmic(0.0) == 0.0


def test_sub_ohmic_prefactor():
    density = SpectralDensity(SUB_OHMIC, alpha=0.05, cutoff=10.0, exponent=0.5)
    assert density(4.0) == pytest.approx(0.05 * 10.0 ** 0.5 * 2.0 * math.exp(-0.4))
    assert math.isinf(density.slope_at_zero())


@pytest.mark.parametrize("kwargs", [
    {"family": "drude"},
    {"family": OHMIC, "alpha": -1.0},
    {"family": OHMIC, "cutoff": 0.0},
    {"family": "lorentzian-sum", "lorentzians": ((1.0, -0.5, 1.0),)},
])
def test_invalid_densities_rejected(kwargs):
    with pytest.raises(BathError):
        SpectralDensity(**kwargs)


def test_detailed_balance(ohmic):
    bath = BathSpec(ohmic, beta=2.0)
    w = np.array([0.1, 0.5, 2.0, 6.0])
    assert np.allclose(bath.noise_power(w) / bath.noise_power(-w), np.exp(2.0 * w))
    assert np.all(bath.noise_power(np.linspace(-20, 20, 81)) >= 0)


def test_zero_frequency_limit_is_continuous(ohmic):
    bath = BathSpec(ohmic, beta=3.0)
    assert bath.noise_power(0.0) == pytest.approx(2.0 * 0.1 / 3.0)
    assert bath.noise_power(1e-7) == pytest.approx(bath.noise_power(0.0), rel=1e-6)


def test_zero_temperature_suppresses_negative_frequencies(ohmic):
    bath = BathSpec(ohmic, beta=math.inf)
    assert np.all(bath.noise_power(np.array([-3.0, -0.1])) == 0.0)
    assert bath.noise_power(2.0) == pytest.approx(2.0 * ohmic(2.0))


def test_sub_ohmic_finite_temperature_diverges_at_zero():
    bath = BathSpec(SpectralDensity(SUB_OHMIC, alpha=0.05, cutoff=10.0, exponent=0.5), beta=1.0)
    with pytest.raises(BathError, match="diverges"):
        bath.noise_power(0.0)


def test_ohmic_zero_temperature_correlation_closed_form(ohmic):
    # C(t) = (alpha / pi) * wc^2 / (1 + i wc t)^2
    bath = BathSpec(ohmic, beta=math.inf)
    for t in (0.0, 0.3, 2.0):
        expected = 0.1 / math.pi * 25.0 / (1.0 + 5.0j * t) ** 2
        assert abs(correlation_quadrature(bath, t, tol=1e-11) - expected) < 1e-9


def test_lorentzian_noise_quadrature_matches_exact():
    noise = LorentzianNoise(((1.5, 0.7, 0.2), (-0.5, 2.0, 0.1)))
    times = np.array([0.0, 0.5, 3.0])
    values = correlation_series(noise, times, tol=1e-10)
    assert np.max(np.abs(values - noise.exact_correlation(times))) < 1e-8


@pytest.mark.parametrize("scheme", ["panel", "oscillatory"])
def test_quadrature_schemes_agree(ohmic, scheme):
    bath = BathSpec(ohmic, beta=1.0)
    reference = correlation_quadrature(bath, 1.5, tol=1e-11, scheme="auto")
    assert abs(correlation_quadrature(bath, 1.5, tol=1e-11, scheme=scheme) - reference) < 1e-9


def test_quadrature_rejects_negative_time(ohmic):
    with pytest.raises(BathError):
        correlation_quadrature(BathSpec(ohmic, 1.0), -1.0)


def test_gibbs_state():
    hamiltonian = 0.5 * SIGMA_Z
    thermal = gibbs_state(hamiltonian, 2.0)
    assert np.trace(thermal).real == pytest.approx(1.0)
    assert thermal[1, 1].real / thermal[0, 0].real == pytest.approx(math.exp(2.0))
    ground = gibbs_state(SIGMA_X, math.inf)
    assert np.allclose(ground, 0.5 * np.array([[1, -1], [-1, 1]]))


def test_gibbs_deviation_compares_populations():
    hamiltonian = 0.5 * SIGMA_Z
    up = np.array([[1, 0], [0, 0]], dtype=np.complex128)
    excited = 1.0 / (1.0 + math.exp(2.0))
    assert gibbs_deviation(up, hamiltonian, 2.0) == pytest.approx(1.0 - excited)
    assert gibbs_deviation(gibbs_state(hamiltonian, 2.0), hamiltonian, 2.0) < 1e-14
    # coherences do not count
    assert gibbs_deviation(0.5 * np.ones((2, 2)), SIGMA_X, 1.0) < 1e-14
    with pytest.raises(BathError, match="shape"):
        gibbs_deviation(np.eye(3), hamiltonian, 1.0)


def test_load_tabulated_interpolates_and_guards_range(tmp_path):
    w = np.linspace(0.1, 10.0, 200)
    path = tmp_path / "density.csv"
    path.write_text("# w J\n" + "\n".join(f"{a},{b}" for a, b in zip(w, 0.1 * w * np.exp(-w / 5.0))))
    density = load_tabulated(path)
    assert density(3.0) == pytest.approx(0.1 * 3.0 * math.exp(-0.6), rel=1e-4)
    assert density(-3.0) == pytest.approx(-density(3.0))
    with pytest.raises(BathError, match="extrapolation"):
        density(20.0)
