"""Tests for exponential modes and the ModeSet file."""
import math

import numpy as np
import pytest
import yaml

from heomkit.core.errors import ConfigError
from heomkit.models.base import format_float
from heomkit.models.modes import FrequencyWindow, Mode, ModeSet, read_modes, write_modes

from tests.conftest import WINDOW


def test_mode_requires_positive_damping():
    with pytest.raises(ConfigError, match="damping"):
        Mode(0.1, -0.5 + 1j)
    with pytest.raises(ConfigError):
        Mode(complex("nan"), 1.0)


def test_mode_polar_form():
    mode = Mode(-0.04j, 2.0 + 3.0j)
    assert mode.gamma == 2.0 and mode.omega == 3.0
    assert mode.amplitude == pytest.approx(0.04)
    assert mode.phase == pytest.approx(-math.pi / 2)
    assert mode.sqrt_d ** 2 == pytest.approx(mode.d)
    assert mode.correlation(0.0) == pytest.approx(mode.d)


@pytest.mark.parametrize("bounds", [(0.0, 1.0), (2.0, 1.0), (1.0, math.inf)])
def test_window_validation(bounds):
    with pytest.raises(ConfigError):
        FrequencyWindow(*bounds)


def test_window_contains_both_signs():
    window = FrequencyWindow(0.1, 10.0)
    assert window.decades == pytest.approx(2.0)
    assert list(window.contains(np.array([-5.0, 0.05, 10.0, 11.0]))) == [True, False, True, False]


def test_from_arrays_checks_lengths():
    with pytest.raises(ConfigError, match="equal length"):
        ModeSet.from_arrays(np.array([0.1, 0.2]), np.array([1.0]), WINDOW)


def test_write_read_preserves_coefficients_exactly(tmp_path, weak_modes):
    modes = ModeSet(weak_modes.modes, weak_modes.window, 1e-9, 3.141592653589793e-10, 42,
                    {"family": "ohmic"})
    path = write_modes(modes, tmp_path / "modes.yaml")
    restored = read_modes(path)
    assert restored == modes
    assert restored.metadata == {"family": "ohmic"}
    assert np.array_equal(restored.weights, modes.weights)
    assert np.array_equal(restored.rates, modes.rates)


def test_empty_mode_set_round_trips(tmp_path, empty_modes):
    restored = read_modes(write_modes(empty_modes, tmp_path / "empty.yaml"))
    assert restored.K == 0
    assert restored.weights.shape == (0,)


def test_read_rejects_foreign_documents(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_modes(tmp_path / "absent.yaml")
    other = tmp_path / "other.yaml"
    other.write_text("format: something-else\nmodes: []\n")
    with pytest.raises(ConfigError, match="heomkit-modes/1"):
        read_modes(other)


@pytest.mark.parametrize("value", [1.0, 1e-9, 0.1 + 0.2, -2.5e300, 5e-324])
def test_format_float_resolves_as_the_same_float(value):
    text = format_float(value)
    assert yaml.safe_load(text) == value


def test_format_float_special_values():
    assert yaml.safe_load(format_float(math.inf)) == math.inf
    assert math.isnan(yaml.safe_load(format_float(math.nan)))
