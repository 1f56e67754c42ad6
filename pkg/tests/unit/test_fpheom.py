"""Tests for the free-pole hierarchy."""
import numpy as np
import pytest

from heomkit.core.errors import NumericalError
from heomkit.core.fpheom import (
    IMAGINARY_RESIDUE_LIMIT,
    DensityRecorder,
    FpHeomGenerator,
    HierarchyError,
    ImaginaryResidueError,
    Truncation,
    build_index_set,
    dense_generator,
    hierarchy_generator,
    initial_state,
    propagate,
    pure_dephasing_coherence,
    rhs,
    tier_convergence,
)
from heomkit.core.integrate import IntegratorConfig

from tests.conftest import SIGMA_X, SIGMA_Z

RK4 = IntegratorConfig("rk4", step=0.01)


def test_index_set_counts():
    assert len(build_index_set(1, Truncation(2))) == 6
    assert len(build_index_set(2, Truncation(1))) == 5
    zero_tier = build_index_set(3, Truncation(0))
    assert zero_tier.labels == [(0,) * 6]
    assert build_index_set(0, Truncation(4)).labels == [()]


def test_index_set_order_and_neighbours():
    index_set = build_index_set(1, Truncation(2))
    assert index_set.labels[0] == (0, 0)
    label = index_set.labels[index_set.idx((1, 0))]
    assert label.m == (1,) and label.n == (0,) and label.tier == 1
    assert index_set.next((1, 0), 1) == (1, 1)
    assert index_set.next((1, 1), 0) is None
    assert index_set.prev((0, 0), 0) is None
    assert index_set.labels[index_set.swap_index[index_set.idx((2, 0))]] == (0, 2)


def test_caps_restrict_occupations():
    index_set = build_index_set(2, Truncation(4, (1, 2)))
    assert index_set.mode_caps == (1, 2)
    assert index_set.m[:, 0].max() == 1 and index_set.n[:, 1].max() == 2
    with pytest.raises(HierarchyError):
        build_index_set(2, Truncation(4, (1, 2, 3)))


def test_truncation_validation_and_budget():
    with pytest.raises(HierarchyError):
        Truncation(-1)
    with pytest.raises(HierarchyError):
        Truncation(2, (0,))
    with pytest.raises(HierarchyError, match="budget"):
        build_index_set(4, Truncation(6), max_indices=100)


def test_rhs_matches_dense_hierarchy_generator(rabi_system, weak_modes):
    index_set = build_index_set(weak_modes.K, Truncation(2))
    rng = np.random.default_rng(7)
    shape = (len(index_set), 2, 2)
    blocks = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    state = initial_state(rabi_system, index_set)
    state.blocks = blocks
    dense = hierarchy_generator(rabi_system, weak_modes, index_set)
    assert dense.dims == shape
    expected = (dense.matrix @ blocks.ravel()).reshape(shape)
    assert np.allclose(rhs(state, rabi_system, weak_modes), expected, atol=1e-12)


def test_dense_generator_dimension_and_limit(rabi_system, single_mode):
    generator = dense_generator(rabi_system, single_mode, (2,))
    assert generator.dims == (2, 3, 3, 2)
    assert generator.size == 36
    with pytest.raises(HierarchyError, match="limit"):
        dense_generator(rabi_system, single_mode, (2,), limit=10)
    with pytest.raises(HierarchyError):
        dense_generator(rabi_system, single_mode, (2, 2))


def test_generator_rejects_mismatched_modes(rabi_system, weak_modes):
    index_set = build_index_set(1, Truncation(2))
    with pytest.raises(HierarchyError, match="modes"):
        FpHeomGenerator(index_set, rabi_system, weak_modes)


def test_without_modes_dynamics_is_unitary(rabi_system, empty_modes, observables):
    index_set = build_index_set(0, Truncation(3))
    record, final = propagate(initial_state(rabi_system, index_set), rabi_system, empty_modes,
                              2.0, RK4, 0.1, observables)
    assert np.allclose(record.observable("sz").real, np.cos(record.times), atol=1e-8)
    assert final.time == pytest.approx(2.0)
    assert record.metadata["indices"] == 1


def test_trace_and_pairing_are_conserved(rabi_system, weak_modes, observables):
    index_set = build_index_set(weak_modes.K, Truncation(3))
    record, final = propagate(initial_state(rabi_system, index_set), rabi_system, weak_modes,
                              3.0, RK4, 0.5, observables)
    assert record.max_diagnostic("trace_re") == pytest.approx(1.0, abs=1e-10)
    assert record.max_diagnostic("trace_im") < 1e-10
    assert record.max_diagnostic("pairing") < 1e-10
    assert record.max_diagnostic("hermiticity") < 1e-10
    assert final.pairing_residual() < 1e-10
    assert record.metadata["max_imaginary_residue"] < 1e-12
    # the bath does act
    assert np.max(np.abs(record.observable("sz").real - np.cos(record.times))) > 1e-4


def test_imaginary_expectation_of_hermitian_observable_is_fatal():
    skewed = np.array([[1.0, 1e-6j], [1e-6j, 0.0]])
    raising = np.array([[0, 1], [0, 0]], dtype=np.complex128)

    reporting = DensityRecorder({"sx": SIGMA_X, "raise": raising})
    reporting.record(0.0, skewed)
    record = reporting.to_record()
    assert record.metadata["max_imaginary_residue"] == pytest.approx(2e-6)

    strict = DensityRecorder({"sx": SIGMA_X}, IMAGINARY_RESIDUE_LIMIT)
    strict.record(0.0, skewed)
    with pytest.raises(ImaginaryResidueError, match="imaginary"):
        strict.to_record()
    assert issubclass(ImaginaryResidueError, NumericalError)

    # non-Hermitian observables are exempt
    exempt = DensityRecorder({"raise": raising}, IMAGINARY_RESIDUE_LIMIT)
    exempt.record(0.0, skewed)
    assert exempt.to_record().metadata["max_imaginary_residue"] == 0.0


def test_pure_dephasing_matches_closed_form(dephasing_system, single_mode):
    index_set = build_index_set(single_mode.K, Truncation(6))
    record, _ = propagate(initial_state(dephasing_system, index_set), dephasing_system,
                          single_mode, 3.0, RK4, 0.25, {"sp": np.array([[0, 0], [1, 0]])})
    # Tr(sigma_- rho) picks out rho_01
    coherence = np.abs(record.observable("sp"))
    expected = pure_dephasing_coherence(single_mode, record.times, 0.5)
    assert np.max(np.abs(coherence - expected)) < 1e-6
    assert expected[-1] < expected[0]


def test_populations_frozen_under_pure_dephasing(dephasing_system, weak_modes):
    index_set = build_index_set(weak_modes.K, Truncation(2))
    record, _ = propagate(initial_state(dephasing_system, index_set), dephasing_system,
                          weak_modes, 1.0, RK4, 0.5, {"sz": SIGMA_Z})
    assert np.allclose(record.observable("sz"), 0.0, atol=1e-12)


def test_tier_convergence_shrinks(rabi_system, weak_modes):
    frame = tier_convergence(rabi_system, weak_modes, [1, 2, 3], 2.0, RK4, SIGMA_Z,
                             sample_interval=0.2, tolerance=1e-3)
    assert list(frame["tier"]) == [1, 2]
    assert list(frame["next_tier"]) == [2, 3]
    assert frame["max_deviation"].iloc[1] < frame["max_deviation"].iloc[0]
    assert bool(frame["converged"].iloc[1])
    with pytest.raises(HierarchyError):
        tier_convergence(rabi_system, weak_modes, [2], 1.0, RK4, SIGMA_Z)
