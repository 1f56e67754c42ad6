"""Tests for the MPO form of the generator."""
import numpy as np
import pytest

from heomkit.core.fpheom import dense_generator
from heomkit.core.mpo import (
    BOND,
    BudgetExceededError,
    MpoChain,
    MpoError,
    MpoTensor,
    block_commutator_norm,
    build_mpo,
    check_site_commutation,
    contract_dense,
    dump_chain,
    load_chain,
    site_deviations,
    verify_mpo,
)


def test_chain_layout(rabi_system, weak_modes):
    chain = build_mpo(rabi_system, weak_modes, (2, 1))
    assert chain.site_map == ["i", "m1", "n1", "m2", "n2", "j"]
    assert chain.dims == (2, 3, 3, 2, 2, 2)
    assert chain[0].left_bond == 1 and chain[-1].right_bond == 1
    assert all(t.left_bond == t.right_bond == BOND for t in chain.tensors[1:-1])


def test_without_modes_contracts_to_bare_liouvillian(rabi_system, empty_modes):
    chain = build_mpo(rabi_system, empty_modes, ())
    assert len(chain) == 2
    h = rabi_system.hamiltonian
    expected = -1j * (np.kron(h, np.eye(2)) - np.kron(np.eye(2), h.T))
    assert np.allclose(contract_dense(chain).matrix, expected, atol=1e-14)


@pytest.mark.parametrize("fixture, caps", [("single_mode", (2,)), ("weak_modes", (2, 1)),
                                           ("real_pole_modes", (1, 2))])
def test_contraction_equals_dense_generator(request, rabi_system, fixture, caps):
    modes = request.getfixturevalue(fixture)
    contracted = contract_dense(build_mpo(rabi_system, modes, caps))
    dense = dense_generator(rabi_system, modes, caps)
    assert contracted.dims == dense.dims
    assert np.max(np.abs(contracted.matrix - dense.matrix)) < 1e-12


def test_interior_sites_commute(rabi_system, weak_modes):
    chain = build_mpo(rabi_system, weak_modes, (1, 1))
    assert check_site_commutation(chain, 1, 4) < 1e-12
    assert check_site_commutation(chain, 2, 2) == 0.0
    assert block_commutator_norm(chain[1], chain[2]) < 1e-14
    with pytest.raises(MpoError, match="interior"):
        check_site_commutation(chain, 0, 2)


def test_verify_passes_for_the_built_chain(rabi_system, weak_modes):
    report = verify_mpo(rabi_system, weak_modes, (2, 1))
    assert report["passed"]
    assert report["dense_deviation"] < 1e-12
    assert report["worst_site"] is None
    assert len(report["site_deviations"]) == 6


def test_verify_localizes_a_corrupted_tensor(rabi_system, weak_modes):
    chain = build_mpo(rabi_system, weak_modes, (1, 1))
    blocks = chain[3].blocks.copy()
    blocks[1, 0] += 1e-3 * np.eye(2)
    chain.tensors[3] = MpoTensor(blocks, chain[3].label)
    report = verify_mpo(rabi_system, weak_modes, (1, 1), chain=chain)
    assert not report["passed"]
    assert report["worst_site"] == "m2"
    assert report["dense_deviation"] == pytest.approx(1e-3)


def test_site_deviations_flags_shape_changes(rabi_system, weak_modes):
    small = build_mpo(rabi_system, weak_modes, (1, 1))
    large = build_mpo(rabi_system, weak_modes, (2, 1))
    deviations = site_deviations(small, large)
    assert deviations[1] == float("inf") and deviations[3] == 0.0


def test_budget_and_validation(rabi_system, weak_modes):
    chain = build_mpo(rabi_system, weak_modes, (2, 2))
    with pytest.raises(BudgetExceededError):
        contract_dense(chain, budget=100)
    with pytest.raises(MpoError, match="caps"):
        build_mpo(rabi_system, weak_modes, (2,))
    with pytest.raises(MpoError, match="bond mismatch"):
        MpoChain([chain[0], MpoTensor(np.zeros((2, 1, 2, 2)), "j")])


def test_dump_and_load(tmp_path, rabi_system, single_mode):
    chain = build_mpo(rabi_system, single_mode, (2,))
    path = dump_chain(chain, tmp_path / "chain.txt")
    assert path.read_text().startswith("heomkit-mpo/1 sites 4 map i m1 n1 j")
    restored = load_chain(path)
    assert restored.site_map == chain.site_map
    assert all(d == 0.0 for d in site_deviations(restored, chain))
    broken = tmp_path / "broken.txt"
    broken.write_text("not a dump\n")
    with pytest.raises(MpoError):
        load_chain(broken)
