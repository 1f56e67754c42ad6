"""Matrix-product-operator form of the FP-HEOM generator.

The chain runs over the sites (i, m_1, n_1, ..., m_K, n_K, j): the density
row index, the two boson occupations of every mode, and the density column
index. Each tensor is stored as (left bond, right bond, out, in) blocks; the
interior tensors all share the 4x4 lower-triangular bond structure

    [[I, 0, 0, 0],
     [A, I, B, 0],
     [0, 0, I, 0],
     [C, 0, 0, I]]

with bond slot 0 collecting finished terms, slot 1 carrying the identity,
slot 2 collecting operators that multiply q from the right and slot 3
carrying q applied from the left.
"""
import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from heomkit.core.errors import NumericalError
from heomkit.core.fpheom import GeneratorMatrix, dense_generator, lowering
from heomkit.core.types import ComplexArray, MpoReport
from heomkit.models.modes import ModeSet
from heomkit.models.system import SystemSpec

logger = logging.getLogger(__name__)

BOND = 4
DEFAULT_BUDGET = 10_000
DEFAULT_TOLERANCE = 1e-10
DUMP_FORMAT = "heomkit-mpo/1"


class MpoError(NumericalError):
    """Raised for malformed chains or tensors."""
    pass


class BudgetExceededError(MpoError):
    """Raised when a dense contraction would exceed its dimension budget."""
    pass


@dataclass
class MpoTensor:
    """One chain site: operator blocks of shape (left bond, right bond, p, p)."""

    blocks: ComplexArray
    label: str

    def __post_init__(self) -> None:
        self.blocks = np.asarray(self.blocks, dtype=np.complex128)
        if self.blocks.ndim != 4 or self.blocks.shape[2] != self.blocks.shape[3]:
            raise MpoError(f"site {self.label}: expected (Dl, Dr, p, p) blocks, got {self.blocks.shape}")

    @property
    def left_bond(self) -> int:
        return int(self.blocks.shape[0])

    @property
    def right_bond(self) -> int:
        return int(self.blocks.shape[1])

    @property
    def physical(self) -> int:
        return int(self.blocks.shape[2])

    def block(self, row: int, col: int) -> ComplexArray:
        return self.blocks[row, col]


@dataclass
class MpoChain:
    """Open-boundary chain [S_L, M_1, ..., M_2K, S_R] with its site map."""

    tensors: List[MpoTensor]
    metadata: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.tensors) < 2:
            raise MpoError("a chain needs at least the two system end sites")
        if self.tensors[0].left_bond != 1 or self.tensors[-1].right_bond != 1:
            raise MpoError("chain ends must have bond dimension 1")
        for left, right in zip(self.tensors[:-1], self.tensors[1:]):
            if left.right_bond != right.left_bond:
                raise MpoError(
                    f"bond mismatch between {left.label} ({left.right_bond}) "
                    f"and {right.label} ({right.left_bond})"
                )

    def __len__(self) -> int:
        return len(self.tensors)

    def __getitem__(self, index: int) -> MpoTensor:
        return self.tensors[index]

    @property
    def site_map(self) -> List[str]:
        return [t.label for t in self.tensors]

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(t.physical for t in self.tensors)

    @property
    def dimension(self) -> int:
        return int(np.prod(self.dims))

    def swapped(self, first: int, second: int) -> "MpoChain":
        """Chain with two tensors exchanged together with their physical spaces."""
        tensors = list(self.tensors)
        tensors[first], tensors[second] = tensors[second], tensors[first]
        return MpoChain(tensors, dict(self.metadata))


def _interior(cap: int, a_op: ComplexArray, b_op: ComplexArray, c_op: ComplexArray) -> ComplexArray:
    p = cap + 1
    eye = np.eye(p, dtype=np.complex128)
    blocks = np.zeros((BOND, BOND, p, p), dtype=np.complex128)
    for slot in range(BOND):
        blocks[slot, slot] = eye
    blocks[1, 0] = a_op
    blocks[1, 2] = b_op
    blocks[3, 0] = c_op
    return blocks


def build_mpo(system: SystemSpec, modes: ModeSet, caps: Sequence[int]) -> MpoChain:
    """Build the FP-HEOM generator as a bond-dimension-4 MPO.

    For mode k the m-site carries A = -z a^dag a, B = sqrt(d) a and
    C = sqrt(d) (a^dag - a); the n-site carries A = -z* b^dag b,
    B = sqrt(d*) (b^dag - b) and C = sqrt(d*) b. The left end is
    [-iH, I, 0, q] and the right end [I, (iH)^T, q^T, 0], transposed
    because it acts on the density column index.

    Args:
        system: System Hamiltonian and coupling.
        modes: Bath modes; d_k may be any complex number.
        caps: Occupation cap per mode, shared by its m and n sites.

    Returns:
        MpoChain: Chain of length 2K + 2.

    Raises:
        MpoError: If the number of caps does not match the modes.
    """
    caps = tuple(int(c) for c in caps)
    if len(caps) != modes.K:
        raise MpoError(f"expected {modes.K} caps, got {len(caps)}")
    if any(c < 1 for c in caps):
        raise MpoError(f"occupation caps must be at least 1, got {caps}")
    n = system.dim
    h, q = system.hamiltonian, system.coupling
    eye = np.eye(n, dtype=np.complex128)

    left = np.zeros((1, BOND, n, n), dtype=np.complex128)
    left[0, 0] = -1j * h
    left[0, 1] = eye
    left[0, 3] = q
    right = np.zeros((BOND, 1, n, n), dtype=np.complex128)
    right[0, 0] = eye
    right[1, 0] = 1j * h.T
    right[2, 0] = q.T

    tensors = [MpoTensor(left, "i")]
    for k, (mode, cap) in enumerate(zip(modes, caps), start=1):
        low = lowering(cap)
        raise_op = low.conj().T
        number = raise_op @ low
        root = mode.sqrt_d
        tensors.append(MpoTensor(
            _interior(cap, -mode.z * number, root * low, root * (raise_op - low)), f"m{k}"))
        tensors.append(MpoTensor(
            _interior(cap, -np.conj(mode.z) * number, np.conj(root) * (raise_op - low),
                      np.conj(root) * low), f"n{k}"))
    tensors.append(MpoTensor(right, "j"))
    return MpoChain(tensors, {"modes": modes.K, "caps": list(caps), "dim": n})


def contract_dense(chain: MpoChain, budget: int = DEFAULT_BUDGET) -> GeneratorMatrix:
    """Contract every bond of the chain into the dense generator.

    The basis is row-major over the chain's site map, so for a chain from
    build_mpo it is (i, m_1, n_1, ..., m_K, n_K, j).

    Raises:
        BudgetExceededError: If the dense dimension exceeds budget.
    """
    size = chain.dimension
    if size > budget:
        raise BudgetExceededError(
            f"dense contraction of dimension {size} exceeds the budget of {budget}"
        )
    env = chain[0].blocks[0]
    for tensor in chain.tensors[1:]:
        blocks = tensor.blocks
        merged = np.einsum("rab,rcij->caibj", env, blocks)
        side = env.shape[1] * tensor.physical
        env = merged.reshape(tensor.right_bond, side, side)
    return GeneratorMatrix(env[0], chain.dims, ", ".join(chain.site_map),
                           {"source": "mpo"})


def _restore_order(matrix: ComplexArray, dims: Tuple[int, ...], first: int, second: int) -> ComplexArray:
    """Undo a site exchange on a dense operator built from the swapped chain."""
    sites = len(dims)
    order = list(range(sites))
    order[first], order[second] = order[second], order[first]
    tensor = matrix.reshape(dims + dims)
    tensor = tensor.transpose(order + [p + sites for p in order])
    return tensor.reshape(matrix.shape)


def check_site_commutation(chain: MpoChain, first: int, second: int,
                           budget: int = DEFAULT_BUDGET,
                           reference: Optional[ComplexArray] = None) -> float:
    """Max deviation of the contraction after exchanging two interior sites.

    Args:
        chain: Chain to test.
        first: Position of the first interior site.
        second: Position of the second interior site.
        budget: Dense dimension budget.
        reference: Contraction of the unswapped chain, if already known.

    Returns:
        float: Max abs difference between the original and the re-ordered contraction.

    Raises:
        MpoError: If either position is a system end site.
    """
    last = len(chain) - 1
    for position in (first, second):
        if not 0 < position < last:
            raise MpoError(f"site {position} is not an interior site of a chain of length {len(chain)}")
    if reference is None:
        reference = contract_dense(chain, budget).matrix
    if first == second:
        return 0.0
    swapped = chain.swapped(first, second)
    restored = _restore_order(contract_dense(swapped, budget).matrix, swapped.dims, first, second)
    return float(np.max(np.abs(restored - reference)))


def block_commutator_norm(first: MpoTensor, second: MpoTensor) -> float:
    """Max norm of the operator-valued block-matrix commutator [M_1, M_2].

    Products keep the first tensor's operator on the first physical factor,
    so entry (r, c) of M_1 M_2 is sum_s M_1[r, s] (x) M_2[s, c] and of M_2 M_1
    is sum_s M_1[s, c] (x) M_2[r, s].
    """
    if first.left_bond != first.right_bond or second.left_bond != second.right_bond:
        raise MpoError("block commutators need square bond structure")
    if first.left_bond != second.left_bond:
        raise MpoError("block commutators need equal bond dimensions")
    forward = np.einsum("rsab,scij->rcaibj", first.blocks, second.blocks)
    backward = np.einsum("scab,rsij->rcaibj", first.blocks, second.blocks)
    return float(np.max(np.abs(forward - backward))) if forward.size else 0.0


def site_deviations(chain: MpoChain, reference: MpoChain) -> List[float]:
    """Per-site max abs difference between two chains; inf where shapes differ."""
    if len(chain) != len(reference):
        raise MpoError(f"chains differ in length: {len(chain)} vs {len(reference)}")
    deviations = []
    for tensor, expected in zip(chain.tensors, reference.tensors):
        if tensor.blocks.shape != expected.blocks.shape:
            deviations.append(float("inf"))
        else:
            deviations.append(float(np.max(np.abs(tensor.blocks - expected.blocks))))
    return deviations


def verify_mpo(
    system: SystemSpec,
    modes: ModeSet,
    caps: Sequence[int],
    chain: Optional[MpoChain] = None,
    tolerance: float = DEFAULT_TOLERANCE,
    budget: int = DEFAULT_BUDGET,
) -> MpoReport:
    """Check a chain against the dense FP-HEOM generator.

    Runs the dense comparison, the exchange test over every pair of interior
    sites, the literal block commutators and the per-site comparison with a
    freshly built chain. A chain passed in (for example a deliberately
    corrupted one) is tested instead of the freshly built one.
    """
    reference_chain = build_mpo(system, modes, caps)
    chain = chain if chain is not None else reference_chain
    oracle = dense_generator(system, modes, caps, limit=budget)
    contracted = contract_dense(chain, budget)
    dense_deviation = float(np.max(np.abs(contracted.matrix - oracle.matrix)))

    interior = range(1, len(chain) - 1)
    pairs = list(itertools.combinations(interior, 2))
    commutation: Optional[float] = None
    block: Optional[float] = None
    if pairs:
        commutation = max(check_site_commutation(chain, a, b, budget, contracted.matrix)
                          for a, b in pairs)
        block = max(block_commutator_norm(chain[a], chain[b]) for a, b in pairs)

    per_site = site_deviations(chain, reference_chain)
    worst = int(np.argmax(per_site))
    worst_site = chain[worst].label if per_site[worst] > tolerance else None
    checks = [dense_deviation] + [v for v in (commutation, block) if v is not None]
    passed = all(v <= tolerance for v in checks) and worst_site is None
    if passed:
        logger.info(f"MPO verified: dense deviation {dense_deviation:.3e}")
    else:
        logger.warning(
            f"MPO verification failed: dense deviation {dense_deviation:.3e}, "
            f"worst site {worst_site}"
        )
    return MpoReport(
        passed=passed,
        dense_deviation=dense_deviation,
        commutation_deviation=commutation,
        block_commutator=block,
        site_deviations=per_site,
        worst_site=worst_site,
    )


def dump_chain(chain: MpoChain, path: Union[str, Path]) -> Path:
    """Write the chain as text: a shape header per tensor, then row-major entries.

    Each entry line holds the real and imaginary part at 17 significant digits.
    """
    path = Path(path)
    lines = [f"{DUMP_FORMAT} sites {len(chain)} map {' '.join(chain.site_map)}"]
    for position, tensor in enumerate(chain.tensors):
        shape = " ".join(str(s) for s in tensor.blocks.shape)
        lines.append(f"tensor {position} {tensor.label} shape {shape}")
        lines.extend(f"{v.real:.17g} {v.imag:.17g}" for v in tensor.blocks.ravel())
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def load_chain(path: Union[str, Path]) -> MpoChain:
    """Read a chain written by dump_chain."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith(DUMP_FORMAT):
        raise MpoError(f"{path} is not an MPO dump")
    tensors: List[MpoTensor] = []
    cursor = 1
    try:
        while cursor < len(lines):
            header = lines[cursor].split()
            label = header[2]
            shape = tuple(int(s) for s in header[4:8])
            count = int(np.prod(shape))
            rows = lines[cursor + 1: cursor + 1 + count]
            values = np.array([complex(float(re), float(im)) for re, im in (r.split() for r in rows)])
            tensors.append(MpoTensor(values.reshape(shape), label))
            cursor += 1 + count
    except (IndexError, ValueError) as err:
        raise MpoError(f"malformed MPO dump {path}: {str(err)}") from err
    return MpoChain(tensors)
