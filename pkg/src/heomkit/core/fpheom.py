"""Free-pole hierarchical equations of motion.

Each mode k carries two occupation numbers, m_k for the left (ket) side and
n_k for the right (bra) side, so the auxiliary density matrices are labelled
by interleaved tuples (m_1, n_1, ..., m_K, n_K). The hierarchy is closed by
dropping every label whose tier sum(m) + sum(n) exceeds L or whose
occupation exceeds its per-mode cap.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from heomkit.core.errors import NumericalError
from heomkit.core.integrate import IntegratorConfig, integrate, uniform_times
from heomkit.core.types import Caps, ComplexArray, IntArray, Label, RealArray
from heomkit.models.modes import ModeSet
from heomkit.models.system import SystemSpec
from heomkit.models.trajectory import TrajectoryRecord

logger = logging.getLogger(__name__)

DEFAULT_MAX_INDICES = 200_000
DEFAULT_DENSE_LIMIT = 4096
MAX_DEFAULT_STEP = 0.01
# Largest |Im <O>| tolerated for a Hermitian observable of a Hermiticity-preserving method
IMAGINARY_RESIDUE_LIMIT = 1e-9


class HierarchyError(NumericalError):
    """Raised for invalid truncations or index sets that exceed their budget."""
    pass


class ImaginaryResidueError(NumericalError):
    """Raised when a Hermitian observable acquires an imaginary expectation value."""
    pass


@dataclass(frozen=True)
class Truncation:
    """Hierarchy closure: maximum tier L and optional per-mode occupation caps."""

    tier: int
    caps: Optional[Tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if not isinstance(self.tier, (int, np.integer)) or self.tier < 0:
            raise HierarchyError(f"tier must be a non-negative integer, got {self.tier!r}")
        if self.caps is not None:
            caps = tuple(int(c) for c in self.caps)
            if any(c < 1 for c in caps):
                raise HierarchyError(f"occupation caps must be at least 1, got {caps}")
            object.__setattr__(self, "caps", caps)

    def caps_for(self, count: int) -> Caps:
        """Per-mode caps for count modes; defaults to the tier for every mode."""
        if self.caps is None:
            return tuple([max(self.tier, 1)] * count)
        if len(self.caps) == 1:
            return tuple(self.caps * count)
        if len(self.caps) != count:
            raise HierarchyError(f"expected {count} occupation caps, got {len(self.caps)}")
        return self.caps


class HierarchyIndex(tuple):
    """Interleaved label (m_1, n_1, ..., m_K, n_K) with named views."""

    @property
    def m(self) -> Tuple[int, ...]:
        return tuple(self[0::2])

    @property
    def n(self) -> Tuple[int, ...]:
        return tuple(self[1::2])

    @property
    def tier(self) -> int:
        return int(sum(self))

    def swapped(self) -> "HierarchyIndex":
        """The label with every (m_k, n_k) pair exchanged."""
        out = list(self)
        out[0::2], out[1::2] = self[1::2], self[0::2]
        return HierarchyIndex(out)


def bounded_labels(caps: Sequence[int], max_tier: int) -> Iterator[Label]:
    """Lexicographic enumeration of occupation tuples with sum <= max_tier."""
    if not caps:
        yield ()
        return
    head, rest = caps[0], caps[1:]
    for first in range(min(head, max_tier) + 1):
        for tail in bounded_labels(rest, max_tier - first):
            yield (first,) + tail


class OccupationSet:
    """Bounded set of occupation labels with raise/lower neighbour tables.

    Neighbour tables hold the position of the label with one more (or one
    fewer) quantum in a slot, or len(labels) when that label is absent, so a
    zero block appended to the state array gives closure for free.
    """

    def __init__(self, caps: Sequence[int], max_tier: int,
                 max_indices: int = DEFAULT_MAX_INDICES):
        self.caps: Caps = tuple(int(c) for c in caps)
        self.max_tier = int(max_tier)
        labels: List[Label] = []
        for label in bounded_labels(self.caps, self.max_tier):
            labels.append(label)
            if len(labels) > max_indices:
                raise HierarchyError(
                    f"hierarchy exceeds the budget of {max_indices} indices "
                    f"({len(self.caps)} slots, tier {self.max_tier})"
                )
        self.labels = labels
        self._label_idx: Dict[Label, int] = {s: i for i, s in enumerate(labels)}
        self.idx = self._label_idx.__getitem__

        slots = len(self.caps)
        count = len(labels)
        self.occupations: IntArray = np.array(labels, dtype=np.int64).reshape(count, slots)
        self.raised: IntArray = np.full((count, slots), count, dtype=np.int64)
        self.lowered: IntArray = np.full((count, slots), count, dtype=np.int64)
        for i, label in enumerate(labels):
            for k in range(slots):
                up = label[:k] + (label[k] + 1,) + label[k + 1:]
                self.raised[i, k] = self._label_idx.get(up, count)
                if label[k] > 0:
                    down = label[:k] + (label[k] - 1,) + label[k + 1:]
                    self.lowered[i, k] = self._label_idx[down]

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def slots(self) -> int:
        return len(self.caps)

    def tiers(self) -> IntArray:
        return self.occupations.sum(axis=1)

    def next(self, label: Label, k: int) -> Optional[Label]:
        """Label with one more quantum in slot k, or None if truncated."""
        position = self.raised[self.idx(label), k]
        return None if position == len(self) else self.labels[position]

    def prev(self, label: Label, k: int) -> Optional[Label]:
        """Label with one fewer quantum in slot k, or None at zero occupation."""
        position = self.lowered[self.idx(label), k]
        return None if position == len(self) else self.labels[position]


class HierarchyIndexSet(OccupationSet):
    """FP-HEOM labels over K modes, two interleaved slots per mode."""

    def __init__(self, modes: int, truncation: Truncation,
                 max_indices: int = DEFAULT_MAX_INDICES):
        mode_caps = truncation.caps_for(modes)
        slot_caps = [c for c in mode_caps for _ in range(2)]
        super().__init__(slot_caps, truncation.tier, max_indices)
        self.modes = modes
        self.truncation = truncation
        self.mode_caps: Caps = mode_caps
        self.labels = [HierarchyIndex(label) for label in self.labels]
        swap = np.empty(len(self), dtype=np.int64)
        for i, label in enumerate(self.labels):
            swap[i] = self._label_idx[tuple(label.swapped())]
        self.swap_index: IntArray = swap

    @property
    def m(self) -> IntArray:
        return self.occupations[:, 0::2]

    @property
    def n(self) -> IntArray:
        return self.occupations[:, 1::2]


def build_index_set(K: int, truncation: Truncation,
                    max_indices: int = DEFAULT_MAX_INDICES) -> HierarchyIndexSet:
    """Enumerate the FP-HEOM index set for K modes.

    Labels come in lexicographic order of (m_1, n_1, ..., m_K, n_K), so the
    all-zero label is first.

    Raises:
        HierarchyError: If the set would hold more than max_indices labels.
    """
    if K < 0:
        raise HierarchyError(f"mode count must be non-negative, got {K}")
    index_set = HierarchyIndexSet(K, truncation, max_indices)
    logger.debug(f"Hierarchy: K={K}, tier={truncation.tier}, {len(index_set)} indices")
    return index_set


@dataclass
class HierarchyState:
    """All auxiliary density matrices at one time, stacked as (indices, N, N)."""

    index_set: HierarchyIndexSet
    blocks: ComplexArray
    time: float = 0.0

    def block(self, label: Sequence[int]) -> ComplexArray:
        return self.blocks[self.index_set.idx(tuple(label))]

    def pairing_residual(self) -> float:
        """Max over labels of |rho_(m,n) - rho_(n,m)^dagger|."""
        partner = self.blocks[self.index_set.swap_index]
        return float(np.max(np.abs(self.blocks - partner.conj().transpose(0, 2, 1))))


def initial_state(system: SystemSpec, index_set: HierarchyIndexSet) -> HierarchyState:
    """rho(0) in the (0, 0) block, zeros elsewhere."""
    n = system.dim
    blocks = np.zeros((len(index_set), n, n), dtype=np.complex128)
    blocks[0] = system.initial_state
    return HierarchyState(index_set, blocks, 0.0)


def reduced_density(state: HierarchyState) -> ComplexArray:
    """The physical reduced density matrix, i.e. the (0, 0) block."""
    return state.blocks[0].copy()


def expectation(state: HierarchyState, observable: ComplexArray) -> complex:
    """Tr(O rho) of the reduced density matrix."""
    return complex(np.trace(np.asarray(observable) @ state.blocks[0]))


class FpHeomGenerator:
    """Vectorized right-hand side of the FP-HEOM for a fixed index set."""

    def __init__(self, index_set: HierarchyIndexSet, system: SystemSpec, modes: ModeSet):
        if index_set.modes != modes.K:
            raise HierarchyError(
                f"index set was built for {index_set.modes} modes, got {modes.K}"
            )
        self.index_set = index_set
        self.hamiltonian = system.hamiltonian
        self.coupling = system.coupling
        z = modes.rates
        sqrt_d = np.sqrt(modes.weights)
        m = index_set.m.astype(np.float64)
        n = index_set.n.astype(np.float64)
        self.decay = m @ z + n @ z.conj()
        self.raise_m = index_set.raised[:, 0::2]
        self.raise_n = index_set.raised[:, 1::2]
        self.lower_m = index_set.lowered[:, 0::2]
        self.lower_n = index_set.lowered[:, 1::2]
        self.coef_raise_m = np.sqrt(m + 1.0) * sqrt_d
        self.coef_raise_n = np.sqrt(n + 1.0) * sqrt_d.conj()
        self.coef_lower_m = np.sqrt(m) * sqrt_d
        self.coef_lower_n = np.sqrt(n) * sqrt_d.conj()

    def __call__(self, t: float, blocks: ComplexArray) -> ComplexArray:
        h, q = self.hamiltonian, self.coupling
        padded = np.concatenate([blocks, np.zeros_like(blocks[:1])], axis=0)
        out = -1j * (h @ blocks - blocks @ h) - self.decay[:, None, None] * blocks
        for k in range(self.index_set.modes):
            up = padded[self.raise_m[:, k]]
            out -= self.coef_raise_m[:, k, None, None] * (q @ up - up @ q)
            up = padded[self.raise_n[:, k]]
            out += self.coef_raise_n[:, k, None, None] * (q @ up - up @ q)
            down = padded[self.lower_m[:, k]]
            out += self.coef_lower_m[:, k, None, None] * (q @ down)
            down = padded[self.lower_n[:, k]]
            out += self.coef_lower_n[:, k, None, None] * (down @ q)
        return out


def rhs(state: HierarchyState, system: SystemSpec, modes: ModeSet) -> ComplexArray:
    """Time derivative of every auxiliary block.

    For label (m, n) the derivative is

        -i[H, rho] - sum_k (m_k z_k + n_k z_k*) rho
        - sum_k sqrt((m_k+1) d_k) [q, rho_(m+e_k)] + sqrt((n_k+1) d_k*) [q, rho_(n+e_k)]
        + sqrt(m_k d_k) q rho_(m-e_k) + sqrt(n_k d_k*) rho_(n-e_k) q

    with sqrt taken on the principal branch and truncated neighbours read as zero.
    """
    return FpHeomGenerator(state.index_set, system, modes)(state.time, state.blocks)


def default_step(system: SystemSpec, modes: ModeSet) -> float:
    """min(0.01, 0.1 / max(|z_k|, ||H||))."""
    scale = max([abs(m.z) for m in modes] + [system.hamiltonian_norm])
    return MAX_DEFAULT_STEP if scale == 0 else min(MAX_DEFAULT_STEP, 0.1 / scale)


class DensityRecorder:
    """Collects observables and diagnostics of the reduced density matrix at sample times.

    With residue_limit set, to_record raises ImaginaryResidueError when any
    Hermitian observable has |Im <O>| above the limit. The largest residue is
    always reported as max_imaginary_residue in the metadata.
    """

    def __init__(self, observables: Optional[Mapping[str, ComplexArray]] = None,
                 residue_limit: Optional[float] = None):
        self.observables = {k: np.asarray(v, dtype=np.complex128)
                            for k, v in (observables or {}).items()}
        self.residue_limit = residue_limit
        self.times: List[float] = []
        self.states: List[ComplexArray] = []
        self.pairing: List[float] = []

    def record(self, t: float, rho: ComplexArray, pairing: Optional[float] = None) -> None:
        self.times.append(t)
        self.states.append(np.array(rho, dtype=np.complex128, copy=True))
        if pairing is not None:
            self.pairing.append(pairing)

    def to_record(self, metadata: Optional[Dict[str, object]] = None) -> TrajectoryRecord:
        states = np.array(self.states)
        observables = {
            name: np.einsum("ij,tji->t", op, states) for name, op in self.observables.items()
        }
        traces = np.trace(states, axis1=1, axis2=2)
        hermiticity = np.max(np.abs(states - states.conj().transpose(0, 2, 1)), axis=(1, 2))
        hermitian = 0.5 * (states + states.conj().transpose(0, 2, 1))
        min_eigenvalue = np.linalg.eigvalsh(hermitian)[:, 0]
        diagnostics = {
            "trace_re": traces.real,
            "trace_im": traces.imag,
            "hermiticity": hermiticity,
            "min_eigenvalue": min_eigenvalue,
        }
        if self.pairing:
            diagnostics["pairing"] = np.array(self.pairing)
        info = dict(metadata or {})
        residue = imaginary_residue(self.observables, observables)
        info["max_imaginary_residue"] = residue
        if self.residue_limit is not None and residue > self.residue_limit:
            raise ImaginaryResidueError(
                f"Hermitian observable has imaginary expectation {residue:.3e}, "
                f"above {self.residue_limit:.1e}"
            )
        return TrajectoryRecord(
            times=np.array(self.times),
            observables=observables,
            diagnostics=diagnostics,
            metadata=info,
            final_density=states[-1].copy() if len(states) else None,
        )


def imaginary_residue(operators: Mapping[str, ComplexArray], values: Mapping[str, ComplexArray]) -> float:
    """Largest |Im <O>| over the Hermitian operators; 0 when there are none."""
    residues = [
        float(np.max(np.abs(np.imag(values[name]))))
        for name, op in operators.items()
        if np.size(values[name]) and np.allclose(op, op.conj().T, rtol=0.0, atol=1e-12)
    ]
    return max(residues, default=0.0)


def propagate(
    state: HierarchyState,
    system: SystemSpec,
    modes: ModeSet,
    t_final: float,
    integrator: IntegratorConfig,
    sample_interval: Optional[float] = None,
    observables: Optional[Mapping[str, ComplexArray]] = None,
) -> Tuple[TrajectoryRecord, HierarchyState]:
    """Integrate the FP-HEOM from state.time to t_final.

    Args:
        state: Starting hierarchy state.
        system: System Hamiltonian and coupling.
        modes: Bath modes; K must match the index set.
        t_final: End time.
        integrator: Integrator settings; a missing step selects default_step.
        sample_interval: Spacing of recorded samples; defaults to the step.
        observables: Named operators whose expectations are recorded.

    Returns:
        Tuple[TrajectoryRecord, HierarchyState]: Samples and the final state.
    """
    generator = FpHeomGenerator(state.index_set, system, modes)
    if integrator.step is None:
        integrator = integrator.with_step(default_step(system, modes))
    interval = sample_interval or integrator.step
    assert interval is not None
    times = uniform_times(t_final, interval, state.time)
    recorder = DensityRecorder(observables, IMAGINARY_RESIDUE_LIMIT)
    swap = state.index_set.swap_index

    def observe(t: float, blocks: ComplexArray) -> None:
        pairing = float(np.max(np.abs(blocks - blocks[swap].conj().transpose(0, 2, 1))))
        recorder.record(t, blocks[0], pairing)

    logger.info(
        f"FP-HEOM: {len(state.index_set)} blocks of size {system.dim}, "
        f"{integrator.method} step {integrator.step:.3g}, t_final={t_final:g}"
    )
    final = integrate(generator, state.blocks, times, integrator, observe)
    record = recorder.to_record({
        "method": "fp-heom",
        "tier": state.index_set.truncation.tier,
        "caps": list(state.index_set.mode_caps),
        "indices": len(state.index_set),
        "integrator": integrator.method,
        "step": integrator.step,
    })
    return record, HierarchyState(state.index_set, final, float(times[-1]))


def tier_convergence(
    system: SystemSpec,
    modes: ModeSet,
    tiers: Sequence[int],
    t_final: float,
    integrator: IntegratorConfig,
    observable: ComplexArray,
    sample_interval: Optional[float] = None,
    tolerance: float = 1e-4,
    caps: Optional[Tuple[int, ...]] = None,
) -> pd.DataFrame:
    """Max deviation of an observable between consecutive hierarchy tiers.

    Returns:
        pd.DataFrame: Columns tier, next_tier, max_deviation and converged.
    """
    ordered = sorted(set(int(t) for t in tiers))
    if len(ordered) < 2:
        raise HierarchyError("tier convergence needs at least two tiers")
    values: Dict[int, ComplexArray] = {}
    for tier in ordered:
        index_set = build_index_set(modes.K, Truncation(tier, caps))
        record, _ = propagate(initial_state(system, index_set), system, modes, t_final,
                              integrator, sample_interval, {"observable": observable})
        values[tier] = record.observable("observable")
    rows = []
    for low, high in zip(ordered[:-1], ordered[1:]):
        deviation = float(np.max(np.abs(values[high] - values[low])))
        rows.append({"tier": low, "next_tier": high, "max_deviation": deviation,
                     "converged": deviation <= tolerance})
    return pd.DataFrame(rows)


def pure_dephasing_coherence(modes: ModeSet, times: Sequence[float],
                             initial_coherence: complex) -> RealArray:
    """|rho_01(t)| for H proportional to q = sigma_z, known in closed form.

    The coherence decays as exp(-4 Re Phi(t)) with
    Phi(t) = sum_k d_k / z_k * (t - (1 - exp(-z_k t)) / z_k).
    """
    grid = np.asarray(times, dtype=np.float64)
    d, z = modes.weights, modes.rates
    phi = (d / z)[None, :] * (grid[:, None] - (1.0 - np.exp(-np.outer(grid, z))) / z[None, :])
    return abs(initial_coherence) * np.exp(-4.0 * phi.sum(axis=1).real)


# --- dense reference generator --------------------------------------------------

def lowering(cap: int) -> ComplexArray:
    """Truncated annihilation operator on occupations 0..cap."""
    return np.diag(np.sqrt(np.arange(1, cap + 1, dtype=np.float64)), k=1).astype(np.complex128)


def embed(operators: Mapping[int, ComplexArray], dims: Sequence[int]) -> ComplexArray:
    """Kronecker product placing each operator on its site and identities elsewhere."""
    result = np.ones((1, 1), dtype=np.complex128)
    for site, dim in enumerate(dims):
        result = np.kron(result, operators.get(site, np.eye(dim, dtype=np.complex128)))
    return result


@dataclass
class GeneratorMatrix:
    """Dense linear generator together with the basis it acts on.

    Attributes:
        matrix: Square generator.
        dims: Site dimensions of the product basis, slowest index first.
        basis: Short description of the site order.
    """

    matrix: ComplexArray
    dims: Tuple[int, ...]
    basis: str = ""
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])


def _check_dense(size: int, limit: int) -> None:
    if size > limit:
        raise HierarchyError(f"dense generator of dimension {size} exceeds the limit of {limit}")


def dense_generator(system: SystemSpec, modes: ModeSet, caps: Sequence[int],
                    limit: int = DEFAULT_DENSE_LIMIT) -> GeneratorMatrix:
    """Assemble the FP-HEOM generator on the full occupation box.

    The basis is the product (i, m_1, n_1, ..., m_K, n_K, j) of the density
    row index, the occupations and the density column index. Operators acting
    from the right on j appear transposed.
    """
    caps = tuple(int(c) for c in caps)
    if len(caps) != modes.K:
        raise HierarchyError(f"expected {modes.K} caps, got {len(caps)}")
    n = system.dim
    dims = (n,) + tuple(c + 1 for c in caps for _ in range(2)) + (n,)
    _check_dense(int(np.prod(dims)), limit)
    last = len(dims) - 1
    h, q = system.hamiltonian, system.coupling

    q_left = embed({0: q}, dims)
    q_right = embed({last: q.T}, dims)
    generator = -1j * (embed({0: h}, dims) - embed({last: h.T}, dims))
    for k, mode in enumerate(modes):
        a_site, b_site = 1 + 2 * k, 2 + 2 * k
        low = lowering(caps[k])
        a = embed({a_site: low}, dims)
        b = embed({b_site: low}, dims)
        a_dag = embed({a_site: low.conj().T}, dims)
        b_dag = embed({b_site: low.conj().T}, dims)
        root = mode.sqrt_d
        generator += -mode.z * (a_dag @ a) - np.conj(mode.z) * (b_dag @ b)
        generator += root * (q_left @ a_dag) + np.conj(root) * (b_dag @ q_right)
        generator += -root * (q_left @ a - a @ q_right)
        generator += np.conj(root) * (q_left @ b - b @ q_right)
    return GeneratorMatrix(generator, dims, "i, m1, n1, ..., mK, nK, j")


def hierarchy_generator(system: SystemSpec, modes: ModeSet, index_set: HierarchyIndexSet,
                        limit: int = DEFAULT_DENSE_LIMIT) -> GeneratorMatrix:
    """Dense generator restricted to an index set, in the (label, i, j) block layout.

    Restricting the occupation box to the labels of index_set reproduces the
    hard tier closure, so the result acts on state.blocks.ravel() exactly as rhs.
    """
    box = dense_generator(system, modes, index_set.mode_caps, limit=max(limit, 1))
    n = system.dim
    boson_dims = box.dims[1:-1]
    sites = len(box.dims)
    order = list(range(1, sites - 1)) + [0, sites - 1]
    tensor = box.matrix.reshape(box.dims + box.dims)
    tensor = tensor.transpose(order + [p + sites for p in order])
    bosons = int(np.prod(boson_dims)) if boson_dims else 1
    flat = tensor.reshape(bosons * n * n, bosons * n * n)
    if boson_dims:
        positions = np.ravel_multi_index(index_set.occupations.T, boson_dims)
    else:
        positions = np.zeros(1, dtype=np.int64)
    selection = (positions[:, None] * n * n + np.arange(n * n)[None, :]).ravel()
    matrix = flat[np.ix_(selection, selection)]
    return GeneratorMatrix(matrix, (len(index_set), n, n), "label, i, j")
