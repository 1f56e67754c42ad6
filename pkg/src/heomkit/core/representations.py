"""Alternative representations of the FP-HEOM and their perturbative limits.

All generators here act on vectorized matrices in row-major order, where
vec(A X B) = kron(A, B.T) vec(X).
"""
import logging
import math
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg

from heomkit.core.errors import NumericalError
from heomkit.core.fpheom import (
    IMAGINARY_RESIDUE_LIMIT,
    DensityRecorder,
    GeneratorMatrix,
    OccupationSet,
    Truncation,
    build_index_set,
    default_step,
    embed,
    initial_state,
    lowering,
    propagate,
)
from heomkit.core.integrate import IntegratorConfig, integrate, uniform_times
from heomkit.core.modefit import reconstruct_C
from heomkit.core.types import ComplexArray
from heomkit.models.modes import ModeSet
from heomkit.models.system import SystemSpec
from heomkit.models.trajectory import TrajectoryRecord

logger = logging.getLogger(__name__)

# Relative size of Im z_k above which a mode counts as oscillating
REAL_RATE_TOLERANCE = 1e-12
DEFAULT_HISTORY_BUDGET = 512 * 1024 ** 2
DENSE_LIMIT = 4096
ASSEMBLIES = ("density", "operator")
REDFIELD_VARIANTS = ("tier1", "history")


class RepresentationError(NumericalError):
    """Raised when a mode set cannot be cast into the requested representation."""
    pass


def _superop(left: ComplexArray, right: ComplexArray) -> ComplexArray:
    """Matrix of X -> left X right on row-major vectorized X."""
    return np.kron(left, right.T)


def _boson_dims(caps: Sequence[int]) -> Tuple[int, ...]:
    return tuple(int(c) + 1 for c in caps)


def _check_caps(modes: ModeSet, caps: Sequence[int]) -> Tuple[int, ...]:
    caps = tuple(int(c) for c in caps)
    if len(caps) != modes.K:
        raise RepresentationError(f"expected {modes.K} boson caps, got {len(caps)}")
    if any(c < 1 for c in caps):
        raise RepresentationError(f"boson caps must be at least 1, got {caps}")
    return caps


def _check_size(dim: int, limit: int = DENSE_LIMIT) -> None:
    if dim > limit:
        raise RepresentationError(f"superoperator dimension {dim} exceeds the limit of {limit}")


def build_lindblad_generator(system: SystemSpec, modes: ModeSet,
                             caps: Sequence[int]) -> GeneratorMatrix:
    """Almost-Lindblad generator on system x K bosons with effective Hamiltonian.

    With d_k = d' + i d'' and d' > 0 the generator reads

        -i[H_eff, rho] + sum_k d''/sqrt(d') ([a_k, rho] q - q [a_k^dagger, rho])
        + sum_k 2 gamma_k (a_k rho a_k^dagger - {a_k^dagger a_k, rho} / 2),
        H_eff = H_s + sum_k omega_k a_k^dagger a_k - sqrt(d') q (a_k^dagger + a_k).

    Raises:
        RepresentationError: If any mode has d' <= 0; use FP-HEOM for those.
    """
    caps = _check_caps(modes, caps)
    bad = [k for k, m in enumerate(modes) if not m.d.real > 0]
    if bad:
        raise RepresentationError(
            f"modes {bad} have Re d <= 0 and have no Lindblad form; propagate them with FP-HEOM"
        )
    dims = (system.dim,) + _boson_dims(caps)
    size = int(np.prod(dims))
    _check_size(size * size)
    identity = np.eye(size, dtype=np.complex128)
    q = embed({0: system.coupling}, dims)
    h_eff = embed({0: system.hamiltonian}, dims)
    jumps = []
    for k, mode in enumerate(modes):
        a = embed({k + 1: lowering(caps[k])}, dims)
        a_dag = a.conj().T
        h_eff = h_eff + mode.omega * (a_dag @ a) - math.sqrt(mode.d.real) * (q @ (a_dag + a))
        jumps.append((mode, a, a_dag))

    generator = -1j * (_superop(h_eff, identity) - _superop(identity, h_eff))
    for mode, a, a_dag in jumps:
        mixing = mode.d.imag / math.sqrt(mode.d.real)
        generator += mixing * (
            _superop(a, q) - _superop(identity, a @ q)
            - _superop(q @ a_dag, identity) + _superop(q, a_dag)
        )
        number = a_dag @ a
        generator += 2.0 * mode.gamma * (
            _superop(a, a_dag) - 0.5 * _superop(number, identity) - 0.5 * _superop(identity, number)
        )
    return GeneratorMatrix(generator, dims, "row-major vec of system x bosons density",
                           {"assembly": "lindblad", "caps": list(caps)})


def build_alt_lindblad_generator(system: SystemSpec, modes: ModeSet, caps: Sequence[int],
                                 assembly: str = "density") -> GeneratorMatrix:
    """Lindblad-like generator with effective damping gamma cos(theta) + omega sin(theta).

    With d_k = R exp(i theta) two assemblies are available:

    * "density": the master equation on system x K bosons,
      -i(H_eff rho - rho H_eff^dagger) + 2 gamma_eff c rho c^dagger - gamma {c^dagger c, rho},
      H_eff = H_s + omega c^dagger c - sqrt(d) q (c^dagger + c).
      Its boson operators are independent, so for theta != 0 it is not an exact
      rewrite of the hierarchy and its deviation should be measured.
    * "operator": the affinely transformed operators c, h and their partners
      expressed through a, b on the Liouville-Fock box (i, m1, n1, ..., j),
      which reproduces the FP-HEOM exactly up to the occupation caps.

    Raises:
        RepresentationError: If a mode has d = 0 or the assembly is unknown.
    """
    caps = _check_caps(modes, caps)
    if assembly not in ASSEMBLIES:
        raise RepresentationError(f"Unknown assembly {assembly!r}; expected one of {ASSEMBLIES}")
    if any(m.d == 0 for m in modes):
        raise RepresentationError("modes with d = 0 carry no phase and cannot be transformed")
    if assembly == "density":
        return _alt_density(system, modes, caps)
    return _alt_operator(system, modes, caps)


def effective_damping(mode_d: complex, mode_z: complex) -> float:
    """gamma cos(theta) + omega sin(theta) = Re(z exp(-i theta))."""
    theta = np.angle(mode_d)
    return float((mode_z * np.exp(-1j * theta)).real)


def _alt_density(system: SystemSpec, modes: ModeSet, caps: Tuple[int, ...]) -> GeneratorMatrix:
    dims = (system.dim,) + _boson_dims(caps)
    size = int(np.prod(dims))
    _check_size(size * size)
    identity = np.eye(size, dtype=np.complex128)
    q = embed({0: system.coupling}, dims)
    h_eff = embed({0: system.hamiltonian}, dims)
    jumps = []
    for k, mode in enumerate(modes):
        c = embed({k + 1: lowering(caps[k])}, dims)
        c_dag = c.conj().T
        h_eff = h_eff + mode.omega * (c_dag @ c) - mode.sqrt_d * (q @ (c_dag + c))
        jumps.append((effective_damping(mode.d, mode.z), mode.gamma, c, c_dag))

    generator = -1j * (_superop(h_eff, identity) - _superop(identity, h_eff.conj().T))
    for gamma_eff, gamma, c, c_dag in jumps:
        number = c_dag @ c
        generator += 2.0 * gamma_eff * _superop(c, c_dag)
        generator -= gamma * (_superop(number, identity) + _superop(identity, number))
    return GeneratorMatrix(generator, dims, "row-major vec of system x bosons density",
                           {"assembly": "density", "caps": list(caps)})


def _alt_operator(system: SystemSpec, modes: ModeSet, caps: Tuple[int, ...]) -> GeneratorMatrix:
    n = system.dim
    dims = (n,) + tuple(c + 1 for c in caps for _ in range(2)) + (n,)
    _check_size(int(np.prod(dims)))
    last = len(dims) - 1
    h, q = system.hamiltonian, system.coupling
    q_left = embed({0: q}, dims)
    q_right = embed({last: q.T}, dims)
    generator = -1j * (embed({0: h}, dims) - embed({last: h.T}, dims))
    for k, mode in enumerate(modes):
        low = lowering(caps[k])
        a = embed({1 + 2 * k: low}, dims)
        b = embed({2 + 2 * k: low}, dims)
        a_dag, b_dag = a.conj().T, b.conj().T
        phase = np.exp(1j * mode.phase)
        c = 1j * a
        h_op = -1j * b
        c_dag = -1j * a_dag - 1j * np.conj(phase) * b
        h_dag = 1j * b_dag + 1j * phase * a
        generator += (
            2.0 * effective_damping(mode.d, mode.z) * (c @ h_op)
            - mode.z * (c_dag @ c)
            - np.conj(mode.z) * (h_dag @ h_op)
        )
        generator += 1j * mode.sqrt_d * (q_left @ (c + c_dag))
        generator -= 1j * np.conj(mode.sqrt_d) * ((h_op + h_dag) @ q_right)
    return GeneratorMatrix(generator, dims, "i, m1, n1, ..., mK, nK, j",
                           {"assembly": "operator", "caps": list(caps)})


def lindblad_initial_state(system: SystemSpec, caps: Sequence[int]) -> ComplexArray:
    """rho(0) times the boson vacuum, vectorized row-major."""
    dims = _boson_dims(caps)
    vacuum = np.zeros((int(np.prod(dims)),) * 2, dtype=np.complex128)
    vacuum[0, 0] = 1.0
    return np.kron(system.initial_state, vacuum).ravel()


def lindblad_readout(vector: ComplexArray, system_dim: int) -> ComplexArray:
    """Partial trace over the bosons of a vectorized extended density."""
    size = int(round(math.sqrt(vector.size)))
    bosons = size // system_dim
    rho = vector.reshape(system_dim, bosons, system_dim, bosons)
    return np.einsum("ibjb->ij", rho)


def combined_trace(vector: ComplexArray) -> complex:
    """Trace over system and bosons of a vectorized extended density."""
    size = int(round(math.sqrt(vector.size)))
    return complex(np.trace(vector.reshape(size, size)))


def box_initial_state(system: SystemSpec, dims: Sequence[int]) -> ComplexArray:
    """rho(0) in the all-vacuum slot of a Liouville-Fock box (i, occupations..., j)."""
    n = system.dim
    tensor = np.zeros(tuple(dims), dtype=np.complex128)
    vacuum = (slice(None),) + (0,) * (len(dims) - 2) + (slice(None),)
    tensor[vacuum] = system.initial_state
    return tensor.ravel()


def box_readout(vector: ComplexArray, dims: Sequence[int]) -> ComplexArray:
    """Vacuum projection of a Liouville-Fock box vector."""
    tensor = vector.reshape(tuple(dims))
    vacuum = (slice(None),) + (0,) * (len(dims) - 2) + (slice(None),)
    return np.array(tensor[vacuum])


def propagate_generator(
    generator: GeneratorMatrix,
    initial: ComplexArray,
    times: Sequence[float],
    readout: Callable[[ComplexArray], ComplexArray],
    observables: Optional[Mapping[str, ComplexArray]] = None,
    metadata: Optional[Dict[str, object]] = None,
    residue_limit: Optional[float] = None,
) -> TrajectoryRecord:
    """Exact propagation by matrix exponentials on a sample grid.

    A uniform grid reuses one propagator; combined_trace of the state vector
    is tracked in the metadata when the generator acts on a density.
    residue_limit is passed to the DensityRecorder.
    """
    grid = np.asarray(times, dtype=np.float64)
    steps = np.diff(grid)
    uniform = len(steps) > 0 and np.allclose(steps, steps[0], rtol=1e-12, atol=0.0)
    propagator = linalg.expm(generator.matrix * steps[0]) if uniform else None
    recorder = DensityRecorder(observables, residue_limit)
    vector = np.array(initial, dtype=np.complex128)
    recorder.record(float(grid[0]), readout(vector))
    traces: List[complex] = [combined_trace(vector)] if generator.basis.startswith("row-major") else []
    for i, dt in enumerate(steps):
        step = propagator if propagator is not None else linalg.expm(generator.matrix * dt)
        vector = step @ vector
        if not np.all(np.isfinite(vector)):
            raise RepresentationError(f"generator propagation became non-finite at t={grid[i + 1]:.6g}")
        recorder.record(float(grid[i + 1]), readout(vector))
        if traces:
            traces.append(combined_trace(vector))
    info = dict(metadata or {})
    info.update(generator.metadata)
    if traces:
        info["max_combined_trace_deviation"] = float(np.max(np.abs(np.array(traces) - 1.0)))
    return recorder.to_record(info)


def lindblad_propagate(system: SystemSpec, modes: ModeSet, caps: Sequence[int], t_final: float,
                       sample_interval: float,
                       observables: Optional[Mapping[str, ComplexArray]] = None) -> TrajectoryRecord:
    """Propagate the almost-Lindblad form and read out Tr_B."""
    generator = build_lindblad_generator(system, modes, caps)
    logger.info(f"Lindblad representation: superoperator dimension {generator.size}")
    return propagate_generator(
        generator,
        lindblad_initial_state(system, caps),
        uniform_times(t_final, sample_interval),
        lambda v: lindblad_readout(v, system.dim),
        observables,
        {"method": "lindblad"},
        IMAGINARY_RESIDUE_LIMIT,
    )


def alt_lindblad_propagate(system: SystemSpec, modes: ModeSet, caps: Sequence[int],
                           t_final: float, sample_interval: float,
                           observables: Optional[Mapping[str, ComplexArray]] = None,
                           assembly: str = "density") -> TrajectoryRecord:
    """Propagate the effective-damping form in the chosen assembly."""
    generator = build_alt_lindblad_generator(system, modes, caps, assembly)
    logger.info(f"Alternative Lindblad ({assembly}): dimension {generator.size}")
    times = uniform_times(t_final, sample_interval)
    if assembly == "density":
        return propagate_generator(generator, lindblad_initial_state(system, caps), times,
                                   lambda v: lindblad_readout(v, system.dim), observables,
                                   {"method": "alt-lindblad"})
    return propagate_generator(generator, box_initial_state(system, generator.dims), times,
                               lambda v: box_readout(v, generator.dims), observables,
                               {"method": "alt-lindblad"})


class ConventionalHeomGenerator:
    """Right-hand side of the single-index HEOM for modes with real rates."""

    def __init__(self, index_set: OccupationSet, system: SystemSpec, modes: ModeSet):
        self.index_set = index_set
        self.hamiltonian = system.hamiltonian
        self.coupling = system.coupling
        self.weights = modes.weights
        occupations = index_set.occupations.astype(np.float64)
        self.decay = occupations @ modes.rates.real
        self.coef_raise = np.sqrt(occupations + 1.0)
        self.coef_lower = np.sqrt(occupations)

    def __call__(self, t: float, blocks: ComplexArray) -> ComplexArray:
        h, q = self.hamiltonian, self.coupling
        padded = np.concatenate([blocks, np.zeros_like(blocks[:1])], axis=0)
        out = -1j * (h @ blocks - blocks @ h) - self.decay[:, None, None] * blocks
        for k, d in enumerate(self.weights):
            up = padded[self.index_set.raised[:, k]]
            out += self.coef_raise[:, k, None, None] * (q @ up - up @ q)
            down = padded[self.index_set.lowered[:, k]]
            out -= self.coef_lower[:, k, None, None] * (d * (q @ down) - np.conj(d) * (down @ q))
        return out


def conventional_heom_propagate(
    system: SystemSpec,
    modes: ModeSet,
    truncation: Truncation,
    t_final: float,
    integrator: IntegratorConfig,
    sample_interval: Optional[float] = None,
    observables: Optional[Mapping[str, ComplexArray]] = None,
) -> TrajectoryRecord:
    """Single-index HEOM, valid only when every z_k is real.

    Each label n carries one occupation per mode and obeys

        d rho_n/dt = -i[H, rho_n] - sum_k n_k gamma_k rho_n
                     + sum_k sqrt(n_k + 1) [q, rho_(n+e_k)]
                     - sum_k sqrt(n_k) (d_k q rho_(n-e_k) - d_k* rho_(n-e_k) q).

    Raises:
        RepresentationError: If any mode oscillates (Im z_k != 0).
    """
    oscillating = [k for k, m in enumerate(modes)
                   if abs(m.omega) > REAL_RATE_TOLERANCE * max(1.0, abs(m.z))]
    if oscillating:
        raise RepresentationError(
            f"conventional HEOM needs real rates; modes {oscillating} oscillate"
        )
    index_set = OccupationSet(truncation.caps_for(modes.K), truncation.tier)
    generator = ConventionalHeomGenerator(index_set, system, modes)
    if integrator.step is None:
        integrator = integrator.with_step(default_step(system, modes))
    interval = sample_interval or integrator.step
    assert interval is not None
    times = uniform_times(t_final, interval)
    blocks = np.zeros((len(index_set), system.dim, system.dim), dtype=np.complex128)
    blocks[0] = system.initial_state
    recorder = DensityRecorder(observables, IMAGINARY_RESIDUE_LIMIT)
    integrate(generator, blocks, times, integrator, lambda t, y: recorder.record(t, y[0]))
    logger.info(f"Conventional HEOM: {len(index_set)} blocks, tier {truncation.tier}")
    return recorder.to_record({"method": "conventional-heom", "tier": truncation.tier,
                               "indices": len(index_set), "step": integrator.step})


def _interaction_picture(system: SystemSpec, times: np.ndarray) -> Tuple[ComplexArray, ComplexArray]:
    """U(t_j) = exp(-i H t_j) and q(t_j) = U^dagger q U on a grid."""
    energies, vectors = linalg.eigh(system.hamiltonian)
    phases = np.exp(-1j * np.outer(times, energies))
    unitaries = np.einsum("ik,tk,jk->tij", vectors, phases, vectors.conj())
    coupling = np.einsum("tki,kl,tlj->tij", unitaries.conj(), system.coupling, unitaries)
    return unitaries, coupling


def _history_propagate(
    system: SystemSpec,
    modes: ModeSet,
    t_final: float,
    step: float,
    sample_times: np.ndarray,
    observables: Optional[Mapping[str, ComplexArray]],
    memory_budget: int,
    fourth_order: bool,
) -> TrajectoryRecord:
    count = max(1, int(math.ceil(t_final / step - 1e-9)))
    h = t_final / count
    n = system.dim
    needed = (count + 1) * n * n * 16 * (3 if fourth_order else 1)
    if needed > memory_budget:
        raise RepresentationError(
            f"history buffer needs {needed} bytes, above the budget of {memory_budget}"
        )
    grid = np.linspace(0.0, t_final, count + 1)
    unitaries, q_tilde = _interaction_picture(system, grid)
    corr = np.asarray(reconstruct_C(modes, grid), dtype=np.complex128)

    states = np.empty((count + 1, n, n), dtype=np.complex128)
    states[0] = system.initial_state
    q_rho = np.empty_like(states)
    rho_q = np.empty_like(states)

    def trapezoid(j: int) -> np.ndarray:
        weights = np.full(j + 1, h)
        weights[0] = weights[-1] = 0.5 * h
        if j == 0:
            weights[:] = 0.0
        return weights * corr[j::-1]

    def derivative(j: int, rho: ComplexArray) -> ComplexArray:
        w = trapezoid(j)
        if fourth_order:
            q_rho[j] = q_tilde[j] @ rho
            rho_q[j] = rho @ q_tilde[j]
            kernel = np.tensordot(w, q_rho[: j + 1], axes=1) - np.tensordot(w.conj(), rho_q[: j + 1], axes=1)
            return -(q_tilde[j] @ kernel - kernel @ q_tilde[j])
        memory = np.tensordot(w, q_tilde[: j + 1], axes=1)
        kernel = memory @ rho - rho @ memory.conj().T
        return -(q_tilde[j] @ kernel - kernel @ q_tilde[j])

    for j in range(count):
        f_now = derivative(j, states[j])
        predictor = states[j] + h * f_now
        f_next = derivative(j + 1, predictor)
        states[j + 1] = states[j] + 0.5 * h * (f_now + f_next)
        if fourth_order:
            q_rho[j + 1] = q_tilde[j + 1] @ states[j + 1]
            rho_q[j + 1] = states[j + 1] @ q_tilde[j + 1]
        if not np.all(np.isfinite(states[j + 1])):
            raise RepresentationError(f"history propagation became non-finite at t={grid[j + 1]:.6g}")

    recorder = DensityRecorder(observables, IMAGINARY_RESIDUE_LIMIT)
    positions = np.clip(np.rint(sample_times / h).astype(np.int64), 0, count)
    for t, j in zip(sample_times, positions):
        rho = unitaries[j] @ states[j] @ unitaries[j].conj().T
        recorder.record(float(t), rho)
    return recorder.to_record({"step": h})


def redfield_plus_propagate(
    system: SystemSpec,
    modes: ModeSet,
    t_final: float,
    variant: str = "tier1",
    integrator: Optional[IntegratorConfig] = None,
    sample_interval: Optional[float] = None,
    observables: Optional[Mapping[str, ComplexArray]] = None,
    memory_budget: int = DEFAULT_HISTORY_BUDGET,
) -> TrajectoryRecord:
    """Weak-coupling dynamics correct to fourth order in the coupling.

    "tier1" truncates the FP-HEOM at L = 1 with unit caps. "history" evolves
    the interaction-picture density with the non-Markovian memory
    -[q(t), integral_0^t (C(t - s) q(s) rho(s) - C*(t - s) rho(s) q(s)) ds]
    using a Heun predictor-corrector and trapezoidal history.

    Raises:
        RepresentationError: For unknown variants or an oversized history buffer.
    """
    if variant not in REDFIELD_VARIANTS:
        raise RepresentationError(f"Unknown Redfield+ variant {variant!r}")
    integrator = integrator or IntegratorConfig()
    if integrator.step is None:
        integrator = integrator.with_step(default_step(system, modes))
    interval = sample_interval or integrator.step
    assert interval is not None and integrator.step is not None
    if variant == "tier1":
        index_set = build_index_set(modes.K, Truncation(1, (1,)))
        record, _ = propagate(initial_state(system, index_set), system, modes, t_final,
                              integrator, interval, observables)
        record.metadata["method"] = "redfield-plus"
        record.metadata["variant"] = variant
        return record
    record = _history_propagate(system, modes, t_final, integrator.step,
                                uniform_times(t_final, interval), observables,
                                memory_budget, fourth_order=True)
    record.metadata.update({"method": "redfield-plus", "variant": variant})
    return record


def redfield_propagate(
    system: SystemSpec,
    modes: ModeSet,
    t_final: float,
    integrator: Optional[IntegratorConfig] = None,
    sample_interval: Optional[float] = None,
    observables: Optional[Mapping[str, ComplexArray]] = None,
    memory_budget: int = DEFAULT_HISTORY_BUDGET,
) -> TrajectoryRecord:
    """Time-nonlocal second-order Redfield dynamics, the O(lambda^2) baseline.

    The memory kernel acts on the current state only:
    -[q(t), Lambda(t) rho(t) - rho(t) Lambda(t)^dagger] with
    Lambda(t) = integral_0^t C(t - s) q(s) ds.
    """
    integrator = integrator or IntegratorConfig()
    if integrator.step is None:
        integrator = integrator.with_step(default_step(system, modes))
    interval = sample_interval or integrator.step
    assert interval is not None and integrator.step is not None
    record = _history_propagate(system, modes, t_final, integrator.step,
                                uniform_times(t_final, interval), observables,
                                memory_budget, fourth_order=False)
    record.metadata["method"] = "redfield"
    return record


def compare_records(records: Mapping[str, TrajectoryRecord],
                    tolerance: float = 1e-4) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Pairwise observable deviations between records on a shared time grid.

    Returns:
        Tuple[pd.DataFrame, pd.DataFrame]: A summary with columns first, second,
        observable, max_deviation and flagged, and a time-resolved table with
        one column per pair and observable.

    Raises:
        RepresentationError: If fewer than two records are given or their time
            grids or observables differ.
    """
    names = list(records)
    if len(names) < 2:
        raise RepresentationError("comparison needs at least two records")
    reference = records[names[0]]
    for name in names[1:]:
        times = records[name].times
        if len(times) != len(reference.times) or not np.allclose(times, reference.times,
                                                                 rtol=1e-12, atol=1e-12):
            raise RepresentationError(f"record {name!r} uses a different time grid")
    shared = set(reference.observables)
    for name in names[1:]:
        shared &= set(records[name].observables)
    if not shared:
        raise RepresentationError("records share no observables")

    summary = []
    timeline: Dict[str, np.ndarray] = {"t": reference.times}
    for i, first in enumerate(names):
        for second in names[i + 1:]:
            for observable in sorted(shared):
                delta = np.abs(records[first].observable(observable)
                               - records[second].observable(observable))
                worst = float(np.max(delta))
                summary.append({"first": first, "second": second, "observable": observable,
                                "max_deviation": worst, "flagged": worst > tolerance})
                timeline[f"{first}-{second}:{observable}"] = delta
    return pd.DataFrame(summary), pd.DataFrame(timeline)
