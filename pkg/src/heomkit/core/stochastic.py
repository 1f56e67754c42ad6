"""Stochastic unravelings: SLN noise pairs and HOPS trajectories.

Colored Gaussian noise is drawn by circulant embedding: the covariance on a
uniform grid is embedded in a circulant of length 2n, whose FFT spectrum
filters complex white noise. Every trajectory draws from its own Philox
stream keyed by (master seed, trajectory index), so ensembles reproduce
regardless of chunking or thread count.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from heomkit.core.errors import NumericalError
from heomkit.core.fpheom import OccupationSet, Truncation
from heomkit.core.integrate import IntegratorConfig, integrate, uniform_times
from heomkit.core.modefit import reconstruct_C
from heomkit.core.types import ComplexArray, RealArray
from heomkit.models.modes import ModeSet
from heomkit.models.system import SystemSpec
from heomkit.models.trajectory import CSV_FLOAT_FORMAT, EnsembleResult, TrajectoryRecord

logger = logging.getLogger(__name__)

DEFAULT_CLIP_TOLERANCE = 1e-6
DEFAULT_FAILURE_FRACTION = 0.01
DEFAULT_CHUNK = 1000
DEFAULT_NORM_BOUND = 100.0


class NoiseGenerationError(NumericalError):
    """Raised when a noise covariance cannot be embedded on the requested grid."""
    pass


class EnsembleError(NumericalError):
    """Raised when too many trajectories of an ensemble become non-finite."""
    pass


def trajectory_generator(master_seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for one trajectory."""
    sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(sequence))


def _complex_white(rng: np.random.Generator, size: int) -> ComplexArray:
    """Circular complex normal samples with E|w|^2 = 1."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)


def _grid_step(times: np.ndarray) -> float:
    if times.ndim != 1 or len(times) < 2:
        raise NoiseGenerationError("noise grid needs at least two uniformly spaced times")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0) or steps[0] <= 0:
        raise NoiseGenerationError("noise grid must be uniformly spaced and increasing")
    return float(steps[0])


def _clip_spectrum(spectrum: RealArray, tolerance: float, label: str) -> Tuple[RealArray, float]:
    """Clip negative eigenvalues of a circulant and report the clipped mass."""
    total = float(np.sum(np.abs(spectrum)))
    negative = spectrum < 0
    mass = float(np.sum(-spectrum[negative]) / total) if total > 0 else 0.0
    if mass > tolerance:
        logger.warning(
            f"{label} covariance is indefinite on this grid; clipped {mass:.3e} of the "
            f"spectral mass (tolerance {tolerance:.1e})"
        )
    return np.where(negative, 0.0, spectrum), mass


@dataclass
class NoiseRealization:
    """One SLN noise pair on a uniform grid."""

    times: RealArray
    xi: RealArray
    nu: ComplexArray
    index: int = 0
    master_seed: int = 0
    clip_mass: float = 0.0


@dataclass
class HopsNoise:
    """One HOPS driving field Z_t on a uniform grid."""

    times: RealArray
    z: ComplexArray
    index: int = 0
    master_seed: int = 0
    clip_mass: float = 0.0


class SlnNoiseFactory:
    """Draws (xi, nu) pairs with the SLN statistics.

    E[xi(t) xi(s)] = Re C(t - s), E[xi(t) nu(s)] = 2i Theta(t - s) Im C(t - s)
    and E[nu(t) nu(s)] = 0. The real noise xi filters white noise W through the
    circulant spectrum of Re C; nu is i sqrt(2) times a circular field filtered
    from the same W, which fixes the cross-covariance and keeps nu as weak as
    the cross-covariance allows.
    """

    def __init__(self, modes: ModeSet, times: Sequence[float],
                 clip_tolerance: float = DEFAULT_CLIP_TOLERANCE):
        self.times = np.asarray(times, dtype=np.float64)
        self.step = _grid_step(self.times)
        n = len(self.times)
        self.size = 2 * n
        lags = self.step * np.arange(n + 1)
        corr = np.asarray(reconstruct_C(modes, lags), dtype=np.complex128)

        symmetric = np.concatenate([corr.real, corr.real[n - 1:0:-1]])
        cross = np.zeros(self.size)
        cross[1:n] = 2.0 * corr.imag[1:n]
        spectrum, mass = _clip_spectrum(np.fft.fft(symmetric).real, clip_tolerance, "SLN xi")
        sigma = np.fft.fft(cross)
        usable = spectrum > np.finfo(float).eps * max(float(spectrum.max()), 1e-300)
        dropped = float(np.sum(np.abs(sigma[~usable])))
        sigma_total = float(np.sum(np.abs(sigma)))
        if sigma_total > 0 and dropped / sigma_total > clip_tolerance:
            logger.warning(
                f"SLN cross spectrum has {dropped / sigma_total:.3e} of its mass where the "
                "xi spectrum vanishes"
            )
            mass += dropped / sigma_total
        self.amplitude = np.sqrt(spectrum)
        self.filter = np.zeros(self.size, dtype=np.complex128)
        self.filter[usable] = np.conj(sigma[usable] / spectrum[usable])
        self.clip_mass = mass

    def sample(self, rng: np.random.Generator) -> Tuple[RealArray, ComplexArray]:
        """Draw one (xi, nu) pair on the grid."""
        white = self.amplitude * _complex_white(rng, self.size)
        scale = math.sqrt(self.size)
        n = len(self.times)
        z_xi = np.fft.ifft(white)[:n] * scale
        z_nu = np.fft.ifft(self.filter * white)[:n] * scale
        return math.sqrt(2.0) * z_xi.real, 1j * math.sqrt(2.0) * z_nu


class HopsNoiseFactory:
    """Draws circular complex fields with E[Z*_s Z_t] = C*(t - s) for t >= s."""

    def __init__(self, modes: ModeSet, times: Sequence[float],
                 clip_tolerance: float = DEFAULT_CLIP_TOLERANCE):
        self.times = np.asarray(times, dtype=np.float64)
        self.step = _grid_step(self.times)
        n = len(self.times)
        self.size = 2 * n
        lags = self.step * np.arange(n + 1)
        corr = np.asarray(reconstruct_C(modes, lags), dtype=np.complex128)
        # Hermitian circulant: entry k holds E[Z_(j+k) Z_j*] = C*(k h)
        embedded = np.empty(self.size, dtype=np.complex128)
        embedded[: n + 1] = corr.conj()
        embedded[n] = corr[n].real
        embedded[n + 1:] = corr[n - 1:0:-1]
        spectrum, mass = _clip_spectrum(np.fft.fft(embedded).real, clip_tolerance, "HOPS")
        self.amplitude = np.sqrt(spectrum)
        self.clip_mass = mass

    def sample(self, rng: np.random.Generator) -> ComplexArray:
        white = self.amplitude * _complex_white(rng, self.size)
        return np.fft.ifft(white)[: len(self.times)] * math.sqrt(self.size)


def generate_sln_noise(modes: ModeSet, times: Sequence[float], seed: int,
                       index: int = 0) -> NoiseRealization:
    """Draw the SLN noise pair of trajectory index under master seed."""
    factory = SlnNoiseFactory(modes, times)
    xi, nu = factory.sample(trajectory_generator(seed, index))
    return NoiseRealization(factory.times, xi, nu, index, seed, factory.clip_mass)


def generate_hops_noise(modes: ModeSet, times: Sequence[float], seed: int,
                        index: int = 0) -> HopsNoise:
    """Draw the HOPS field of trajectory index under master seed."""
    factory = HopsNoiseFactory(modes, times)
    z = factory.sample(trajectory_generator(seed, index))
    return HopsNoise(factory.times, z, index, seed, factory.clip_mass)


def dump_noise(noise: Union[NoiseRealization, HopsNoise], path: Union[str, Path]) -> Path:
    """Write one realization as CSV for inspection."""
    path = Path(path)
    if isinstance(noise, NoiseRealization):
        frame = pd.DataFrame({"t": noise.times, "xi": noise.xi,
                              "nu_re": noise.nu.real, "nu_im": noise.nu.imag})
    else:
        frame = pd.DataFrame({"t": noise.times, "z_re": noise.z.real, "z_im": noise.z.imag})
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path


def empirical_two_point(first: np.ndarray, second: np.ndarray, lags: Sequence[int],
                        conjugate: bool = False) -> ComplexArray:
    """Estimate E[a(t + k h) b(t)] from stacked draws of two stationary fields.

    The estimate averages over draws and over every origin t on the grid that
    keeps t + k h inside it.

    Args:
        first: Draws of a, shape (draws, grid points).
        second: Draws of b, same shape.
        lags: Non-negative lags k in grid steps.
        conjugate: Pair a with b* instead of b.

    Returns:
        ComplexArray: One estimate per lag.

    Raises:
        NoiseGenerationError: If the shapes differ or a lag leaves the grid.
    """
    a = np.asarray(first)
    b = np.asarray(second)
    if a.ndim != 2 or a.shape != b.shape:
        raise NoiseGenerationError(f"draw arrays must share a 2-d shape, got {a.shape} and {b.shape}")
    if conjugate:
        b = b.conj()
    n = a.shape[1]
    estimate = np.empty(len(lags), dtype=np.complex128)
    for i, k in enumerate(lags):
        if not 0 <= k < n:
            raise NoiseGenerationError(f"lag {k} outside a grid of {n} points")
        estimate[i] = np.mean(a[:, k:] * b[:, : n - k])
    return estimate


class _GridSignal:
    """Piecewise-linear interpolation of a batch of sampled signals."""

    def __init__(self, times: RealArray, values: np.ndarray):
        self.t0 = float(times[0])
        self.step = float(times[1] - times[0])
        self.last = len(times) - 2
        self.values = values

    def __call__(self, t: float) -> np.ndarray:
        x = (t - self.t0) / self.step
        j = min(max(int(math.floor(x)), 0), self.last)
        frac = x - j
        return np.asarray(self.values[..., j] * (1.0 - frac) + self.values[..., j + 1] * frac)


def _sln_rhs(system: SystemSpec, xi: _GridSignal, nu: _GridSignal) -> Callable[[float, ComplexArray], ComplexArray]:
    h, q = system.hamiltonian, system.coupling

    def rhs(t: float, rho: ComplexArray) -> ComplexArray:
        x = xi(t)[..., None, None]
        v = nu(t)[..., None, None]
        q_rho = q @ rho
        rho_q = rho @ q
        return -1j * (h @ rho - rho @ h) + 1j * x * (q_rho - rho_q) + 0.5j * v * (q_rho + rho_q)

    return rhs


def _stage_config(step: float) -> IntegratorConfig:
    return IntegratorConfig(method="rk4", step=step)


def sln_propagate(
    system: SystemSpec,
    realization: NoiseRealization,
    sample_interval: Optional[float] = None,
    observables: Optional[Mapping[str, ComplexArray]] = None,
) -> TrajectoryRecord:
    """Propagate one SLN trajectory along its noise realization.

    The generator is -i[H, rho] + i xi [q, rho] + i nu/2 {q, rho}, which is
    trace-preserving and Hermiticity-preserving only on average.
    """
    times = realization.times
    step = _grid_step(times)
    xi = _GridSignal(times, realization.xi)
    nu = _GridSignal(times, realization.nu)
    interval = sample_interval or step
    sample_times = uniform_times(float(times[-1]), interval, float(times[0]))
    states: List[ComplexArray] = []
    integrate(_sln_rhs(system, xi, nu), system.initial_state, sample_times, _stage_config(step),
              lambda t, rho: states.append(rho.copy()))
    stack = np.array(states)
    traces = np.trace(stack, axis1=1, axis2=2)
    return TrajectoryRecord(
        times=sample_times,
        observables={name: np.einsum("ij,tji->t", np.asarray(op), stack)
                     for name, op in (observables or {}).items()},
        diagnostics={
            "trace_re": traces.real,
            "trace_im": traces.imag,
            "hermiticity": np.max(np.abs(stack - stack.conj().transpose(0, 2, 1)), axis=(1, 2)),
        },
        metadata={"method": "sln", "trajectory": realization.index, "seed": realization.master_seed},
    )


class HopsGenerator:
    """Linear HOPS right-hand side for a batch of trajectories, state (batch, labels, N)."""

    def __init__(self, index_set: OccupationSet, system: SystemSpec, modes: ModeSet,
                 noise: _GridSignal):
        self.index_set = index_set
        self.hamiltonian_t = system.hamiltonian.T
        self.coupling_t = system.coupling.T
        self.noise = noise
        occupations = index_set.occupations.astype(np.float64)
        sqrt_d = np.sqrt(modes.weights)
        self.decay = occupations @ modes.rates
        self.coef_raise = np.sqrt(occupations + 1.0) * sqrt_d
        self.coef_lower = np.sqrt(occupations) * sqrt_d

    def __call__(self, t: float, psi: ComplexArray) -> ComplexArray:
        z = self.noise(t)[:, None, None]
        q_psi = psi @ self.coupling_t
        out = -1j * (psi @ self.hamiltonian_t) + z * q_psi - self.decay[None, :, None] * psi
        padded = np.concatenate([q_psi, np.zeros_like(q_psi[:, :1])], axis=1)
        for k in range(self.index_set.slots):
            out -= self.coef_raise[None, :, k, None] * padded[:, self.index_set.raised[:, k]]
            out += self.coef_lower[None, :, k, None] * padded[:, self.index_set.lowered[:, k]]
        return out


def _hops_initial(system: SystemSpec, labels: int, rngs: Sequence[np.random.Generator]) -> ComplexArray:
    """Random-phase unraveling of rho(0) placed in the zero label."""
    weights, vectors = np.linalg.eigh(system.initial_state)
    weights = np.clip(weights, 0.0, None)
    psi = np.zeros((len(rngs), labels, system.dim), dtype=np.complex128)
    for b, rng in enumerate(rngs):
        phases = np.exp(2j * np.pi * rng.random(len(weights)))
        psi[b, 0] = vectors @ (np.sqrt(weights) * phases)
    return psi


def hops_propagate(
    system: SystemSpec,
    modes: ModeSet,
    noise: HopsNoise,
    truncation: Truncation,
    sample_interval: Optional[float] = None,
    observables: Optional[Mapping[str, ComplexArray]] = None,
) -> TrajectoryRecord:
    """Propagate one linear HOPS trajectory; rho is estimated as psi_0 psi_0^dagger."""
    index_set = OccupationSet(truncation.caps_for(modes.K), truncation.tier)
    rng = trajectory_generator(noise.master_seed, noise.index)
    # skip the normals the noise factory consumed so the phases match the ensemble draw
    rng.standard_normal(2 * 2 * len(noise.times))
    psi0 = _hops_initial(system, len(index_set), [rng])
    states = _run_hops_batch(system, modes, index_set, noise.times, noise.z[None, :], psi0,
                             sample_interval)
    stack = states[:, 0]
    traces = np.trace(stack, axis1=1, axis2=2)
    return TrajectoryRecord(
        times=_sample_times(noise.times, sample_interval),
        observables={name: np.einsum("ij,tji->t", np.asarray(op), stack)
                     for name, op in (observables or {}).items()},
        diagnostics={"trace_re": traces.real, "trace_im": traces.imag},
        metadata={"method": "hops", "trajectory": noise.index, "seed": noise.master_seed},
    )


def _sample_times(grid: RealArray, interval: Optional[float]) -> RealArray:
    step = _grid_step(grid)
    return uniform_times(float(grid[-1]), interval or step, float(grid[0]))


def _run_hops_batch(system: SystemSpec, modes: ModeSet, index_set: OccupationSet,
                    grid: RealArray, noise: ComplexArray, psi0: ComplexArray,
                    sample_interval: Optional[float]) -> ComplexArray:
    """Returns psi_0 psi_0^dagger per sample time and trajectory, shape (samples, batch, N, N)."""
    generator = HopsGenerator(index_set, system, modes, _GridSignal(grid, noise))
    samples: List[ComplexArray] = []

    def observe(t: float, psi: ComplexArray) -> None:
        top = psi[:, 0, :]
        samples.append(np.einsum("bi,bj->bij", top, top.conj()))

    integrate(generator, psi0, _sample_times(grid, sample_interval), _stage_config(_grid_step(grid)),
              observe, check_finite=False)
    return np.array(samples)


@dataclass
class _ChunkResult:
    values: Dict[str, ComplexArray]
    density_sum: ComplexArray
    finite: np.ndarray
    max_norm: float = 0.0


def _observe_batch(states: ComplexArray, observables: Mapping[str, ComplexArray]) -> Dict[str, ComplexArray]:
    """Per-trajectory expectations from states of shape (samples, batch, N, N)."""
    return {name: np.einsum("ij,sbji->bs", np.asarray(op), states)
            for name, op in observables.items()}


def _finalize(chunks: List[_ChunkResult], times: RealArray, observables: Mapping[str, ComplexArray],
              master_seed: int, method: str, failure_fraction: float) -> EnsembleResult:
    finite = np.concatenate([c.finite for c in chunks])
    total = len(finite)
    failed = int(np.count_nonzero(~finite))
    if failed > failure_fraction * total:
        raise EnsembleError(
            f"{failed} of {total} trajectories became non-finite (limit {failure_fraction:.1%})"
        )
    if failed:
        logger.warning(f"Excluded {failed} non-finite trajectories from the {method} average")
    count = total - failed
    if count == 0:
        raise EnsembleError("no finite trajectories to average")
    density = sum(c.density_sum for c in chunks) / count
    means: Dict[str, ComplexArray] = {}
    errors: Dict[str, RealArray] = {}
    for name in observables:
        values = np.concatenate([c.values[name] for c in chunks])[finite]
        means[name] = values.mean(axis=0)
        errors[name] = (values.std(axis=0, ddof=1) / math.sqrt(count)
                        if count > 1 else np.full(len(times), np.nan))
    traces = np.trace(density, axis1=1, axis2=2)
    hermitian = 0.5 * (density + density.conj().transpose(0, 2, 1))
    record = TrajectoryRecord(
        times=times,
        observables=means,
        std_errors=errors,
        diagnostics={
            "trace_re": traces.real,
            "trace_im": traces.imag,
            "hermiticity": np.max(np.abs(density - density.conj().transpose(0, 2, 1)), axis=(1, 2)),
            "min_eigenvalue": np.linalg.eigvalsh(hermitian)[:, 0],
        },
        trajectories=count,
        metadata={"method": method, "seed": master_seed, "failed": failed},
    )
    return EnsembleResult(record, density, count, failed, master_seed)


def _chunk_bounds(total: int, chunk: int) -> List[Tuple[int, int]]:
    return [(start, min(start + chunk, total)) for start in range(0, total, chunk)]


def _check_ensemble_args(trajectories: int, threads: int, chunk: int) -> None:
    if trajectories < 1:
        raise EnsembleError(f"trajectory count must be positive, got {trajectories}")
    if threads < 1 or chunk < 1:
        raise EnsembleError("threads and chunk size must be positive")


def sln_ensemble(
    system: SystemSpec,
    modes: ModeSet,
    t_final: float,
    step: float,
    trajectories: int,
    seed: int,
    observables: Mapping[str, ComplexArray],
    sample_interval: Optional[float] = None,
    threads: int = 1,
    chunk: int = DEFAULT_CHUNK,
    failure_fraction: float = DEFAULT_FAILURE_FRACTION,
    clip_tolerance: float = DEFAULT_CLIP_TOLERANCE,
) -> EnsembleResult:
    """Average SLN trajectories.

    Args:
        system: System and initial state.
        modes: Bath modes defining the noise statistics.
        t_final: End time.
        step: Noise grid spacing, also the integration step.
        trajectories: Number of trajectories M.
        seed: Master seed.
        observables: Named operators to average.
        sample_interval: Output spacing, a multiple of step.
        threads: Worker threads over trajectory chunks.
        chunk: Trajectories propagated together as one batch.
        failure_fraction: Largest tolerated share of non-finite trajectories.
        clip_tolerance: Clipped spectral mass above which a warning is logged.

    Returns:
        EnsembleResult: Means, standard errors and the averaged density.

    Raises:
        EnsembleError: If too many trajectories become non-finite.
    """
    _check_ensemble_args(trajectories, threads, chunk)
    grid = uniform_times(t_final, step)
    factory = SlnNoiseFactory(modes, grid, clip_tolerance)
    sample_times = _sample_times(grid, sample_interval)

    def run(bounds: Tuple[int, int]) -> _ChunkResult:
        start, stop = bounds
        draws = [factory.sample(trajectory_generator(seed, i)) for i in range(start, stop)]
        xi = _GridSignal(grid, np.array([d[0] for d in draws]))
        nu = _GridSignal(grid, np.array([d[1] for d in draws]))
        rho0 = np.broadcast_to(system.initial_state, (stop - start, system.dim, system.dim)).copy()
        states: List[ComplexArray] = []
        integrate(_sln_rhs(system, xi, nu), rho0, sample_times, _stage_config(step),
                  lambda t, rho: states.append(rho.copy()), check_finite=False)
        stack = np.array(states)
        finite = np.all(np.isfinite(stack), axis=(0, 2, 3))
        return _ChunkResult(_observe_batch(stack, observables),
                            stack[:, finite].sum(axis=1), finite)

    logger.info(f"SLN ensemble: {trajectories} trajectories, step {step:g}, seed {seed}")
    chunks = _map_chunks(run, _chunk_bounds(trajectories, chunk), threads)
    result = _finalize(chunks, sample_times, observables, seed, "sln", failure_fraction)
    result.record.metadata["clip_mass"] = factory.clip_mass
    return result


def hops_ensemble(
    system: SystemSpec,
    modes: ModeSet,
    truncation: Truncation,
    t_final: float,
    step: float,
    trajectories: int,
    seed: int,
    observables: Mapping[str, ComplexArray],
    sample_interval: Optional[float] = None,
    threads: int = 1,
    chunk: int = DEFAULT_CHUNK,
    failure_fraction: float = DEFAULT_FAILURE_FRACTION,
    norm_bound: float = DEFAULT_NORM_BOUND,
    clip_tolerance: float = DEFAULT_CLIP_TOLERANCE,
) -> EnsembleResult:
    """Average linear HOPS trajectories with rho estimated as E[psi_0 psi_0^dagger].

    Trajectory norms are not conserved; a warning is logged when any squared
    norm exceeds norm_bound.
    """
    _check_ensemble_args(trajectories, threads, chunk)
    grid = uniform_times(t_final, step)
    factory = HopsNoiseFactory(modes, grid, clip_tolerance)
    index_set = OccupationSet(truncation.caps_for(modes.K), truncation.tier)
    sample_times = _sample_times(grid, sample_interval)

    def run(bounds: Tuple[int, int]) -> _ChunkResult:
        start, stop = bounds
        rngs = [trajectory_generator(seed, i) for i in range(start, stop)]
        noise = np.array([factory.sample(rng) for rng in rngs])
        psi0 = _hops_initial(system, len(index_set), rngs)
        stack = _run_hops_batch(system, modes, index_set, grid, noise, psi0, sample_interval)
        finite = np.all(np.isfinite(stack), axis=(0, 2, 3))
        norms = np.trace(stack[:, finite], axis1=2, axis2=3).real
        return _ChunkResult(_observe_batch(stack, observables), stack[:, finite].sum(axis=1),
                            finite, float(norms.max()) if norms.size else 0.0)

    logger.info(
        f"HOPS ensemble: {trajectories} trajectories, {len(index_set)} labels, seed {seed}"
    )
    chunks = _map_chunks(run, _chunk_bounds(trajectories, chunk), threads)
    largest = max(c.max_norm for c in chunks)
    if largest > norm_bound:
        logger.warning(f"HOPS trajectory norm grew to {largest:.3g} (bound {norm_bound:g})")
    result = _finalize(chunks, sample_times, observables, seed, "hops", failure_fraction)
    result.record.metadata.update({"clip_mass": factory.clip_mass, "labels": len(index_set),
                                   "max_norm": largest})
    return result


def _map_chunks(run: Callable[[Tuple[int, int]], _ChunkResult],
                bounds: List[Tuple[int, int]], threads: int) -> List[_ChunkResult]:
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, bounds))
    return [run(b) for b in bounds]
