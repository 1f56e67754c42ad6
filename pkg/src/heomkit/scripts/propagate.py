"""Propagate the reduced dynamics with the configured method."""
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import numpy as np

from heomkit.config import Config
from heomkit.core.bath import gibbs_deviation
from heomkit.core.errors import ConfigError
from heomkit.core.fpheom import build_index_set, initial_state, propagate, tier_convergence
from heomkit.core.integrate import uniform_times
from heomkit.core.representations import (
    alt_lindblad_propagate,
    conventional_heom_propagate,
    lindblad_propagate,
    redfield_plus_propagate,
    redfield_propagate,
)
from heomkit.core.stochastic import dump_noise, generate_hops_noise, generate_sln_noise, hops_ensemble, sln_ensemble
from heomkit.core.types import ComplexArray
from heomkit.models.modes import ModeSet
from heomkit.models.system import SystemSpec
from heomkit.models.trajectory import TrajectoryRecord
from heomkit.scripts.common import (
    METHODS,
    bath_beta,
    build_integrator,
    build_observables,
    build_system,
    build_truncation,
    load_modes,
    mode_caps,
    output_dir,
    run_value,
    write_sidecar,
)

logger = logging.getLogger(__name__)

TRAJECTORY_FILE = "trajectory.csv"
SIDECAR_FILE = "trajectory.yaml"
CONVERGENCE_FILE = "convergence.csv"


def _method(config: Config) -> str:
    name = str(config.require("method.name"))
    if name not in METHODS:
        raise ConfigError(f"method.name must be one of {', '.join(METHODS)}, got {name!r}")
    return name


def _stochastic(config: Config, name: str, system: SystemSpec, modes: ModeSet,
                observables: Mapping[str, ComplexArray], t_final: float, interval: float,
                seed: int, threads: int) -> TrajectoryRecord:
    step = float(build_integrator(config, system, modes).step)
    common: Dict[str, Any] = dict(
        t_final=t_final,
        step=step,
        trajectories=int(config.get("method.trajectories", 1000)),
        seed=seed,
        observables=observables,
        sample_interval=interval,
        threads=threads,
        chunk=int(config.get("numerics.ensemble_chunk", 1000)),
        failure_fraction=float(config.get("numerics.failure_fraction", 0.01)),
        clip_tolerance=float(config.get("numerics.clip_tolerance", 1e-6)),
    )
    if common["trajectories"] < 2:
        raise ConfigError("method.trajectories must be at least 2")
    if name == "sln":
        result = sln_ensemble(system, modes, **common)
    else:
        result = hops_ensemble(system, modes, build_truncation(config),
                               norm_bound=float(config.get("numerics.hops_norm_bound", 100.0)),
                               **common)
    if config.get("output.dump_noise", False):
        grid = uniform_times(t_final, step)
        if name == "sln":
            noise = generate_sln_noise(modes, grid, seed)
        else:
            noise = generate_hops_noise(modes, grid, seed)
        dump_noise(noise, output_dir(config) / f"{name}_noise_0.csv")
    return result.record


def propagate_record(config: Config, seed: Optional[int] = None,
                     threads: Optional[int] = None,
                     modes: Optional[ModeSet] = None) -> TrajectoryRecord:
    """Run the configured method and return its record without writing files.

    Args:
        config: Run configuration.
        seed: Master seed from the command line; method.seed takes precedence.
        threads: Worker threads from the command line; method.threads takes precedence.
        modes: Decomposition to use instead of loading or fitting one.

    Returns:
        TrajectoryRecord: Sampled observables and diagnostics.
    """
    name = _method(config)
    system = build_system(config)
    observables = build_observables(config, system.dim)
    modes = modes if modes is not None else load_modes(config)
    t_final = float(config.require("output.t_final"))
    interval = float(config.require("output.sample_interval"))
    integrator = build_integrator(config, system, modes)
    logger.info(f"Propagating with {name}: K={modes.K}, t_final={t_final:g}")

    if name == "fp-heom":
        index_set = build_index_set(modes.K, build_truncation(config),
                                    int(config.get("numerics.max_indices", 200000)))
        record, _ = propagate(initial_state(system, index_set), system, modes, t_final,
                              integrator, interval, observables)
        return record
    if name == "lindblad":
        return lindblad_propagate(system, modes, mode_caps(config, modes), t_final, interval,
                                  observables)
    if name == "alt-lindblad":
        return alt_lindblad_propagate(system, modes, mode_caps(config, modes), t_final, interval,
                                      observables, str(config.get("method.assembly", "density")))
    if name == "conventional-heom":
        return conventional_heom_propagate(system, modes, build_truncation(config), t_final,
                                           integrator, interval, observables)
    budget = int(config.get("numerics.memory_budget", 268435456))
    if name in ("redfield-plus", "redfield"):
        if name == "redfield-plus":
            record = redfield_plus_propagate(system, modes, t_final,
                                             str(config.get("method.variant", "tier1")),
                                             integrator, interval, observables, budget)
        else:
            record = redfield_propagate(system, modes, t_final, integrator, interval,
                                        observables, budget)
        if record.final_density is not None:
            deviation = gibbs_deviation(record.final_density, system.hamiltonian, bath_beta(config))
            record.metadata["gibbs_population_deviation"] = deviation
            logger.info(f"Final populations differ from the Gibbs state by {deviation:.3e}")
        return record
    return _stochastic(config, name, system, modes, observables, t_final, interval,
                       int(run_value(config, "seed", seed)),
                       int(run_value(config, "threads", threads)))


def _summary(record: TrajectoryRecord) -> Dict[str, Any]:
    trace = None
    if "trace_re" in record.diagnostics:
        trace = float(np.max(np.abs(record.diagnostics["trace_re"] - 1.0
                                    + 1j * record.diagnostics["trace_im"])))
    min_eigenvalue = record.diagnostics.get("min_eigenvalue")
    return {
        "samples": len(record.times),
        "trace_residual": trace,
        "hermiticity_residual": record.max_diagnostic("hermiticity"),
        "pairing_residual": record.max_diagnostic("pairing"),
        "min_eigenvalue": float(np.min(min_eigenvalue)) if min_eigenvalue is not None else None,
        "trajectories": record.trajectories,
        "metadata": record.metadata,
    }


def run_propagate(config: Config, seed: Optional[int] = None, threads: Optional[int] = None,
                  tolerance: Optional[float] = None) -> Path:
    """Propagate and write the trajectory CSV with its diagnostics sidecar.

    Returns:
        Path: The trajectory CSV.
    """
    name = _method(config)
    modes = load_modes(config)
    record = propagate_record(config, seed, threads, modes)
    out = output_dir(config)
    path = record.write_csv(out / TRAJECTORY_FILE)
    sidecar = _summary(record)

    if name == "fp-heom" and config.get("method.check_convergence", False):
        system = build_system(config)
        observables = build_observables(config, system.dim)
        if not observables:
            raise ConfigError("method.check_convergence needs at least one output.observables entry")
        tier = int(config.get("method.tier", 4))
        truncation = build_truncation(config)
        table = tier_convergence(
            system, modes, [tier, tier + 1], float(config.require("output.t_final")),
            build_integrator(config, system, modes), next(iter(observables.values())),
            float(config.require("output.sample_interval")),
            float(run_value(config, "tolerance", tolerance) or 1e-4), truncation.caps,
        )
        table.to_csv(out / CONVERGENCE_FILE, index=False, float_format="%.17g")
        sidecar["converged"] = bool(table["converged"].all())

    write_sidecar(out / SIDECAR_FILE, sidecar)
    return path
