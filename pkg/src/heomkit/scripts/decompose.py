"""Decompose a bath correlation function into exponential modes."""
import logging
from pathlib import Path
from typing import Tuple

import numpy as np

from heomkit.config import Config
from heomkit.core.modefit import ModeFitError, time_domain_fidelity
from heomkit.core.types import FitReport
from heomkit.models.modes import ModeSet, write_modes
from heomkit.scripts.common import build_bath, build_window, fit_modes, output_dir, render_table, write_sidecar

logger = logging.getLogger(__name__)

MODES_FILE = "modes.yaml"
FIDELITY_FILE = "fidelity.csv"
REPORT_FILE = "fit_report.yaml"


def fidelity_times(config: Config) -> np.ndarray:
    """Times in [0, 1/omega_min] for the time-domain check."""
    window = build_window(config)
    count = int(config.get("fit.fidelity_points", 50))
    return np.linspace(0.0, 1.0 / window.omega_min, max(count, 2))


def run_decompose(config: Config) -> Tuple[ModeSet, Path]:
    """Fit the bath, write the ModeSet file, the fidelity table and the fit report.

    Args:
        config: Run configuration with bath and fit sections.

    Returns:
        Tuple[ModeSet, Path]: The modes and the report path.

    Raises:
        ModeFitError: After writing a failure report with the best residual.
    """
    out = output_dir(config)
    bath = build_bath(config)
    delta = float(config.require("fit.delta"))
    try:
        modes = fit_modes(config, bath)
    except ModeFitError as e:
        report = FitReport(status="failed", modes=None, delta=delta, achieved_error=None,
                           best_residual=e.best_residual, grid_points=0,
                           max_time_error=None)
        write_sidecar(out / REPORT_FILE, {**report, "message": str(e)})
        raise

    write_modes(modes, out / MODES_FILE)
    fidelity = time_domain_fidelity(
        modes, bath, fidelity_times(config),
        tol=float(config.get("fit.quadrature_tol", 1e-10)),
        scheme=str(config.get("fit.quadrature_scheme", "auto")),
    )
    fidelity.to_csv(out / FIDELITY_FILE, index=False, float_format="%.17g")
    report = FitReport(
        status="ok",
        modes=modes.K,
        delta=delta,
        achieved_error=modes.achieved_error,
        best_residual=modes.achieved_error,
        grid_points=modes.grid_points,
        max_time_error=float(fidelity["abs_error"].max()),
    )
    path = write_sidecar(out / REPORT_FILE, dict(report))
    print(render_table([dict(report)]))
    logger.info(f"Wrote {modes.K} modes to {out / MODES_FILE}")
    return modes, path
