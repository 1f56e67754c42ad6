"""Scan the mode count K against the lower window edge omega_min."""
import logging
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from heomkit.config import Config
from heomkit.core.errors import ConfigError
from heomkit.core.modefit import fit_loglinear, mode_count_scan
from heomkit.core.types import Regression
from heomkit.scripts.common import build_bath, output_dir, render_table, run_value, write_sidecar

logger = logging.getLogger(__name__)

SCAN_FILE = "scan.csv"
SIDECAR_FILE = "scan.yaml"


def run_scan_modes(config: Config, threads: Optional[int] = None) -> Tuple[pd.DataFrame, Regression, Path]:
    """Fit the bath for every fit.omega_min_values entry and regress K on ln(1/omega_min).

    Rows that fail to fit are kept with status "failed" and left out of the regression.

    Returns:
        Tuple[pd.DataFrame, Regression, Path]: Scan table, regression and the CSV path.
    """
    edges = config.require("fit.omega_min_values")
    if not isinstance(edges, list) or not edges:
        raise ConfigError("fit.omega_min_values must be a non-empty list")
    try:
        edges = sorted((float(v) for v in edges), reverse=True)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"fit.omega_min_values must hold numbers: {str(e)}") from e
    if len(set(edges)) != len(edges):
        raise ConfigError(f"fit.omega_min_values has repeated entries: {edges}")
    rows = mode_count_scan(
        build_bath(config),
        edges,
        float(config.require("fit.omega_max")),
        float(config.require("fit.delta")),
        points_per_decade=float(config.get("fit.points_per_decade", 20)),
        k_max=int(config.get("fit.k_max", 150)),
        threads=int(run_value(config, "threads", threads)),
    )
    regression = fit_loglinear(rows)
    frame = pd.DataFrame(rows, columns=["omega_min", "modes", "achieved_error", "status", "message"])
    frame["log_inverse_omega_min"] = np.log(1.0 / frame["omega_min"])

    out = output_dir(config)
    path = out / SCAN_FILE
    frame.to_csv(path, index=False, float_format="%.17g")
    failed = int((frame["status"] != "ok").sum())
    write_sidecar(out / SIDECAR_FILE, {**regression, "rows": len(frame), "failed_rows": failed})
    if failed:
        logger.warning(f"{failed} of {len(frame)} scan points failed to fit")
    print(render_table(frame.drop(columns=["message"])))
    print(render_table([dict(regression)]))
    return frame, regression, path
