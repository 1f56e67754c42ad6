"""Verify the MPO form of the generator against the dense oracle."""
import logging
from pathlib import Path
from typing import Optional, Tuple

from heomkit.config import Config
from heomkit.core.mpo import build_mpo, dump_chain, verify_mpo
from heomkit.core.types import MpoReport
from heomkit.scripts.common import build_system, load_modes, mode_caps, output_dir, render_table, run_value, write_sidecar

logger = logging.getLogger(__name__)

REPORT_FILE = "mpo_report.yaml"
DUMP_FILE = "mpo_chain.txt"


def run_verify_mpo(config: Config, tolerance: Optional[float] = None) -> Tuple[MpoReport, Path]:
    """Build the chain for the configured system and modes, then check it.

    Caps come from mpo.caps, falling back to method.caps and the tier. The
    tolerance is method.tolerance, then the command line, then mpo.tolerance.

    Returns:
        Tuple[MpoReport, Path]: The report and its path.
    """
    system = build_system(config)
    modes = load_modes(config)
    key = "mpo.caps" if config.has("mpo.caps") else "method.caps"
    caps = mode_caps(config, modes, key)
    limit = run_value(config, "tolerance", tolerance)
    limit = float(limit if limit is not None else config.get("mpo.tolerance", 1e-10))
    budget = int(config.get("numerics.mpo_budget", 10000))

    chain = build_mpo(system, modes, caps)
    report = verify_mpo(system, modes, caps, chain, tolerance=limit, budget=budget)
    out = output_dir(config)
    dump_chain(chain, out / DUMP_FILE)
    path = write_sidecar(out / REPORT_FILE, {**report, "caps": caps, "tolerance": limit})
    summary = {key: value for key, value in report.items() if key != "site_deviations"}
    print(render_table([summary]))
    return report, path
