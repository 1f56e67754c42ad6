"""Compare trajectories from different methods on a shared time grid."""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from heomkit.config import Config
from heomkit.core.errors import ConfigError
from heomkit.core.representations import compare_records
from heomkit.models.trajectory import TrajectoryRecord
from heomkit.scripts.common import output_dir, render_table, write_sidecar
from heomkit.scripts.propagate import propagate_record

logger = logging.getLogger(__name__)

SUMMARY_FILE = "comparison.csv"
TIMELINE_FILE = "comparison_timeline.csv"
SIDECAR_FILE = "comparison.yaml"
CONFIG_SUFFIXES = (".yaml", ".yml")


def load_input(path: Union[str, Path], seed: Optional[int] = None,
               threads: Optional[int] = None) -> TrajectoryRecord:
    """A trajectory CSV, or a run configuration that is propagated in-process."""
    path = Path(path)
    if path.suffix.lower() in CONFIG_SUFFIXES:
        logger.info(f"Propagating run configuration {path}")
        return propagate_record(Config(path), seed, threads)
    return TrajectoryRecord.read_csv(path)


def _labels(paths: Sequence[Union[str, Path]]) -> List[str]:
    labels: List[str] = []
    for path in paths:
        label = Path(path).stem
        if label in labels:
            label = f"{label}_{len(labels)}"
        labels.append(label)
    return labels


def run_compare(config: Config, inputs: Sequence[Union[str, Path]],
                tolerance: Optional[float] = None, seed: Optional[int] = None,
                threads: Optional[int] = None) -> Tuple[pd.DataFrame, Path]:
    """Compare two or more trajectories and write the deviation tables.

    Args:
        config: Configuration holding compare and output settings.
        inputs: Trajectory CSV files or run configuration files.
        tolerance: Deviation above which a pair is flagged; defaults to compare.tolerance.
        seed: Master seed for stochastic runs given as configurations.
        threads: Worker threads for stochastic runs given as configurations.

    Returns:
        Tuple[pd.DataFrame, Path]: Summary table and the path it was written to.

    Raises:
        ConfigError: If fewer than two inputs are given.
    """
    inputs = list(inputs) or list(config.get("compare.inputs", []))
    if len(inputs) < 2:
        raise ConfigError("compare needs at least two inputs (compare.inputs or command line)")
    limit = float(tolerance if tolerance is not None else config.get("compare.tolerance", 1e-4))
    records: Dict[str, TrajectoryRecord] = {
        label: load_input(path, seed, threads) for label, path in zip(_labels(inputs), inputs)
    }
    summary, timeline = compare_records(records, limit)
    out = output_dir(config)
    path = out / SUMMARY_FILE
    summary.to_csv(path, index=False, float_format="%.17g")
    timeline.to_csv(out / TIMELINE_FILE, index=False, float_format="%.17g")
    flagged = int(summary["flagged"].sum()) if len(summary) else 0
    write_sidecar(out / SIDECAR_FILE, {
        "inputs": [str(p) for p in inputs],
        "tolerance": limit,
        "max_deviation": float(summary["max_deviation"].max()) if len(summary) else 0.0,
        "flagged": flagged,
    })
    if flagged:
        logger.warning(f"{flagged} comparisons exceed the tolerance {limit:.1e}")
    print(render_table(summary))
    return summary, path
