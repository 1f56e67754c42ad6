"""Record types for systems, bath decompositions and trajectories."""
from heomkit.models.modes import FrequencyWindow, Mode, ModeSet, read_modes, write_modes
from heomkit.models.system import SystemSpec
from heomkit.models.trajectory import EnsembleResult, TrajectoryRecord

__all__ = [
    'FrequencyWindow',
    'Mode',
    'ModeSet',
    'read_modes',
    'write_modes',
    'SystemSpec',
    'EnsembleResult',
    'TrajectoryRecord',
]
