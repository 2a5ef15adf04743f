"""tdmac: behavioral simulator of a VCO-based time-domain MAC cell.

Multiplication happens as phase integration of a current-controlled
oscillator over a digitally controlled pulse; accumulation is the
oscillator holding its phase; readout quantizes the differential phase of
a pseudo-differential pair into 2N levels per cycle plus whole-cycle
counts. On top of the cell sit a background gain-tracking loop, a rigid
registration pipeline that runs its per-voxel coordinate transforms on
the cell, and a measurement layer (linearity in effective bits, energy
accounting).
"""

from .cell import (
    CellState,
    MacCellConfig,
    MacResult,
    PhaseReading,
    WeightPulse,
    accumulate_sample,
    cco_freq,
    code_to_value,
    idle_hold,
    run_mac_schedule,
    sample_phase,
    vi_convert,
)
from .mac import (
    Backend,
    ErrorRecord,
    compare_backends,
    differential_lsb,
    ideal_running,
    mac_ideal,
    mac_run,
    weights_to_pulses,
)
from .metrics import (
    EnergyReport,
    LinearityReport,
    calibrate_default_config,
    energy_report,
    power_consistency_check,
    sine_mac_experiment,
    tradeoff_sweep,
)
from .phantom import make_phantom
from .registration import (
    CoordNormalization,
    RigidTransform,
    build_rotation,
    build_translation_scaling,
    compose,
    resample_volume,
    transform_point,
    transform_points_batch,
)
from .tracking import (
    MismatchModel,
    TrackingLoopConfig,
    TrackingTrace,
    broadcast_code,
    run_calibration,
    tracking_step,
)
from .volume_io import VoxelVolume, read_transform, read_volume, write_transform, write_volume

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "CellState",
    "CoordNormalization",
    "EnergyReport",
    "ErrorRecord",
    "LinearityReport",
    "MacCellConfig",
    "MacResult",
    "MismatchModel",
    "PhaseReading",
    "RigidTransform",
    "TrackingLoopConfig",
    "TrackingTrace",
    "VoxelVolume",
    "WeightPulse",
    "accumulate_sample",
    "broadcast_code",
    "build_rotation",
    "build_translation_scaling",
    "calibrate_default_config",
    "cco_freq",
    "code_to_value",
    "compare_backends",
    "compose",
    "differential_lsb",
    "energy_report",
    "ideal_running",
    "idle_hold",
    "mac_ideal",
    "mac_run",
    "make_phantom",
    "power_consistency_check",
    "read_transform",
    "read_volume",
    "resample_volume",
    "run_calibration",
    "run_mac_schedule",
    "sample_phase",
    "sine_mac_experiment",
    "tracking_step",
    "tradeoff_sweep",
    "transform_point",
    "transform_points_batch",
    "vi_convert",
    "weights_to_pulses",
    "write_transform",
    "write_volume",
    "__version__",
]
