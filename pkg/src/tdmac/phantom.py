"""Deterministic synthetic test volumes: a sphere plus an axis cross.

No external data needed for the registration pipeline; the pattern has
enough structure (curved surface, thin bars) to expose resampling errors
while keeping the content well inside the grid so rotations about the
center do not clip it.
"""

import numpy as np

from .errors import ConfigError
from .volume_io import VoxelVolume

SPHERE_VALUE = 200
CROSS_VALUE = 255
BACKGROUND = 0


def make_phantom(dims=(64, 64, 64), dtype="uint8") -> VoxelVolume:
    """Sphere of radius 0.25*n with three cross bars of half-length 0.34*n."""
    nx, ny, nz = dims
    if min(dims) < 8:
        raise ConfigError(f"phantom dims must be >= 8 per axis, got {dims}")
    if dtype == "uint8":
        dt = np.uint8
    elif dtype == "int16":
        dt = np.int16
    else:
        raise ConfigError(f"phantom dtype must be uint8 or int16, got {dtype!r}")

    cx, cy, cz = (nx - 1) / 2.0, (ny - 1) / 2.0, (nz - 1) / 2.0
    n_min = min(dims)
    radius = 0.25 * n_min
    arm_half = 0.34 * n_min
    bar_half = max(1.0, 0.03 * n_min)

    x = np.arange(nx)[:, None, None] - cx
    y = np.arange(ny)[None, :, None] - cy
    z = np.arange(nz)[None, None, :] - cz

    data = np.full(dims, BACKGROUND, dtype=dt)
    sphere = x * x + y * y + z * z <= radius * radius
    data[sphere] = SPHERE_VALUE

    ax = np.abs(x) <= bar_half
    ay = np.abs(y) <= bar_half
    az = np.abs(z) <= bar_half
    lx = np.abs(x) <= arm_half
    ly = np.abs(y) <= arm_half
    lz = np.abs(z) <= arm_half
    cross = (lx & ay & az) | (ax & ly & az) | (ax & ay & lz)
    data[cross] = CROSS_VALUE

    return VoxelVolume(data=data, spacing=(1.0, 1.0, 1.0), background=BACKGROUND)
