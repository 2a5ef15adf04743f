"""Voxel volume container and file formats.

A volume on disk is a raw little-endian array (uint8 or int16, x fastest,
then y, then z) plus a UTF-8 sidecar named <file>.meta with key: value
lines (dims, dtype, spacing, background). Transforms are 16 decimal
numbers, row-major, whitespace separated, in a plain-text file.
"""

import os
from dataclasses import dataclass

import numpy as np

from .errors import VolumeFormatError

_DTYPES = {
    "uint8": np.dtype("<u1"),
    "int16": np.dtype("<i2"),
}


@dataclass
class VoxelVolume:
    """Intensity grid indexed data[x, y, z] with mm spacing per axis."""

    data: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    background: float = 0.0

    def __post_init__(self):
        if self.data.ndim != 3:
            raise VolumeFormatError(f"volume data must be 3-D, got {self.data.ndim}-D")
        if min(self.data.shape) < 1:
            raise VolumeFormatError(f"volume dims must be >= 1, got {self.data.shape}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(n) for n in self.data.shape)


def _dtype_name(arr: np.ndarray) -> str:
    for name, dt in _DTYPES.items():
        if arr.dtype == dt:
            return name
    raise VolumeFormatError(
        f"unsupported voxel dtype {arr.dtype}; use uint8 or int16"
    )


def sidecar_path(path: str) -> str:
    return str(path) + ".meta"


def write_volume(vol: VoxelVolume, path: str) -> None:
    """Raw voxel bytes (x fastest) plus the sidecar."""
    name = _dtype_name(vol.data)
    with open(path, "wb") as fh:
        # Fortran order over (x, y, z) iterates x fastest
        fh.write(np.asarray(vol.data, dtype=_DTYPES[name]).tobytes(order="F"))
    nx, ny, nz = vol.dims
    sx, sy, sz = vol.spacing
    lines = [
        f"dims: {nx} {ny} {nz}",
        f"dtype: {name}",
        f"spacing: {sx!r} {sy!r} {sz!r}",
        f"background: {vol.background!r}",
    ]
    with open(sidecar_path(path), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_sidecar(path: str) -> dict:
    fields = {}
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if ":" not in line:
                raise VolumeFormatError(f"{path}:{ln}: expected 'key: value'")
            key, _, value = line.partition(":")
            fields[key.strip()] = value.strip()
    return fields


def read_volume(path: str) -> VoxelVolume:
    meta = sidecar_path(path)
    if not os.path.exists(meta):
        raise VolumeFormatError(f"missing sidecar metadata file {meta}")
    if not os.path.exists(path):
        raise VolumeFormatError(f"missing volume file {path}")
    fields = _parse_sidecar(meta)
    for key in ("dims", "dtype"):
        if key not in fields:
            raise VolumeFormatError(f"{meta}: missing required key '{key}'")
    try:
        nx, ny, nz = (int(v) for v in fields["dims"].split())
    except ValueError as exc:
        raise VolumeFormatError(f"{meta}: bad dims {fields['dims']!r}") from exc
    name = fields["dtype"]
    if name not in _DTYPES:
        raise VolumeFormatError(f"{meta}: unsupported dtype {name!r}")
    spacing = (1.0, 1.0, 1.0)
    if "spacing" in fields:
        try:
            spacing = tuple(float(v) for v in fields["spacing"].split())
        except ValueError as exc:
            raise VolumeFormatError(f"{meta}: bad spacing") from exc
        if len(spacing) != 3:
            raise VolumeFormatError(f"{meta}: spacing needs 3 values")
    background = float(fields.get("background", "0"))
    raw = np.fromfile(path, dtype=_DTYPES[name])
    if raw.size != nx * ny * nz:
        raise VolumeFormatError(
            f"{path}: {raw.size} voxels on disk, sidecar says {nx * ny * nz}"
        )
    data = raw.reshape((nx, ny, nz), order="F")
    return VoxelVolume(data=data, spacing=spacing, background=background)


def write_transform(m: np.ndarray, path: str) -> None:
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (4, 4):
        raise VolumeFormatError(f"transform must be 4x4, got {m.shape}")
    with open(path, "w", encoding="utf-8") as fh:
        for row in m:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_transform(path: str) -> np.ndarray:
    if not os.path.exists(path):
        raise VolumeFormatError(f"missing transform file {path}")
    with open(path, encoding="utf-8") as fh:
        tokens = fh.read().split()
    if len(tokens) != 16:
        raise VolumeFormatError(
            f"{path}: transform file needs 16 numbers, found {len(tokens)}"
        )
    try:
        values = [float(t) for t in tokens]
    except ValueError as exc:
        raise VolumeFormatError(f"{path}: non-numeric transform entry") from exc
    return np.array(values, dtype=np.float64).reshape(4, 4)
