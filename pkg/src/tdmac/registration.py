"""Rigid registration on top of the MAC backends.

Row-vector convention throughout: a point is the row [x y z 1], a
transform acts by right multiplication, translations occupy the bottom
row, and compose([A, B]) applies A first. Most references use column
vectors; everything here is the transpose of that convention.

Each transformed coordinate is one length-4 dot product. On the cell
backend the matrix column becomes four weight pulses (quantized to the
pulse grid) and the point becomes four input voltages via a shared
normalization, so a full volume resampling is nothing but MAC traffic.
"""

import math
from dataclasses import dataclass
from multiprocessing import Pool

import numpy as np

from . import kernels
from .cell import MacCellConfig, derive
from .errors import ConfigError, SingularTransformError
from .mac import Backend
from .volume_io import VoxelVolume

# pulse grid steps per unit matrix entry; 1e-5 s at the default 1 ns LSB
# gives 10000 ticks per unit weight
DEFAULT_WEIGHT_SCALE = 1.0e-5

_OPS_PER_POINT = 12  # 3 dot products x 4 terms


@dataclass(frozen=True)
class RigidTransform:
    """4x4 homogeneous matrix, row-vector convention."""

    m: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.m, dtype=np.float64)
        if a.shape != (4, 4):
            raise ConfigError(f"transform must be 4x4, got {a.shape}")
        object.__setattr__(self, "m", a)

    def inverse(self) -> "RigidTransform":
        try:
            inv = np.linalg.inv(self.m)
        except np.linalg.LinAlgError as exc:
            raise SingularTransformError("transform is singular") from exc
        if not np.all(np.isfinite(inv)):
            raise SingularTransformError("transform is numerically singular")
        return RigidTransform(m=inv)

    def apply_exact(self, pts: np.ndarray) -> np.ndarray:
        """Exact affine map of (N, 3) points (no backend involved)."""
        pts = np.asarray(pts, dtype=np.float64)
        return pts @ self.m[:3, :3] + self.m[3, :3]


def build_translation_scaling(s, t) -> RigidTransform:
    """Diagonal scaling with the translation in the bottom row."""
    sx, sy, sz = (float(v) for v in s)
    tx, ty, tz = (float(v) for v in t)
    if sx == 0.0 or sy == 0.0 or sz == 0.0:
        raise SingularTransformError(f"zero scale factor in {s!r}")
    m = np.array(
        [
            [sx, 0.0, 0.0, 0.0],
            [0.0, sy, 0.0, 0.0],
            [0.0, 0.0, sz, 0.0],
            [tx, ty, tz, 1.0],
        ]
    )
    return RigidTransform(m=m)


def build_rotation(axis: str, theta: float) -> RigidTransform:
    """Right-handed rotation about a coordinate axis, row-vector form."""
    if not math.isfinite(theta):
        raise ConfigError(f"rotation angle must be finite, got {theta}")
    c = math.cos(theta)
    s = math.sin(theta)
    axis = axis.lower()
    if axis == "x":
        m = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, c, s, 0.0],
            [0.0, -s, c, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    elif axis == "y":
        m = [
            [c, 0.0, -s, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [s, 0.0, c, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    elif axis == "z":
        m = [
            [c, s, 0.0, 0.0],
            [-s, c, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    else:
        raise ConfigError(f"axis must be x, y or z, got {axis!r}")
    return RigidTransform(m=np.array(m))


def compose(transforms) -> RigidTransform:
    """Left-to-right product; the first listed transform applies first."""
    transforms = list(transforms)
    if not transforms:
        raise ConfigError("compose needs at least one transform")
    m = transforms[0].m
    for t in transforms[1:]:
        m = m @ t.m
    return RigidTransform(m=m)


@dataclass(frozen=True)
class CoordNormalization:
    """Affine map between voxel coordinates and cell input voltages.

    volts = (coord - offset) * scale, per axis; u_const is the voltage
    driven on the homogeneous input channel.
    """

    offset: tuple[float, float, float]
    scale: float
    u_const: float

    @classmethod
    def for_dims(
        cls, dims, cfg: MacCellConfig, margin: float = 0.9
    ) -> "CoordNormalization":
        """Center the grid and map its bounding-box diagonal to
        margin * full scale (the headroom keeps soft saturation away)."""
        nx, ny, nz = dims
        offset = ((nx - 1) / 2.0, (ny - 1) / 2.0, (nz - 1) / 2.0)
        half_diag = 0.5 * math.sqrt(
            (nx - 1) ** 2 + (ny - 1) ** 2 + (nz - 1) ** 2
        )
        if half_diag <= 0.0:
            half_diag = 0.5
        return cls(
            offset=offset,
            scale=margin * cfg.v_fullscale / half_diag,
            u_const=margin * cfg.v_fullscale,
        )

    def to_volts(self, p) -> tuple[float, float, float]:
        return tuple((float(p[k]) - self.offset[k]) * self.scale for k in range(3))

    def from_volts(self, v) -> tuple[float, float, float]:
        return tuple(float(v[k]) / self.scale + self.offset[k] for k in range(3))


def _prepare_weights(
    t: RigidTransform, norm: CoordNormalization, weight_scale: float, cfg: MacCellConfig
):
    """Weights (seconds) for the three dot products, constant row folded.

    Column k maps to weights [m0k, m1k, m2k] * W for the coordinate
    inputs plus a constant-channel weight absorbing both the translation
    row and the centering offsets. Pulse realizations round to the grid;
    that rounding is part of the physical model, not an error.
    """
    m = t.m
    off = norm.offset
    w = np.empty((4, 3), dtype=np.float64)
    for k in range(3):
        w[0, k] = m[0, k] * weight_scale
        w[1, k] = m[1, k] * weight_scale
        w[2, k] = m[2, k] * weight_scale
        b = m[3, k] + off[0] * m[0, k] + off[1] * m[1, k] + off[2] * m[2, k] - off[k]
        w[3, k] = weight_scale * norm.scale * b / norm.u_const
    ticks = np.empty((4, 3), dtype=np.longlong)
    signs = np.empty((4, 3), dtype=np.longlong)
    for j in range(4):
        for k in range(3):
            ticks[j, k] = int(math.floor(abs(w[j, k]) / cfg.t_lsb + 0.5))
            signs[j, k] = 1 if w[j, k] >= 0.0 else -1
    return w, ticks, signs


def transform_points_batch(
    t: RigidTransform,
    pts: np.ndarray,
    backend: Backend,
    cfg: MacCellConfig,
    norm: CoordNormalization,
    weight_scale: float = DEFAULT_WEIGHT_SCALE,
    point_index_base: int = 0,
) -> np.ndarray:
    """Map (N, 3) points through t on the chosen backend."""
    w, ticks, signs = _prepare_weights(t, norm, weight_scale, cfg)
    return kernels.transform_points(
        derive(cfg),
        np.ascontiguousarray(pts, dtype=np.float64),
        w,
        ticks,
        signs,
        norm.offset,
        norm.scale,
        norm.u_const,
        weight_scale,
        backend is Backend.IDEAL,
        point_index_base,
    )


def transform_point(
    t: RigidTransform,
    p,
    backend: Backend,
    cfg: MacCellConfig,
    norm: CoordNormalization,
    weight_scale: float = DEFAULT_WEIGHT_SCALE,
) -> tuple[float, float, float]:
    """Map one point: three length-4 dot products on the backend."""
    out = transform_points_batch(
        t, np.array([p], dtype=np.float64), backend, cfg, norm, weight_scale
    )
    return (float(out[0, 0]), float(out[0, 1]), float(out[0, 2]))


@dataclass
class ResampleResult:
    volume: VoxelVolume
    ops_count: int


def _output_grid(dims) -> np.ndarray:
    """Voxel center coordinates in x-fastest linear order, (N, 3)."""
    nx, ny, nz = dims
    ix = np.arange(nx, dtype=np.float64)
    iy = np.arange(ny, dtype=np.float64)
    iz = np.arange(nz, dtype=np.float64)
    gx, gy, gz = np.meshgrid(ix, iy, iz, indexing="ij")
    pts = np.empty((nx * ny * nz, 3), dtype=np.float64)
    # linear index = ix + nx * (iy + ny * iz), matching the file ordering
    pts[:, 0] = gx.reshape(-1, order="F")
    pts[:, 1] = gy.reshape(-1, order="F")
    pts[:, 2] = gz.reshape(-1, order="F")
    return pts


_worker_ctx = {}


def _init_worker(inv, cfg, norm, weight_scale, backend_name):
    _worker_ctx["args"] = (inv, cfg, norm, weight_scale, backend_name)


def _run_chunk(task):
    start, pts = task
    inv, cfg, norm, weight_scale, backend_name = _worker_ctx["args"]
    return transform_points_batch(
        inv,
        pts,
        Backend.parse(backend_name),
        cfg,
        norm,
        weight_scale,
        point_index_base=start,
    )


def resample_volume(
    src: VoxelVolume,
    t: RigidTransform,
    backend: Backend,
    cfg: MacCellConfig,
    weight_scale: float = DEFAULT_WEIGHT_SCALE,
    workers: int = 1,
) -> ResampleResult:
    """Inverse-mapping nearest-neighbor resampling.

    Every output voxel center is pulled back through the exact inverse of
    t; the pull-back itself runs on the chosen backend. Out-of-bounds
    reads return the background value. Worker partitioning cannot change
    the result: points are independent and noise streams key off the
    global voxel index.
    """
    inv = t.inverse()
    dims = src.dims
    norm = CoordNormalization.for_dims(dims, cfg)
    pts = _output_grid(dims)
    n = pts.shape[0]
    if workers <= 1:
        src_coords = transform_points_batch(
            inv, pts, backend, cfg, norm, weight_scale, point_index_base=0
        )
    else:
        bounds = [(i * n) // workers for i in range(workers + 1)]
        tasks = [
            (bounds[i], pts[bounds[i] : bounds[i + 1]])
            for i in range(workers)
            if bounds[i + 1] > bounds[i]
        ]
        with Pool(
            processes=len(tasks),
            initializer=_init_worker,
            initargs=(inv, cfg, norm, weight_scale, backend.value),
        ) as pool:
            parts = pool.map(_run_chunk, tasks)
        src_coords = np.vstack(parts)

    nearest = np.floor(src_coords + 0.5).astype(np.int64)
    nx, ny, nz = dims
    valid = (
        (nearest[:, 0] >= 0)
        & (nearest[:, 0] < nx)
        & (nearest[:, 1] >= 0)
        & (nearest[:, 1] < ny)
        & (nearest[:, 2] >= 0)
        & (nearest[:, 2] < nz)
    )
    flat = np.full(n, src.background, dtype=src.data.dtype)
    idx = nearest[valid]
    flat[valid] = src.data[idx[:, 0], idx[:, 1], idx[:, 2]]
    out = VoxelVolume(
        data=flat.reshape(dims, order="F"),
        spacing=src.spacing,
        background=src.background,
    )
    return ResampleResult(volume=out, ops_count=n * _OPS_PER_POINT)
