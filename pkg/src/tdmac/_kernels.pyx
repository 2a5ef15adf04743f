# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernels.

Expression-for-expression mirror of _kernels_py (which in turn inlines
_model). Bit-identical results are a hard requirement: integer phase
quanta everywhere, float math in the same evaluation order, no FMA
contraction (see setup.py). Any change must be applied to both modules.
"""

import numpy as np

from .errors import (
    CounterOverflowError,
    DomainError,
    InputRangeError,
    ModelValidityError,
)

from libc.math cimport cos, floor, isfinite, isinf, log, sqrt, tanh
from libc.stdint cimport int64_t, uint64_t

KERNEL_NAME = "compiled"

cdef double TWO_PI = 2.0 * 3.141592653589793
cdef int SUBBIN_BITS = 30
cdef int64_t SUBBIN = (<int64_t>1) << 30
# int64 safety margin for the phase accumulators; reached only by
# schedules ~1e8 CCO cycles long, far beyond any MAC use
cdef int64_t QUANTA_CAP = (<int64_t>1) << 62
cdef double QUANTA_CAP_D = 4.611686018427388e18

cdef uint64_t SM64_GAMMA = 0x9E3779B97F4A7C15u
cdef uint64_t SM64_MIX1 = 0xBF58476D1CE4E5B9u
cdef uint64_t SM64_MIX2 = 0x94D049BB133111EBu
cdef uint64_t POINT_STREAM_SALT = 0xD1B54A32D192ED03u
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * SM64_MIX1
    z = (z ^ (z >> 27)) * SM64_MIX2
    return z ^ (z >> 31)


cdef inline uint64_t rand_u64(uint64_t seed, uint64_t k) nogil:
    return mix64(seed + (k + 1) * SM64_GAMMA)


cdef inline double unit_open(uint64_t h) nogil:
    return <double>((h >> 11) + 1) * INV_2_53


cdef inline double gauss(uint64_t seed, uint64_t idx) nogil:
    cdef double u1 = unit_open(rand_u64(seed, 2 * idx))
    cdef double u2 = unit_open(rand_u64(seed, 2 * idx + 1))
    return sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)


cdef inline int64_t fdiv(int64_t a, int64_t b) nogil:
    # floor division matching Python's //
    cdef int64_t q = a / b
    if a % b != 0 and ((a < 0) != (b < 0)):
        q -= 1
    return q


def run_schedule(d, x, ticks, signs, t_hold, record_steps):
    """See _kernels_py.run_schedule."""
    cdef double gm_eff = d.gm_eff
    cdef double vi_sat = d.vi_sat
    cdef bint sat_off = isinf(vi_sat) != 0
    cdef double kcco = d.kcco
    cdef double f0 = d.f0
    cdef double a2 = d.alpha2
    cdef double a3 = d.alpha3
    cdef double fs = d.v_fullscale
    cdef double t_lsb = d.t_lsb
    cdef double qpc = d.quanta_per_cycle
    cdef double qpr = d.quanta_per_rad
    cdef int64_t cyc = d.cycle_quanta
    cdef int64_t max_count = d.max_count
    cdef double sigma = d.noise_sigma
    cdef uint64_t seed = d.seed
    cdef double f_idle = d.f_idle
    cdef double levels_f = d.levels_f

    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef long long[::1] tv = np.ascontiguousarray(ticks, dtype=np.longlong)
    cdef long long[::1] sv = np.ascontiguousarray(signs, dtype=np.longlong)
    cdef Py_ssize_t n = xv.shape[0]
    if tv.shape[0] != n or sv.shape[0] != n:
        raise ValueError("x, ticks and signs must have equal length")

    cdef double hold_b = floor(f_idle * (<double>t_hold) * levels_f + 0.5)
    if hold_b >= QUANTA_CAP_D:
        raise CounterOverflowError("hold advance exceeds compiled kernel range")
    cdef int64_t hold_adv = (<int64_t>hold_b) * SUBBIN

    cdef int64_t q_p = 0, q_n = 0, n_a = 0, n_b = 0, n_p = 0, n_n = 0
    cdef double v, i, dev, u, f_pos, f_neg, dt, inc_a, inc_b
    cdef Py_ssize_t j
    trace = [] if record_steps else None
    for j in range(n):
        v = xv[j]
        if not isfinite(v):
            raise DomainError(f"non-finite input sample {v!r} at index {j}")
        if v > fs or v < -fs:
            raise InputRangeError(
                f"input {v} V exceeds +/-{fs} V full scale at sample {j}",
                sample_index=j,
            )
        if sat_off:
            i = gm_eff * v
        else:
            i = gm_eff * (vi_sat * tanh(v / vi_sat))
        dev = kcco * i
        u = dev / f0
        f_pos = f0 + dev * (1.0 + a2 * u + a3 * u * u)
        dev = -dev
        u = -u
        f_neg = f0 + dev * (1.0 + a2 * u + a3 * u * u)
        if f_pos <= 0.0 or f_neg <= 0.0:
            raise ModelValidityError(
                f"tuning curve gives non-positive frequency at sample {j}"
            )
        dt = tv[j] * t_lsb
        inc_a = floor(f_pos * dt * qpc + 0.5)
        inc_b = floor(f_neg * dt * qpc + 0.5)
        if inc_a >= QUANTA_CAP_D or inc_b >= QUANTA_CAP_D:
            raise CounterOverflowError(
                f"phase increment exceeds compiled kernel range at sample {j}"
            )
        n_a = <int64_t>inc_a
        n_b = <int64_t>inc_b
        if sv[j] >= 0:
            n_p = n_a
            n_n = n_b
        else:
            n_p = n_b
            n_n = n_a
        if sigma > 0.0:
            n_p += <int64_t>floor(gauss(seed, 2 * j) * sigma * qpr + 0.5)
            n_n += <int64_t>floor(gauss(seed, 2 * j + 1) * sigma * qpr + 0.5)
        if q_p > QUANTA_CAP - n_p or q_n > QUANTA_CAP - n_n:
            raise CounterOverflowError(
                f"phase accumulator exceeds compiled kernel range at sample {j}"
            )
        q_p += n_p
        q_n += n_n
        if fdiv(q_p, cyc) > max_count or fdiv(q_n, cyc) > max_count:
            raise CounterOverflowError(
                f"cycle count exceeded {max_count} at sample {j}"
            )
        if q_p > QUANTA_CAP - hold_adv or q_n > QUANTA_CAP - hold_adv:
            raise CounterOverflowError(
                f"phase accumulator exceeds compiled kernel range at sample {j}"
            )
        q_p += hold_adv
        q_n += hold_adv
        if fdiv(q_p, cyc) > max_count or fdiv(q_n, cyc) > max_count:
            raise CounterOverflowError(
                f"cycle count exceeded {max_count} during hold after sample {j}"
            )
        if record_steps:
            trace.append(fdiv(q_p, SUBBIN) - fdiv(q_n, SUBBIN))
    return q_p, q_n, trace


def transform_points(
    d,
    pts,
    weights,
    wt_ticks,
    wt_signs,
    off,
    scale,
    u_const,
    weight_scale,
    ideal,
    point_index_base,
):
    """See _kernels_py.transform_points."""
    cdef double[:, ::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef double[:, ::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef long long[:, ::1] tk = np.ascontiguousarray(wt_ticks, dtype=np.longlong)
    cdef long long[:, ::1] sg = np.ascontiguousarray(wt_signs, dtype=np.longlong)
    cdef Py_ssize_t n = p.shape[0]
    out_arr = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double off0 = off[0], off1 = off[1], off2 = off[2]
    cdef double c = scale
    cdef double uc = u_const
    cdef double wsc = weight_scale
    cdef double wc = wsc * c
    cdef bint is_ideal = bool(ideal)
    cdef int64_t base = point_index_base

    cdef double gm_eff = d.gm_eff
    cdef double vi_sat = d.vi_sat
    cdef bint sat_off = isinf(vi_sat) != 0
    cdef double kcco = d.kcco
    cdef double f0 = d.f0
    cdef double a2 = d.alpha2
    cdef double a3 = d.alpha3
    cdef double fs = d.v_fullscale
    cdef double t_lsb = d.t_lsb
    cdef double qpc = d.quanta_per_cycle
    cdef double qpr = d.quanta_per_rad
    cdef int64_t cyc = d.cycle_quanta
    cdef int64_t max_count = d.max_count
    cdef double sigma = d.noise_sigma
    cdef uint64_t seed = d.seed
    cdef double denom = 2.0 * d.levels_f * d.kv

    cdef Py_ssize_t nidx, j, k
    cdef double vx, vy, vz, y, v, i, dev, uu, f_pos, f_neg, dt, inc_a, inc_b
    cdef int64_t q_p, q_n, code
    cdef uint64_t seed_pt = 0
    cdef uint64_t sj
    cdef double uvals[4]

    if is_ideal:
        for nidx in range(n):
            vx = (p[nidx, 0] - off0) * c
            vy = (p[nidx, 1] - off1) * c
            vz = (p[nidx, 2] - off2) * c
            for k in range(3):
                y = vx * w[0, k] + vy * w[1, k] + vz * w[2, k] + uc * w[3, k]
                if k == 0:
                    out[nidx, 0] = y / wc + off0
                elif k == 1:
                    out[nidx, 1] = y / wc + off1
                else:
                    out[nidx, 2] = y / wc + off2
        return out_arr

    for nidx in range(n):
        uvals[0] = (p[nidx, 0] - off0) * c
        uvals[1] = (p[nidx, 1] - off1) * c
        uvals[2] = (p[nidx, 2] - off2) * c
        uvals[3] = uc
        if sigma > 0.0:
            seed_pt = rand_u64(seed ^ POINT_STREAM_SALT, <uint64_t>(base + nidx))
        for k in range(3):
            q_p = 0
            q_n = 0
            for j in range(4):
                v = uvals[j]
                if not (v >= -fs and v <= fs):
                    raise InputRangeError(
                        f"normalized coordinate {v} V outside +/-{fs} V "
                        f"full scale (point {base + nidx})",
                        sample_index=j,
                    )
                if sat_off:
                    i = gm_eff * v
                else:
                    i = gm_eff * (vi_sat * tanh(v / vi_sat))
                dev = kcco * i
                uu = dev / f0
                f_pos = f0 + dev * (1.0 + a2 * uu + a3 * uu * uu)
                dev = -dev
                uu = -uu
                f_neg = f0 + dev * (1.0 + a2 * uu + a3 * uu * uu)
                if f_pos <= 0.0 or f_neg <= 0.0:
                    raise ModelValidityError(
                        "tuning curve gives non-positive frequency "
                        f"(point {base + nidx})"
                    )
                dt = tk[j, k] * t_lsb
                inc_a = floor(f_pos * dt * qpc + 0.5)
                inc_b = floor(f_neg * dt * qpc + 0.5)
                if inc_a >= QUANTA_CAP_D or inc_b >= QUANTA_CAP_D:
                    raise CounterOverflowError(
                        f"phase increment exceeds compiled kernel range "
                        f"(point {base + nidx})"
                    )
                if sg[j, k] >= 0:
                    q_p += <int64_t>inc_a
                    q_n += <int64_t>inc_b
                else:
                    q_p += <int64_t>inc_b
                    q_n += <int64_t>inc_a
                if sigma > 0.0:
                    sj = <uint64_t>(k * 4 + j)
                    q_p += <int64_t>floor(gauss(seed_pt, 2 * sj) * sigma * qpr + 0.5)
                    q_n += <int64_t>floor(gauss(seed_pt, 2 * sj + 1) * sigma * qpr + 0.5)
            if fdiv(q_p, cyc) > max_count or fdiv(q_n, cyc) > max_count:
                raise CounterOverflowError(
                    f"cycle count exceeded {max_count} (point {base + nidx})"
                )
            code = fdiv(q_p, SUBBIN) - fdiv(q_n, SUBBIN)
            y = code / denom
            if k == 0:
                out[nidx, 0] = y / wc + off0
            elif k == 1:
                out[nidx, 1] = y / wc + off1
            else:
                out[nidx, 2] = y / wc + off2
    return out_arr
