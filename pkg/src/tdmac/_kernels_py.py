"""Pure-Python batch kernels.

Same contract as the compiled module _kernels; selected by
tdmac.kernels when the extension is unavailable or disabled. The inner
loops inline the expressions of _model (kept in sync; the cross-kernel
equality tests catch drift) because per-call overhead dominates here.

Results are bit-identical to the compiled kernels: all phase bookkeeping
is integer and every float expression is written in the same evaluation
order as its C counterpart.
"""

import math

import numpy as np

from ._model import (
    SUBBIN,
    TWO_PI,
    gauss,
    hold_bins,
    point_stream,
)
from .errors import (
    CounterOverflowError,
    DomainError,
    InputRangeError,
    ModelValidityError,
)

KERNEL_NAME = "python"


def run_schedule(d, x, ticks, signs, t_hold, record_steps):
    """Full accumulate/hold schedule from a fresh cell.

    x: input samples in volts; ticks/signs: pulse widths in t_lsb units
    and steering signs. Returns (q_p, q_n, trace) where trace is the
    per-step differential code list or None.
    """
    gm_eff = d.gm_eff
    vi_sat = d.vi_sat
    sat_off = math.isinf(vi_sat)
    kcco = d.kcco
    f0 = d.f0
    a2 = d.alpha2
    a3 = d.alpha3
    fs = d.v_fullscale
    t_lsb = d.t_lsb
    qpc = d.quanta_per_cycle
    qpr = d.quanta_per_rad
    cyc = d.cycle_quanta
    max_count = d.max_count
    sigma = d.noise_sigma
    seed = d.seed
    floor = math.floor

    hold_adv = hold_bins(d.f_idle, t_hold, d.levels_f) * SUBBIN

    q_p = 0
    q_n = 0
    trace = [] if record_steps else None
    for j in range(len(x)):
        v = x[j]
        if not math.isfinite(v):
            raise DomainError(f"non-finite input sample {v!r} at index {j}")
        if v > fs or v < -fs:
            raise InputRangeError(
                f"input {v} V exceeds +/-{fs} V full scale at sample {j}",
                sample_index=j,
            )
        if sat_off:
            i = gm_eff * v
        else:
            i = gm_eff * (vi_sat * math.tanh(v / vi_sat))
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
        dt = ticks[j] * t_lsb
        n_a = int(floor(f_pos * dt * qpc + 0.5))
        n_b = int(floor(f_neg * dt * qpc + 0.5))
        if signs[j] >= 0:
            n_p, n_n = n_a, n_b
        else:
            n_p, n_n = n_b, n_a
        if sigma > 0.0:
            n_p += int(floor(gauss(seed, 2 * j) * sigma * qpr + 0.5))
            n_n += int(floor(gauss(seed, 2 * j + 1) * sigma * qpr + 0.5))
        q_p += n_p
        q_n += n_n
        if q_p // cyc > max_count or q_n // cyc > max_count:
            raise CounterOverflowError(
                f"cycle count exceeded {max_count} at sample {j}"
            )
        q_p += hold_adv
        q_n += hold_adv
        if q_p // cyc > max_count or q_n // cyc > max_count:
            raise CounterOverflowError(
                f"cycle count exceeded {max_count} during hold after sample {j}"
            )
        if record_steps:
            trace.append(q_p // SUBBIN - q_n // SUBBIN)
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
    """Map (N, 3) coordinates through an affine matrix via MAC dot products.

    weights is a (4, 3) array of weight values in seconds (constant-term
    row already folded for centered inputs); wt_ticks/wt_signs are their
    pulse realizations. ideal=True computes the exact dot products,
    otherwise every coordinate is produced by the cell model.
    """
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    n = pts.shape[0]
    out = np.empty((n, 3), dtype=np.float64)
    off0, off1, off2 = float(off[0]), float(off[1]), float(off[2])
    c = float(scale)
    uc = float(u_const)
    wc = weight_scale * c

    if ideal:
        vx = (pts[:, 0] - off0) * c
        vy = (pts[:, 1] - off1) * c
        vz = (pts[:, 2] - off2) * c
        offs = (off0, off1, off2)
        for k in range(3):
            y = vx * weights[0, k] + vy * weights[1, k] + vz * weights[2, k] \
                + uc * weights[3, k]
            out[:, k] = y / wc + offs[k]
        return out

    gm_eff = d.gm_eff
    vi_sat = d.vi_sat
    sat_off = math.isinf(vi_sat)
    kcco = d.kcco
    f0 = d.f0
    a2 = d.alpha2
    a3 = d.alpha3
    fs = d.v_fullscale
    t_lsb = d.t_lsb
    qpc = d.quanta_per_cycle
    qpr = d.quanta_per_rad
    cyc = d.cycle_quanta
    max_count = d.max_count
    sigma = d.noise_sigma
    seed = d.seed
    denom = 2.0 * d.levels_f * d.kv
    floor = math.floor

    ticks = [[int(wt_ticks[j, k]) for k in range(3)] for j in range(4)]
    sgns = [[int(wt_signs[j, k]) for k in range(3)] for j in range(4)]
    offs = (off0, off1, off2)

    px = pts[:, 0].tolist()
    py = pts[:, 1].tolist()
    pz = pts[:, 2].tolist()
    for nidx in range(n):
        u = (
            (px[nidx] - off0) * c,
            (py[nidx] - off1) * c,
            (pz[nidx] - off2) * c,
            uc,
        )
        if sigma > 0.0:
            seed_pt = point_stream(seed, point_index_base + nidx)
        for k in range(3):
            q_p = 0
            q_n = 0
            for j in range(4):
                v = u[j]
                # the double comparison also rejects NaN coordinates
                if not (-fs <= v <= fs):
                    raise InputRangeError(
                        f"normalized coordinate {v} V outside +/-{fs} V "
                        f"full scale (point {point_index_base + nidx})",
                        sample_index=j,
                    )
                if sat_off:
                    i = gm_eff * v
                else:
                    i = gm_eff * (vi_sat * math.tanh(v / vi_sat))
                dev = kcco * i
                uu = dev / f0
                f_pos = f0 + dev * (1.0 + a2 * uu + a3 * uu * uu)
                dev = -dev
                uu = -uu
                f_neg = f0 + dev * (1.0 + a2 * uu + a3 * uu * uu)
                if f_pos <= 0.0 or f_neg <= 0.0:
                    raise ModelValidityError(
                        "tuning curve gives non-positive frequency "
                        f"(point {point_index_base + nidx})"
                    )
                dt = ticks[j][k] * t_lsb
                n_a = int(floor(f_pos * dt * qpc + 0.5))
                n_b = int(floor(f_neg * dt * qpc + 0.5))
                if sgns[j][k] >= 0:
                    q_p += n_a
                    q_n += n_b
                else:
                    q_p += n_b
                    q_n += n_a
                if sigma > 0.0:
                    sj = k * 4 + j
                    q_p += int(floor(gauss(seed_pt, 2 * sj) * sigma * qpr + 0.5))
                    q_n += int(floor(gauss(seed_pt, 2 * sj + 1) * sigma * qpr + 0.5))
            if q_p // cyc > max_count or q_n // cyc > max_count:
                raise CounterOverflowError(
                    f"cycle count exceeded {max_count} "
                    f"(point {point_index_base + nidx})"
                )
            code = q_p // SUBBIN - q_n // SUBBIN
            value = code / denom
            out[nidx, k] = value / wc + offs[k]
    return out
