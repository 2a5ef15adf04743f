"""Scalar physics of one time-domain MAC cell.

Every function here is a pure function of plain floats/ints. The compiled
kernel (_kernels.pyx) mirrors these expressions operation for operation;
the two execution paths must stay bit-identical, so any edit here has to
be replicated there with the same evaluation order.

Phase bookkeeping is fixed point: one quantizer bin (2pi / 2N radians) is
split into 2**30 quanta and phases are carried as integers. Integer
accumulation is what makes the differential readout exactly invariant
under hold periods, permutation of samples and common-mode idle current,
properties a float accumulator only holds approximately.
"""

import math

TWO_PI = 2.0 * math.pi

# Sub-bin resolution of the phase accumulator. 2**30 quanta per quantizer
# bin keeps per-sample rounding ~9 orders of magnitude below the readout
# LSB while leaving int64 headroom for ~1e8 CCO cycles in the compiled
# kernel (pure-Python integers are unbounded).
SUBBIN_BITS = 30
SUBBIN = 1 << SUBBIN_BITS

_MASK64 = (1 << 64) - 1
_SM64_GAMMA = 0x9E3779B97F4A7C15
_SM64_MIX1 = 0xBF58476D1CE4E5B9
_SM64_MIX2 = 0x94D049BB133111EB
_POINT_STREAM_SALT = 0xD1B54A32D192ED03

# one ulp above 2**-53, maps a 53-bit integer + 1 into (0, 1]
_INV_2_53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """Finalizer of the splitmix64 generator (64-bit avalanche)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _SM64_MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _SM64_MIX2) & _MASK64
    return z ^ (z >> 31)


def rand_u64(seed: int, k: int) -> int:
    """k-th 64-bit word of the counter-based stream for `seed`."""
    return mix64((seed + (k + 1) * _SM64_GAMMA) & _MASK64)


def unit_open(h: int) -> float:
    """Map a 64-bit word to a uniform in (0, 1]."""
    return ((h >> 11) + 1) * _INV_2_53


def gauss(seed: int, idx: int) -> float:
    """idx-th standard normal draw of the stream (Box-Muller, cosine leg)."""
    u1 = unit_open(rand_u64(seed, 2 * idx))
    u2 = unit_open(rand_u64(seed, 2 * idx + 1))
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(TWO_PI * u2)


def point_stream(seed: int, point_index: int) -> int:
    """Independent noise stream seed for one point of a batch transform."""
    return rand_u64(seed ^ _POINT_STREAM_SALT, point_index)


def effective_gm(gm: float, r_deg: float) -> float:
    """Degenerated transconductance gm / (1 + gm*R); tends to 1/R for gm*R >> 1."""
    return gm / (1.0 + gm * r_deg)


def soft_limit(v: float, vi_sat: float) -> float:
    """Odd soft clip of the input voltage; vi_sat = inf disables it."""
    if math.isinf(vi_sat):
        return v
    return vi_sat * math.tanh(v / vi_sat)


def branch_current(gm_eff: float, vi_sat: float, v: float) -> float:
    """Differential output current of the V/I converter for input v."""
    return gm_eff * soft_limit(v, vi_sat)


def cco_frequency(
    f0: float, kcco: float, alpha2: float, alpha3: float, i: float
) -> float:
    """Tuning curve: f0 plus a polynomially distorted current deviation.

    u is the fractional frequency deviation, so alpha2/alpha3 express the
    relative tuning-curve error at full deviation. Returns a value <= 0
    when the operating point leaves the oscillation region; callers treat
    that as a model-validity failure.
    """
    dev = kcco * i
    u = dev / f0
    return f0 + dev * (1.0 + alpha2 * u + alpha3 * u * u)


def phase_increment_rad(f: float, dt: float) -> float:
    """Closed-form phase advance of one CCO over a constant-input pulse."""
    return TWO_PI * f * dt


def increment_quanta(f: float, dt: float, quanta_per_cycle: float) -> int:
    """Pulse phase advance, rounded to the fixed-point grid."""
    return int(math.floor(f * dt * quanta_per_cycle + 0.5))


def hold_bins(f_idle: float, duration: float, levels: float) -> int:
    """Idle phase advance in whole quantizer bins (levels = 2N per cycle).

    Quantizing the common-mode advance to whole bins is what makes the
    differential code exactly independent of hold duration and idle
    frequency.
    """
    return int(math.floor(f_idle * duration * levels + 0.5))


def noise_quanta(g: float, sigma: float, quanta_per_rad: float) -> int:
    """White phase-noise draw converted to quanta (round half up)."""
    return int(math.floor(g * sigma * quanta_per_rad + 0.5))
