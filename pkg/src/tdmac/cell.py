"""Pseudo-differential time-domain MAC cell.

One cell is a V/I converter driving two matched current-controlled ring
oscillators. A weight pulse of width ticks * t_lsb steers +i into one CCO
and -i into the other: each ring's phase moves by 2pi * kv * v * dt, so
the differential phase picks up twice that (phase-domain multiply).
Between pulses both CCOs idle at the same frequency and the differential
phase holds (accumulate). Readout latches each ring into 2N levels per
cycle plus a whole-cycle counter; the result of a MAC is the change of
the differential code.

Phases are stored as integer quanta (see _model) so that holds, sample
permutations and idle-current changes leave the differential code exactly
unchanged, not merely to rounding.
"""

import math
from collections import namedtuple
from dataclasses import dataclass
from functools import lru_cache

from . import _model, kernels
from ._model import SUBBIN, TWO_PI
from .errors import (
    ConfigError,
    CounterOverflowError,
    DimensionMismatchError,
    DomainError,
    InputRangeError,
    ModelValidityError,
)

# Frozen output of the nonlinearity calibration (metrics.calibrate_default_config
# with target 7.25 effective bits on the 512-sample sine run).
DEFAULT_ALPHA3 = 0.02375


@dataclass(frozen=True)
class MacCellConfig:
    """Physical and architectural parameters of one cell.

    kv           small-signal gain from input voltage to CCO frequency, Hz/V
    f0           free-running CCO frequency, Hz
    n_stages     ring stages (odd); instantaneous phase quantizes to 2N levels
    r_deg        source degeneration resistance of the V/I input pair, ohm
    gm           V/I input-pair transconductance, S
    i_low        common idle current during hold windows, A
    v_fullscale  differential input full scale, V (inputs beyond it error out)
    t_lsb        granularity of the digitally controlled pulse width, s
    alpha2/3     relative tuning-curve distortion at unit fractional deviation
    vi_sat       V/I soft-clip scale, V; inf = ideally linear converter
    noise_sigma  white phase-noise sigma per accumulate and per CCO, rad
    counter_bits width of the whole-cycle counter; exceeding it raises
    seed         base of the counter-addressed noise stream
    """

    kv: float = 1.0e8
    f0: float = 100.0e6
    n_stages: int = 15
    r_deg: float = 10.0e3
    gm: float = 10.0e-3
    i_low: float = 0.0
    v_fullscale: float = 0.4
    t_lsb: float = 1.0e-9
    alpha2: float = 0.0
    alpha3: float = DEFAULT_ALPHA3
    vi_sat: float = math.inf
    noise_sigma: float = 0.0
    counter_bits: int = 32
    seed: int = 0

    def __post_init__(self):
        if not (self.kv > 0.0 and math.isfinite(self.kv)):
            raise ConfigError(f"kv must be positive and finite, got {self.kv}")
        if not (self.f0 > 0.0 and math.isfinite(self.f0)):
            raise ConfigError(f"f0 must be positive and finite, got {self.f0}")
        if self.n_stages < 3 or self.n_stages % 2 == 0:
            raise ConfigError(f"n_stages must be odd and >= 3, got {self.n_stages}")
        if not (self.t_lsb > 0.0 and math.isfinite(self.t_lsb)):
            raise ConfigError(f"t_lsb must be positive and finite, got {self.t_lsb}")
        if not (self.v_fullscale > 0.0 and math.isfinite(self.v_fullscale)):
            raise ConfigError(f"v_fullscale must be positive, got {self.v_fullscale}")
        if self.counter_bits < 1:
            raise ConfigError(f"counter_bits must be >= 1, got {self.counter_bits}")
        if self.noise_sigma < 0.0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.gm <= 0.0 or self.r_deg < 0.0:
            raise ConfigError("gm must be > 0 and r_deg >= 0")
        if self.vi_sat <= 0.0:
            raise ConfigError(f"vi_sat must be positive (inf disables), got {self.vi_sat}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        for name in ("alpha2", "alpha3", "i_low"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite, got {getattr(self, name)}")


DerivedParams = namedtuple(
    "DerivedParams",
    [
        "gm_eff",            # degenerated V/I transconductance, S
        "kcco",              # current-to-frequency gain, Hz/A
        "f_idle",            # common CCO frequency during holds, Hz
        "levels",            # 2 * n_stages, int
        "levels_f",          # same as float
        "cycle_quanta",      # phase quanta per full cycle, int
        "quanta_per_cycle",  # same as float
        "quanta_per_rad",    # phase quanta per radian, float
        "max_count",         # counter ceiling, 2**counter_bits - 1
        "f0",
        "kv",
        "t_lsb",
        "v_fullscale",
        "vi_sat",
        "alpha2",
        "alpha3",
        "noise_sigma",
        "seed",
    ],
)


@lru_cache(maxsize=64)
def derive(cfg: MacCellConfig) -> DerivedParams:
    """Precompute the constants the per-sample loop needs.

    kcco is chosen so the end-to-end small-signal gain through the V/I
    converter equals kv exactly; the idle frequency is evaluated once so
    both execution paths see the identical double.
    """
    gm_eff = _model.effective_gm(cfg.gm, cfg.r_deg)
    kcco = cfg.kv / gm_eff
    levels = 2 * cfg.n_stages
    f_idle = _model.cco_frequency(cfg.f0, kcco, cfg.alpha2, cfg.alpha3, cfg.i_low)
    if f_idle <= 0.0:
        raise ModelValidityError(
            f"idle operating point yields non-positive frequency {f_idle}"
        )
    cycle_quanta = levels * SUBBIN
    return DerivedParams(
        gm_eff=gm_eff,
        kcco=kcco,
        f_idle=f_idle,
        levels=levels,
        levels_f=float(levels),
        cycle_quanta=cycle_quanta,
        quanta_per_cycle=float(cycle_quanta),
        quanta_per_rad=float(cycle_quanta) / TWO_PI,
        max_count=(1 << cfg.counter_bits) - 1,
        f0=cfg.f0,
        kv=cfg.kv,
        t_lsb=cfg.t_lsb,
        v_fullscale=cfg.v_fullscale,
        vi_sat=cfg.vi_sat,
        alpha2=cfg.alpha2,
        alpha3=cfg.alpha3,
        noise_sigma=cfg.noise_sigma,
        seed=cfg.seed,
    )


@dataclass(frozen=True)
class WeightPulse:
    """One weight: a pulse of ticks * t_lsb seconds and a steering sign."""

    ticks: int
    sign: int = 1

    def __post_init__(self):
        if self.ticks < 0:
            raise ConfigError(f"pulse ticks must be >= 0, got {self.ticks}")
        if self.sign not in (-1, 1):
            raise ConfigError(f"pulse sign must be +1 or -1, got {self.sign}")


@dataclass(frozen=True)
class CellState:
    """Complete state of a cell: both phase accumulators in quanta.

    q_p / q_n are non-negative integers; one quantizer bin is SUBBIN
    quanta and one cycle is 2 * n_stages bins. noise_index counts
    accumulate calls so the counter-based noise stream is reproducible.
    cal_code records the last tail-current code applied to this cell's
    configuration (bookkeeping only; the correction itself lives in the
    config's effective f0).
    """

    q_p: int = 0
    q_n: int = 0
    noise_index: int = 0
    cal_code: int = 0

    @classmethod
    def from_phases(cls, cfg: MacCellConfig, phase_p: float, phase_n: float,
                    noise_index: int = 0, cal_code: int = 0) -> "CellState":
        """Build a state from unwrapped phases in radians (rounded to quanta)."""
        if phase_p < 0.0 or phase_n < 0.0:
            raise DomainError("phases must be non-negative")
        d = derive(cfg)
        q_p = int(math.floor(phase_p / TWO_PI * d.quanta_per_cycle + 0.5))
        q_n = int(math.floor(phase_n / TWO_PI * d.quanta_per_cycle + 0.5))
        return cls(q_p=q_p, q_n=q_n, noise_index=noise_index, cal_code=cal_code)

    def phase_p_rad(self, cfg: MacCellConfig) -> float:
        d = derive(cfg)
        return self.q_p / d.quanta_per_cycle * TWO_PI

    def phase_n_rad(self, cfg: MacCellConfig) -> float:
        d = derive(cfg)
        return self.q_n / d.quanta_per_cycle * TWO_PI

    def count_p(self, cfg: MacCellConfig) -> int:
        return self.q_p // derive(cfg).cycle_quanta

    def count_n(self, cfg: MacCellConfig) -> int:
        return self.q_n // derive(cfg).cycle_quanta


@dataclass(frozen=True)
class PhaseReading:
    """Latched snapshot: per-CCO cycle count and 2N-level instantaneous phase.

    code_diff is (2N * count_p + inst_p) - (2N * count_n + inst_n); the
    levels field carries 2N so total per-CCO codes can be reconstructed.
    """

    count_p: int
    count_n: int
    inst_p: int
    inst_n: int
    code_diff: int
    levels: int

    @property
    def code_p(self) -> int:
        return self.levels * self.count_p + self.inst_p

    @property
    def code_n(self) -> int:
        return self.levels * self.count_n + self.inst_n


def vi_convert(cfg: MacCellConfig, v_diff: float, sample_index: int | None = None) -> float:
    """Differential input voltage to differential current.

    Hard range check first (overrange is an error, not a clip); the soft
    limit only shapes in-range values.
    """
    if not math.isfinite(v_diff):
        raise DomainError(f"non-finite input sample {v_diff!r}")
    if abs(v_diff) > cfg.v_fullscale:
        where = "" if sample_index is None else f" at sample {sample_index}"
        raise InputRangeError(
            f"input {v_diff} V exceeds +/-{cfg.v_fullscale} V full scale{where}",
            sample_index=sample_index,
        )
    d = derive(cfg)
    return _model.branch_current(d.gm_eff, cfg.vi_sat, v_diff)


def cco_freq(cfg: MacCellConfig, i: float) -> float:
    """Instantaneous CCO frequency for a branch current."""
    d = derive(cfg)
    f = _model.cco_frequency(cfg.f0, d.kcco, cfg.alpha2, cfg.alpha3, i)
    if f <= 0.0:
        raise ModelValidityError(
            f"tuning curve gives non-positive frequency {f} Hz at i={i} A"
        )
    return f


def _check_counts(q_p: int, q_n: int, d: DerivedParams) -> None:
    if q_p // d.cycle_quanta > d.max_count or q_n // d.cycle_quanta > d.max_count:
        raise CounterOverflowError(
            f"cycle count exceeded {d.max_count} (counter width)"
        )


def accumulate_sample(
    state: CellState, cfg: MacCellConfig, v_in: float, pulse: WeightPulse
) -> CellState:
    """Run one weight pulse: +i into one CCO, -i into the other.

    The input is held constant over the pulse, so each phase advance is
    closed form. The pulse sign swaps which CCO receives +i (signed
    weights by chopping).
    """
    d = derive(cfg)
    i = vi_convert(cfg, v_in, sample_index=state.noise_index)
    f_pos = cco_freq(cfg, i)
    f_neg = cco_freq(cfg, -i)
    dt = pulse.ticks * cfg.t_lsb
    n_a = _model.increment_quanta(f_pos, dt, d.quanta_per_cycle)
    n_b = _model.increment_quanta(f_neg, dt, d.quanta_per_cycle)
    if pulse.sign >= 0:
        n_p, n_n = n_a, n_b
    else:
        n_p, n_n = n_b, n_a
    if cfg.noise_sigma > 0.0:
        j = state.noise_index
        n_p += _model.noise_quanta(
            _model.gauss(cfg.seed, 2 * j), cfg.noise_sigma, d.quanta_per_rad
        )
        n_n += _model.noise_quanta(
            _model.gauss(cfg.seed, 2 * j + 1), cfg.noise_sigma, d.quanta_per_rad
        )
    q_p = state.q_p + n_p
    q_n = state.q_n + n_n
    _check_counts(q_p, q_n, d)
    return CellState(
        q_p=q_p, q_n=q_n, noise_index=state.noise_index + 1, cal_code=state.cal_code
    )


def idle_hold(state: CellState, cfg: MacCellConfig, duration: float) -> CellState:
    """Run both CCOs at the common idle frequency for `duration` seconds.

    The advance is quantized to whole quantizer bins and added to both
    accumulators, so a reading's code_diff before and after is the same
    integer for any duration and any idle current.
    """
    if duration < 0.0 or not math.isfinite(duration):
        raise DomainError(f"hold duration must be finite and >= 0, got {duration}")
    d = derive(cfg)
    bins = _model.hold_bins(d.f_idle, duration, d.levels_f)
    adv = bins * SUBBIN
    q_p = state.q_p + adv
    q_n = state.q_n + adv
    _check_counts(q_p, q_n, d)
    return CellState(
        q_p=q_p, q_n=q_n, noise_index=state.noise_index, cal_code=state.cal_code
    )


def sample_phase(state: CellState, cfg: MacCellConfig) -> PhaseReading:
    """Latch both rings into (count, 2N-level instantaneous phase).

    Non-destructive. The total code 2N * count + inst equals
    floor(phase / bin) by construction of the integer accumulator.
    """
    d = derive(cfg)
    count_p, rem_p = divmod(state.q_p, d.cycle_quanta)
    count_n, rem_n = divmod(state.q_n, d.cycle_quanta)
    inst_p = rem_p // SUBBIN
    inst_n = rem_n // SUBBIN
    code_diff = (d.levels * count_p + inst_p) - (d.levels * count_n + inst_n)
    return PhaseReading(
        count_p=count_p,
        count_n=count_n,
        inst_p=inst_p,
        inst_n=inst_n,
        code_diff=code_diff,
        levels=d.levels,
    )


@dataclass(frozen=True)
class MacResult:
    """Backend estimate of sum(w_j * x_j).

    value is in volt seconds (phase divided by 2pi*kv), directly
    comparable with the exact dot product of inputs in volts and weights
    in seconds. raw_code is the differential phase code delta for
    physical backends, None for the ideal one.
    """

    value: float
    raw_code: int | None
    ops_count: int


def code_to_value(cfg: MacCellConfig, code_diff: int) -> float:
    """Differential code to volt seconds.

    The pseudo-differential drive (+i into one CCO, -i into the other)
    doubles the signal phase, so one code step of 2pi/2N radians is worth
    bin / (2pi * 2 * kv) volt seconds.
    """
    d = derive(cfg)
    return code_diff / (2.0 * d.levels_f * d.kv)


def run_mac_schedule(
    cfg: MacCellConfig,
    x: list[float],
    pulses: list[WeightPulse],
    t_hold: float = 0.0,
    record_steps: bool = False,
):
    """Alternate accumulate and hold over a whole sample vector.

    Starts from a fresh cell, takes a baseline reading, then for each
    sample runs the weight pulse followed by an idle window. No reset is
    ever performed; the result is the final code_diff minus the baseline.
    Returns (MacResult, PhaseReading) and, when record_steps is set, the
    per-step code_diff trace as a third element.
    """
    if len(x) != len(pulses):
        raise DimensionMismatchError(
            f"inputs ({len(x)}) and pulses ({len(pulses)}) must have equal length"
        )
    d = derive(cfg)
    ticks = [p.ticks for p in pulses]
    signs = [p.sign for p in pulses]
    q_p, q_n, trace = kernels.run_schedule(
        d, list(map(float, x)), ticks, signs, float(t_hold), record_steps
    )
    state = CellState(q_p=q_p, q_n=q_n, noise_index=len(x))
    reading = sample_phase(state, cfg)
    result = MacResult(
        value=code_to_value(cfg, reading.code_diff),
        raw_code=reading.code_diff,
        ops_count=len(x),
    )
    if record_steps:
        return result, reading, trace
    return result, reading
