"""MAC semantics and backend dispatch.

A MAC is sum(w_j * x_j) over paired vectors. Inputs x_j are volts when
they reach a physical backend; weights w_j are signed pulse durations in
seconds (a weight is realized as 2pi * kv * dt radians of phase per volt,
so the exact dot product and the cell's phase readout are directly
comparable once the code is divided by 2pi * kv).
"""

import math
from dataclasses import dataclass
from enum import Enum

from .cell import (
    MacCellConfig,
    MacResult,
    WeightPulse,
    code_to_value,
    run_mac_schedule,
)
from .errors import ConfigError, DimensionMismatchError, DomainError, GranularityError

# relative slack when snapping a weight to the pulse grid
_TICK_TOL = 1e-6


class Backend(Enum):
    IDEAL = "ideal"
    VCO_CELL = "vco"

    @classmethod
    def parse(cls, name: str) -> "Backend":
        for b in cls:
            if b.value == name:
                return b
        raise ConfigError(f"unknown backend {name!r}; use 'ideal' or 'vco'")


def _validate_pair(x, w):
    if len(x) != len(w):
        raise DimensionMismatchError(
            f"input length {len(x)} != weight length {len(w)}"
        )
    if len(x) == 0:
        raise DomainError("MAC requires at least one element")
    for j, v in enumerate(x):
        if not math.isfinite(v):
            raise DomainError(f"non-finite input x[{j}] = {v!r}")
    for j, v in enumerate(w):
        if not math.isfinite(v):
            raise DomainError(f"non-finite weight w[{j}] = {v!r}")


def mac_ideal(x, w) -> MacResult:
    """Exact reference MAC: strict left-to-right double accumulation."""
    _validate_pair(x, w)
    acc = 0.0
    for xj, wj in zip(x, w):
        acc += wj * xj
    return MacResult(value=acc, raw_code=None, ops_count=len(x))


def ideal_running(x, w) -> list[float]:
    """Partial sums of the reference MAC, one per accumulation step."""
    _validate_pair(x, w)
    acc = 0.0
    out = []
    for xj, wj in zip(x, w):
        acc += wj * xj
        out.append(acc)
    return out


def weights_to_pulses(cfg: MacCellConfig, w) -> list[WeightPulse]:
    """Snap signed weights (seconds) onto the pulse grid.

    Each |w_j| must be an integer multiple of t_lsb; anything farther off
    than a relative fuzz of ~1e-6 tick is rejected rather than silently
    rounded.
    """
    pulses = []
    for j, wj in enumerate(w):
        ticks_f = abs(wj) / cfg.t_lsb
        ticks = int(math.floor(ticks_f + 0.5))
        if abs(ticks_f - ticks) > _TICK_TOL * max(1.0, ticks_f):
            raise GranularityError(
                f"weight w[{j}] = {wj} is not a multiple of t_lsb = {cfg.t_lsb}"
            )
        pulses.append(WeightPulse(ticks=ticks, sign=1 if wj >= 0.0 else -1))
    return pulses


def mac_run(backend: Backend, cfg: MacCellConfig, x, w) -> MacResult:
    """Run one MAC on the chosen backend.

    IDEAL delegates to mac_ideal. VCO_CELL builds a fresh cell, runs the
    pulse/hold schedule and converts the differential code delta back to
    the ideal backend's units.
    """
    if backend is Backend.IDEAL:
        return mac_ideal(x, w)
    if backend is Backend.VCO_CELL:
        _validate_pair(x, w)
        pulses = weights_to_pulses(cfg, w)
        result, _ = run_mac_schedule(cfg, list(x), pulses)
        return result
    raise ValueError(f"unhandled backend {backend!r}")


@dataclass(frozen=True)
class ErrorRecord:
    """Per-step divergence of the cell backend from the exact MAC."""

    ideal: list[float]
    measured: list[float]
    errors: list[float]
    max_abs_error: float
    rms_error: float


def compare_backends(cfg: MacCellConfig, x, w, t_hold: float = 0.0) -> ErrorRecord:
    """Run the same MAC on both backends and trace the running error.

    One error sample per accumulation step, measured minus ideal, both in
    volt seconds.
    """
    _validate_pair(x, w)
    pulses = weights_to_pulses(cfg, w)
    _, _, codes = run_mac_schedule(
        cfg, list(map(float, x)), pulses, t_hold=t_hold, record_steps=True
    )
    ideal = ideal_running(x, w)
    measured = [code_to_value(cfg, c) for c in codes]
    errors = [m - i for m, i in zip(measured, ideal)]
    max_abs = max((abs(e) for e in errors), default=0.0)
    rms = math.sqrt(sum(e * e for e in errors) / len(errors)) if errors else 0.0
    return ErrorRecord(
        ideal=ideal,
        measured=measured,
        errors=errors,
        max_abs_error=max_abs,
        rms_error=rms,
    )


def differential_lsb(cfg: MacCellConfig) -> float:
    """One differential phase LSB expressed in output units (volt seconds)."""
    return code_to_value(cfg, 1)
