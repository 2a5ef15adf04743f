"""Background gain-tracking loop and code broadcast.

A reference oscillator is counted over a comparator window (a
divided-down sampling clock period). The count is compared against a
preset target and a saturating bang-bang step adjusts the tail-current
code: too fast, code down; too slow, code up; on target, hold. The code
is then broadcast to an array of cells whose private tail-current
mismatch limits how well the correction lands.
"""

import csv
import math
from dataclasses import dataclass, replace

from . import _model
from .cell import MacCellConfig
from .errors import ConfigError

_MISMATCH_SALT = 0x3C6EF372FE94F82B


@dataclass(frozen=True)
class TrackingLoopConfig:
    """Loop parameters.

    f_in         target count per comparison window
    divide_ratio comparator clock = sampling clock / divide_ratio
    code_bits    width of the tail code; codes live in [0, 2**bits)
    step_per_code relative frequency change per code LSB
    initial_code  starting code; None = midcode
    """

    f_in: int = 256
    divide_ratio: int = 256
    code_bits: int = 8
    step_per_code: float = 0.005
    initial_code: int | None = None

    def __post_init__(self):
        if self.f_in <= 0:
            raise ConfigError(f"f_in must be > 0, got {self.f_in}")
        if self.divide_ratio < 1:
            raise ConfigError(f"divide_ratio must be >= 1, got {self.divide_ratio}")
        if self.code_bits < 1:
            raise ConfigError(f"code_bits must be >= 1, got {self.code_bits}")
        if not (0.0 < self.step_per_code < 1.0):
            raise ConfigError(
                f"step_per_code must be in (0, 1), got {self.step_per_code}"
            )
        if self.initial_code is not None and not (
            0 <= self.initial_code <= self.code_max
        ):
            raise ConfigError(
                f"initial_code {self.initial_code} outside [0, {self.code_max}]"
            )

    @property
    def code_max(self) -> int:
        return (1 << self.code_bits) - 1

    @property
    def midcode(self) -> int:
        return 1 << (self.code_bits - 1)

    @property
    def start_code(self) -> int:
        return self.midcode if self.initial_code is None else self.initial_code


@dataclass(frozen=True)
class TrackingRecord:
    cycle: int
    count: int
    code_before: int
    code_after: int


@dataclass(frozen=True)
class TrackingTrace:
    """One record per comparison cycle, plus the loop's verdict."""

    records: tuple[TrackingRecord, ...]
    final_code: int
    converged: bool

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh)
            wr.writerow(["cycle", "count", "code_before", "code_after"])
            for r in self.records:
                wr.writerow([r.cycle, r.count, r.code_before, r.code_after])


def read_tracking_csv(path) -> list[TrackingRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if header != ["cycle", "count", "code_before", "code_after"]:
            raise ConfigError(f"{path}: not a tracking trace (header {header})")
        return [
            TrackingRecord(int(a), int(b), int(c), int(d)) for a, b, c, d in rd
        ]


def tracking_step(code: int, measured_count: int, cfg: TrackingLoopConfig) -> int:
    """Bang-bang comparator: strictly ternary with hold on equal.

    Saturates at both ends of the code range. The counter is conceptually
    reset after every comparison, so each call sees a fresh count.
    """
    if not (0 <= code <= cfg.code_max):
        raise ConfigError(f"code {code} outside [0, {cfg.code_max}]")
    if measured_count > cfg.f_in:
        return max(code - 1, 0)
    if measured_count < cfg.f_in:
        return min(code + 1, cfg.code_max)
    return code


def correction_factor(cfg: TrackingLoopConfig, code: int) -> float:
    """Frequency correction of a code word, relative to midcode."""
    return 1.0 + cfg.step_per_code * (code - cfg.midcode)


def run_calibration(
    cell_cfg: MacCellConfig,
    loop_cfg: TrackingLoopConfig,
    perturbation: float,
    n_cycles: int,
) -> tuple[int, TrackingTrace]:
    """Simulate n_cycles comparison windows against a perturbed reference.

    The reference CCO free-runs at f0 * (1 + perturbation + step * (code -
    midcode)); its full cycles over one comparator window (divide_ratio
    periods of the nominal sampling clock) are counted and fed to
    tracking_step. The count is taken from the continuous model, so the
    comparator sees exact whole cycles, free of readout quantizer noise.
    """
    if n_cycles < 1:
        raise ConfigError(f"n_cycles must be >= 1, got {n_cycles}")
    if not math.isfinite(perturbation):
        raise ConfigError(f"perturbation must be finite, got {perturbation}")
    # window length in units of the nominal period: count = ratio * (f_eff / f0)
    ratio = float(loop_cfg.divide_ratio)
    code = loop_cfg.start_code
    records = []
    for cycle in range(1, n_cycles + 1):
        rel = 1.0 + perturbation + loop_cfg.step_per_code * (code - loop_cfg.midcode)
        count = int(math.floor(ratio * rel + 0.5))
        new_code = tracking_step(code, count, loop_cfg)
        records.append(
            TrackingRecord(cycle=cycle, count=count, code_before=code, code_after=new_code)
        )
        code = new_code
    converged = abs(records[-1].count - loop_cfg.f_in) <= 1
    return code, TrackingTrace(
        records=tuple(records), final_code=code, converged=converged
    )


@dataclass(frozen=True)
class MismatchModel:
    """Per-cell tail-current gain spread.

    Factors are multiplicative around 1.0 with relative std sigma_rel,
    drawn once per (seed, cell index) from the counter-based stream, so
    they do not depend on evaluation order.
    """

    sigma_rel: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma_rel < 0.0:
            raise ConfigError(f"sigma_rel must be >= 0, got {self.sigma_rel}")

    def factor(self, cell_index: int) -> float:
        if self.sigma_rel == 0.0:
            return 1.0
        g = _model.gauss(self.seed ^ _MISMATCH_SALT, cell_index)
        # tail gains are physical quantities; keep them strictly positive
        return max(1.0 + self.sigma_rel * g, 1e-9)


def broadcast_code(
    code: int,
    cells: list[MacCellConfig],
    mm: MismatchModel,
    loop_cfg: TrackingLoopConfig,
) -> list[MacCellConfig]:
    """Apply one tail code to every cell of an array.

    Each cell's effective free-running frequency is scaled by the code's
    correction factor times the cell's private mismatch factor. Returns
    new configs; inputs are untouched.
    """
    corr = correction_factor(loop_cfg, code)
    out = []
    for idx, cfg in enumerate(cells):
        scale = corr * mm.factor(idx)
        out.append(replace(cfg, f0=cfg.f0 * scale))
    return out
