import math
import random

import pytest

from tdmac.cell import MacCellConfig
from tdmac.errors import DimensionMismatchError, DomainError, GranularityError
from tdmac.mac import (
    Backend,
    compare_backends,
    differential_lsb,
    mac_ideal,
    mac_run,
    weights_to_pulses,
)


def test_zero_input_annihilates_sum():
    assert mac_ideal([0.0, 0.0, 0.0], [1.0, 2.0, 3.0]).value == 0.0


def test_constant_vector_closed_form():
    r = mac_ideal([1.0] * 512, [1e-8] * 512)
    assert math.isclose(r.value, 5.12e-6, rel_tol=1e-12)
    assert r.ops_count == 512
    assert r.raw_code is None


def test_three_term_arithmetic():
    r = mac_ideal([0.1, -0.2, 0.3], [2.0, 1.0, 0.5])
    assert abs(r.value - 0.15) < 1e-15


def test_length_mismatch_rejected():
    with pytest.raises(DimensionMismatchError):
        mac_ideal([1.0, 2.0], [1.0])


def test_non_finite_rejected():
    with pytest.raises(DomainError):
        mac_ideal([1.0, float("nan")], [1.0, 1.0])
    with pytest.raises(DomainError):
        mac_ideal([1.0, 1.0], [1.0, float("inf")])


def test_empty_vectors_rejected():
    with pytest.raises(DomainError):
        mac_ideal([], [])


def test_matches_naive_brute_force_exactly():
    rng = random.Random(11)
    for _ in range(50):
        n = rng.randint(1, 64)
        x = [rng.uniform(-1, 1) for _ in range(n)]
        w = [rng.uniform(-1, 1) for _ in range(n)]
        acc = 0.0
        for j in range(n):
            acc = acc + w[j] * x[j]
        assert mac_ideal(x, w).value == acc


def test_bilinearity():
    rng = random.Random(5)
    for _ in range(25):
        n = rng.randint(1, 32)
        x = [rng.uniform(-1, 1) for _ in range(n)]
        y = [rng.uniform(-1, 1) for _ in range(n)]
        w = [rng.uniform(-1, 1) for _ in range(n)]
        a, b = rng.uniform(-2, 2), rng.uniform(-2, 2)
        lhs = mac_ideal([a * xi + b * yi for xi, yi in zip(x, y)], w).value
        rhs = a * mac_ideal(x, w).value + b * mac_ideal(y, w).value
        assert math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-15)


def test_ideal_backend_single_term_identity(default_cfg):
    r = mac_run(Backend.IDEAL, default_cfg, [1.0], [1.0])
    assert r.value == 1.0


def test_vco_single_pulse_within_one_lsb():
    # full scale of 1 V with the gain rescaled so the deviation stays at
    # 40% of f0 (the default kv would stall the opposite ring at -1 V)
    cfg = MacCellConfig(v_fullscale=1.0, kv=4e7, alpha3=0.0)
    w_full = 1e-6
    r = mac_run(Backend.VCO_CELL, cfg, [1.0], [w_full])
    assert abs(r.value - 1.0 * w_full) <= differential_lsb(cfg)
    assert r.raw_code is not None
    assert r.ops_count == 1


def test_vco_fig3_vectors_seven_bit_bound(default_cfg):
    length, ts, f_sig = 512, 1e-8, 0.6e6
    step = 2.0 * math.pi * f_sig * ts
    x = [default_cfg.v_fullscale * math.sin(j * step) for j in range(length)]
    w = [ts] * length
    rec = compare_backends(default_cfg, x, w)
    span = max(rec.ideal) - min(rec.ideal)
    assert rec.max_abs_error <= span / 2**7
    assert rec.rms_error <= span / 2**7


def test_compare_backends_zero_input(default_cfg):
    rec = compare_backends(default_cfg, [0.0] * 16, [1e-8] * 16)
    assert rec.errors == [0.0] * 16
    assert rec.max_abs_error == 0.0


def test_compare_backends_single_step_quantizer_bound(linear_cfg):
    rec = compare_backends(linear_cfg, [0.25], [1e-7])
    assert abs(rec.errors[0]) <= differential_lsb(linear_cfg)


def test_compare_backends_sample_count(default_cfg):
    rng = random.Random(2)
    for n in (1, 3, 17, 100):
        x = [rng.uniform(-0.4, 0.4) for _ in range(n)]
        w = [rng.randint(1, 20) * 1e-9 for _ in range(n)]
        rec = compare_backends(default_cfg, x, w)
        assert len(rec.errors) == len(rec.ideal) == len(rec.measured) == n


def test_quantizer_bound_independent_of_length(linear_cfg):
    lsb = differential_lsb(linear_cfg)
    rng = random.Random(77)
    for n in (1, 8, 64, 512):
        x = [rng.uniform(-0.4, 0.4) for _ in range(n)]
        w = [rng.choice([-1, 1]) * rng.randint(0, 30) * 1e-9 for _ in range(n)]
        vco = mac_run(Backend.VCO_CELL, linear_cfg, x, w).value
        ideal = mac_ideal(x, w).value
        assert abs(vco - ideal) <= lsb


def test_weights_to_pulses_signs_and_ticks(default_cfg):
    pulses = weights_to_pulses(default_cfg, [3e-9, -2e-9, 0.0])
    assert [(p.ticks, p.sign) for p in pulses] == [(3, 1), (2, -1), (0, 1)]


def test_weights_off_grid_rejected(default_cfg):
    with pytest.raises(GranularityError):
        weights_to_pulses(default_cfg, [1.5e-9])


def test_backend_parse():
    assert Backend.parse("ideal") is Backend.IDEAL
    assert Backend.parse("vco") is Backend.VCO_CELL
    with pytest.raises(ValueError):
        Backend.parse("fpga")
