import numpy as np
import pytest

from tdmac.cli import main
from tdmac.metrics import read_linearity_csv, read_sweep_csv
from tdmac.tracking import read_tracking_csv
from tdmac.volume_io import read_volume


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def summary_dict(stdout):
    pairs = {}
    for line in stdout.splitlines():
        if ": " in line:
            key, _, value = line.partition(": ")
            pairs[key] = value
    return pairs


# --- linearity ---


def test_linearity_default_summary(capsys, tmp_path):
    out_csv = tmp_path / "lin.csv"
    code, out, _ = run(capsys, "linearity", "--out", str(out_csv))
    assert code == 0
    summary = summary_dict(out)
    assert float(summary["effective_bits"]) >= 7.0
    ideal, measured, errors = read_linearity_csv(out_csv)
    assert len(ideal) == 512


def test_linearity_zero_length_exit_2(capsys):
    code, _, err = run(capsys, "linearity", "--length", "0")
    assert code == 2
    assert "length" in err


def test_linearity_quantizer_bound_flags(capsys):
    code, out, _ = run(
        capsys, "linearity", "--noise-sigma", "0", "--alpha3", "0"
    )
    assert code == 0
    summary = summary_dict(out)
    # one differential LSB at the default gain and stage count
    lsb = 1.0 / (2 * 30 * 1e8)
    assert float(summary["max_abs_error"]) <= lsb


def test_linearity_unknown_flag_exit_2(capsys):
    code, _, _ = run(capsys, "linearity", "--bogus", "1")
    assert code == 2


# --- calibrate ---


def test_calibrate_writes_reusable_config(capsys, tmp_path):
    cfg_path = tmp_path / "cal.ini"
    code, out, _ = run(
        capsys, "calibrate", "--target-bits", "7.0", "--out", str(cfg_path)
    )
    assert code == 0
    first = cfg_path.read_bytes()
    code, out, _ = run(
        capsys, "linearity", "--config", str(cfg_path)
    )
    assert code == 0
    bits = float(summary_dict(out)["effective_bits"])
    assert abs(bits - 7.0) <= 0.25
    # repeated invocation: identical bytes
    code, _, _ = run(
        capsys, "calibrate", "--target-bits", "7.0", "--out", str(cfg_path)
    )
    assert code == 0
    assert cfg_path.read_bytes() == first


def test_calibrate_unreachable_target_exit_1(capsys, tmp_path):
    code, _, err = run(
        capsys, "calibrate", "--target-bits", "12.0",
        "--out", str(tmp_path / "x.ini"),
    )
    assert code == 1
    assert "target" in err


# --- track ---


def test_track_zero_perturbation_constant_code(capsys, tmp_path):
    out_csv = tmp_path / "trace.csv"
    code, out, _ = run(
        capsys, "track", "--perturbation", "0", "--cycles", "20",
        "--out", str(out_csv),
    )
    assert code == 0
    rows = read_tracking_csv(out_csv)
    assert len(rows) == 20
    assert {r.code_after for r in rows} == {128}


def test_track_ten_percent_converges(capsys, tmp_path):
    out_csv = tmp_path / "trace.csv"
    code, out, _ = run(
        capsys, "track", "--perturbation", "0.10", "--cycles", "60",
        "--out", str(out_csv),
    )
    assert code == 0
    summary = summary_dict(out)
    assert summary["converged"] == "True"
    rows = read_tracking_csv(out_csv)
    tail_codes = [r.code_after for r in rows[30:]]
    assert max(tail_codes) - min(tail_codes) <= 1


def test_track_beyond_authority_reports_not_fails(capsys):
    code, out, _ = run(
        capsys, "track", "--perturbation", "0.9", "--cycles", "200"
    )
    assert code == 0
    assert summary_dict(out)["converged"] == "False"


# --- register / phantom ---


def test_register_identity_ideal_voxel_identical(capsys, tmp_path):
    ph = tmp_path / "ph.raw"
    out = tmp_path / "out.raw"
    assert run(capsys, "phantom", "--dims", "24", "--out", str(ph))[0] == 0
    code, _, _ = run(
        capsys, "register", "--input", str(ph), "--output", str(out),
        "--backend", "ideal",
    )
    assert code == 0
    assert out.read_bytes() == ph.read_bytes()


def test_register_vco_match_rate_printed(capsys, tmp_path):
    ph = tmp_path / "ph.raw"
    out = tmp_path / "out.raw"
    run(capsys, "phantom", "--dims", "32", "--out", str(ph))
    code, stdout, _ = run(
        capsys, "register", "--input", str(ph), "--output", str(out),
        "--backend", "vco", "--rotate-z", "10", "--translate", "3.5,-2.25,1.0",
    )
    assert code == 0
    summary = summary_dict(stdout)
    assert float(summary["match_rate_vs_ideal"]) >= 0.98
    assert int(summary["ops_count"]) == 32 * 32 * 32 * 12


def test_register_missing_sidecar_exit_2(capsys, tmp_path):
    bare = tmp_path / "bare.raw"
    bare.write_bytes(b"\x00" * 64)
    code, _, err = run(
        capsys, "register", "--input", str(bare),
        "--output", str(tmp_path / "o.raw"),
    )
    assert code == 2
    assert "sidecar" in err


def test_register_transform_file_round_trip(capsys, tmp_path):
    ph = tmp_path / "ph.raw"
    t_file = tmp_path / "t.txt"
    out_a = tmp_path / "a.raw"
    out_b = tmp_path / "b.raw"
    run(capsys, "phantom", "--dims", "16", "--out", str(ph))
    code, _, _ = run(
        capsys, "register", "--input", str(ph), "--output", str(out_a),
        "--backend", "ideal", "--rotate-y", "5", "--translate", "1,0,-1",
        "--save-transform", str(t_file),
    )
    assert code == 0
    code, _, _ = run(
        capsys, "register", "--input", str(ph), "--output", str(out_b),
        "--backend", "ideal", "--transform-file", str(t_file),
    )
    assert code == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_phantom_non_cubic(capsys, tmp_path):
    p = tmp_path / "p.raw"
    code, _, _ = run(capsys, "phantom", "--dims", "16,20,12", "--out", str(p))
    assert code == 0
    assert read_volume(p).dims == (16, 20, 12)


# --- sweep ---


def test_sweep_two_point_grid(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, stdout, _ = run(
        capsys, "sweep", "--kv-list", "1e8,5e7", "--tick-scale-list", "1,2",
        "--out", str(out),
    )
    assert code == 0
    rows = read_sweep_csv(out)
    assert len(rows) == 2
    assert "rows: 2" in stdout


def test_sweep_empty_grid_exit_2(capsys):
    code, _, err = run(
        capsys, "sweep", "--kv-list", "", "--tick-scale-list", ""
    )
    assert code == 2
    assert "empty" in err


def test_sweep_zip_length_mismatch_exit_2(capsys):
    code, _, _ = run(
        capsys, "sweep", "--kv-list", "1e8", "--tick-scale-list", "1,2"
    )
    assert code == 2


def test_sweep_tradeoff_bits_non_decreasing(capsys, tmp_path):
    out = tmp_path / "s.csv"
    kvs = ",".join(repr(1e8 / 2**i) for i in range(5))
    scales = ",".join(str(2**i) for i in range(5))
    code, _, _ = run(
        capsys, "sweep", "--kv-list", kvs, "--tick-scale-list", scales,
        "--out", str(out),
    )
    assert code == 0
    rows = read_sweep_csv(out)
    bits = [r.effective_bits for r in rows]
    assert all(b >= a for a, b in zip(bits, bits[1:]))
    assert len({r.ideal_norm_sha256 for r in rows}) == 1


# --- energy ---


def test_energy_summary(capsys):
    code, out, _ = run(capsys, "energy", "--ops", "1000000")
    assert code == 0
    summary = summary_dict(out)
    assert summary["ratio"] == "484.0"
    assert float(summary["total_time_domain_j"]) == pytest.approx(2e-9)
    assert "not simulated" in summary["note"]


# --- config file handling ---


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[cell]\nalpha3 = 0.0\nnoise_sigma = 0.0\n", encoding="utf-8")
    code, out, _ = run(capsys, "linearity", "--config", str(cfg))
    assert code == 0
    bits_file = float(summary_dict(out)["effective_bits"])
    assert bits_file > 9.0  # quantizer-limited
    code, out, _ = run(
        capsys, "linearity", "--config", str(cfg), "--alpha3", "0.02375"
    )
    bits_flag = float(summary_dict(out)["effective_bits"])
    assert bits_flag < bits_file  # flag overrides file


def test_config_unknown_field_exit_2(capsys, tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[cell]\nbogus = 1\n", encoding="utf-8")
    code, _, err = run(capsys, "linearity", "--config", str(cfg))
    assert code == 2
    assert "bogus" in err


def test_invalid_cell_value_exit_2(capsys):
    code, _, err = run(capsys, "linearity", "--n-stages", "4")
    assert code == 2
    assert "n_stages" in err


def test_remaining_validation_exit_codes(capsys, tmp_path):
    assert run(capsys, "track", "--perturbation", "0", "--cycles", "0")[0] == 2
    assert run(capsys, "phantom", "--dims", "4", "--out", str(tmp_path / "p"))[0] == 2
    assert run(capsys, "phantom", "--dims", "x", "--out", str(tmp_path / "p"))[0] == 2
    assert run(capsys, "energy", "--ops", "-1")[0] == 2
    ph = tmp_path / "v.raw"
    assert run(capsys, "phantom", "--dims", "12", "--out", str(ph))[0] == 0
    assert run(capsys, "register", "--input", str(ph),
               "--output", str(tmp_path / "o.raw"), "--scale", "1,0,1")[0] == 2
    assert run(capsys, "register", "--input", str(ph),
               "--output", str(tmp_path / "o.raw"), "--backend", "fpga")[0] == 2


def test_sweep_product_mode(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, stdout, _ = run(
        capsys, "sweep", "--kv-list", "1e8,5e7", "--tick-scale-list", "1,2",
        "--mode", "product", "--out", str(out),
    )
    assert code == 0
    assert len(read_sweep_csv(out)) == 4
