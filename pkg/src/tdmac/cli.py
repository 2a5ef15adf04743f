"""Batch command-line front end.

Subcommands: linearity, calibrate, track, register, sweep, phantom,
energy. Summaries go to stdout as 'key: value' lines; traces and volumes
go to files. Exit codes: 0 success, 1 simulation/model error, 2
usage/validation error. Configuration comes from an INI-style file
(sections [cell] and [loop]) with CLI flags taking precedence.
"""

import argparse
import configparser
import dataclasses
import math
import sys

import numpy as np

from . import kernels, metrics, phantom, registration, tracking, volume_io
from .cell import MacCellConfig
from .errors import ConfigError, SimulationError, SingularTransformError
from .mac import Backend
from .tracking import TrackingLoopConfig


def _print_summary(pairs):
    for key, value in pairs:
        if isinstance(value, float):
            print(f"{key}: {value!r}")
        else:
            print(f"{key}: {value}")


def _coerce(name: str, text: str, typ):
    try:
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"field {name}: cannot parse {text!r} as {typ.__name__}") from exc
    return text


_CELL_FIELDS = {f.name: f.type for f in dataclasses.fields(MacCellConfig)}
_LOOP_FIELDS = {f.name: f.type for f in dataclasses.fields(TrackingLoopConfig)}
_FIELD_TYPES = {
    "kv": float, "f0": float, "n_stages": int, "r_deg": float, "gm": float,
    "i_low": float, "v_fullscale": float, "t_lsb": float, "alpha2": float,
    "alpha3": float, "vi_sat": float, "noise_sigma": float,
    "counter_bits": int, "seed": int,
    "f_in": int, "divide_ratio": int, "code_bits": int,
    "step_per_code": float, "initial_code": int,
}


def _read_ini(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config file {path}: {exc}") from exc
    return cp


def _section_values(cp, section, known):
    out = {}
    if cp is None or not cp.has_section(section):
        return out
    for key, text in cp.items(section):
        if key not in known:
            raise ConfigError(f"config section [{section}]: unknown field {key!r}")
        out[key] = _coerce(key, text, _FIELD_TYPES[key])
    return out


def load_cell_config(args) -> MacCellConfig:
    cp = _read_ini(args.config) if getattr(args, "config", None) else None
    values = _section_values(cp, "cell", _CELL_FIELDS)
    for name in _CELL_FIELDS:
        flag = getattr(args, f"cell_{name}", None)
        if flag is not None:
            values[name] = flag
    return MacCellConfig(**values)


def load_loop_config(args) -> TrackingLoopConfig:
    cp = _read_ini(args.config) if getattr(args, "config", None) else None
    values = _section_values(cp, "loop", _LOOP_FIELDS)
    for name in _LOOP_FIELDS:
        flag = getattr(args, f"loop_{name}", None)
        if flag is not None:
            values[name] = flag
    return TrackingLoopConfig(**values)


def write_cell_config_file(cfg: MacCellConfig, path) -> None:
    """Byte-stable INI dump of a cell configuration."""
    lines = ["[cell]"]
    for f in dataclasses.fields(MacCellConfig):
        lines.append(f"{f.name} = {getattr(cfg, f.name)!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _add_cell_flags(p):
    p.add_argument("--config", help="INI config file ([cell]/[loop] sections)")
    g = p.add_argument_group("cell overrides")
    for name, typ in _FIELD_TYPES.items():
        if name not in _CELL_FIELDS:
            continue
        g.add_argument(
            f"--{name.replace('_', '-')}",
            dest=f"cell_{name}",
            type=typ,
            default=None,
            help=f"override cell.{name}",
        )


def _add_loop_flags(p):
    g = p.add_argument_group("loop overrides")
    for name in _LOOP_FIELDS:
        g.add_argument(
            f"--{name.replace('_', '-')}",
            dest=f"loop_{name}",
            type=_FIELD_TYPES[name],
            default=None,
            help=f"override loop.{name}",
        )


def _parse_triple(text, what):
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"{what} needs three comma-separated values, got {text!r}")
    try:
        return tuple(float(v) for v in parts)
    except ValueError as exc:
        raise ConfigError(f"{what}: non-numeric value in {text!r}") from exc


def _parse_list(text, typ, what):
    if text is None or text.strip() == "":
        return []
    try:
        return [typ(v) for v in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"{what}: cannot parse {text!r}") from exc


def cmd_linearity(args) -> int:
    cfg = load_cell_config(args)
    rep = metrics.sine_mac_experiment(
        cfg,
        length=args.length,
        ts=args.ts,
        f_sig=args.f_sig,
        tick_scale=args.tick_scale,
    )
    if args.out:
        rep.write_csv(args.out)
    if args.summary_out:
        rep.write_summary(args.summary_out)
    pairs = list(rep.summary().items())
    pairs.append(("kernel", kernels.active_kernel()))
    if args.out:
        pairs.append(("trace", args.out))
    _print_summary(pairs)
    return 0


def cmd_calibrate(args) -> int:
    base = load_cell_config(args)
    res = metrics.calibrate_default_config(args.target_bits, base=base)
    if args.out:
        write_cell_config_file(res.config, args.out)
    pairs = [
        ("target_bits", args.target_bits),
        ("alpha3", res.alpha3),
        ("effective_bits", res.effective_bits),
        ("note", res.note),
    ]
    if args.out:
        pairs.append(("config_file", args.out))
    _print_summary(pairs)
    return 0


def cmd_track(args) -> int:
    cell_cfg = load_cell_config(args)
    loop_cfg = load_loop_config(args)
    code, trace = tracking.run_calibration(
        cell_cfg, loop_cfg, args.perturbation, args.cycles
    )
    if args.out:
        trace.write_csv(args.out)
    codes = [r.code_after for r in trace.records]
    _print_summary(
        [
            ("perturbation", args.perturbation),
            ("cycles", len(trace.records)),
            ("final_code", code),
            ("start_code", loop_cfg.start_code),
            ("converged", trace.converged),
            ("final_count", trace.records[-1].count),
            ("target_count", loop_cfg.f_in),
            ("code_min", min(codes)),
            ("code_max", max(codes)),
        ]
        + ([("trace", args.out)] if args.out else [])
    )
    return 0


def _build_register_transform(args, dims):
    if args.transform_file:
        return registration.RigidTransform(volume_io.read_transform(args.transform_file))
    center = tuple((n - 1) / 2.0 for n in dims)
    neg = tuple(-c for c in center)
    parts = [registration.build_translation_scaling((1, 1, 1), neg)]
    scale = _parse_triple(args.scale, "--scale")
    if scale != (1.0, 1.0, 1.0):
        parts.append(registration.build_translation_scaling(scale, (0, 0, 0)))
    for axis, deg in (("x", args.rotate_x), ("y", args.rotate_y), ("z", args.rotate_z)):
        if deg != 0.0:
            parts.append(registration.build_rotation(axis, math.radians(deg)))
    parts.append(registration.build_translation_scaling((1, 1, 1), center))
    translate = _parse_triple(args.translate, "--translate")
    if translate != (0.0, 0.0, 0.0):
        parts.append(registration.build_translation_scaling((1, 1, 1), translate))
    return registration.compose(parts)


def cmd_register(args) -> int:
    backend = Backend.parse(args.backend)
    cfg = load_cell_config(args)
    src = volume_io.read_volume(args.input)
    try:
        t = _build_register_transform(args, src.dims)
        t.inverse()  # user-supplied transforms must be invertible up front
    except SingularTransformError as exc:
        raise ConfigError(str(exc)) from exc
    if args.save_transform:
        volume_io.write_transform(t.m, args.save_transform)
    res = registration.resample_volume(
        src, t, backend, cfg, weight_scale=args.weight_scale, workers=args.workers
    )
    volume_io.write_volume(res.volume, args.output)
    pairs = [
        ("backend", backend.value),
        ("dims", "%d %d %d" % src.dims),
        ("ops_count", res.ops_count),
        ("kernel", kernels.active_kernel()),
        ("output", args.output),
    ]
    if backend is Backend.VCO_CELL:
        ref = registration.resample_volume(
            src, t, Backend.IDEAL, cfg, weight_scale=args.weight_scale
        )
        match = float(np.mean(res.volume.data == ref.volume.data))
        pairs.append(("match_rate_vs_ideal", match))
    _print_summary(pairs)
    return 0


def cmd_sweep(args) -> int:
    cfg = load_cell_config(args)
    kvs = _parse_list(args.kv_list, float, "--kv-list")
    scales = _parse_list(args.tick_scale_list, int, "--tick-scale-list")
    if args.mode == "zip":
        if len(kvs) != len(scales):
            raise ConfigError(
                f"zip mode needs equal list lengths, got {len(kvs)} and {len(scales)}"
            )
        points = list(zip(kvs, scales))
    else:
        points = [(kv, s) for kv in kvs for s in scales]
    if not points:
        raise ConfigError("empty sweep grid (check --kv-list / --tick-scale-list)")
    rows = metrics.tradeoff_sweep(
        cfg, points, length=args.length, ts=args.ts, f_sig=args.f_sig
    )
    if args.out:
        metrics.write_sweep_csv(rows, args.out)
    _print_summary([("rows", len(rows))])
    for r in rows:
        print(
            f"row {r.index}: kv={r.kv!r} tick_scale={r.tick_scale} "
            f"effective_bits={r.effective_bits!r} max_abs_error={r.max_abs_error!r}"
        )
    return 0


def cmd_phantom(args) -> int:
    try:
        if "," in args.dims:
            dims = tuple(int(v) for v in args.dims.split(","))
        else:
            dims = (int(args.dims),) * 3
    except ValueError as exc:
        raise ConfigError(f"--dims: cannot parse {args.dims!r}") from exc
    if len(dims) != 3:
        raise ConfigError(f"--dims needs one or three integers, got {args.dims!r}")
    vol = phantom.make_phantom(dims=dims, dtype=args.dtype)
    volume_io.write_volume(vol, args.out)
    _print_summary(
        [
            ("dims", "%d %d %d" % vol.dims),
            ("dtype", args.dtype),
            ("output", args.out),
        ]
    )
    return 0


def cmd_energy(args) -> int:
    rep = metrics.energy_report(args.ops)
    _print_summary(rep.summary().items())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdmac",
        description="Time-domain MAC cell simulator and experiment runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("linearity", help="running-MAC sine experiment")
    _add_cell_flags(p)
    p.add_argument("--length", type=int, default=512)
    p.add_argument("--ts", type=float, default=1e-8, help="sample period, s")
    p.add_argument("--f-sig", type=float, default=0.6e6, help="sine frequency, Hz")
    p.add_argument("--tick-scale", type=int, default=1)
    p.add_argument("--out", help="per-step trace CSV path")
    p.add_argument("--summary-out", help="summary file path")
    p.set_defaults(func=cmd_linearity)

    p = sub.add_parser("calibrate", help="fit alpha3 to a target accuracy")
    _add_cell_flags(p)
    p.add_argument("--target-bits", type=float, default=7.0)
    p.add_argument("--out", help="frozen config file path")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("track", help="gain-tracking loop simulation")
    _add_cell_flags(p)
    _add_loop_flags(p)
    p.add_argument("--perturbation", type=float, required=True,
                   help="relative f0 error, e.g. 0.10")
    p.add_argument("--cycles", type=int, default=60)
    p.add_argument("--out", help="trace CSV path")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("register", help="resample a volume through a transform")
    _add_cell_flags(p)
    p.add_argument("--input", required=True, help="source volume (raw + .meta)")
    p.add_argument("--output", required=True, help="output volume path")
    p.add_argument("--backend", default="vco", help="ideal or vco")
    p.add_argument("--rotate-x", type=float, default=0.0, help="degrees")
    p.add_argument("--rotate-y", type=float, default=0.0, help="degrees")
    p.add_argument("--rotate-z", type=float, default=0.0, help="degrees")
    p.add_argument("--translate", default="0,0,0", help="dx,dy,dz voxels")
    p.add_argument("--scale", default="1,1,1", help="sx,sy,sz")
    p.add_argument("--transform-file", help="16-number transform file (overrides flags)")
    p.add_argument("--save-transform", help="write the applied matrix here")
    p.add_argument("--weight-scale", type=float,
                   default=registration.DEFAULT_WEIGHT_SCALE)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("sweep", help="gain / integration-time trade-off sweep")
    _add_cell_flags(p)
    p.add_argument("--kv-list", required=True, help="comma-separated kv values")
    p.add_argument("--tick-scale-list", required=True,
                   help="comma-separated integer tick scales")
    p.add_argument("--mode", choices=["zip", "product"], default="zip")
    p.add_argument("--length", type=int, default=512)
    p.add_argument("--ts", type=float, default=1e-8)
    p.add_argument("--f-sig", type=float, default=0.6e6)
    p.add_argument("--out", help="rows CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("phantom", help="generate a synthetic volume")
    p.add_argument("--dims", default="64", help="n or nx,ny,nz")
    p.add_argument("--dtype", default="uint8", choices=["uint8", "int16"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("energy", help="energy accounting for an op count")
    p.add_argument("--ops", type=int, required=True)
    p.set_defaults(func=cmd_energy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
