"""Command-line front end.

Subcommands: ``analyze`` (cost report for one configuration), ``sweep``
(cost/reference CSV over a grid, optionally rendered as a figure), ``fit``
(feasibility search against a platform budget), ``separate`` (run a model on
a WAV file), ``eval`` (permutation-invariant SI-SDR of estimates against
references), and ``init-random`` (write a seeded weight file).

Exit codes: 0 success, 1 runtime or data error, 2 usage error.  All output
is deterministic given the flags and input files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from itertools import product
from typing import Optional

from .config import ScalingConfig
from .costmodel import cost_report
from .devicefit import (
    PlatformSpec,
    builtin_platforms,
    find_platform,
    load_platforms_file,
    reference_for,
    search_configs,
)
from .errors import ConfigError, SepscaleError
from .io import read_wav, read_weights, write_wav, write_weights
from .metrics import pit_si_sdr
from .model import (
    build_model,
    config_from_store,
    count_store_params,
    init_random,
    separate,
    tensor_shapes,
)

CSV_HEADER = ["B", "R", "C", "dil_base", "params_k", "gflops_s", "rf_ms",
              "model_bytes", "ref_si_sdr_db"]

DEFAULT_GRID = {
    "B": [2, 4, 6, 8],
    "R": [1, 2, 3],
    "C": [64, 128, 512],
    "dil": [2],
}


@dataclass(frozen=True)
class SweepRow:
    """One grid point of a sweep; field order matches the CSV columns."""

    B: int
    R: int
    C: int
    dil_base: int
    params_k: int
    gflops_s: float
    rf_ms: float
    model_bytes: int
    ref_si_sdr_db: Optional[float]


def _int_list(text: str) -> list[int]:
    try:
        values = [int(p) for p in text.replace(" ", "").split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _add_knob_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--B", type=int, required=True, help="dilated blocks per repeat")
    p.add_argument("--R", type=int, required=True, help="repeats of the block sequence")
    p.add_argument("--C", type=int, required=True, help="depthwise channels")
    p.add_argument("--dil-base", dest="dil_base", type=int, required=True,
                   help="base of the exponential dilation schedule")


def _add_grid_flags(p: argparse.ArgumentParser, required: bool) -> None:
    kw = {"required": True} if required else {}
    p.add_argument("--B-list", dest="B_list", type=_int_list,
                   default=None if required else DEFAULT_GRID["B"],
                   help="comma-separated block counts", **kw)
    p.add_argument("--R-list", dest="R_list", type=_int_list,
                   default=None if required else DEFAULT_GRID["R"],
                   help="comma-separated repeat counts", **kw)
    p.add_argument("--C-list", dest="C_list", type=_int_list,
                   default=None if required else DEFAULT_GRID["C"],
                   help="comma-separated channel widths", **kw)
    p.add_argument("--dil-list", dest="dil_list", type=_int_list,
                   default=None if required else DEFAULT_GRID["dil"],
                   help="comma-separated dilation bases", **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sepscale",
        description="Scalable speech-separation engine with cost modeling "
                    "and device-fit planning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="cost report for one configuration")
    _add_knob_flags(p)
    p.add_argument("--quant-bits", type=int, choices=(8, 16, 32), default=32)
    p.add_argument("--flops-per-mac", type=int, choices=(1, 2), default=1,
                   help="2 counts multiply and add separately")
    p.add_argument("--json", action="store_true", help="emit one JSON object")
    p.add_argument("--dump-names", action="store_true",
                   help="list the weight tensor names and shapes, then exit")

    p = sub.add_parser("sweep", help="cost/reference CSV over a config grid")
    _add_grid_flags(p, required=True)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--plot", default=None,
                   help="also render the sweep as a figure (e.g. sweep.png)")

    p = sub.add_parser("fit", help="search feasible configs for a platform")
    p.add_argument("--platform", default=None,
                   help="platform name (case/punctuation-insensitive)")
    p.add_argument("--ram-kb", dest="ram_kb", type=int, default=None)
    p.add_argument("--mips", type=float, default=None)
    p.add_argument("--platforms-file", dest="platforms_file", default=None,
                   help="extra registry: 'name, ram_kb, mips' per line")
    _add_grid_flags(p, required=False)
    p.add_argument("--quant-bits", type=int, choices=(8, 16, 32), default=32)
    p.add_argument("--mac-per-instr", dest="mac_per_instr", type=float, default=1.0)
    p.add_argument("--ram-fraction", dest="ram_fraction", type=float, default=0.75)

    p = sub.add_parser("separate", help="separate a WAV file with a model")
    p.add_argument("--model", required=True, help="weight file written by init-random")
    p.add_argument("--input", required=True, help="mono 16-bit PCM WAV")
    p.add_argument("--output-prefix", dest="output_prefix", required=True)

    p = sub.add_parser("eval", help="permutation-invariant SI-SDR of estimates")
    p.add_argument("--est", nargs="+", required=True, help="estimate WAV files")
    p.add_argument("--ref", nargs="+", required=True, help="reference WAV files")
    p.add_argument("--cap-db", dest="cap_db", type=float, default=None,
                   help="clamp reported values to +/- this many dB")

    p = sub.add_parser("init-random", help="write a deterministically seeded model")
    _add_knob_flags(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    return parser


def _knob_config(args) -> ScalingConfig:
    return ScalingConfig(
        num_blocks=args.B,
        num_repeats=args.R,
        depthwise_channels=args.C,
        dilation_base=args.dil_base,
    )


def _cmd_analyze(args) -> int:
    cfg = _knob_config(args)
    if args.dump_names:
        for name, shape in tensor_shapes(cfg).items():
            print(f"{name}\t{'x'.join(str(d) for d in shape)}")
        return 0
    rep = cost_report(cfg, quant_bits=args.quant_bits, flops_per_mac=args.flops_per_mac)
    fields = {
        "params": rep.params,
        "params_k": rep.params_k,
        "macs_per_second": rep.macs_per_second,
        "gflops_per_second": rep.gflops_per_second,
        "minor_ops_per_second": rep.minor_ops_per_second,
        "receptive_field_frames": rep.receptive_field_frames,
        "receptive_field_samples": rep.receptive_field_samples,
        "receptive_field_ms": rep.receptive_field_ms,
        "model_bytes": rep.model_bytes,
        "peak_activation_bytes": rep.peak_activation_bytes,
    }
    if args.json:
        print(json.dumps(fields))
    else:
        for key, value in fields.items():
            if isinstance(value, float):
                print(f"{key}: {value:.4f}")
            else:
                print(f"{key}: {value}")
    return 0


def _sweep_rows(b_list, r_list, c_list, dil_list) -> list[SweepRow]:
    rows = []
    for b, r, c, base in product(sorted(set(b_list)), sorted(set(r_list)),
                                 sorted(set(c_list)), sorted(set(dil_list))):
        cfg = ScalingConfig(num_blocks=b, num_repeats=r,
                            depthwise_channels=c, dilation_base=base)
        rep = cost_report(cfg)
        ref = reference_for(b, r, c, base)
        rows.append(SweepRow(
            B=b, R=r, C=c, dil_base=base,
            params_k=rep.params_k,
            gflops_s=rep.gflops_per_second,
            rf_ms=rep.receptive_field_ms,
            model_bytes=rep.model_bytes,
            ref_si_sdr_db=None if ref is None else ref.si_sdr_db,
        ))
    return rows


def _cmd_sweep(args) -> int:
    rows = _sweep_rows(args.B_list, args.R_list, args.C_list, args.dil_list)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([
                row.B, row.R, row.C, row.dil_base, row.params_k,
                f"{row.gflops_s:.4f}", f"{row.rf_ms:.2f}", row.model_bytes,
                "" if row.ref_si_sdr_db is None else f"{row.ref_si_sdr_db:.2f}",
            ])
    print(f"wrote {len(rows)} rows to {args.out}")
    if args.plot:
        from .plots import render_sweep_figure

        render_sweep_figure(rows, args.plot)
        print(f"rendered figure to {args.plot}")
    return 0


def _cmd_fit(args) -> int:
    extra = load_platforms_file(args.platforms_file) if args.platforms_file else None
    if args.platform is not None:
        platform = find_platform(args.platform, extra)
        if platform is None:
            known = [p.name for p in (extra or [])] + [p.name for p in builtin_platforms()]
            print(f"unknown platform {args.platform!r}; known platforms: "
                  + ", ".join(known), file=sys.stderr)
            return 2
    elif args.ram_kb is not None and args.mips is not None:
        platform = PlatformSpec("custom", args.ram_kb, args.mips)
    else:
        print("specify --platform NAME, or both --ram-kb and --mips", file=sys.stderr)
        return 2

    verdicts = search_configs(
        platform, args.B_list, args.R_list, args.C_list, args.dil_list,
        quant_bits=args.quant_bits,
        mac_per_instruction=args.mac_per_instr,
        ram_fraction=args.ram_fraction,
    )
    print(f"platform: {platform.name} ({platform.ram_kb} KB RAM, {platform.mips} MIPS), "
          f"{args.quant_bits}-bit weights, ram fraction {args.ram_fraction}")
    if not verdicts:
        print("no feasible configuration")
        return 0
    print(f"{'B':>3} {'R':>3} {'C':>5} {'base':>4} {'model_bytes':>12} "
          f"{'macs/s':>14} {'ref_si_sdr_db':>13}")
    proxies = 0
    for v in verdicts:
        cfg = v.config
        if v.reference_si_sdr is None:
            ref = "-"
            proxies += 1
        else:
            ref = f"{v.reference_si_sdr:.2f}"
        print(f"{cfg.num_blocks:>3} {cfg.num_repeats:>3} {cfg.depthwise_channels:>5} "
              f"{cfg.dilation_base:>4} {v.model_bytes:>12} {v.macs_per_second:>14} "
              f"{ref:>13}")
    if proxies:
        print(f"note: {proxies} row(s) without a reference score are ranked by "
              "parameter count (proxy)")
    return 0


def _cmd_separate(args) -> int:
    store = read_weights(args.model)
    cfg = config_from_store(store)
    model = build_model(cfg, store)
    audio, rate = read_wav(args.input)
    if rate != cfg.sample_rate:
        raise SepscaleError(
            f"input sample rate {rate} Hz does not match the model's "
            f"{cfg.sample_rate} Hz"
        )
    sources = separate(model, audio)
    for i, source in enumerate(sources, start=1):
        path = f"{args.output_prefix}_src{i}.wav"
        write_wav(path, source, rate)
        print(f"wrote {path}")
    return 0


def _cmd_eval(args) -> int:
    est_signals, est_lengths = [], []
    for path in args.est:
        samples, _ = read_wav(path)
        est_signals.append(samples)
        est_lengths.append(samples.size)
    ref_signals, ref_lengths = [], []
    for path in args.ref:
        samples, _ = read_wav(path)
        ref_signals.append(samples)
        ref_lengths.append(samples.size)
    if len(set(est_lengths + ref_lengths)) > 1:
        raise SepscaleError(
            f"signals have different lengths: estimates {est_lengths}, "
            f"references {ref_lengths}"
        )
    result = pit_si_sdr(est_signals, ref_signals)

    def clamp(value: float) -> float:
        if args.cap_db is None:
            return value
        return max(-args.cap_db, min(args.cap_db, value))

    for i, value in enumerate(result.per_source_si_sdr, start=1):
        print(f"source {i}: {clamp(value):.2f} dB")
    print(f"mean: {clamp(result.mean_si_sdr):.2f} dB")
    print(f"permutation: {list(result.best_permutation)}")
    return 0


def _cmd_init_random(args) -> int:
    cfg = _knob_config(args)
    store = init_random(cfg, args.seed)
    n_bytes = write_weights(store, args.out)
    n_tensors = sum(1 for name in store if not name.startswith("meta."))
    print(f"wrote {n_tensors} weight tensors ({count_store_params(store)} parameters, "
          f"{n_bytes} bytes) to {args.out}")
    return 0


_COMMANDS = {
    "analyze": _cmd_analyze,
    "sweep": _cmd_sweep,
    "fit": _cmd_fit,
    "separate": _cmd_separate,
    "eval": _cmd_eval,
    "init-random": _cmd_init_random,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SepscaleError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
