"""ivca command line: analyze clips, evaluate correlation, calibrate weights."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .aggregate import load_report
from .evaluation import (
    DEFAULT_GRID,
    EvaluationError,
    calibrate_weights,
    correlation_report,
    emit_heatmap,
    join_bitrates,
    read_bitrates,
)
from .gop import GopStructure, LayerWeights
from .motion import MeParams
from .pipeline import MODES, AnalysisConfig, analyze_file
from .video_io import VideoSpec

log = logging.getLogger("ivca")

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; this tool reserves 2 for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _weights(text: str) -> LayerWeights:
    try:
        return LayerWeights.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="ivca", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    an = sub.add_parser("analyze", help="compute complexity reports for clips")
    an.add_argument("inputs", nargs="+", type=Path, help="Y4M files (or raw YUV with --raw)")
    an.add_argument("--mode", choices=list(MODES), default="ivca")
    an.add_argument("--block-size", type=int, default=32)
    an.add_argument("--raw", action="store_true", help="inputs are headerless planar YUV")
    an.add_argument("--width", type=int)
    an.add_argument("--height", type=int)
    an.add_argument("--chroma", type=int, choices=(420, 422, 444), default=420)
    an.add_argument("--fps", type=float, default=30.0, help="frame rate of raw input (informational)")
    an.add_argument("--me-window", type=int, default=8)
    an.add_argument("--me-range", type=int, default=4)
    an.add_argument("--me-quantize", action="store_true")
    an.add_argument("--gop-size", type=int, default=4)
    an.add_argument("--intra-period", type=int, default=250)
    an.add_argument("--weights", type=_weights, default=LayerWeights(), help="wI,wL0,wL1,wL2")
    an.add_argument("--id", dest="clip_id", help="clip id (single input only; default: file stem)")
    an.add_argument("-o", "--output-dir", type=Path, default=Path("."))
    an.add_argument("--csv", action="store_true", help="also write a per-frame CSV report")
    an.add_argument("--heatmap-dir", type=Path)
    an.add_argument("--heatmap-every", type=int, default=0)
    an.add_argument("-j", "--jobs", type=int, default=1)

    ev = sub.add_parser("evaluate", help="correlate report complexity with bitrates")
    ev.add_argument("reports", nargs="+", type=Path)
    ev.add_argument("--bitrates", type=Path, required=True, help="CSV with header clip,bitrate")
    ev.add_argument("-o", "--output", type=Path, default=Path("correlation.json"))

    ca = sub.add_parser("calibrate", help="grid-search layer weights")
    ca.add_argument("reports", nargs="+", type=Path)
    ca.add_argument("--bitrates", type=Path, required=True)
    ca.add_argument("--grid", type=_float_list, default=list(DEFAULT_GRID), help="values shared by every axis")
    for name in ("i", "l0", "l1", "l2"):
        ca.add_argument(f"--grid-{name}", type=_float_list, help=f"override the w_{name.upper()} axis")
    ca.add_argument("-o", "--output", type=Path, default=Path("weights.json"))
    return parser


def _atomic_write(path: Path, text: str, written: list) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
    written.append(path)


def _config_from_args(args) -> tuple[AnalysisConfig, VideoSpec | None]:
    try:
        config = AnalysisConfig(
            mode=args.mode,
            block_size=args.block_size,
            me=MeParams(args.me_window, args.me_range, args.me_quantize),
            gop=GopStructure(args.gop_size, args.intra_period, args.weights),
            heatmap_every=args.heatmap_every if args.heatmap_dir else 0,
        )
        if args.block_size < 4 or args.block_size & (args.block_size - 1):
            raise ValueError(f"block size must be a power of two >= 4, got {args.block_size}")
        raw_spec = None
        if args.raw:
            if not args.width or not args.height:
                raise ValueError("--raw needs --width and --height")
            raw_spec = VideoSpec(args.width, args.height, args.fps, 8, args.chroma)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.clip_id and len(args.inputs) > 1:
        raise UsageError("--id applies to a single input")
    if args.heatmap_dir and args.heatmap_every < 1:
        raise UsageError("--heatmap-dir needs --heatmap-every K >= 1")
    return config, raw_spec


def _analyze_one(path, config, raw_spec, clip_id, output_dir, want_csv, heatmap_dir):
    report, diag = analyze_file(path, config, raw_spec, clip_id)
    written = []
    try:
        _atomic_write(output_dir / f"{report.clip}.json", report.to_json(), written)
        if want_csv:
            _atomic_write(output_dir / f"{report.clip}.csv", report.to_csv(), written)
        if heatmap_dir is not None:
            heatmap_dir.mkdir(parents=True, exist_ok=True)
            for kind, maps in (("sad", diag.sad), ("mu", diag.mu)):
                for poc, values in sorted(maps.items()):
                    target = heatmap_dir / f"{report.clip}_{kind}_{poc:05d}.pgm"
                    written.append(target)
                    emit_heatmap(values, diag.grid, target)
    except BaseException:
        _remove(written)
        raise
    line = f"{report.clip}\t{report.mode}\t{report.complexity:.6g}\t{report.fps:.2f}"
    return line, written


def _remove(paths) -> None:
    for p in paths:
        Path(p).unlink(missing_ok=True)


def cmd_analyze(args) -> int:
    config, raw_spec = _config_from_args(args)
    jobs = [
        (path, config, raw_spec, args.clip_id, args.output_dir, args.csv, args.heatmap_dir)
        for path in args.inputs
    ]
    results = []
    try:
        if args.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                futures = [pool.submit(_analyze_one, *job) for job in jobs]
                error = None
                for fut in futures:
                    try:
                        results.append(fut.result())
                    except Exception as exc:
                        error = error or exc
                if error is not None:
                    raise error
        else:
            for job in jobs:
                results.append(_analyze_one(*job))
    except BaseException:
        for _, written in results:
            _remove(written)
        raise
    for line, _ in results:
        print(line)
    return 0


def _load_reports(paths):
    reports = {}
    for path in paths:
        report = load_report(path)
        if report.clip in reports:
            raise EvaluationError(f"duplicate clip id {report.clip!r} in reports")
        reports[report.clip] = report
    return reports


def cmd_evaluate(args) -> int:
    reports = _load_reports(args.reports)
    records = read_bitrates(args.bitrates)
    result = correlation_report({c: r.complexity for c, r in reports.items()}, records)
    _atomic_write(args.output, json.dumps(result, indent=2, sort_keys=True) + "\n", [])
    print(f"pcc={result['pcc']:.6f} slope={result['slope']:.6g} intercept={result['intercept']:.6g} n={result['n']}")
    return 0


def cmd_calibrate(args) -> int:
    axes = [args.grid if a is None else a for a in (args.grid_i, args.grid_l0, args.grid_l1, args.grid_l2)]
    for name, axis in zip(("wI", "wL0", "wL1", "wL2"), axes):
        if not axis:
            raise UsageError(f"grid axis {name} is empty")
    reports = _load_reports(args.reports)
    records = read_bitrates(args.bitrates)
    rows = join_bitrates({c: r.components for c, r in reports.items()}, records)
    start = time.perf_counter()
    weights, pcc = calibrate_weights([c for _, c, _ in rows], [b for _, _, b in rows], axes)
    runtime = time.perf_counter() - start
    grid_size = 1
    for axis in axes:
        grid_size *= len(set(axis))
    result = {
        "weights": dict(zip(("w_I", "w_L0", "w_L1", "w_L2"), weights.as_tuple())),
        "pcc": pcc,
        "grid_size": grid_size,
        "runtime": runtime,
    }
    _atomic_write(args.output, json.dumps(result, indent=2, sort_keys=True) + "\n", [])
    print("weights=" + ",".join(repr(w) for w in weights.as_tuple()) + f" pcc={pcc:.6f}")
    return 0


COMMANDS = {"analyze": cmd_analyze, "evaluate": cmd_evaluate, "calibrate": cmd_calibrate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ivca: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        if args.verbose:
            log.exception("failed")
        print(f"ivca: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
