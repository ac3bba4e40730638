import argparse

from cli.common import (
    add_dictionary_flags,
    add_padding_flag,
    add_run_flags,
    build_run_config,
    emit_report,
    output_storage,
    parse_shape,
    run_seed,
)
from config import get_settings
from filters import bench_filter
from kernels import build_dictionary
from schemas import PaddingModeEnum


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "bench", help="Time the exact filter against the low-rank filter."
    )
    add_run_flags(parser)
    add_dictionary_flags(parser)
    add_padding_flag(parser)
    parser.add_argument(
        "--shape", type=int, nargs=3, metavar=("C", "H", "W"),
        help="Feature shape, BENCH_SHAPE by default.",
    )
    parser.add_argument("--reps", type=int, help="Calls per path.")
    parser.add_argument("--threads", type=int, help="Fast-path workers.")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    settings = get_settings()
    config = build_run_config(args)
    shape = parse_shape(args.shape or settings.BENCH_SHAPE, "--shape")
    report = bench_filter(
        shape,
        build_dictionary(config.dictionary),
        reps=args.reps or settings.BENCH_REPS,
        seed=run_seed(config),
        padding=PaddingModeEnum(args.padding or PaddingModeEnum.REPLICATE),
        threads=args.threads,
    )
    storage = output_storage(config)
    rows = [
        (rep + 1, exact_ms, approx_ms)
        for rep, (exact_ms, approx_ms) in enumerate(
            zip(report.exact.timings_ms, report.approx.timings_ms)
        )
    ]
    storage.write_csv(
        "bench_timings.csv", ("rep", "exact_ms", "approx_ms"), rows
    )
    emit_report(storage, "bench.json", report)
    return 0
