import argparse

from cli.common import (
    add_dictionary_flags,
    add_run_flags,
    build_run_config,
    emit_report,
    output_storage,
)
from services import EXPERIMENTS, run_experiment


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "experiment",
        help="Run a multi-seed trend benchmark on synthetic scenes.",
    )
    parser.add_argument("name", choices=sorted(EXPERIMENTS))
    add_run_flags(parser)
    add_dictionary_flags(parser)
    parser.add_argument("--seeds", type=int, nargs="+")
    parser.add_argument("--num-scenes", type=int)
    parser.add_argument("--blocks", type=int)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--penet-epochs", type=int)
    parser.add_argument("--threads", type=int)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = build_run_config(args)
    report = run_experiment(args.name, config, args.threads)
    name = f"experiment_{args.name}.json"
    emit_report(output_storage(config), name, report)
    return 0
