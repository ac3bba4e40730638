import argparse

from cli.common import (
    add_run_flags,
    build_run_config,
    emit_report,
    load_or_synth_scenes,
    output_storage,
)
from exceptions import InvalidArgumentError
from networks import estimate_perspectives
from services import count_report, evaluate
from storages import LocalTensorStorage
from storages.checkpoints import load_network, load_penet


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "eval",
        help="Count MAE / MSE of a checkpoint or of given count lists.",
    )
    add_run_flags(parser)
    parser.add_argument("--pred", type=float, nargs="+", help="Counts.")
    parser.add_argument("--gt", type=float, nargs="+", help="True counts.")
    parser.add_argument("--checkpoint", help="Network checkpoint directory.")
    parser.add_argument(
        "--penet", help="PENet checkpoint; guides with its estimates."
    )
    parser.add_argument("--scenes", help="Scene directory from `synth`.")
    parser.add_argument("--num-scenes", type=int)
    parser.add_argument("--threads", type=int)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = build_run_config(args)
    if args.pred is not None or args.gt is not None:
        if args.pred is None or args.gt is None:
            raise InvalidArgumentError(
                "--pred and --gt must be given together."
            )
        if len(args.pred) != len(args.gt):
            raise InvalidArgumentError(
                f"--pred has {len(args.pred)} counts, --gt {len(args.gt)}."
            )
        report = count_report(args.pred, args.gt)
    else:
        checkpoint = args.checkpoint or config.paths.checkpoint_dir
        if checkpoint is None:
            raise InvalidArgumentError(
                "--checkpoint is required unless --pred/--gt are given."
            )
        net, _ = load_network(LocalTensorStorage(checkpoint))
        scenes = load_or_synth_scenes(config, args.scenes, args.threads)
        perspectives = None
        penet_dir = args.penet or config.paths.penet_dir
        if penet_dir is not None:
            penet, _ = load_penet(LocalTensorStorage(penet_dir))
            perspectives = estimate_perspectives(penet, scenes)
        report = evaluate(net, scenes, args.threads, perspectives)
    emit_report(output_storage(config), "eval.json", report)
    return 0
