import argparse
import logging

from cli.common import (
    add_dictionary_flags,
    add_padding_flag,
    add_run_flags,
    build_run_config,
    emit_report,
    load_or_synth_scenes,
    output_storage,
    run_seed,
)
from networks import build_toy_net, mean_density_loss, train
from schemas import TrainReportSchema
from services import evaluate
from storages.checkpoints import save_network

logger = logging.getLogger(__name__)

CHECKPOINT_DIR = "checkpoint"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "train", help="Train the density network with PGC blocks."
    )
    add_run_flags(parser)
    add_dictionary_flags(parser)
    add_padding_flag(parser)
    parser.add_argument("--scenes", help="Scene directory from `synth`.")
    parser.add_argument("--blocks", type=int, help="Number of PGC blocks.")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--lr", type=float, help="Learning rate.")
    parser.add_argument("--num-scenes", type=int)
    parser.add_argument(
        "--no-smoothing",
        action="store_true",
        help="Train the a = 0 baseline instead.",
    )
    parser.add_argument("--threads", type=int)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = build_run_config(args)
    scenes = load_or_synth_scenes(config, args.scenes, args.threads)
    network = config.network
    if args.no_smoothing:
        network = network.model_copy(update={"smoothing": False})

    net = build_toy_net(
        network,
        seed=run_seed(config),
        perspective_maps=[scene.gt_perspective for scene in scenes],
    )
    net, loss_curve = train(net, scenes, config.trainer)

    storage = output_storage(config)
    save_network(
        storage.child(CHECKPOINT_DIR),
        net,
        epoch=config.trainer.epochs,
        loss_curve=loss_curve,
    )
    metrics = evaluate(net, scenes, args.threads)
    report = TrainReportSchema(
        epochs=config.trainer.epochs,
        parameter_count=net.parameter_count(),
        loss_curve=loss_curve,
        final_loss=mean_density_loss(net, scenes),
        train_mae=metrics.mae,
        train_mse=metrics.mse,
    )
    emit_report(storage, "train_report.json", report)
    return 0
