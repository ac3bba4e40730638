import argparse
import logging

from cli.common import (
    add_run_flags,
    build_run_config,
    emit_report,
    load_or_synth_scenes,
    output_storage,
    run_seed,
)
from exceptions import MissingDecoderError
from networks import (
    build_toy_net,
    estimate_perspectives,
    finetune_phase3,
    train_phase1,
    train_phase2,
)
from schemas import Phase3ModeEnum
from storages import LocalTensorStorage
from storages.checkpoints import load_penet, save_network, save_penet

logger = logging.getLogger(__name__)

PENET_DIR = "penet"
CHECKPOINT_DIR = "checkpoint"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "penet",
        help="Pre-train the perspective estimator and optionally fine-tune.",
        description="Phase 1 reconstructs perspective maps, phase 2 learns "
                    "them from images with the decoder frozen, phase 3 "
                    "trains the density network on the estimates.",
    )
    add_run_flags(parser)
    parser.add_argument("--scenes", help="Scene directory from `synth`.")
    parser.add_argument("--num-scenes", type=int)
    parser.add_argument(
        "--phases", type=int, nargs="+", choices=(1, 2, 3), default=[1, 2],
    )
    parser.add_argument(
        "--resume", help="PENet checkpoint to start from (phases 2 and 3)."
    )
    parser.add_argument(
        "--finetune",
        choices=[mode.value for mode in Phase3ModeEnum],
        help="Phase 3 mode, the config's by default.",
    )
    parser.add_argument("--epochs", type=int, help="Density epochs.")
    parser.add_argument("--penet-epochs", type=int, help="PENet epochs.")
    parser.add_argument("--blocks", type=int)
    parser.add_argument("--threads", type=int)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = build_run_config(args)
    scenes = load_or_synth_scenes(config, args.scenes, args.threads)
    storage = output_storage(config)
    phases = sorted(set(args.phases))

    penet = None
    resume = args.resume or config.paths.penet_dir
    if resume:
        penet, _ = load_penet(LocalTensorStorage(resume))
    elif 1 not in phases:
        raise MissingDecoderError(
            "--phases: phases 2 and 3 need phase 1 or a --resume checkpoint."
        )
    if 1 in phases:
        penet, report = train_phase1(
            [scene.gt_perspective for scene in scenes],
            config.penet,
            config.penet_trainer,
            penet,
        )
        emit_report(storage, "phase1.json", report)
    if 2 in phases:
        penet, report = train_phase2(
            [(scene.image, scene.gt_perspective) for scene in scenes],
            penet,
            config.penet_trainer,
        )
        emit_report(storage, "phase2.json", report)

    if 3 in phases:
        phase3 = config.phase3.model_copy(
            update={"trainer": config.trainer}
        )
        if args.finetune is not None:
            phase3 = phase3.model_copy(
                update={"mode": Phase3ModeEnum(args.finetune)}
            )
        net = build_toy_net(
            config.network,
            seed=run_seed(config),
            perspective_maps=estimate_perspectives(penet, scenes),
        )
        net, penet, report = finetune_phase3(net, penet, scenes, phase3)
        save_network(
            storage.child(CHECKPOINT_DIR),
            net,
            epoch=phase3.trainer.epochs,
            loss_curve=report.loss_curve,
        )
        emit_report(storage, "phase3.json", report)

    if penet is not None:
        save_penet(storage.child(PENET_DIR), penet, epoch=len(phases))
    return 0

