import argparse

from cli.common import (
    add_dictionary_flags,
    add_padding_flag,
    add_run_flags,
    build_run_config,
    emit_report,
    output_storage,
    run_seed,
)
from density import synth_scene_from_config
from exceptions.exit_codes import EXIT_NUMERICAL, EXIT_OK
from networks import build_penet, build_toy_net, gradcheck, joint_gradcheck


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "gradcheck",
        help="Compare analytic gradients with central differences.",
    )
    add_run_flags(parser)
    add_dictionary_flags(parser)
    add_padding_flag(parser)
    parser.add_argument("--blocks", type=int, help="Number of PGC blocks.")
    parser.add_argument("--height", type=int)
    parser.add_argument("--width", type=int)
    parser.add_argument("--count", type=int, help="Heads in the scene.")
    parser.add_argument("--step", type=float, default=1e-4)
    parser.add_argument("--tolerance", type=float, default=1e-4)
    parser.add_argument(
        "--max-checks", type=int, help="Probe a random subset of scalars."
    )
    parser.add_argument(
        "--joint",
        action="store_true",
        help="Check the path through the PENet image encoder as well.",
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Exit code 4 when the check fails."""
    config = build_run_config(args)
    seed = run_seed(config)
    scene = synth_scene_from_config(config.scenes, seed)
    net = build_toy_net(
        config.network, seed=seed, perspective_maps=[scene.gt_perspective]
    )
    if args.joint:
        penet = build_penet(config.penet, seed=seed)
        penet.decoder_trained = True
        report = joint_gradcheck(
            net, penet, scene, args.step, args.tolerance, args.max_checks,
            seed,
        )
    else:
        report = gradcheck(
            net, scene, args.step, args.tolerance, args.max_checks, seed
        )
    emit_report(output_storage(config), "gradcheck.json", report)
    return EXIT_OK if report.passed else EXIT_NUMERICAL
