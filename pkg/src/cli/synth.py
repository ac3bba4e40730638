import argparse

from cli.common import (
    add_run_flags,
    build_run_config,
    output_storage,
    run_seed,
)
from density import synth_dataset
from storages.scenes import save_dataset

SCENES_DIR = "scenes"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "synth", help="Generate a synthetic crowd dataset."
    )
    add_run_flags(parser)
    parser.add_argument("--num-scenes", type=int)
    parser.add_argument("--height", type=int)
    parser.add_argument("--width", type=int)
    parser.add_argument("--count", type=int, help="Heads per scene.")
    parser.add_argument("--threads", type=int)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = build_run_config(args)
    scenes = synth_dataset(
        config.num_scenes, config.scenes, run_seed(config), args.threads
    )
    storage = output_storage(config).child(SCENES_DIR)
    names = save_dataset(storage, scenes)
    placed = sum(scene.metadata.placed_count for scene in scenes)
    print(f"{len(names)} scenes with {placed} heads written to {SCENES_DIR}/")
    return 0
