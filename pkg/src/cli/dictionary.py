import argparse

from cli.common import (
    add_dictionary_flags,
    add_run_flags,
    build_run_config,
    emit_report,
    output_storage,
)
from kernels import build_dictionary
from storages.dictionaries import save_dictionary

DICTIONARY_NAME = "dictionary"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "dict",
        help="Build the eigen-kernel dictionary.",
        description="Sample the Gaussian family, decompose it and write the "
                    "eigen-kernels with a JSON metadata sidecar.",
    )
    add_run_flags(parser)
    add_dictionary_flags(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = build_run_config(args)
    dictionary = build_dictionary(config.dictionary)
    storage = output_storage(config)
    save_dictionary(storage, dictionary, DICTIONARY_NAME)
    emit_report(storage, f"{DICTIONARY_NAME}.json", dictionary.metadata())
    return 0
