import argparse
import logging

import numpy as np

from cli.common import (
    add_dictionary_flags,
    add_padding_flag,
    add_run_flags,
    build_run_config,
    file_storage,
    output_storage,
    read_tensor_file,
)
from exceptions import InvalidArgumentError, ShapeMismatchError
from filters import filter_approx, filter_exact
from kernels import build_dictionary
from perspective import (
    PerspectiveParams,
    blur_from_perspective,
    normalize_perspective,
)
from schemas import PaddingModeEnum
from storages.scenes import read_perspective

logger = logging.getLogger(__name__)

FILTERED_NAME = "filtered.ftns"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "filter",
        help="Smooth a feature tensor with a spatially variant Gaussian.",
    )
    add_run_flags(parser)
    add_dictionary_flags(parser)
    add_padding_flag(parser)
    parser.add_argument(
        "--input", required=True, help="(C, H, W) tensor container."
    )
    guide = parser.add_mutually_exclusive_group(required=True)
    guide.add_argument(
        "--perspective", help="Perspective map, tensor container or CSV."
    )
    guide.add_argument("--blur", help="Blur map (sigma per pixel).")
    parser.add_argument(
        "--mode", choices=("exact", "approx"), default="approx"
    )
    parser.add_argument("--alpha", type=float, default=1.0)
    parser.add_argument("--beta", type=float, default=0.0)
    parser.add_argument("--a", type=float, default=1.0)
    parser.add_argument("--p0", type=float, default=0.0)
    parser.set_defaults(handler=run)


def _blur_map(args: argparse.Namespace) -> np.ndarray:
    if args.blur is not None:
        return read_perspective(*file_storage(args.blur))
    params = PerspectiveParams(
        alpha=args.alpha, beta=args.beta, a=args.a, p0=args.p0
    )
    p = read_perspective(*file_storage(args.perspective))
    return blur_from_perspective(normalize_perspective(p, params), params)


def run(args: argparse.Namespace) -> int:
    config = build_run_config(args)
    x = read_tensor_file(args.input)
    if x.ndim != 3:
        raise ShapeMismatchError(
            f"--input: expected a (C, H, W) tensor, got shape {x.shape}."
        )
    sigma = _blur_map(args)
    if sigma.shape != x.shape[1:]:
        source = "--blur" if args.blur is not None else "--perspective"
        raise ShapeMismatchError(
            f"{source}: map shape {sigma.shape} does not match input "
            f"shape {x.shape[1:]}."
        )
    if np.any(sigma < 0):
        raise InvalidArgumentError("--blur: sigma values must be >= 0.")

    padding = PaddingModeEnum(args.padding or PaddingModeEnum.REPLICATE)
    if args.mode == "exact":
        smoothed = filter_exact(
            x,
            sigma,
            config.dictionary.kernel_size,
            config.dictionary.normalization_mode,
            padding,
        )
    else:
        dictionary = build_dictionary(config.dictionary)
        smoothed = filter_approx(x, sigma, dictionary, padding)

    path = output_storage(config).write_tensor(FILTERED_NAME, smoothed)
    logger.info("Wrote %s filtered tensor to %s", args.mode, path)
    print(path)
    return 0
