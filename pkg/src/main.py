"""Application entry point."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .app import Application
from .core import DEFAULT_HIDDEN, RunConfig, TrainConfig, TvdMergeError

logger = logging.getLogger(__name__)

TRAIN_COMMANDS = ("estimate", "merge", "sweep")


def setup_logging(level: int = logging.INFO, log_dir: Optional[Path] = None) -> None:
    """Configure application logging.

    Logs go to stderr so stdout carries only the JSON report.

    Args:
        level: Root log level
        log_dir: Directory for ``tvd-merge.log``; no file log when omitted
    """
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_dir is not None:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_dir / "tvd-merge.log"))

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )
    logger.debug("Logging initialized")


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a comma-separated list of integers") from None


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a comma-separated list of numbers") from None


def _probs(text: str) -> List[List[float]]:
    """``0.5,0.5;0.9,0.1`` -> one distribution per ``;``-separated group."""
    return [_float_list(group) for group in text.split(";") if group.strip()]


def _hiddens(text: str) -> List[List[int]]:
    """``128,64;32`` -> one architecture per ``;``-separated group."""
    return [_int_list(group) for group in text.split(";") if group.strip()]


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    defaults = TrainConfig()
    group = parser.add_argument_group("training")
    group.add_argument("--epochs", type=int, default=defaults.epochs)
    group.add_argument("--batch", type=int, default=defaults.batch_size, help="minibatch size")
    group.add_argument("--lr", type=float, default=defaults.lr)
    group.add_argument("--val-frac", type=float, default=defaults.val_fraction,
                       help="fraction of each cluster held out for validation")
    group.add_argument("--patience", type=int, default=defaults.patience)
    group.add_argument("--hidden", type=_int_list, default=list(DEFAULT_HIDDEN),
                       help="comma-separated hidden layer widths")
    group.add_argument("--no-standardize", action="store_true",
                       help="skip z-scoring features with training statistics")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per operation."""
    parser = argparse.ArgumentParser(
        prog="tvd-merge",
        description="Estimate total variation distances between clusters and merge them.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    parser.add_argument("--log-dir", type=Path, default=None, help="also log to DIR/tvd-merge.log")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a labeled synthetic dataset")
    synth.add_argument("--kind", choices=("gaussian", "discrete"), default="gaussian")
    synth.add_argument("--categories", type=int, default=2)
    synth.add_argument("--per-category", type=int, required=True)
    synth.add_argument("--dim", type=int, default=1)
    synth.add_argument("--separation", type=float, default=1.0)
    synth.add_argument("--probs", type=_probs, default=None,
                       help="category distributions, e.g. '0.5,0.5;0.9,0.1'")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)

    over = sub.add_parser("overcluster", help="split a dataset into many small clusters")
    over.add_argument("--mode", choices=("artificial", "greedy"), default="artificial")
    over.add_argument("--s", type=int, required=True, help="cluster size")
    over.add_argument("--k", type=int, default=None, help="number of clusters (greedy)")
    over.add_argument("--pi", type=float, default=0.0, help="noise fraction")
    over.add_argument("--data", required=True)
    over.add_argument("--seed", type=int, default=0)
    over.add_argument("--out", required=True)

    est = sub.add_parser("estimate", help="estimate the balanced-accuracy matrix")
    est.add_argument("--data", required=True)
    est.add_argument("--clusters", required=True)
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--out", required=True)
    est.add_argument("--history", default=None, help="per-epoch CSV (default next to --out)")
    _add_train_flags(est)

    merge = sub.add_parser("merge", help="hierarchically merge the closest clusters")
    merge.add_argument("--data", required=True)
    merge.add_argument("--clusters", required=True)
    merge.add_argument("--backend", choices=("tvd", "euclidean"), default="tvd")
    merge.add_argument("--steps", type=int, required=True)
    merge.add_argument("--seed", type=int, default=0)
    merge.add_argument("--out", required=True)
    _add_train_flags(merge)

    ev = sub.add_parser("eval", help="score a distance matrix against labels")
    ev.add_argument("--distances", required=True)
    ev.add_argument("--clusters", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--out", default=None)

    sweep = sub.add_parser("sweep", help="pick lr and architecture by average accuracy")
    sweep.add_argument("--data", required=True)
    sweep.add_argument("--clusters", required=True)
    sweep.add_argument("--lrs", type=_float_list, required=True)
    sweep.add_argument("--hiddens", type=_hiddens, required=True, help="e.g. '128,64;32'")
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--out", required=True)
    _add_train_flags(sweep)

    replay = sub.add_parser("replay", help="re-run the command recorded in an output file")
    replay.add_argument("path")

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Translate parsed arguments into a RunConfig."""
    skip = {"command", "verbose", "quiet", "log_dir", "epochs", "batch", "lr", "val_frac",
            "patience", "hidden", "no_standardize"}
    params = {key: value for key, value in vars(args).items() if key not in skip and value is not None}
    if args.command in TRAIN_COMMANDS:
        params["train"] = {
            "epochs": args.epochs,
            "batch_size": args.batch,
            "lr": args.lr,
            "val_fraction": args.val_frac,
            "patience": args.patience,
            "seed": args.seed,
            "hidden": list(args.hidden),
            "standardize": not args.no_standardize,
        }
    return RunConfig(command=args.command, params=params)


def _print_error(category: str, message: str) -> None:
    print(json.dumps({"error": category, "message": message}), file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point.

    Returns:
        Exit code: 0 on success, the error category's code otherwise
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    setup_logging(level, args.log_dir)

    app = Application()
    try:
        if args.command == "replay":
            report = app.replay(args.path)
        else:
            report = app.run(config_from_args(args))
    except TvdMergeError as e:
        logger.error(f"{e.category}: {e}")
        _print_error(e.category, str(e))
        return e.exit_code
    except Exception as e:
        logger.exception(f"Fatal error: {e}")
        _print_error("internal", str(e))
        return 1

    print(json.dumps(report, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
