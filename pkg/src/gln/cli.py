"""Command-line entry point.

    gln [--seed N] [--config FILE] [--out DIR] COMMAND [--set key=value ...]

Commands: train-mnist, capacity, forgetting, density, saliency, eval,
uci.  Defaults come from the experiment, then the config file, then
--set overrides, with --seed/--out applied last.  --data-dir fills the
four standard IDX paths (gzipped files are picked up automatically).
"""

from __future__ import annotations

import argparse
import os
import sys

from .harness.config import apply_overrides, defaults_for, parse_config_file
from .harness import runners

_RUNNERS = {
    "train-mnist": runners.run_mnist_online,
    "capacity": runners.run_capacity,
    "forgetting": runners.run_forgetting,
    "density": runners.run_density,
    "saliency": runners.run_saliency,
    "eval": runners.run_eval,
    "uci": runners.run_uci,
}

_STANDARD_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def _resolve_standard(data_dir: str) -> dict:
    found = {}
    for key, name in _STANDARD_FILES.items():
        for candidate in (name, name + ".gz"):
            path = os.path.join(data_dir, candidate)
            if os.path.exists(path):
                found[key] = path
                break
    return found


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gln", description="gated linear network experiments")
    parser.add_argument("--seed", type=int, default=None, help="master seed")
    parser.add_argument("--config", default=None, help="flat key = value config file")
    parser.add_argument("--out", default=None, help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any config field")
        p.add_argument("--data-dir", default=None, help="directory with the standard IDX files")
        if name in ("eval", "saliency"):
            p.add_argument("--model", default=None, help="saved model file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = defaults_for(args.command)
    if args.config:
        cfg = apply_overrides(cfg, parse_config_file(args.config))
    overrides = {}
    if args.data_dir:
        overrides.update(_resolve_standard(args.data_dir))
    for item in args.set:
        if "=" not in item:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if getattr(args, "model", None):
        overrides["model_path"] = args.model
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.out is not None:
        overrides["out_dir"] = args.out
    cfg = apply_overrides(cfg, overrides)

    records = _RUNNERS[args.command](cfg)
    for record in records[-8:]:
        print(f"{record.step}\t{record.metric}\t{record.value:.6g}")
    print(f"metrics written to {os.path.join(cfg.out_dir, 'metrics.jsonl')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
