"""Command line entry point: ``depthstill generate | verify | eval``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import dataset
from .metrics import EmptyEvaluationError
from .sampler import ConfigError, GenerationConfig, read_config


def _jobs(value):
    if value is not None:
        return value
    env = os.environ.get("DEPTHSTILL_JOBS")
    return int(env) if env else 1


def cmd_generate(args) -> int:
    if args.manifest:
        manifest = dataset.JobManifest.load(args.manifest)
    else:
        if not (args.images and args.depths):
            print("generate: --images and --depths are required without --manifest", file=sys.stderr)
            return 2
        try:
            config = read_config(args.config) if args.config else GenerationConfig()
        except (OSError, ConfigError) as exc:
            print(f"generate: cannot load config: {exc}", file=sys.stderr)
            return 2
        manifest = dataset.plan(args.images, args.depths, config, args.instances)

    summary = dataset.generate(manifest, args.out, jobs=_jobs(args.jobs))
    print(
        f"samples={summary['samples']} failed={summary['failed']} "
        f"hole_fraction={summary['mean_hole_fraction']:.4f} "
        f"collision_fraction={summary['mean_collision_fraction']:.4f} "
        f"wall_time={summary['wall_time']:.2f}s"
    )
    for name, err in sorted(summary["failures"].items()):
        print(f"FAILED {name}: {err}")
    return 0 if summary["failed"] == 0 else 1


def cmd_verify(args) -> int:
    results = dataset.verify(args.out)
    for r in results:
        print(r)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def cmd_eval(args) -> int:
    try:
        per_file, total, missing = dataset.evaluate_dirs(args.pred, args.gt)
    except EmptyEvaluationError as exc:
        print(f"eval: {exc}", file=sys.stderr)
        return 1
    for name, report in per_file.items():
        print(f"{name} {report.to_line()}")
    for name in missing:
        print(f"MISSING {name}")
    print(total.to_line())
    return 0 if not missing else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="depthstill", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="synthesize a flow dataset from images and depth maps")
    gen.add_argument("--config", help="key = value configuration file")
    gen.add_argument("--images", help="directory of input images")
    gen.add_argument("--depths", help="directory of depth maps matched by file stem")
    gen.add_argument("--instances", help="optional directory of instance label maps")
    gen.add_argument("--manifest", help="replay an existing manifest.json instead of scanning directories")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--jobs", type=int, default=None, help="worker processes (default: $DEPTHSTILL_JOBS or 1)")
    gen.set_defaults(func=cmd_generate)

    ver = sub.add_parser("verify", help="re-check a generated dataset")
    ver.add_argument("--out", required=True)
    ver.set_defaults(func=cmd_verify)

    ev = sub.add_parser("eval", help="score predicted flow files against ground truth")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--gt", required=True)
    ev.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
