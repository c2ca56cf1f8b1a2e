"""Command line entry point: ``qinv run | validate | demo``."""

import argparse
import os
import sys

from .config import OUT_ENV, FALLBACK_OUT, ConfigError, load_config, serialize
from .experiments import DEMOS, run_demo, run_experiment

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


def _parser():
    p = argparse.ArgumentParser(prog="qinv", description="Sparse direct sampling experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--out", help=f"output directory (default: config, then ${OUT_ENV})")
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--seed", type=int, help="override the noise seed")
    val = sub.add_parser("validate", help="check a config and print it with defaults filled")
    val.add_argument("config")
    demo = sub.add_parser("demo", help="run a shipped example")
    demo.add_argument("name", choices=DEMOS)
    demo.add_argument("--out", help=f"parent output directory (default ${OUT_ENV} or ./{FALLBACK_OUT})")
    demo.add_argument("--threads", type=int, default=1)
    return p


def _load(path):
    try:
        return load_config(path), None
    except ConfigError as exc:
        return None, "\n".join(exc.errors)
    except OSError as exc:
        return None, f"cannot read config: {exc}"


def main(argv=None):
    args = _parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    if args.command in ("run", "validate"):
        cfg, err = _load(args.config)
        if err:
            print(f"{args.config}: invalid config\n{err}", file=sys.stderr)
            return EXIT_INVALID
        if args.command == "validate":
            sys.stdout.write(serialize(cfg))
            return EXIT_OK
        if args.seed is not None:
            if args.seed < 0:
                print("error: --seed must be >= 0", file=sys.stderr)
                return EXIT_INVALID
            cfg = cfg.with_seed(args.seed)
        try:
            manifest = run_experiment(cfg, args.out, args.threads)
        except Exception as exc:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"wrote {len(manifest['files']) + 1} files")
        return EXIT_OK
    out = args.out or os.environ.get(OUT_ENV) or FALLBACK_OUT
    try:
        manifest = run_demo(args.name, out, args.threads)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {len(manifest['files']) + 1} files to {os.path.join(out, args.name)}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
