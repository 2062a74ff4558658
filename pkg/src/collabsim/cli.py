"""Command-line entry point: calibrate, run, sweep, ablate."""

import argparse
import logging
import os
import sys
from dataclasses import replace

from . import harness
from .scenario import write_frames_csv, generate_world


def _config(args):
    cfg = harness.load_config(args.config) if args.config else harness.ExperimentConfig()
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    return cfg


def cmd_calibrate(args):
    cfg = _config(args)
    os.makedirs(cfg.output_dir, exist_ok=True)
    seeds = (args.seed,) if args.seed is not None else None
    path = os.path.join(cfg.output_dir, "codebook.bin")
    book = harness.calibrate_codebook(cfg, seeds, path=path)
    print(f"codebook n_L={book.n_L} n_R={book.n_R} version={book.version_id} -> {path}")


def cmd_run(args):
    cfg = _config(args)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    result = harness.run_episode(cfg, seed)
    result.write(cfg.output_dir)
    with open(os.path.join(cfg.output_dir, "ground_truth.csv"), "w", newline="") as fh:
        write_frames_csv(generate_world(replace(cfg.world, seed=seed)), fh)
    harness.write_plot_script(cfg.output_dir)
    print(f"seed={seed} ap50={result.ap50:.4f} ap70={result.ap70:.4f} mota={result.mota:.4f} "
          f"motp={result.motp:.4f} bytes={result.raw_bytes} -> {cfg.output_dir}")


def cmd_sweep(args):
    cfg = _config(args)
    seeds = (args.seed,) if args.seed is not None else None
    for rec in harness.sweep(cfg, args.axis, seeds):
        print(f"{args.axis}={rec.budget} bytes={rec.raw_bytes:.0f} ap50={rec.ap50:.4f} ap70={rec.ap70:.4f} "
              f"mota={rec.mota:.4f}")


def cmd_ablate(args):
    cfg = _config(args)
    seeds = (args.seed,) if args.seed is not None else None
    for rec in harness.ablate(cfg, seeds):
        print(f"{rec.budget}: bytes={rec.raw_bytes:.0f} ap50={rec.ap50:.4f} ap70={rec.ap70:.4f} mota={rec.mota:.4f}")


def build_parser():
    parser = argparse.ArgumentParser(prog="collabsim", description="Collaborative perception simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (("calibrate", cmd_calibrate, "learn and save the shared codebook"),
                            ("run", cmd_run, "simulate one episode and write its CSVs"),
                            ("sweep", cmd_sweep, "sweep one axis and write a trade-off CSV"),
                            ("ablate", cmd_ablate, "disable each stage in turn")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="INI experiment config")
        p.add_argument("--seed", type=int, help="episode seed (default: from config)")
        p.add_argument("--out", help="output directory")
        if name == "sweep":
            p.add_argument("--axis", required=True, choices=harness.AXES)
        p.set_defaults(func=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    try:
        args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
