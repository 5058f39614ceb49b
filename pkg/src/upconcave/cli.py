"""Command-line entry point."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .bench.experiment import ConfigError, load_config, run_experiment
from .bench.movielens import MovieLensFormatError, parse_movielens
from .bench.problems import gen_summarization


def _cmd_run(args) -> int:
    return run_experiment(args.config, dry_run=args.dry_run)


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"{args.config}: ok ({cfg.problem}, solver={cfg.solver}, T={cfg.T})")
    return 0


def _cmd_gen(args) -> int:
    inst = gen_summarization(args.k, args.seed)
    np.savez_compressed(args.out, s=inst.s, k=inst.k, seed=args.seed, budget=inst.budget)
    print(f"wrote {args.out} (k={inst.k}, seed={args.seed})")
    return 0


def _cmd_ingest(args) -> int:
    ratings = parse_movielens(args.ratings)
    ratings.save(args.out)
    print(f"wrote {args.out}: {len(ratings)} ratings, {ratings.n_users} users, {ratings.n_movies} movies")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="upconcave", description="Up-concave maximization experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config", help="path to a JSON experiment config")
    run.add_argument("--dry-run", action="store_true", help="validate only, write nothing")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="check an experiment config")
    val.add_argument("config")
    val.set_defaults(func=_cmd_validate)

    gen = sub.add_parser("gen-summarization", help="write a random summarization instance (.npz)")
    gen.add_argument("--k", type=int, default=50, help="number of items (default 50)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_gen)

    ing = sub.add_parser("ingest-movielens", help="parse ratings.dat into a compact .npz")
    ing.add_argument("--ratings", required=True, help="path to ratings.dat")
    ing.add_argument("--out", required=True)
    ing.set_defaults(func=_cmd_ingest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, MovieLensFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
