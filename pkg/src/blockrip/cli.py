"""Command-line entry point: ``blockrip <experiment> [options]``.

Every experiment writes CSV to ``--out`` (or stdout). Hard errors print a
one-line message to stderr and exit with a nonzero status.
"""

from __future__ import annotations

import argparse
import sys

from . import harness
from .bases import BasisLabel
from .operators import OperatorKind

# exit statuses
OK, RUN_ERROR, USAGE_ERROR = 0, 1, 2


def _global_flags(defaults: bool) -> argparse.ArgumentParser:
    # the same flags are accepted before or after the subcommand; only the
    # top-level parser sets defaults so a later occurrence wins
    kw = {} if defaults else {"default": argparse.SUPPRESS}
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, **({"default": None} if defaults else kw),
                   help="master seed (overrides the config's master_seed)")
    p.add_argument("--threads", type=int, **({"default": 1} if defaults else kw),
                   help="worker threads; results do not depend on this")
    p.add_argument("--out", **({"default": None} if defaults else kw),
                   help="output file (default: stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blockrip", parents=[_global_flags(True)],
                                     description="Block-diagonal compressive sensing experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags(False)]

    p = sub.add_parser("phase", parents=common, help="recovery phase transition over an (S, M) grid")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON experiment config")
    src.add_argument("--preset", choices=sorted(harness.PRESETS))
    p.add_argument("--basis", choices=[b.value for b in BasisLabel if b.value != "Custom" and b.value != "Circulant"],
                   default="Canonical", help="sparsity basis (with --preset)")
    p.add_argument("--operator", choices=[k.value for k in OperatorKind], default="DBD",
                   help="operator kind (with --preset)")
    p.add_argument("--trials", type=int, default=20, help="trials per cell (with --preset)")

    p = sub.add_parser("coherence-mc", parents=common, help="coherence statistics of random orthobases")
    p.add_argument("--n-total", type=int, default=256)
    p.add_argument("--blocks", "-J", type=int, default=16)
    p.add_argument("--draws", type=int, default=200)
    p.add_argument("--beta-mu", type=float, default=3.5)
    p.add_argument("--beta-gamma", type=float, default=1.0)

    p = sub.add_parser("ric-compare", parents=common, help="exact RIC per basis and operator kind")
    p.add_argument("--n-total", type=int, default=16)
    p.add_argument("--blocks", "-J", type=int, default=4)
    p.add_argument("--block-len", "-N", type=int, default=4)
    p.add_argument("--sparsity", "-S", type=int, default=2)
    p.add_argument("--meas", "-M", type=int, default=2)
    p.add_argument("--n-ops", type=int, default=100)
    p.add_argument("--orthogonal-blocks", action="store_true")

    p = sub.add_parser("circulant-demo", parents=common, help="partial circulant rewriting and recovery")
    p.add_argument("--P", type=int, default=128)
    p.add_argument("--J", type=int, default=64)
    p.add_argument("--sparsity", "-S", type=int, default=4)
    p.add_argument("--trials", type=int, default=20)

    p = sub.add_parser("export-gnuplot", parents=common, help="phase CSV to a gnuplot matrix file")
    p.add_argument("csv")
    return parser


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _run(args):
    seed = 0 if args.seed is None else args.seed
    if args.command == "phase":
        if args.config:
            config = harness.load_config(args.config)
            if args.seed is not None:
                config = config.replace(master_seed=args.seed)
        else:
            config = harness.preset_config(args.preset, args.basis, args.operator, seed, args.trials)
        result = harness.run_phase_transition(config, threads=args.threads)
        out = args.out if args.out is not None else config.output_path
        if out is not None:
            harness.write_results(result, out)
        else:
            sys.stdout.write(harness.results_to_csv(result))
        return
    if args.command == "export-gnuplot":
        _emit(harness.export_gnuplot(args.csv), args.out)
        return
    if args.command == "coherence-mc":
        result = harness.run_coherence_mc(args.n_total, args.blocks, args.draws, seed,
                                          args.beta_mu, args.beta_gamma, threads=args.threads)
    elif args.command == "ric-compare":
        result = harness.run_ric_compare(args.n_total, args.blocks, args.block_len, args.sparsity,
                                         args.meas, args.n_ops, seed,
                                         orthogonal_blocks=args.orthogonal_blocks, threads=args.threads)
    else:
        result = harness.run_circulant_demo(args.P, args.J, args.sparsity, seed, n_trials=args.trials)
    _emit(harness.results_to_csv(result), args.out)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE_ERROR if e.code else OK
    if args.threads < 1:
        print("blockrip: --threads must be at least 1", file=sys.stderr)
        return USAGE_ERROR
    try:
        _run(args)
    except harness.ConfigError as e:
        print(f"blockrip: config error: {e}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, OSError) as e:
        print(f"blockrip: {e}", file=sys.stderr)
        return RUN_ERROR
    return OK


if __name__ == "__main__":
    sys.exit(main())
