"""Command-line experiment runner.

    inewton sweep  --config cfg.json [--out DIR]
    inewton trace  --config cfg.json --step K [--out DIR]
    inewton verify [--seed N]

Exit codes: 0 success, 1 run or verification failure, 2 config error.
The output directory resolves as --out, then $INEWTON_OUT, then the
config's output_dir.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    ConfigError,
    emit_oversolving_trace,
    load_config,
    resolve_output_dir,
    run_sweep,
    run_verification,
)


def _build_parser():
    parser = argparse.ArgumentParser(prog="inewton",
                                     description="inexact Newton experiment harness")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run every configured strategy and "
                                         "write results.csv plus JSON traces")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", default=None)

    trace = sub.add_parser("trace", help="emit per-inner-iteration linear vs "
                                         "nonlinear residual arrays")
    trace.add_argument("--config", required=True)
    trace.add_argument("--step", type=int, required=True,
                       help="accepted time-step index (0 for static problems)")
    trace.add_argument("--out", default=None)

    verify = sub.add_parser("verify", help="run the numeric verification suite")
    verify.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            config = load_config(args.config)
            out_dir = resolve_output_dir(config, args.out)
            rows, all_completed = run_sweep(config, out_dir)
            for row in rows:
                status = "ok" if row.completed else "FAILED"
                print(f"{row.case} {row.strategy}: inner={row.inner} "
                      f"outer={row.outer} cuts={row.cuts} [{status}]")
            print(f"wrote {out_dir}/results.csv")
            return 0 if all_completed else 1

        if args.command == "trace":
            config = load_config(args.config)
            out_dir = resolve_output_dir(config, args.out)
            for path in emit_oversolving_trace(config, args.step, out_dir):
                print(path)
            return 0

        summary = run_verification(seed=args.seed)
        print(json.dumps(summary, indent=1))
        return 0 if summary["all_passed"] else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
