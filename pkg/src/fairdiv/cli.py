"""Command-line entry point.

    fairdiv --input data.csv --color-col race --k 20 --mode coreset --out out.json

Set FAIRDIV_LOG=DEBUG (or INFO, WARNING, ...) for progress logging.  Errors
print a machine-readable JSON object and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .io import RunBatch, RunConfig, emit, error_object, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairdiv",
        description="Select a maximally diverse subset under per-color minimum counts.",
    )
    parser.add_argument("--input", required=True, help="CSV file with a header row")
    parser.add_argument("--color-col", default="color", help="name of the color column")
    parser.add_argument("--k", type=int, default=10, help="total output size")
    parser.add_argument(
        "--spec",
        default="equal",
        help="'equal', 'proportional', or an explicit comma-separated quota list",
    )
    parser.add_argument("--epsilon", type=float, default=0.25, help="approximation slack")
    parser.add_argument("--g", type=float, default=0.3, help="early-stop fraction of the iteration budget")
    parser.add_argument("--delta", type=float, default=0.1, help="failure probability (highprob mode)")
    parser.add_argument(
        "--mode",
        default="coreset",
        choices=["offline", "coreset", "stream", "highprob"],
        help="pipeline to run",
    )
    parser.add_argument(
        "--search", default="decay", choices=["binary", "decay"], help="threshold search strategy"
    )
    parser.add_argument("--seed", type=int, default=0, help="base random seed")
    parser.add_argument("--repeat", type=int, default=1, help="number of seeded reruns (seed+i)")
    parser.add_argument("--out", default=None, help="output JSON path (stdout when omitted)")
    parser.add_argument("--plot-csv", default=None, help="optional companion CSV for plot tooling")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    spec_arg = args.spec.strip()
    if spec_arg in ("equal", "proportional"):
        spec_mode, quotas = spec_arg, None
    else:
        try:
            quotas = [int(x) for x in spec_arg.split(",")]
        except ValueError:
            raise ValueError(
                f"--spec must be 'equal', 'proportional', or a comma list of ints; got {spec_arg!r}"
            ) from None
        spec_mode = "explicit"
    return RunConfig(
        input=args.input,
        color_column=args.color_col,
        k=args.k,
        spec_mode=spec_mode,
        explicit_quotas=quotas,
        epsilon=args.epsilon,
        g=args.g,
        delta=args.delta,
        mode=args.mode,
        search=args.search,
        seed=args.seed,
        repeat=args.repeat,
        out=args.out,
        plot_csv=args.plot_csv,
    )


def main(argv=None) -> int:
    level = os.environ.get("FAIRDIV_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        batch: RunBatch = run(config)
        if config.out:
            emit(batch, config.out, plot_csv=config.plot_csv)
        else:
            from dataclasses import asdict

            doc = {"runs": [asdict(r) for r in batch.runs], "aggregate": batch.aggregate}
            json.dump(doc, sys.stdout, indent=2)
            sys.stdout.write("\n")
            if config.plot_csv:
                emit_tmp = batch  # plot CSV still wants a file target
                emit(emit_tmp, os.devnull, plot_csv=config.plot_csv)
        return 0
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports all failures
        json.dump(error_object(exc), sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
