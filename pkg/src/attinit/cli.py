"""``attinit`` command line entry point.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 numerical
failure in at least one Monte Carlo run (partial results are still written).
"""

import argparse
import logging
import sys

from . import experiments as ex
from .errors import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL = 0, 1, 2, 3


def _floats(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--mc-runs", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--duration", type=float, help="simulated seconds")
    p.add_argument("--workers", type=int, default=1, help="worker processes")


def build_parser():
    parser = argparse.ArgumentParser(prog="attinit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a built-in case or a YAML config")
    run.add_argument("case", help="case name (see `attinit list`) or config path")
    run.add_argument("--methods", help="comma-separated subset of Optimal,OptimalPlusMekf,MekfOnly")
    _common(run)

    sweep = sub.add_parser("sweep", help="initializer error vs gyro bias")
    sweep.add_argument("--base", default="bias_sweep", help="case name or config path")
    sweep.add_argument("--biases", type=_floats, help="per-axis biases in deg/h")
    _common(sweep)

    sub.add_parser("list", help="list built-in cases")

    config = sub.add_parser("config", help="print a built-in case as a YAML config")
    config.add_argument("case")
    config.add_argument("-o", "--output", help="write to this file instead of stdout")
    return parser


def _spec(args):
    spec = ex.resolve_spec(args.case if args.command == "run" else args.base)
    methods = getattr(args, "methods", None)
    return ex.with_overrides(spec, seed=args.seed, mc_runs=args.mc_runs, outputs=args.out,
                             methods=methods, duration=args.duration)


def _report(outputs):
    for kind, path in outputs.files.items():
        print(f"{kind}: {path}")
    if outputs.failures:
        for label, runs in outputs.failures.items():
            for run, msg in runs.items():
                print(f"failed: {label} run {run}: {msg}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "list":
            print(ex.list_cases())
            return EXIT_OK
        if args.command == "config":
            text = ex.dump_spec(ex.resolve_spec(args.case))
            if args.output:
                with open(args.output, "w", encoding="utf-8") as f:
                    f.write(text)
            else:
                print(text, end="")
            return EXIT_OK
        spec = _spec(args)
        if args.command == "run":
            return _report(ex.run_case(spec, workers=args.workers))
        return _report(ex.run_bias_sweep(spec, args.biases, workers=args.workers))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
