"""Command-line entry point: ``nongauss {analyze,boundary,simulate,tables}``.

Exit status: 0 success, 1 validation error (including a failed table
reproduction), 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from . import pipeline
from .errors import NonGaussError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _cmd_analyze(args):
    records = pipeline.ingest_counts(args.counts)
    reports = pipeline.analyze(records, sigma_k=args.sigma_k)
    out = pipeline.reports_to_json(reports) if args.json else pipeline.reports_to_csv(reports)
    sys.stdout.write(out)
    return 0


def _cmd_boundary(args):
    path = pipeline.emit_boundary(args.r_min, args.r_max, args.samples, args.out)
    print(f"wrote {path}")
    return 0


def _cmd_simulate(args):
    counts, truth = pipeline.simulate(args.config, args.out, seed=args.seed)
    print(f"wrote {counts} and {truth}")
    return 0


def _cmd_tables(args):
    checks = pipeline.reproduce_tables()
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(
            f"{status}  {c.table:<18} {c.label:<14} {c.quantity:<20} "
            f"computed={c.computed:+.6e} published={c.published:+.6e} "
            f"|diff|={abs(c.computed - c.published):.2e} tol={c.tolerance:.0e}"
        )
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nongauss", description="Quantum non-Gaussianity witness from photon counts.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="estimate p0, p1 and the witness for each counts row")
    p.add_argument("counts", help="counts CSV (label,R0,R1A,R1B,R2,duration_s,inclusive)")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="emit JSON")
    fmt.add_argument("--csv", action="store_true", help="emit CSV (default)")
    p.add_argument("--sigma-k", type=float, default=3.0, help="verdict threshold in standard deviations")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("boundary", help="write the Gaussian-mixture boundary curve")
    p.add_argument("--r-min", type=float, default=0.0)
    p.add_argument("--r-max", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_boundary)

    p = sub.add_parser("simulate", help="simulate counts from a source config")
    p.add_argument("--config", required=True, help="JSON source config")
    p.add_argument("--out", required=True, help="counts CSV to write")
    p.add_argument("--seed", type=int, default=None, help="override the seed of every run")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("tables", help="reproduce the bundled published tables")
    p.set_defaults(func=_cmd_tables)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NonGaussError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
