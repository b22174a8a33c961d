"""Command line entry point: run experiments, summarize result files."""

import argparse
import sys

from . import harness


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="anderson-lab",
        description="Reproducible lattice-disorder experiments: run JSON "
                    "configs, then summarize and plot the result files.")
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="execute one experiment config")
    runp.add_argument("config", help="path to a JSON experiment config")
    runp.add_argument("--workers", type=int, default=None,
                      help="worker threads (default: config value)")
    runp.add_argument("--strict-params", action="store_true",
                      help="reject scale parameters that fail any admissibility check")

    repp = sub.add_parser("report", help="summarize result files")
    repp.add_argument("files", nargs="+", help="result CSV files")
    repp.add_argument("--out", default=".",
                      help="directory for summary, plot data, and figures")
    repp.add_argument("--no-figures", action="store_true",
                      help="skip PNG rendering")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = harness.load_config(args.config)
            record = harness.run(cfg, workers=args.workers,
                                 strict=args.strict_params)
            print(f"wrote {record.path} ({len(record.rows)} rows, "
                  f"{record.wall_time:.2f}s)")
            print(f"content id {record.content_id}")
            for key, value in record.summary.items():
                shown = f"{value:.6g}" if isinstance(value, float) else value
                print(f"  {key}: {shown}")
        else:
            rows = harness.report(args.files, out_dir=args.out,
                                  figures=not args.no_figures)
            print(harness.format_summary(rows))
            print(f"wrote summary and plot data under {args.out}")
            if any(r["status"] == "FAIL" for r in rows):
                return 1
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
