"""Command-line entry point: ``msburden analyze|simulate|validate``."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import MsburdenError
from .io import ingest_csv
from .pipeline import AnalysisConfig, load_config, run_analysis, run_simulation

log = logging.getLogger("msburden")


def _common(p):
    p.add_argument("--tau", type=float, help="horizon in years (overrides config)")
    p.add_argument("--alpha", type=float, help="two-sided significance level")
    p.add_argument("--boot", type=int, dest="n_boot", help="bootstrap replicates for RMT-IF")
    p.add_argument("--seed", type=int, help="master random seed")
    p.add_argument("--out", dest="output_dir", help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="msburden", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analyze", help="run a configured analysis and sensitivity sweep")
    p.add_argument("config")
    _common(p)
    p = sub.add_parser("simulate", help="simulate a trial and its Monte-Carlo truths")
    p.add_argument("config")
    _common(p)
    p = sub.add_parser("validate", help="check a canonical CSV file")
    p.add_argument("csv")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            treated, control = ingest_csv(args.csv)
            labels = ", ".join(treated.state_space.labels)
            print(f"ok: {treated.n} treated, {control.n} control; transitions: {labels}")
            return 0
        overrides = {k: getattr(args, k) for k in ("tau", "alpha", "n_boot", "seed", "output_dir")}
        if args.command == "simulate":
            overrides.pop("alpha")
            overrides.pop("n_boot")
            config = load_config(args.config, **overrides)
            if isinstance(config, AnalysisConfig):
                raise MsburdenError("simulate needs a config with a 'scenario' object")
            run_simulation(config)
            print(f"wrote {config.output_dir}/data.csv, truth.json, tallies.json")
            return 0
        config = load_config(args.config, **overrides)
        if not isinstance(config, AnalysisConfig):
            raise MsburdenError("analyze needs an analysis config (with an 'input' path)")
        summary, failed = run_analysis(config)
        n = len(summary["subsets"])
        print(f"analysed {n - failed}/{n} endpoint subsets; reports in {config.output_dir}")
        return 1 if failed else 0
    except (MsburdenError, OSError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
