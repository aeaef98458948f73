"""Command line entry point: ``jsdm-outage <verb> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import experiments
from .analytic import Scenario
from .config import load_config
from .errors import ConfigError, ConvergenceError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _grid(text):
    lo, hi, step = (float(x) for x in text.split(":"))
    return np.arange(lo, hi + step / 2, step)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config; omitted fields use the defaults")
    common.add_argument("--seed", type=int, help="master seed (default: config seed)")
    common.add_argument("--drops", type=int, default=10_000, help="Monte Carlo drops")
    common.add_argument("--out", help=f"output directory (env {experiments.OUT_ENV})")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="jsdm-outage", description=__doc__)
    sub = p.add_subparsers(dest="verb", required=True)

    a = sub.add_parser("analyze", parents=[common], help="analytic outage curves")
    a.add_argument("--thresholds", type=_grid, default=_grid("-10:30:1"),
                   help="lo:hi:step in dB")

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo outage curve")
    s.add_argument("--thresholds", type=_grid, default=_grid("-10:30:1"))
    s.add_argument("--scenario", choices=[x.value for x in Scenario],
                   default=Scenario.TWO_TIER.value)
    s.add_argument("--precoding", choices=["zf", "none"], default="zf")

    f = sub.add_parser("figure", parents=[common], help="reproduce a figure as CSV")
    f.add_argument("figure_id", choices=["1", "2", "3", "fig1", "fig2", "fig3"])

    r = sub.add_parser("regions", parents=[common], help="dump association region masks")
    r.add_argument("--resolution", type=int, default=201)

    w = sub.add_parser("sweep", parents=[common], help="density-ratio sweep")
    w.add_argument("--threshold", type=float, default=0.0, help="threshold in dB")
    w.add_argument("--engine", choices=["analytic", "simulated", "both"], default="analytic")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
        out = experiments.output_dir(args.out)
        seed = cfg.seed
        if args.verb == "analyze":
            paths = experiments.analyze(cfg, args.thresholds, out)
        elif args.verb == "simulate":
            paths = experiments.simulate(cfg, args.thresholds, args.drops, seed, out,
                                         Scenario(args.scenario), args.precoding,
                                         args.workers)
        elif args.verb == "figure":
            paths = experiments.run_figure(args.figure_id, cfg, out, args.drops, seed,
                                           args.workers)
        elif args.verb == "regions":
            paths = experiments.dump_regions(cfg, args.resolution, out)
        else:
            paths = experiments.figure3(cfg, args.drops, seed, out,
                                        threshold_db=args.threshold,
                                        simulate=args.engine != "analytic",
                                        workers=args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        if args.config and getattr(exc, "filename", None) == args.config:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConvergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
