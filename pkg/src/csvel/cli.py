"""Command line entry point: ``csvel run --config cfg.json [overrides]``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .pipeline import (
    ConfigError,
    PipelineConfig,
    PipelineError,
    format_csv,
    run_pipeline,
    select_mu,
)
from .propagation import DEFAULT_MU_SWEEP
from .tfa import SMethodParams, WindowSpec

log = logging.getLogger("csvel")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _names(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csvel", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="estimate velocity tracks")
    run.add_argument("--config", required=True, help="JSON pipeline config")
    run.add_argument("--np", type=int, dest="np_", metavar="NP", help="window length")
    mu = run.add_mutually_exclusive_group()
    mu.add_argument("--mu", type=float, help="single mu value")
    mu.add_argument("--mu-sweep", type=_floats, nargs="?", const=DEFAULT_MU_SWEEP,
                    help="comma-separated mu values (default sweep if no value)")
    run.add_argument("--sm-l", type=int, help="S-method half-width L")
    run.add_argument("--keep-ratio", type=float)
    run.add_argument("--seed", type=int)
    run.add_argument("--methods", type=_names, help="subset of initial_sm,cs_spec,cs_sm")
    run.add_argument("--out-csv")
    run.add_argument("--out-plot")
    run.add_argument("--velocity-scale", type=float)
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def _apply_overrides(cfg: PipelineConfig, args) -> PipelineConfig:
    changes = {}
    if args.np_ is not None:
        changes["window"] = WindowSpec(cfg.window.kind, args.np_)
    if args.mu is not None:
        changes["mus"] = (args.mu,)
    if args.mu_sweep is not None:
        changes["mus"] = args.mu_sweep
    if args.sm_l is not None:
        changes["sm"] = SMethodParams(args.sm_l)
    if args.keep_ratio is not None:
        changes["keep_ratio"] = args.keep_ratio
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.methods is not None:
        changes["methods"] = args.methods
    if args.out_csv is not None:
        changes["output_csv"] = args.out_csv
    if args.out_plot is not None:
        changes["output_plot"] = args.out_plot
    if args.velocity_scale is not None:
        changes["velocity_scale"] = args.velocity_scale
    return dataclasses.replace(cfg, **changes)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _apply_overrides(PipelineConfig.from_json(args.config), args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        tracks = run_pipeline(cfg)
    except PipelineError as exc:
        print(f"pipeline failure: {exc}", file=sys.stderr)
        return 2
    for method in cfg.methods:
        group = [t for t in tracks if t.method == method]
        if len(group) > 1:
            try:
                mu, _ = select_mu(group)
                log.info("%s: smoothest track at mu=%g", method, mu)
            except PipelineError as exc:
                log.warning("%s: %s", method, exc)
    if cfg.output_csv is None:
        sys.stdout.write(format_csv(tracks, cfg.velocity_scale))
    return 0


if __name__ == "__main__":
    sys.exit(main())
