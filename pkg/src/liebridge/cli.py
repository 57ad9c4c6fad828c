"""Command line entry point: ``liebridge run --config <path>``."""

import argparse
import logging
import sys
from dataclasses import replace

from .config import ConfigError, load_config
from .runner import EXIT_ERROR, EXIT_OK, build_problem, run_experiment
from .validation import run_checks


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liebridge", description="Schrodinger bridges on SO(2) and SO(3).")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="solve, recover and (optionally) simulate a bridge")
    run.add_argument("--config", required=True,
                     help="config file, or a bundled preset name (so2_paper.cfg, so3_paper.cfg)")
    run.add_argument("--out", help="output directory (overrides [output] directory)")
    run.add_argument("--seed", type=int, help="simulation seed (overrides [simulate] seed)")
    run.add_argument("--validate-only", action="store_true",
                     help="run the invariant checks on the configured grid and exit")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = replace(cfg, directory=args.out)
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    try:
        if args.validate_only:
            checks = run_checks(build_problem(cfg), seed=cfg.seed)
            for c in checks:
                print(c.line())
            return EXIT_OK if all(c.passed for c in checks) else EXIT_ERROR
        code, summary = run_experiment(cfg)
    except Exception as exc:  # report, don't dump a traceback at users
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR

    print(f"converged={summary['converged']} iterations={summary['iterations']} "
          f"residuals=({summary['marginal_residual_rho0']:.2e}, {summary['marginal_residual_rho1']:.2e}) "
          f"-> {cfg.directory}")
    if summary["simulation"]:
        print("tv: " + ", ".join(f"t={k}: {v:.4f}" for k, v in summary["simulation"]["tv"].items()))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
