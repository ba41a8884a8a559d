"""Command-line entry point: ``fibernls <experiment> --config <path> --out <dir>``.

Exit codes: 0 pass, 1 a bound or check was violated, 2 configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .. import bounds as B
from ..models import InsufficientGrid, QuadratureFailure, SingularCoefficient
from ..solver import StepInstability
from ..transform import OutOfBox
from . import experiments as X
from .config import ConfigError, ExperimentConfig, load_config
from .output import write_result

log = logging.getLogger("fibernls")

NUMERICAL_ERRORS = (StepInstability, OutOfBox, B.LTooLarge, B.BracketFailure, B.EmptyTrajectory,
                    SingularCoefficient, InsufficientGrid, QuadratureFailure, FloatingPointError,
                    RuntimeError)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fibernls", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "evolve one model and record observables"),
                        ("closeness", "compare lossy and integrable evolutions against the bounds"),
                        ("convergence", "Strang order check against the exact soliton"),
                        ("sweep", "tabulate L(epsilon) and delta_max"),
                        ("painleve-check", "evaluate the integrability condition")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="YAML or JSON config (defaults apply when omitted)")
        sp.add_argument("--out", help="output directory (overrides output.directory)")
        if name == "sweep":
            sp.add_argument("--epsilons", type=float, nargs="*", default=[])
            sp.add_argument("--deltas", type=float, nargs="*", default=[])
        if name == "painleve-check":
            sp.add_argument("--tol", type=float, default=1e-8)
    return p


def _run(args, cfg: ExperimentConfig):
    if args.command == "simulate":
        return X.run_simulate(cfg)
    if args.command == "closeness":
        return X.run_closeness(cfg)
    if args.command == "convergence":
        return X.run_convergence(cfg)
    if args.command == "sweep":
        return X.run_bound_sweep(cfg, args.epsilons, args.deltas)
    return X.run_painleve_check(cfg, args.tol)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        result = _run(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return X.EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return X.EXIT_NUMERICAL
    out = args.out or cfg.output.directory
    write_result(result, out, cfg.output.formats, cfg.output.fields)
    verdict = result.report.get("verdict")
    log.info("%s finished with exit code %d", result.name, result.exit_code)
    print(f"{result.name}: {verdict or ('ok' if result.exit_code == 0 else 'fail')} -> {out}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
