"""Command-line entry point.

Subcommands:

``fractail run <scenario.toml> [--plots] [--out DIR]``
    Execute one experiment scenario and write CSV tables, a text report,
    and (with ``--plots``) SVG figures into the output directory.

``fractail verify <suite>``
    Run a named verification suite (one line per criterion).  Unknown
    suite names are usage errors (exit 2); failing criteria exit 1.

``fractail mlf --alpha A --beta B --x X [--check]``
    Evaluate E_{alpha,beta}(x); with ``--check`` also print the 50-digit
    reference value and the relative error against it.
"""

from __future__ import annotations

import argparse
import os
import sys

from .acceptance import SUITES, run_suite
from .mittag_leffler import MLParams, ml_eval
from .runner import run_scenario
from .scenario import ConfigError, load_scenario

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractail",
        description=(
            "Forward spectral solutions of time-fractional diffusion-wave "
            "equations and constructive source recovery from long-time tails."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a TOML scenario file")
    run_p.add_argument("scenario", help="path to the scenario file")
    run_p.add_argument(
        "--plots", action="store_true", help="also write SVG plots"
    )
    run_p.add_argument(
        "--out",
        default=None,
        help="output directory (default: <scenario stem>_out)",
    )

    ver_p = sub.add_parser("verify", help="run a verification suite")
    ver_p.add_argument("suite", choices=sorted(SUITES), help="suite name")

    mlf_p = sub.add_parser("mlf", help="evaluate E_{alpha,beta}(x)")
    mlf_p.add_argument("--alpha", type=float, required=True)
    mlf_p.add_argument("--beta", type=float, required=True)
    mlf_p.add_argument("--x", type=float, required=True)
    mlf_p.add_argument(
        "--check",
        action="store_true",
        help="compare against the 50-digit reference evaluator",
    )
    return parser


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ConfigError as exc:
        print(f"error: {args.scenario}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out_dir = args.out
    if out_dir is None:
        stem = os.path.splitext(os.path.basename(args.scenario))[0]
        out_dir = f"{stem}_out"
    try:
        report = run_scenario(scenario, out_dir, plots=args.plots)
    except ConfigError as exc:
        print(f"error: {args.scenario}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(
            f"error running scenario {args.scenario!r} "
            f"(kind={scenario.kind}): {type(exc).__name__}: {exc}",
            file=sys.stderr,
        )
        return 1
    print(f"scenario digest: {report.scenario_digest}")
    for key, value in report.fitted.items():
        resid = report.residuals.get(key)
        tail = f"  (residual {resid:.6e})" if resid is not None else ""
        print(f"  {key} = {value:.12g}{tail}")
    for key, ok in report.checks.items():
        print(f"  check {key}: {'PASS' if ok else 'FAIL'}")
    for name, path in report.outputs.items():
        print(f"wrote {name}: {path}")
    return 0 if report.passed else 1


def _cmd_verify(args) -> int:
    results = run_suite(args.suite)
    for res in results:
        print(res.line)
    failed = [r.index for r in results if not r.passed]
    if failed:
        print(f"suite {args.suite!r}: {len(failed)} criterion(s) failed: {failed}")
        return 1
    print(f"suite {args.suite!r}: all {len(results)} criteria passed")
    return 0


def _cmd_mlf(args) -> int:
    try:
        params = MLParams(args.alpha, args.beta)
        value = ml_eval(params, args.x)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"E_({args.alpha:g},{args.beta:g})({args.x:g}) = {value:.17g}")
    if args.check:
        from . import oracle

        ref = float(oracle.ml_reference(args.alpha, args.beta, args.x))
        rel = abs(value - ref) / max(abs(ref), 1e-300)
        print(f"reference         = {ref:.17g}")
        print(f"relative error    = {rel:.3e}")
        if rel > 1e-10:
            return 1
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "verify":
        return _cmd_verify(args)
    return _cmd_mlf(args)


if __name__ == "__main__":
    sys.exit(main())
