"""Command line entry point: ``kappa-flow <kind> --config <path>``.

Exit codes: 0 pass, 1 a check failed, 2 solver blow-up or vacuum,
3 configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import load_config, resolved_text
from .errors import BlowUpError, ConfigError, VacuumError
from .harness import KINDS, run_experiment, write_outputs
from .states import write_state

EXIT_PASS, EXIT_FAIL, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2, 3

log = logging.getLogger("kappa_flow")


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors, not solver failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="kappa-flow", description="Run a kappa-entropy experiment.")
    ap.add_argument("kind", choices=KINDS)
    ap.add_argument("--config", required=True, help="INI file with [grid] [params] [scheme] [experiment]")
    ap.add_argument("--out", default=None, help="output directory (default: runs/<kind>)")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = load_config(args.config, kind=args.kind, seed=args.seed, threads=args.threads)
        resolved = resolved_text(cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or Path("runs") / args.kind)
    try:
        res = run_experiment(cfg)
    except (BlowUpError, VacuumError) as err:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.resolved").write_text(resolved)
        state = getattr(err, "state", None)
        if state is not None:
            write_state(out / "last_state.knsf", state)
        print(f"solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER
    write_outputs(res, cfg, out, resolved)
    for name, ok in res.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    for msg in res.warnings:
        print(f"warning: {msg}")
    print(f"outputs in {out}")
    return EXIT_PASS if res.passed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
