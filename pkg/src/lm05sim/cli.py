"""Command-line entry point: ``lm05sim {run,sweep,band,threshold}``.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 output not writable.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from . import kernels
from .config import ConfigError, ExperimentConfig, load, with_overrides
from .experiments import (
    OutputError, cmd_band, cmd_run, cmd_sweep, cmd_threshold, prepare_output_dir,
)

log = logging.getLogger("lm05sim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OUTPUT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lm05sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "simulate one session and estimate all QBERs"),
        ("sweep", "sweep a symmetric attack angle and record measured vs. composed QBERs"),
        ("band", "scatter of measured vs. composed QBER under random imperfections"),
        ("threshold", "crossing of the Alice-Bob and Alice-Eve information curves"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH", help="key = value configuration file")
        p.add_argument("--seed", type=int, help="override session.seed")
        p.add_argument("--out", metavar="PATH", help="output directory (overrides output.path)")
        p.add_argument("--format", choices=("csv", "json"), help="override output.format")
        p.add_argument("--eve-averaging", choices=("actual", "fifty-fifty"),
                       help="override analysis.eve_averaging")
        if name in ("sweep", "band"):
            p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _report_run(result) -> None:
    q = result.qber
    print(f"qab_m = {q.qab_m}  qab_s = {q.qab_s}")
    for name in ("q1z", "q1x", "q2z", "q2x", "qab_z", "qab_x"):
        r = getattr(q, name)
        if r is None:
            print(f"{name:6s} undefined (no events)")
        else:
            flag = "  [low confidence]" if r.low_confidence else ""
            print(f"{name:6s} {r.value:.5f} +/- {r.stderr:.5f}  ({r.errors}/{r.trials}){flag}")
    i = result.info
    print(f"I_AB = {i.i_ab:.4f}  I_AE = {i.i_ae:.4f}  I_BE = {i.i_be:.4f}  margin = {i.margin:.4f}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    log.info("round kernel backend: %s", kernels.BACKEND)

    try:
        cfg = load(args.config) if args.config else ExperimentConfig()
        cfg = with_overrides(cfg, seed=args.seed, out=args.out, fmt=args.format,
                             averaging=args.eve_averaging)
    except ConfigError as exc:
        print(f"lm05sim: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        out_dir = prepare_output_dir(cfg.output_path)
    except OutputError as exc:
        print(f"lm05sim: {exc}", file=sys.stderr)
        return EXIT_OUTPUT

    try:
        if args.command == "run":
            _report_run(cmd_run(cfg, out_dir))
        elif args.command == "sweep":
            rows = cmd_sweep(cfg, out_dir, jobs=args.jobs)
            print(f"wrote {len(rows)} sweep rows to {out_dir}")
        elif args.command == "band":
            rows, hist = cmd_band(cfg, out_dir, jobs=args.jobs)
            print(f"wrote {len(rows)} band trials and {len(hist)} histogram bins to {out_dir}")
        else:
            for row in cmd_threshold(cfg, out_dir)["rows"]:
                conv, q_star, phi_star, iters, monotone, g_lo, g_hi = row[:7]
                if q_star is None:
                    print(f"{conv:12s} no crossing (gap {g_lo:+.4f} .. {g_hi:+.4f}, monotone={bool(monotone)})")
                else:
                    print(f"{conv:12s} Q* = {q_star:.4f}  phi* = {phi_star:.6f} rad  "
                          f"({iters} bisection steps, bracket gap {g_lo:+.4f} .. {g_hi:+.4f}, "
                          f"I_AB-I_AE {row[7]:+.2e} -> {row[8]:+.2e})")
    except ValueError as exc:
        print(f"lm05sim: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"lm05sim: cannot write output: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
