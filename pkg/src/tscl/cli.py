"""Command line entry point: ``tscl <subcommand>``.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .config import MODES, TrainConfig
from .errors import ConfigError, NumericError, SchemaError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _cmd_train(args) -> int:
    from .trainer import run_experiment

    cfg = TrainConfig.load(args.config) if args.config else TrainConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.mode is not None:
        cfg.mode = args.mode
    if args.epochs is not None:
        cfg.epochs = args.epochs
    if args.out is not None:
        cfg.output_dir = args.out
    cfg.validate()
    if args.print_config:
        import json

        print(json.dumps(cfg.to_dict(), indent=2))
        return EXIT_OK
    out = cfg.resolved_output_dir()
    records = run_experiment(cfg)
    last = records[-1]
    print(f"wrote {out}/log.csv: {len(records)} epochs, final bitacc={last.val_bitacc:.4f} psnr={last.val_psnr:.2f}")
    return EXIT_OK


def _cmd_schedule_dump(args) -> int:
    from .report import schedule_csv, schedule_dump, schedule_svg

    cfg = TrainConfig.load(args.config) if args.config else TrainConfig()
    epochs = args.epochs if args.epochs is not None else cfg.epochs
    cfg.epochs = epochs
    cfg.validate()
    rows = schedule_dump(cfg.curriculum(), epochs)
    text = schedule_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.svg:
        Path(args.svg).write_text(schedule_svg(rows, title=f"{cfg.mode} / {cfg.schedule.preset}"))
    return EXIT_OK


def _cmd_grad_check(args) -> int:
    from .gradsuite import CASES, DEFAULT_SEEDS, run_suite

    names = args.ops or list(CASES)
    unknown = [n for n in names if n not in CASES]
    if unknown:
        raise ConfigError(f"unknown ops {unknown}; choose from {list(CASES)}")
    seeds = range(args.seeds) if args.seeds else DEFAULT_SEEDS
    ok = True
    start = time.perf_counter()
    for name in names:
        reports = run_suite([name], seeds, tol=args.tol)[name]
        worst = max(r.max_rel_error for r in reports)
        passed = all(r.passed for r in reports)
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name:<14} seeds={len(reports)} max_rel_err={worst:.3e} tol={args.tol:g}",
              flush=True)
        for r in reports:
            if not r.passed:
                print(f"      {r}")
    print(f"{len(names)} ops in {time.perf_counter() - start:.1f}s")
    return EXIT_OK if ok else EXIT_NUMERIC


def _cmd_compare(args) -> int:
    from .report import compare_csv, compare_runs, compare_text

    table = compare_runs(args.logs)
    sys.stdout.write(compare_text(table))
    if args.csv:
        Path(args.csv).write_text(compare_csv(table))
    return EXIT_OK


def _cmd_synth(args) -> int:
    from .data import synth_corpus, write_corpus

    ds = synth_corpus(args.seed, args.count, args.size)
    write_corpus(ds, args.out)
    counts = {k: s.stop - s.start for k, s in ds.splits.items()}
    print(f"wrote {args.count} images to {args.out} {counts} sha256={ds.digest()[:16]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tscl", description="Two-stage curriculum loss scheduling for stego training.")
    p.add_argument("-v", "--verbose", action="store_true", help="log every epoch")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="run one training experiment")
    t.add_argument("--config", help="JSON config file (defaults are used when omitted)")
    t.add_argument("--seed", type=int)
    t.add_argument("--mode", choices=MODES)
    t.add_argument("--epochs", type=int)
    t.add_argument("--out", help="output directory (TSCL_OUT still takes precedence)")
    t.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    t.set_defaults(func=_cmd_train)

    s = sub.add_parser("schedule-dump", help="write the curriculum weights per epoch as CSV")
    s.add_argument("--config")
    s.add_argument("--epochs", type=int)
    s.add_argument("--out", help="CSV path (stdout when omitted)")
    s.add_argument("--svg", help="also write an SVG line chart here")
    s.set_defaults(func=_cmd_schedule_dump)

    g = sub.add_parser("grad-check", help="finite-difference check of every differentiable op")
    g.add_argument("--tol", type=float, default=1e-4)
    g.add_argument("--seeds", type=int, default=0, help="number of seeds (default 5)")
    g.add_argument("--ops", nargs="*", help="subset of ops to check")
    g.set_defaults(func=_cmd_grad_check)

    c = sub.add_parser("compare", help="side-by-side final/best metrics of run logs")
    c.add_argument("logs", nargs="+")
    c.add_argument("--csv", help="also write the table as CSV")
    c.set_defaults(func=_cmd_compare)

    y = sub.add_parser("synth", help="write a synthetic PPM corpus")
    y.add_argument("--seed", type=int, default=1)
    y.add_argument("--count", type=int, default=200)
    y.add_argument("--size", type=int, default=32)
    y.add_argument("--out", required=True)
    y.set_defaults(func=_cmd_synth)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, SchemaError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
