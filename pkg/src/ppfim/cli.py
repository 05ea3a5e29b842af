"""Command-line entry point: ``ppfim mine|bench|dispersion|split-report``.

Key material comes from ``--caesar-shift`` / ``--stream-key``, then the
``PPFIM_CAESAR_SHIFT`` / ``PPFIM_STREAM_KEY`` environment variables, then the
built-in defaults (shift 5, stream key 85).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from ppfim.bench import dispersion, run_grid
from ppfim.crypto import DoubleEncryptionKey
from ppfim.dataset import parse_basket_file
from ppfim.errors import InvalidParameterError, MalformedInputError, PpfimError
from ppfim.federation import EXECUTORS, MODES, PipelineConfig, pipeline_report, run_pipeline, strip_timing
from ppfim.splitter import split, split_report

log = logging.getLogger("ppfim")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_DATAERR = getattr(os, "EX_DATAERR", 65)
EXIT_IOERR = getattr(os, "EX_IOERR", 74)


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _add_key_flags(p):
    p.add_argument("--caesar-shift", type=int, default=None, help="Caesar shift in [1, 127]")
    p.add_argument("--stream-key", type=int, default=None, help="7-bit stream key in [0, 127]")


def _add_common(p, with_input=True):
    if with_input:
        p.add_argument("--input", required=True, type=Path, help="basket file, one transaction per line")
    p.add_argument("--ics", type=int, default=2, help="number of intermediate cloud servers")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    _add_key_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppfim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    mine = sub.add_parser("mine", help="run the federated pipeline and write a JSON report")
    _add_common(mine)
    mine.add_argument("--sigma", type=float, default=0.1, help="relative minimum support in (0, 1]")
    mine.add_argument("--min-conf", type=float, default=0.5)
    mine.add_argument("--owners", type=int, default=1, help="number of data owners")
    mine.add_argument("--mode", choices=MODES, default="union")
    mine.add_argument("--max-level", type=int, default=None, help="largest itemset size explored")
    mine.add_argument("--executor", choices=EXECUTORS, default="thread")
    mine.add_argument("--no-timing", action="store_true", help="omit wall-clock fields from the report")

    bench = sub.add_parser("bench", help="run a (t, c, sigma, n_transactions) grid and write CSV")
    bench.add_argument("--owners", type=_int_list, default=[1], help="comma list of t values")
    bench.add_argument("--ics", type=_int_list, default=[1, 2, 4], help="comma list of c values")
    bench.add_argument("--sigma", type=_float_list, default=[0.1], help="comma list of sigma values")
    bench.add_argument("--tx", type=_int_list, default=[1000], help="comma list of database sizes")
    bench.add_argument("--n-items", type=int, default=20)
    bench.add_argument("--max-len", type=int, default=5)
    bench.add_argument("--mode", choices=MODES, default="union")
    bench.add_argument("--max-level", type=int, default=None)
    bench.add_argument("--executor", choices=EXECUTORS, default="thread")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--no-timing", action="store_true", help="omit wall-clock columns")
    bench.add_argument("--out", type=Path, default=None)
    _add_key_flags(bench)

    disp = sub.add_parser("dispersion", help="per-block cipher-item frequency dispersion")
    _add_common(disp)
    disp.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds starting at --seed")

    rep = sub.add_parser("split-report", help="block sizes and id ranges of one split")
    _add_common(rep)
    return parser


def _load(path: Path):
    return parse_basket_file(path.read_bytes())


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_mine(args) -> int:
    key = DoubleEncryptionKey.resolve(args.caesar_shift, args.stream_key)
    config = PipelineConfig(
        n_ics=args.ics,
        relative_min_sup=args.sigma,
        min_conf=args.min_conf,
        aggregation_mode=args.mode,
        key=key,
        seed=args.seed,
        n_data_owners=args.owners,
        max_level=args.max_level,
        executor=args.executor,
    )
    db = _load(args.input)
    result, metrics = run_pipeline(db, config)
    report = pipeline_report(result, metrics, config)
    if args.no_timing:
        report = strip_timing(report)
    _emit(_dump(report), args.out)
    log.info("%d frequent itemsets, %d rules", len(result.frequent), len(result.rules))
    return EXIT_OK


def cmd_bench(args) -> int:
    key = DoubleEncryptionKey.resolve(args.caesar_shift, args.stream_key)
    if args.max_len > args.n_items:
        raise InvalidParameterError("--max-len must not exceed --n-items")
    report = run_grid(
        owners=args.owners,
        ics=args.ics,
        sigmas=args.sigma,
        n_transactions=args.tx,
        n_items=args.n_items,
        max_len=args.max_len,
        mode=args.mode,
        seed=args.seed,
        key=key,
        max_level=args.max_level,
        executor=args.executor,
    )
    _emit(report.to_csv(wall_clock=not args.no_timing), args.out)
    for row in report.rows:
        if row.error:
            log.error("t=%d c=%d sigma=%g n=%d: %s", row.t, row.c, row.sigma, row.n_transactions, row.error)
    return EXIT_OK if report.ok else EXIT_FAILURE


def cmd_dispersion(args) -> int:
    key = DoubleEncryptionKey.resolve(args.caesar_shift, args.stream_key)
    if args.ics < 1 or args.seeds < 1:
        raise InvalidParameterError("--ics and --seeds must be >= 1")
    db = _load(args.input)
    seeds = list(range(args.seed, args.seed + args.seeds))
    _emit(_dump(dispersion(db, key, args.ics, seeds).to_dict()), args.out)
    return EXIT_OK


def cmd_split_report(args) -> int:
    db = _load(args.input)
    _emit(_dump(split_report(split(db.ids, args.ics, args.seed))), args.out)
    return EXIT_OK


COMMANDS = {
    "mine": cmd_mine,
    "bench": cmd_bench,
    "dispersion": cmd_dispersion,
    "split-report": cmd_split_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except OSError as exc:
        print(f"ppfim: error: cannot read or write {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IOERR
    except MalformedInputError as exc:
        print(f"ppfim: error: malformed input: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    except InvalidParameterError as exc:
        parser.print_usage(sys.stderr)
        print(f"ppfim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PpfimError as exc:
        print(f"ppfim: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
