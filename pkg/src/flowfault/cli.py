"""Command-line entry point.

Subcommands: simulate, inject, train, calibrate, detect, compare, e2e.

Exit codes: 0 success (and, for detect/e2e, no alarm), 1 domain error,
2 usage error, 3 alarm fired (detect and e2e only).

Configuration comes from ``--config`` (default: the bundled reference
config) and command-line flags; flags such as ``--seed`` win over the file.
Environment variables are never read.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import pipeline
from .config import MODEL_NAMES, RunConfig, load_config, parse_value
from .core import emit_csv, load_csv, split
from .errors import FlowFaultError, InvalidConfig, UsageError
from .evaluation import compare_models, emit_report
from .faults import FAULT_KINDS, inject
from .forecasters import load_model, save_model
from .residue import Thresholds, emit_alarms
from .simulator import generate

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_ALARM = 3

log = logging.getLogger("flowfault")


def _span(text: str) -> tuple[int, int]:
    return parse_value("split.test", text)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file (default: bundled reference config; 'ref' selects it too)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    fault_opts = argparse.ArgumentParser(add_help=False)
    fault_opts.add_argument("--fault", choices=sorted(FAULT_KINDS), help="fault kind (overrides fault.kind)")
    fault_opts.add_argument(
        "--param", action="append", default=[], metavar="KEY=VALUE",
        help="fault parameter, e.g. offset=1.3 or start=16500 (repeatable)",
    )

    parser = argparse.ArgumentParser(prog="flowfault", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate a C/G series")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("inject", parents=[common, fault_opts], help="inject a fault into a series")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("train", parents=[common], help="fit a forecaster on the training range")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--model", required=True, choices=MODEL_NAMES)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("calibrate", parents=[common], help="learn alarm thresholds on the calibration range")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--model", required=True, type=Path, help="model file")
    p.add_argument("--safety-factor", type=float)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("detect", parents=[common], help="raise alarms over a range (exit 3 if any)")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--thresholds", required=True, type=Path)
    p.add_argument("--range", type=_span, help="start:stop (default: the test range)")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("compare", parents=[common], help="MSE of several models on the test range")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--models", required=True, nargs="+", type=Path)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("e2e", parents=[common, fault_opts], help="run the whole pipeline")
    p.add_argument("--data", type=Path, help="input CSV instead of simulating")
    p.add_argument("--out-dir", required=True, type=Path)
    return parser


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    raw = {}
    if args.seed is not None:
        raw["seed"] = str(args.seed)
    if getattr(args, "fault", None):
        raw["fault.kind"] = args.fault
    for item in getattr(args, "param", []):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        raw[f"fault.{key.strip()}"] = value.strip()
    if getattr(args, "data", None) is not None and args.command == "e2e":
        raw["data.path"] = str(args.data)
    try:
        return cfg.with_raw(raw)
    except InvalidConfig as exc:
        raise UsageError(str(exc)) from None


def _simulate(args, cfg):
    emit_csv(generate(cfg.sim_config()), args.out)
    return EXIT_OK


def _inject(args, cfg):
    spec = cfg.fault_spec()
    if spec is None:
        raise UsageError("no fault selected: pass --fault or set fault.kind")
    faulted, _ = inject(load_csv(args.data), spec)
    emit_csv(faulted, args.out)
    return EXIT_OK


def _train(args, cfg):
    series = load_csv(args.data)
    train, _, _ = split(series, cfg.split_spec())
    save_model(pipeline.train_model(args.model, train, cfg), args.out)
    return EXIT_OK


def _calibrate(args, cfg):
    thr, _ = pipeline.calibrate_thresholds(load_model(args.model), load_csv(args.data), cfg, args.safety_factor)
    thr.save(args.out)
    return EXIT_OK


def _detect(args, cfg):
    thr = Thresholds.load(args.thresholds)
    span = args.range if args.range is not None else cfg["split.test"]
    _, events = pipeline.detect_over(load_model(args.model), load_csv(args.data), thr, span)
    emit_alarms(events, thr, args.out)
    log.info("%d alarm(s)", len(events))
    return EXIT_ALARM if events else EXIT_OK


def _compare(args, cfg):
    models = [load_model(path) for path in args.models]
    emit_report(compare_models(load_csv(args.data), models, cfg["split.test"]), args.out)
    return EXIT_OK


def _e2e(args, cfg):
    result = pipeline.run_e2e(cfg, args.out_dir)
    for row in result.comparison.rows:
        log.info("mse %-16s %.6g", row.model_name, row.mse)
    if result.detection is not None:
        log.info("detection latency: %s", result.detection.latency)
    return EXIT_ALARM if result.events else EXIT_OK


_COMMANDS = {
    "simulate": _simulate,
    "inject": _inject,
    "train": _train,
    "calibrate": _calibrate,
    "detect": _detect,
    "compare": _compare,
    "e2e": _e2e,
}


def run_subcommand(argv: Sequence[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args, _config(args))
    except UsageError as exc:
        print(f"flowfault {args.command}: UsageError: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FlowFaultError as exc:
        print(f"flowfault {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"flowfault {args.command}: IoError: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run_subcommand(sys.argv[1:]))


if __name__ == "__main__":
    main()
