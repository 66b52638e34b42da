"""Command-line entry point.

Exit status: 0 on success, 2 when an input fails to load or validate, 3 when
the wall-clock timeout expires (a partial report naming the completed phases
is still written to stdout).
"""
import argparse
import json
import sys
import threading
from fractions import Fraction

from .eventlog import LogParseError, read_log
from .measure import (Config, PipelineError, PipelineTimeout, default_threads, generalization,
                      to_csv, to_json, to_text)
from .petri import ModelError, read_pnml, validate

EXIT_OK, EXIT_INVALID, EXIT_TIMEOUT = 0, 2, 3

# slack on top of the cooperative deadline before the watchdog gives up
_GRACE = 0.5


def _fraction(text):
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError("must lie in [0, 1]")
    return value


def _positive(kind):
    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}")
        if value < 1:
            raise argparse.ArgumentTypeError("must be at least 1")
        return value
    return parse


def _oracle(text):
    if text in ("alpha", "alpha-plus") or (text.startswith("explicit:") and len(text) > 9):
        return text
    raise argparse.ArgumentTypeError("expected alpha, alpha-plus or explicit:<path>")


def build_parser():
    p = argparse.ArgumentParser(
        prog="patgen",
        description="Pattern-based generalization of a Petri net with respect to an event log.",
    )
    p.add_argument("--log", required=True, help="event log (.xes or .csv, optionally .gz)")
    p.add_argument("--model", required=True, help="system net in PNML")
    p.add_argument("--oracle", type=_oracle, default="alpha-plus",
                   help="alpha | alpha-plus | explicit:<path to JSON> (default: alpha-plus)")
    p.add_argument("--df-filter", type=_fraction, default=Fraction(0), metavar="EPS",
                   help="directly-follows noise filter in [0, 1] for global oracles (default: 0)")
    p.add_argument("--matching", choices=("partial", "interleavings"), default="interleavings",
                   help="fulfilment of concurrent patterns (default: interleavings)")
    p.add_argument("--cap", type=_positive(int), default=10_000,
                   help="maximum linearizations per partial order (default: 10000)")
    p.add_argument("--timeout", type=_positive(float), default=600.0,
                   help="wall-clock limit in seconds (default: 600)")
    p.add_argument("--output", choices=("json", "csv", "text"), default="text")
    p.add_argument("--breakdown", action="store_true", help="include one row per pattern")
    return p


def _emit(text):
    sys.stdout.write(text)
    sys.stdout.flush()


def _partial(status, phase, message, diagnostics):
    return json.dumps({
        "status": status,
        "phase": phase,
        "error": message,
        "completed_phases": list(diagnostics.get("completed_phases", [])),
    }, indent=2) + "\n"


def run(args) -> int:
    try:
        log = read_log(args.log)
    except (OSError, LogParseError) as exc:
        print(f"patgen: load-log: {args.log}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        sn = read_pnml(args.model)
    except (OSError, ModelError) as exc:
        print(f"patgen: load-model: {args.model}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    report = validate(sn)
    if not report.ok:
        for kind, msg in report.violations:
            print(f"patgen: validate-model: {kind}: {msg}", file=sys.stderr)
        return EXIT_INVALID
    try:
        config = Config(oracle=args.oracle, df_filter=args.df_filter, matching=args.matching,
                        cap=args.cap, timeout=args.timeout, threads=default_threads())
    except ValueError as exc:
        print(f"patgen: config: {exc}", file=sys.stderr)
        return EXIT_INVALID

    diagnostics: dict = {}
    outcome: dict = {}

    def work():
        try:
            outcome["report"] = generalization(log, sn, config, diagnostics)
        except BaseException as exc:  # handed back to the main thread
            outcome["error"] = exc

    worker = threading.Thread(target=work, daemon=True)
    worker.start()
    worker.join(args.timeout + _GRACE)
    if worker.is_alive():
        phases = diagnostics.get("completed_phases", [])
        print(f"patgen: timeout after {args.timeout:g}s", file=sys.stderr)
        _emit(_partial("timeout", None, "wall-clock limit reached", {"completed_phases": list(phases)}))
        return EXIT_TIMEOUT

    exc = outcome.get("error")
    if isinstance(exc, PipelineTimeout):
        print(f"patgen: {exc}", file=sys.stderr)
        _emit(_partial("timeout", exc.phase, str(exc.cause), exc.partial))
        return EXIT_TIMEOUT
    if isinstance(exc, PipelineError):
        print(f"patgen: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if exc is not None:
        raise exc

    result = outcome["report"]
    if args.output == "json":
        _emit(to_json(result, breakdown=args.breakdown))
    elif args.output == "csv":
        _emit(to_csv(result, breakdown=args.breakdown))
    else:
        _emit(to_text(result, breakdown=args.breakdown))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ValueError as exc:
        print(f"patgen: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
