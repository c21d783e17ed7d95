"""Command-line interface.

Subcommands: validate, diagnoser, check, oracle, observe. Exit codes:
0 success or diagnosable, 1 negative verdict, 2 input error, 3 assumption
violation. All output is deterministic for identical inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .diagnoser import build_diagnoser, observe, to_dot
from .errors import AssumptionError, FdesError, InputError, ParseError
from .model import FdesModel, load_model
from .verdict import check_type, check_wrt, oracle_check

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_ASSUMPTION = 3


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _load_valid_model(path: str) -> FdesModel:
    model = load_model(path)
    report = model.validate()
    if not report.ok:
        raise InputError(f"model {path} is not valid:\n{report}")
    return model


def _parse_trace(text: str) -> tuple[str, ...]:
    if not text.strip():
        return ()
    return tuple(part.strip() for part in text.split(","))


def cmd_validate(args) -> int:
    try:
        model = load_model(args.model)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = model.validate()
    print(str(report))
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_diagnoser(args) -> int:
    model = _load_valid_model(args.model)
    if args.sigma not in model.events:
        raise InputError(f"unknown event {args.sigma!r}")
    status, _ = model.silent_run_bound(args.sigma)
    diag = build_diagnoser(model, args.sigma)  # raises AssumptionError when violated
    marks = _parse_trace(args.mark_uncertain) if args.mark_uncertain else ()
    dot = to_dot(diag, uncertain_types=marks)
    print(f"reference event: {args.sigma}")
    print(f"alphabet: {', '.join(diag.event_set)}")
    print(f"states: {len(diag.states)}")
    print(f"edges: {diag.edge_count()}")
    print(f"silent-run status: {status.value}")
    if args.dot == "-":
        sys.stdout.write(dot)
    elif args.dot:
        Path(args.dot).write_text(dot, encoding="utf-8")
        print(f"dot written to {args.dot}")
    return EXIT_OK


def cmd_check(args) -> int:
    model = _load_valid_model(args.model)
    if args.sigma is not None:
        ok, witness = check_wrt(model, args.sigma, args.type)
        obj = {"type": args.type, "sigma": args.sigma, "diagnosable": ok}
        if witness is not None:
            obj["witness"] = witness.to_json_obj()
        print(_dump(obj))
        return EXIT_OK if ok else EXIT_NEGATIVE
    report = check_type(model, args.type)
    print(_dump(report.to_json_obj()))
    aggregate = report.aggregate
    if aggregate is None:
        return EXIT_ASSUMPTION
    return EXIT_OK if aggregate else EXIT_NEGATIVE


def cmd_oracle(args) -> int:
    if args.max_delay <= 0 or args.max_len <= 0:
        raise InputError("bounds must be positive")
    model = _load_valid_model(args.model)
    result = oracle_check(model, args.sigma, args.type, args.max_delay, args.max_len)
    print(_dump(result.to_json_obj()))
    if result.kind == "fails":
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_observe(args) -> int:
    model = _load_valid_model(args.model)
    diag = build_diagnoser(model, args.sigma)
    trace = _parse_trace(args.trace)
    for event in trace:
        if event not in diag.event_set:
            raise InputError(
                f"event {event!r} is not in the diagnoser alphabet "
                f"{{{', '.join(diag.event_set)}}}"
            )
    state, classes = observe(diag, trace)
    if state is None:
        print("state: undefined (no such observed continuation)")
        return EXIT_OK
    print(f"state: {state}")
    for ftype in diag.failure_types:
        print(f"{ftype}: {classes[ftype].value}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdes",
        description=(
            "Model fuzzy discrete event systems, build observability-based "
            "diagnosers, and decide diagnosability."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a model file and check its invariants")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("diagnoser", help="build the diagnoser for a reference event")
    p.add_argument("model")
    p.add_argument("--sigma", required=True, help="reference event")
    p.add_argument("--dot", help="write DOT here ('-' for stdout)")
    p.add_argument(
        "--mark-uncertain",
        help="comma-separated failure types whose uncertain states get marked in DOT",
    )
    p.set_defaults(func=cmd_diagnoser)

    p = sub.add_parser("check", help="decide diagnosability of a failure type")
    p.add_argument("model")
    p.add_argument("--type", required=True, help="failure type")
    p.add_argument("--sigma", help="restrict to one reference event")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle", help="bounded definitional diagnosability check")
    p.add_argument("model")
    p.add_argument("--type", required=True, help="failure type")
    p.add_argument("--sigma", required=True, help="reference event")
    p.add_argument("--max-delay", type=int, required=True)
    p.add_argument("--max-len", type=int, required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("observe", help="run the diagnoser over an observed trace")
    p.add_argument("model")
    p.add_argument("--sigma", required=True, help="reference event")
    p.add_argument("--trace", required=True, help="comma-separated observed events")
    p.set_defaults(func=cmd_observe)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AssumptionError as exc:
        print(f"assumption violation: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (ParseError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FdesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
