"""Command-line front end.

Every subcommand is a thin composition of library calls.  Reports go to
stdout (JSON with ``--format json``), logs and human-mode errors to
stderr.  Exit codes: 0 success, 2 bad input, 3 size cap exceeded,
4 domain error.
"""
import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor

from .coupling import analysis_report, cnt1, contextual_fraction, is_contextual
from .errors import CbdError, DomainError, SizeCapError, ValidationError
from .funcdsl import ConnectionFunction, format_function, load_function, parse_function
from .lp import DEFAULT_MAX_UNKNOWNS
from .rational import format_rational
from .system import (System, dumps_system, is_consistently_connected,
                     is_strongly_consistently_connected, load_system, subsystem)
from .testkit import EXAMPLE_IDS, paper_example
from .transforms import add_connection, consistify, verify_function

log = logging.getLogger("cbdkit")

EXIT_OK, EXIT_INPUT, EXIT_SIZE, EXIT_DOMAIN = 0, 2, 3, 4


def exit_code_for(exc):
    if isinstance(exc, SizeCapError):
        return EXIT_SIZE
    if isinstance(exc, DomainError):
        return EXIT_DOMAIN
    return EXIT_INPUT


def error_object(exc):
    obj = {"type": type(exc).__name__, "message": str(exc), "exit_code": exit_code_for(exc)}
    if isinstance(exc, SizeCapError):
        obj["required"] = exc.required
        obj["allowed"] = exc.allowed
    return obj


def _read_system(path):
    try:
        return load_system(path)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def _read_function(args):
    if (args.fn is None) == (args.expr is None):
        raise ValidationError("give exactly one of --fn FILE or --expr TEXT")
    if args.expr is not None:
        return parse_function(args.expr)
    try:
        return load_function(args.fn)
    except OSError as exc:
        raise ValidationError(f"cannot read {args.fn}: {exc.strerror}") from None


def _split(text):
    return [s for s in (t.strip() for t in text.split(",")) if s]


# -- subcommands: each returns (payload, kind) --------------------------------
# kind "report" is rendered per --format; "system" and "text" are written as-is.

def cmd_validate(args):
    s = _read_system(args.file)
    empty = [[q, c] for c in s.contexts for q in s.contents if not s.is_measured(q, c)]
    cc = is_consistently_connected(s)
    scc = is_strongly_consistently_connected(s)
    return {
        "valid": True,
        "contents": list(s.contents),
        "contexts": list(s.contexts),
        "empty_cells": empty,
        "consistently_connected": cc.holds,
        "strongly_consistently_connected": scc.holds,
    }, "report"


def cmd_check(args):
    s = _read_system(args.file)
    return {"contextual": is_contextual(s, args.max_outcomes),
            "cnt1": format_rational(cnt1(s, args.max_outcomes))}, "report"


def cmd_cf(args):
    s = _read_system(args.file)
    return {"contextual_fraction": format_rational(contextual_fraction(s, args.max_outcomes))}, \
        "report"


def cmd_derive(args):
    s = _read_system(args.file)
    return add_connection(s, args.name, _read_function(args)), "system"


def cmd_verify_fn(args):
    s = _read_system(args.file)
    return {"holds": verify_function(s, args.target, _read_function(args))}, "report"


def cmd_consistify(args):
    s = _read_system(args.file)
    result, naming = consistify(s, args.max_outcomes)
    sidecar = args.naming
    if sidecar is None and args.output:
        sidecar = args.output + ".naming.json"
    if sidecar:
        with open(sidecar, "w", encoding="utf-8") as fh:
            json.dump(naming.to_dict(), fh, indent=2, ensure_ascii=False)
            fh.write("\n")
    return result, "system"


def cmd_subsystem(args):
    s = _read_system(args.file)
    contents = _split(args.contents) if args.contents else None
    contexts = _split(args.contexts) if args.contexts else None
    return subsystem(s, contents, contexts), "system"


def cmd_example(args):
    params = {}
    if args.marginals:
        params["marginals"] = _split(args.marginals)
    if args.both_one:
        params["both_one"] = _split(args.both_one)
    try:
        obj = paper_example(args.id, **params)
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, CbdError):
            raise
        raise ValidationError(str(exc)) from None
    if isinstance(obj, System):
        return obj, "system"
    if isinstance(obj, ConnectionFunction):
        return format_function(obj) + "\n", "text"
    return {"cells": [list(c) for c in obj.cells], "coupling": obj.to_list()}, "report"


def _report_one(path, max_outcomes, witness):
    try:
        return {"file": path,
                "report": analysis_report(load_system(path), max_outcomes, witness)}
    except OSError as exc:
        return {"file": path, "error": error_object(ValidationError(
            f"cannot read {path}: {exc.strerror}"))}
    except CbdError as exc:
        return {"file": path, "error": error_object(exc)}


def cmd_report(args):
    s = _read_system(args.file)
    return analysis_report(s, args.max_outcomes, args.witness), "report"


def cmd_batch(args):
    jobs = max(1, args.jobs)
    if jobs == 1:
        results = [_report_one(p, args.max_outcomes, args.witness) for p in args.files]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_report_one, args.files,
                                    [args.max_outcomes] * len(args.files),
                                    [args.witness] * len(args.files)))
    return results, "report"


# -- rendering --------------------------------------------------------------

def _render_human(payload, indent=""):
    lines = []
    if isinstance(payload, list):
        for item in payload:
            lines.append(_render_human(item, indent))
            lines.append("")
        return "\n".join(lines).rstrip("\n")
    for key, value in payload.items():
        if isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            lines.append(_render_human(value, indent + "  "))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{indent}{key}: {json.dumps(value, ensure_ascii=False)}")
        else:
            shown = "null" if value is None else (str(value).lower()
                                                  if isinstance(value, bool) else value)
            lines.append(f"{indent}{key}: {shown}")
    return "\n".join(lines)


def _emit(payload, kind, args, out):
    if kind == "system":
        text = dumps_system(payload)
    elif kind == "text":
        text = payload
    elif args.format == "json":
        text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    else:
        text = _render_human(payload) + "\n"
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["human", "json"], default="human")
    common.add_argument("--max-outcomes", type=int, default=DEFAULT_MAX_UNKNOWNS,
                        help="cap on coupling-program unknowns (default 2^20)")
    common.add_argument("-v", "--verbose", action="store_true", help="log to stderr")

    parser = argparse.ArgumentParser(
        prog="cbd", description="Contextuality analysis of content-context systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, file_arg=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if file_arg:
            p.add_argument("file", help="system file (JSON)")
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check a system file and report its invariants")
    add("check", cmd_check, "decide contextuality and compute cnt1")
    add("cf", cmd_cf, "contextual fraction of a consistently connected system")
    for name, func, help_text in [("derive", cmd_derive, "add a connection defined by a function"),
                                  ("verify-fn", cmd_verify_fn,
                                   "check that a connection is a function of others")]:
        p = add(name, func, help_text)
        if name == "derive":
            p.add_argument("--name", required=True, help="new content id")
            p.add_argument("-o", "--output")
        else:
            p.add_argument("--target", required=True, help="content to check")
        p.add_argument("--fn", help=".cfn file with the function")
        p.add_argument("--expr", help="function text inline")
    p = add("consistify", cmd_consistify, "consistify a system")
    p.add_argument("-o", "--output")
    p.add_argument("--naming", help="where to write the naming sidecar")
    p = add("subsystem", cmd_subsystem, "restrict to some contents/contexts")
    p.add_argument("--contents", help="comma-separated content ids")
    p.add_argument("--contexts", help="comma-separated context ids")
    p.add_argument("-o", "--output")
    p = add("example", cmd_example, "emit a catalog example", file_arg=False)
    p.add_argument("id", help="one of: " + ", ".join(EXAMPLE_IDS))
    p.add_argument("--marginals", help="sysA: six comma-separated P[cell = 1] values")
    p.add_argument("--both-one", help="sysA: three comma-separated P[both = 1] values")
    p.add_argument("-o", "--output")
    p = add("report", cmd_report, "full analysis report")
    p.add_argument("--witness", action="store_true", help="include a coupling witness")
    p = add("batch", cmd_batch, "one report per input file, in input order", file_arg=False)
    p.add_argument("files", nargs="+")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--witness", action="store_true")
    return parser


def run(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=err, format="%(levelname)s %(name)s: %(message)s")
    if args.max_outcomes < 1:
        err.write("--max-outcomes must be positive\n")
        return EXIT_INPUT
    log.info("running %s", args.command)
    try:
        payload, kind = args.func(args)
    except CbdError as exc:
        code = exit_code_for(exc)
        if args.format == "json":
            out.write(json.dumps({"error": error_object(exc)}, indent=2) + "\n")
        else:
            err.write(f"error: {exc}\n")
        return code
    _emit(payload, kind, args, out)
    if args.command == "batch":
        codes = [r["error"]["exit_code"] for r in payload if "error" in r]
        return codes[0] if codes else EXIT_OK
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
