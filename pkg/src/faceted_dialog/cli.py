"""Command line front door: serve, repl, run, validate.

All four subcommands build the same ``DialogService``, so a dialog
behaves identically whether it arrives over HTTP, through the
terminal, or from a script file.
"""

from __future__ import annotations

import argparse
import sys

from . import nl_frontend
from .plan_library import load_builtin_plans, load_plan_file, validate_library
from .service import DialogService, ServiceConfig, ServiceError, make_server, run_script
from .task_model import load_store


def _add_data_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--terminology", help="terminology records (JSON lines)")
    parser.add_argument("--documents", help="document records (JSON lines)")
    parser.add_argument("--plans", help="plan library file")
    parser.add_argument("--delta-min", type=int, default=3,
                        help="result counts below this read as too few")
    parser.add_argument("--delta-max", type=int, default=30,
                        help="result counts above this read as too many")
    parser.add_argument("--data-dir", help="directory for transcript files")


def _service_config(args) -> ServiceConfig:
    return ServiceConfig(
        terminology_path=args.terminology,
        documents_path=args.documents,
        plans_path=args.plans,
        delta_min=args.delta_min,
        delta_max=args.delta_max,
        data_dir=args.data_dir,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faceted-dialog",
        description="Dialog engine for faceted document search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP wire API")
    _add_data_options(serve)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8140)

    repl = sub.add_parser("repl", help="talk to the system in the terminal")
    _add_data_options(repl)

    run = sub.add_parser("run", help="replay a script of user utterances")
    _add_data_options(run)
    run.add_argument("script", help="utterance script file")

    validate = sub.add_parser("validate", help="check data files and plans")
    _add_data_options(validate)
    return parser


def _cmd_serve(args) -> int:
    service = DialogService(_service_config(args))
    server = make_server(service, args.host, args.port)
    print("listening on http://%s:%d" % (args.host, args.port))
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _cmd_repl(args) -> int:
    service = DialogService(_service_config(args))
    created = service.create_session()
    session_id = created["session"]
    print("S: %s" % created["system_turn"])
    print("(/state shows the public dialog state, /quit leaves)")
    while True:
        try:
            text = input("U: ")
        except (EOFError, KeyboardInterrupt):
            print()
            return 0
        stripped = text.strip()
        if not stripped:
            continue
        if stripped == "/quit":
            return 0
        if stripped == "/state":
            snapshot = service.get_state(session_id)
            for key in ("com", "issue", "qud", "action", "ended"):
                print("  %s: %s" % (key, snapshot[key]))
            continue
        reply = service.post_utterance(session_id, stripped)
        print("S: %s" % reply["system_turn"])
        if reply["ended"]:
            return 0


def _cmd_run(args) -> int:
    service = DialogService(_service_config(args))
    return run_script(service, args.script)


def _cmd_validate(args) -> int:
    """Report every data problem instead of stopping at the first."""
    failures = 0
    if (args.terminology is None) != (args.documents is None):
        print("error: --terminology and --documents go together")
        return 2
    if args.terminology is not None:
        store, report = load_store(args.terminology, args.documents)
        for message in report.errors:
            print("data: %s" % message)
        failures += len(report.errors)
        print("store: %d terms, %d documents" % (len(store.terms), len(store.documents)))
    else:
        print("store: built-in data")
    try:
        plans = load_plan_file(args.plans) if args.plans else load_builtin_plans()
    except Exception as exc:
        print("plans: %s" % exc)
        return 2
    problems = validate_library(plans)
    for message in problems:
        print("plans: %s" % message)
    failures += len(problems)
    print("plans: %d loaded" % len(plans))
    lexicon = nl_frontend.load_lexicon()
    gaps = nl_frontend.validate_lexicon(lexicon.templates)
    for message in gaps:
        print("templates: %s" % message)
    failures += len(gaps)
    print("templates: %d entries" % len(lexicon.templates))
    if failures:
        print("FAIL: %d problem(s)" % failures)
        return 1
    print("OK")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "serve": _cmd_serve,
        "repl": _cmd_repl,
        "run": _cmd_run,
        "validate": _cmd_validate,
    }[args.command]
    try:
        return handler(args)
    except ServiceError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
