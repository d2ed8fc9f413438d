"""Walk the canonical search dialog end to end and print the exchange.

Runs the full happy path against the built-in corpus: greeting, an
asthma query, accepting the refinement offer, browsing the smaller
list, and closing the session.  Useful as a quick smoke check and as a
readable sample of what the engine produces.

Usage: python3 scripts/golden_dialog.py [--show-state]
"""

import argparse

from faceted_dialog.service import DialogService, ServiceConfig

SCRIPT = [
    "hello",
    "I would like to find documents about asthma",
    "yes",
    "no",
    "yes",
    "yes",
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--show-state",
        action="store_true",
        help="print the public dialog state after each system turn",
    )
    args = parser.parse_args()

    service = DialogService(ServiceConfig())
    opened = service.create_session()
    sid = opened["session"]
    print("S: %s" % opened["system_turn"])
    for line in SCRIPT:
        print("U: %s" % line)
        reply = service.post_utterance(sid, line)
        print("S: %s" % reply["system_turn"])
        if args.show_state:
            snap = reply["public_snapshot"]
            print("   [com=%s qud=%s]" % (snap["com"], snap["qud"]))
        if reply["ended"]:
            break
    print()
    print("turns recorded: %d" % len(service.get_transcript(sid)["turns"]))
    print("plans visited:  %s" % ", ".join(service.sessions[sid].engine.activation_trace))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
