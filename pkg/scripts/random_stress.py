"""Hammer the engine with random user behavior and report survival.

Each episode drives a fresh session with randomly chosen user acts
(topic changes, refusals, junk, silence) for up to --turns exchanges.
The engine audits its own state after every rule application, so any
coherence failure surfaces as a crash; this script counts completed
episodes and the distribution of how dialogs ended.

Usage: python3 scripts/random_stress.py [--episodes N] [--turns N] [--seed N]
"""

import argparse
import random
import time
from collections import Counter

from faceted_dialog.engine import DialogEngine
from faceted_dialog.semantics import NO, YES, Instance, parse_atom
from faceted_dialog.speech_acts import ActKind, Speaker, SpeechAct


def ua(kind, content=None):
    return SpeechAct(kind, content, Speaker.USER)


def random_turn(rng, step_no):
    pool = [
        [ua(ActKind.GREET)],
        [ua(ActKind.ACCEPT)],
        [ua(ActKind.REFUSE)],
        [ua(ActKind.ANSWER, YES)],
        [ua(ActKind.ANSWER, NO)],
        [ua(ActKind.ACKNOWLEDGE)],
        [],
        [ua(ActKind.INFORM, parse_atom("term(asthma)"))],
        [ua(ActKind.INFORM, parse_atom("term(parasomny)"))],
        [ua(ActKind.INFORM, parse_atom("term(sleep_disorders)"))],
        [ua(ActKind.INFORM, parse_atom("subheading(therapy)"))],
        [ua(ActKind.INFORM, parse_atom("metaTerm(allergology)"))],
        [ua(ActKind.ANSWER, Instance(parse_atom("question(document)")))],
        [ua(ActKind.ANSWER, Instance(parse_atom("question(definition)")))],
        [ua(ActKind.INFORM, parse_atom("define(parasomny)"))],
        [ua(ActKind.INFORM, parse_atom("noise(step%d)" % step_no))],
        [ua(ActKind.WANTS_NOTHING)],
        [ua(ActKind.BYE)],
    ]
    turn = list(rng.choice(pool))
    if rng.random() < 0.25:
        turn += rng.choice(pool)
    return turn


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--episodes", type=int, default=500)
    parser.add_argument("--turns", type=int, default=60)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    outcomes = Counter()
    moves_total = 0
    started = time.monotonic()
    for episode in range(args.episodes):
        rng = random.Random(args.seed + episode)
        engine = DialogEngine()
        engine.step()
        for step_no in range(args.turns):
            moves_total += len(engine.step(random_turn(rng, step_no)))
            if engine.state.ended:
                outcomes["ended by dialog"] += 1
                break
        else:
            outcomes["turn budget spent"] += 1
    elapsed = time.monotonic() - started

    print("episodes:     %d" % args.episodes)
    print("system moves: %d" % moves_total)
    for label, count in outcomes.most_common():
        print("  %-18s %d" % (label, count))
    print("elapsed:      %.2fs" % elapsed)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
