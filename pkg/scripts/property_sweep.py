"""Sweep random programs and count violations of the implication properties.

    python scripts/property_sweep.py --count 500 --seed 1

The unscoped "pre-justified => sc" line is expected to report store-buffering
shapes; the scoped line (under the race-freedom premises) should stay at zero.
"""

from __future__ import annotations

import argparse
import random
import time
from collections import Counter

from esmem.lang import format_program
from esmem.sweep import PJ_SC, PROPERTIES, SweepShape, check_structure, corpus_structures, random_structures


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-events", type=int, default=40)
    ap.add_argument("--no-corpus", action="store_true", help="skip the shipped corpus structures")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    total: Counter = Counter()
    start = time.perf_counter()
    for p, es in random_structures(rng, args.count, SweepShape(max_events=args.max_events)):
        bad = check_structure(es, rng)
        if set(bad) - {PJ_SC}:
            print(f"{dict(bad)} in: {format_program(p)}")
        total += bad
    if not args.no_corpus:
        for name, es in corpus_structures():
            bad = check_structure(es, rng)
            if set(bad) - {PJ_SC}:
                print(f"{dict(bad)} in corpus entry {name}")
            total += bad
    print(f"{args.count} random programs, {time.perf_counter() - start:.1f} s")
    for prop in PROPERTIES:
        print(f"  {prop:<38} {total[prop]} violating configurations")


if __name__ == "__main__":
    main()
