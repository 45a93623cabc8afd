"""Run a litmus corpus and print the verdict table.

    python scripts/run_corpus.py                 # shipped corpus
    python scripts/run_corpus.py my.yaml -j 4

Exits 1 if any entry fails or times out.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from esmem.corpus import load_corpus, run_corpus, shipped_corpus_path


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("corpus", nargs="?", type=Path, default=shipped_corpus_path())
    ap.add_argument("-j", "--jobs", type=int, default=1)
    ap.add_argument("--timeout", type=float, default=10.0, help="seconds per entry")
    args = ap.parse_args()
    entries = load_corpus(args.corpus.read_text())
    results = run_corpus(entries, args.corpus.parent, timeout=args.timeout, jobs=args.jobs)
    width = max((len(r.entry) for r in results), default=5)
    for r in results:
        status = "TIMEOUT" if r.timed_out else "ERROR" if r.error else "PASS" if r.passed else "FAIL"
        cells = "  ".join(f"{m}={a}" + ("" if ok else f" (want {e})") for m, e, a, ok in r.rows)
        print(f"{status:<7} {r.entry:<{width}}  {r.seconds:6.2f}s  {cells or r.error or ''}")
    failing = sum(not r.passed for r in results)
    print(f"{len(results)} entries, {failing} failing")
    return 1 if failing else 0


if __name__ == "__main__":
    sys.exit(main())
