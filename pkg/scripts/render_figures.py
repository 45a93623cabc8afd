"""Write DOT files for the hand-encoded figures and their compiled programs.

    python scripts/render_figures.py out/
    dot -Tsvg out/P1.dot -o P1.svg      # if Graphviz is installed

Each figure is written twice: the hand-encoded JSON (``NAME.dot``) and the
structure compiled from its program (``NAME.program.dot``), with
justification drawn dashed.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from esmem import es as es_mod
from esmem.corpus import figures_dir
from esmem.dot import DotOptions, to_dot
from esmem.semantics import compile_program

PROGRAMS = {
    "P1": ("r1=x; y=r1; || r2=y; x=r2;", None),
    "P3": ("r1=x; y=1; || r2=y; x=r2;", None),
    "P4": ("y=x; || x=1; || r=y;", None),
    "P5": ("acq(2); x=1; x=0; rel(2); || acq(2); r=x; rel(2);", (2,)),
    "P6": ("y=x; || z=1; || if(!z){x=y;} else {x=1;}", None),
    "TC7": ("r=z; y=x; || z=y; x=1;", None),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--no-justification", action="store_true")
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)
    for name, (text, locks) in PROGRAMS.items():
        fig = es_mod.loads((figures_dir() / f"{name}.json").read_text())
        prog = compile_program(text, (0, 1), lock_values=locks)
        for suffix, es in (("", fig), (".program", prog)):
            opts = DotOptions(justification=not args.no_justification, title=f"{name}{suffix}")
            path = args.outdir / f"{name}{suffix}.dot"
            path.write_text(to_dot(es, opts) + "\n")
            print(f"{path}: {es.n} events")


if __name__ == "__main__":
    main()
