"""Command-line front end.

Exit codes: 0 allowed / success, 1 forbidden / mismatch, 2 usage or input
error, 3 timeout.
"""

from __future__ import annotations

import argparse
import json
import signal
import sys
from pathlib import Path

from . import es as es_mod
from .corpus import (
    DEFAULT_TIMEOUT,
    CorpusError,
    EntryTimeout,
    evaluate,
    load_corpus,
    parse_values,
    run_corpus,
    shipped_corpus_path,
    verdict_table,
)
from .dot import DotOptions, to_dot
from .es import EventStructure, bits
from .game import MODES, alt_well_justified, normalize_mode, well_justified
from .lang import ParseError
from .logic import parse_formula, parse_type_env, theorem_inv_check
from .query import holds, parse_query
from .semantics import compile_program

EXIT_OK, EXIT_NO, EXIT_ERROR, EXIT_TIMEOUT = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ helpers


def _structure(args) -> EventStructure:
    values = parse_values(args.values)
    lock_values = None if args.lock_values is None else parse_values(args.lock_values)
    if args.program is not None:
        if args.file is not None:
            raise UsageError("give either FILE or --program, not both")
        return compile_program(args.program, values, lock_values=lock_values, cas_policy=args.cas_policy)
    if args.file is None:
        raise UsageError("missing FILE (or --program)")
    text = sys.stdin.read() if args.file == "-" else Path(args.file).read_text()
    if args.file.endswith(".json"):
        return es_mod.loads(text)
    return compile_program(text, values, lock_values=lock_values, cas_policy=args.cas_policy)


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _names(es: EventStructure, c: int) -> str:
    return "{" + ", ".join(es.names_of(c)) + "}"


def _explain(es: EventStructure, mode: str, c: int) -> dict | None:
    if mode == "wj":
        _, trace = well_justified(es, c, explain=True)
        return trace.to_json() if trace else None
    if mode == "alt":
        _, trace = alt_well_justified(es, c, explain=True)
        return trace.to_json() if trace else None
    if mode == "sc":
        from .seqcon import sc_check

        _, order = sc_check(es, c)
        return {"interleaving": order}
    if mode == "fenced":
        from .fence import well_fenced

        ok, found = well_fenced(es, c, explain=True)
        if not ok or found is None:
            return None
        aug, trace = found
        return {"fencing": [list(p) for p in aug.added_names()], "trace": trace.to_json() if trace else None}
    return None


def _format_explain(info: dict) -> str:
    lines = []
    if "interleaving" in info:
        lines.append("interleaving: " + " ".join(info["interleaving"] or []))
    if "fencing" in info:
        lines.append("fencing: " + ", ".join(f"{d} <= {e}" for d, e in info["fencing"]))
        info = info.get("trace") or {}
    for step in info.get("steps", []):
        lines.append(f"round: {{{', '.join(step['from'])}}} -> {{{', '.join(step['to'])}}}")
        lines.append(f"  opponent positions: {step['saturated_total']}")
        for r, js in step["justifiers"].items():
            lines.append(f"  {r} justified by {', '.join(js)}")
    return "\n".join(lines)


# ----------------------------------------------------------------- commands


def cmd_check(args) -> int:
    es = _structure(args)
    mode = normalize_mode(args.mode)
    query = parse_query(args.query)
    v = evaluate(es, query, mode, any_config=args.any_config)
    payload = {
        "mode": mode,
        "query": str(query),
        "verdict": v.word,
        "candidates": v.candidates,
        "witness": None if v.witness is None else es.names_of(v.witness),
    }
    lines = [f"mode: {mode}", f"query: {args.query}", f"verdict: {v.word}",
             f"matching configurations: {v.candidates}"]
    if v.witness is not None:
        lines.append(f"witness: {_names(es, v.witness)}")
        if args.explain:
            info = _explain(es, mode, v.witness)
            payload["explain"] = info
            if info:
                lines.append(_format_explain(info))
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if v.allowed else EXIT_NO


def cmd_enumerate(args) -> int:
    es = _structure(args)
    modes = [normalize_mode(m) for m in (args.mode or MODES)]
    if "fenced" in modes and not es.alphabet.with_lock:
        modes.remove("fenced")
    table = verdict_table(es, modes, any_config=args.any_config)
    rows = [{"configuration": es.names_of(c), **table[c]} for c in table]
    width = max([len(_names(es, c)) for c in table] + [13])
    lines = ["configuration".ljust(width) + "  " + "  ".join(m.rjust(7) for m in modes)]
    for c in table:
        cells = "  ".join(("yes" if table[c][m] else "no").rjust(7) for m in modes)
        lines.append(_names(es, c).ljust(width) + "  " + cells)
    _emit(args, {"modes": modes, "configurations": rows}, "\n".join(lines))
    return EXIT_OK


def cmd_corpus(args) -> int:
    path = Path(args.corpus) if args.corpus else shipped_corpus_path()
    entries = load_corpus(path.read_text())
    results = run_corpus(entries, path.parent, timeout=args.timeout or None, jobs=args.jobs)
    if args.json:
        print(json.dumps([r.to_json() for r in results], indent=2))
    else:
        print(f"{'entry':<26}{'mode':<9}{'expected':<11}{'actual':<11}result")
        for r in results:
            if r.error or r.timed_out:
                print(f"{r.entry:<26}{'-':<9}{'-':<11}{'-':<11}{'TIMEOUT' if r.timed_out else 'ERROR: ' + str(r.error)}")
            for mode, exp, act, ok in r.rows:
                print(f"{r.entry:<26}{mode:<9}{exp:<11}{act:<11}{'pass' if ok else 'FAIL'}")
        failed = sum(not r.passed for r in results)
        print(f"{len(results)} entries, {failed} failing")
    if any(r.timed_out for r in results):
        return EXIT_TIMEOUT
    if any(r.error for r in results):
        return EXIT_ERROR
    return EXIT_OK if all(r.passed for r in results) else EXIT_NO


def cmd_dot(args) -> int:
    es = _structure(args)
    highlight = 0
    if args.highlight:
        q = parse_query(args.highlight)
        hit = [c for c in es.maximal_configurations() if holds(q, {es.labels[e] for e in bits(c)})]
        highlight = hit[0] if hit else 0
    text = to_dot(es, DotOptions(justification=args.justification, highlight=highlight, title=args.title))
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_invariant(args) -> int:
    es = _structure(args)
    phi = parse_formula(args.formula)
    types = parse_type_env(args.type or [])
    rep = theorem_inv_check(es, phi, types, mode=args.mode)
    lines = [f"formula: {phi}"]
    for key in ("satisfiable", "subset_closed", "respects_justification", "invariant", "tautology"):
        lines.append(f"{key.replace('_', ' ')}: {'yes' if getattr(rep, key) else 'no'}")
    if rep.invariant_witness is not None:
        lines.append("invariant witness: {" + ", ".join(rep.invariant_witness) + "}")
    if rep.tautology_witness is not None:
        lines.append("tautology witness: {" + ", ".join(rep.tautology_witness) + "}")
    if rep.justification_witness is not None:
        a, b = rep.justification_witness
        lines.append(f"justification witness: {{{', '.join(a)}}} justifies {{{', '.join(b)}}}")
    lines.append(f"bug alarm: {'YES' if rep.bug_alarm else 'no'}")
    _emit(args, {"formula": str(phi), **rep.to_json()}, "\n".join(lines))
    return EXIT_OK if rep.tautology else EXIT_NO


def cmd_drf(args) -> int:
    from .seqcon import drf_report

    es = _structure(args)
    rep = drf_report(es)
    lines = [
        f"read-enabled:          {'yes' if rep.read_enabled else 'no'}",
        f"commutative:           {'yes' if rep.commutative else 'no'}",
        f"SC configs race-free:  {'yes' if rep.premise_holds else 'no'}",
        f"well-justified => SC:  {'yes' if rep.conclusion_holds else 'no'}",
        f"SC configurations:     {rep.sc_count}",
        f"well-justified:        {rep.wj_count}",
        f"bug alarm:             {'YES' if rep.bug_alarm else 'no'}",
    ]
    for c, race in rep.premise_counterexamples[:5]:
        d = race.describe(es)
        lines.append(f"race ({d['kind']}) {d['d']} / {d['e']} in {_names(es, c)}")
    for c in rep.conclusion_counterexamples[:5]:
        lines.append(f"not SC: {_names(es, c)}")
    _emit(args, rep.to_json(es), "\n".join(lines))
    return EXIT_NO if rep.bug_alarm else EXIT_OK


# -------------------------------------------------------------------- parser


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", nargs="?", help="program text, or an event structure .json ('-' for stdin)")
    p.add_argument("-p", "--program", help="program text given inline")
    p.add_argument("--values", default="0,1", help="value set, e.g. 0..2 or 0,1,2 (default 0,1)")
    p.add_argument("--lock-values", default=None, help="lock values, e.g. 2 (locks are separate from --values)")
    p.add_argument("--cas-policy", choices=["read-write", "read-only"], default="read-write")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="esmem", description="Event-structure memory model checker.")
    ap.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="seconds per run or corpus entry (0: none)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="is a behavior allowed under a mode?")
    _add_input(p)
    p.add_argument("-q", "--query", required=True, help="e.g. 'exists R x 1 && exists R y 1'")
    p.add_argument("-m", "--mode", default="wj", help=f"one of {', '.join(MODES)}")
    p.add_argument("--any-config", action="store_true", help="consider every configuration, not only maximal ones")
    p.add_argument("--explain", action="store_true", help="print a winning chain or interleaving")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("enumerate", help="per-mode verdicts for every maximal configuration")
    _add_input(p)
    p.add_argument("-m", "--mode", action="append", help="restrict to these modes (repeatable)")
    p.add_argument("--any-config", action="store_true")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("corpus", help="litmus corpus commands")
    csub = p.add_subparsers(dest="corpus_command", required=True)
    r = csub.add_parser("run", help="run a corpus file (default: the shipped corpus)")
    r.add_argument("corpus", nargs="?")
    r.add_argument("-j", "--jobs", type=int, default=1)
    r.add_argument("--json", action="store_true")
    r.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    r.set_defaults(func=cmd_corpus)

    p = sub.add_parser("dot", help="Graphviz DOT text of the event structure")
    _add_input(p)
    p.add_argument("--justification", action="store_true", help="draw justification as dashed edges")
    p.add_argument("--highlight", help="highlight the first maximal configuration matching this query")
    p.add_argument("--title")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("invariant", help="invariant theorem check for a formula")
    _add_input(p)
    p.add_argument("-f", "--formula", required=True, help="e.g. 'x!=1 && y!=1'")
    p.add_argument("--type", action="append", help="type binding NAME=v1,v2 (repeatable)")
    p.add_argument("-m", "--mode", default="wj", choices=["wj", "alt"])
    p.set_defaults(func=cmd_invariant)

    p = sub.add_parser("drf", help="DRF theorem premises and conclusion")
    _add_input(p)
    p.set_defaults(func=cmd_drf)
    return ap


def _alarm(signum, frame):
    raise EntryTimeout()


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    timed = args.command != "corpus" and args.timeout and hasattr(signal, "setitimer")
    if timed:
        old = signal.signal(signal.SIGALRM, _alarm)
        signal.setitimer(signal.ITIMER_REAL, args.timeout)
    try:
        return args.func(args)
    except EntryTimeout:
        print(f"error: timed out after {args.timeout:g} s", file=sys.stderr)
        return EXIT_TIMEOUT
    except (UsageError, ParseError, CorpusError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        if timed:
            signal.setitimer(signal.ITIMER_REAL, 0)
            signal.signal(signal.SIGALRM, old)


if __name__ == "__main__":
    sys.exit(main())
