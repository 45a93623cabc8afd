"""Graphviz DOT text for event structures.

Covering order pairs are solid arrows, primitive-conflict siblings are joined
by red zigzag edges, and justification (optional) is drawn dashed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .es import EventStructure, bits
from .justify import justifier_masks


@dataclass
class DotOptions:
    justification: bool = False
    highlight: int = 0
    title: str | None = None
    rankdir: str = "TB"


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(es: EventStructure, options: DotOptions | None = None) -> str:
    opt = options or DotOptions()
    lines = ["digraph es {", f"  rankdir={opt.rankdir};", '  node [shape=plaintext, fontname="Helvetica"];']
    if opt.title:
        lines.append(f"  label={_q(opt.title)};")
    for e in range(es.n):
        attrs = [f"label={_q(es.names[e] + ': ' + str(es.labels[e]))}"]
        if opt.highlight >> e & 1:
            attrs += ["shape=box", "style=filled", 'fillcolor="#dde8ff"']
        lines.append(f"  {_q(es.names[e])} [{', '.join(attrs)}];")
    for e in range(es.n):
        for d in bits(es.covers(e)):
            lines.append(f"  {_q(es.names[d])} -> {_q(es.names[e])};")
    for m in es.classes:
        members = list(bits(m))
        for i, d in enumerate(members):
            for e in members[i + 1:]:
                lines.append(
                    f"  {_q(es.names[d])} -> {_q(es.names[e])} "
                    '[dir=none, color=red, constraint=false, label="~", fontcolor=red];'
                )
    if opt.justification:
        jm = justifier_masks(es)
        for e in range(es.n):
            for d in bits(jm[e]):
                lines.append(f"  {_q(es.names[d])} -> {_q(es.names[e])} [style=dashed, constraint=false];")
    lines.append("}")
    return "\n".join(lines) + "\n"
