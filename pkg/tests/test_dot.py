import re

from esmem.dot import DotOptions, to_dot
from esmem.lang import Program
from esmem.semantics import program_semantics

from conftest import figure, program

_EDGE = re.compile(r'^\s*"([^"]+)" -> "([^"]+)"(.*);$')


def _parts(text):
    nodes, order, zig, dashed = [], [], [], []
    for line in text.splitlines():
        m = _EDGE.match(line)
        if m:
            a, b, attrs = m.groups()
            if "dir=none" in attrs:
                zig.append((a, b))
            elif "dashed" in attrs:
                dashed.append((a, b))
            else:
                order.append((a, b))
        elif re.match(r'^\s*"[^"]+" \[label=', line):
            nodes.append(line)
    return nodes, order, zig, dashed


def test_p1_shape():
    text = to_dot(program("P1"))
    nodes, order, zig, dashed = _parts(text)
    assert text.startswith("digraph es {") and text.rstrip().endswith("}")
    assert len(nodes) == 9
    assert len(order) == 8
    assert len(zig) == 2
    assert dashed == []


def test_empty_program_is_single_init_node():
    nodes, order, zig, _ = _parts(to_dot(program_semantics(Program(()))))
    assert len(nodes) == 1 and "init" in nodes[0]
    assert order == [] and zig == []


def test_p6_figure_node_count():
    nodes, _, _, _ = _parts(to_dot(figure("P6")))
    assert len(nodes) == 13


def test_labels_and_justification_edges():
    es = program("P3")
    text = to_dot(es, DotOptions(justification=True, title="P3"))
    assert 'label="P3";' in text
    assert '"init: init"' in text
    _, _, _, dashed = _parts(text)
    # every read of 0 is justified by init
    zero_reads = [es.names[e] for e in range(es.n) if str(es.labels[e]).startswith("R ") and str(es.labels[e]).endswith(" 0")]
    assert zero_reads and all(("init", r) in dashed for r in zero_reads)


def test_highlight_marks_members():
    es = program("P1")
    c = es.maximal_configurations()[0]
    text = to_dot(es, DotOptions(highlight=c))
    assert text.count("style=filled") == bin(c).count("1")


def test_deterministic():
    es = program("P6")
    assert to_dot(es) == to_dot(es)
