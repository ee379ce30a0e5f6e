"""Local grammar graphs: parsing, validation, serialization and DOT output.

Graph file format::

    #GRAPH LENGTH_SHORT
    #BOX 0 start
    #BOX 1 end
    #BOX 2 "<E>" OUT "<LENGTH-SHORT>"
    #BOX 3 "기장|길이 <JN>|:SIZE_WORD"
    #EDGE 0 2
    ...

Inside a box, ``|`` separates alternatives and spaces separate atoms.  An
atom is a literal word, a lexical mask ``<...>`` or a subgraph call ``:Name``.
A backslash escapes the next character.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from .lexicon import normalize

START, END, CONTENT = "start", "end", "content"
SPECIALS = ("TOKEN", "E")

_NAME_RE = re.compile(r"[A-Za-z0-9_\-]+")
_SPECIAL_CHARS = set('\\"|<>: ')


class GraphError(ValueError):
    def __init__(self, message: str, graph: str | None = None, line: int | None = None):
        self.graph = graph
        self.line = line
        where = []
        if graph:
            where.append(f"graph {graph}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass(frozen=True)
class Literal:
    text: str

    def to_text(self) -> str:
        return "".join("\\" + ch if ch in _SPECIAL_CHARS else ch for ch in self.text)


@dataclass(frozen=True)
class LexicalMask:
    lemma: str | None = None
    pos: str | None = None
    tags: frozenset[str] = frozenset()
    special: str | None = None
    bare: str | None = None

    @classmethod
    def parse(cls, body: str) -> "LexicalMask":
        if body in SPECIALS:
            return cls(special=body)
        head, *tags = body.split("+")
        if not head or any(not t for t in tags):
            raise GraphError(f"malformed lexical mask <{body}>")
        if "." in head:
            lemma, _, pos = head.rpartition(".")
            if not lemma or not pos:
                raise GraphError(f"malformed lexical mask <{body}>")
            return cls(lemma=lemma, pos=pos, tags=frozenset(tags))
        if tags:
            return cls(pos=head, tags=frozenset(tags))
        return cls(bare=head)

    @property
    def is_epsilon(self) -> bool:
        return self.special == "E"

    def body(self) -> str:
        if self.special:
            return self.special
        if self.bare is not None:
            return self.bare
        head = f"{self.lemma}.{self.pos}" if self.lemma is not None else self.pos
        return head + "".join("+" + t for t in sorted(self.tags))

    def to_text(self) -> str:
        return f"<{self.body()}>"


@dataclass(frozen=True)
class SubgraphCall:
    name: str

    def to_text(self) -> str:
        return ":" + self.name


Atom = Union[Literal, LexicalMask, SubgraphCall]


@dataclass(frozen=True)
class Box:
    id: int
    kind: str = CONTENT
    alternatives: tuple[tuple[Atom, ...], ...] = ()
    output: str | None = None

    def label(self) -> str:
        return "|".join(" ".join(a.to_text() for a in alt) for alt in self.alternatives)


@dataclass
class Graph:
    name: str
    boxes: list[Box] = field(default_factory=list)
    edges: list[tuple[int, int]] = field(default_factory=list)

    def box(self, box_id: int) -> Box:
        for b in self.boxes:
            if b.id == box_id:
                return b
        raise KeyError(box_id)

    @property
    def start(self) -> Box:
        return next(b for b in self.boxes if b.kind == START)

    @property
    def end(self) -> Box:
        return next(b for b in self.boxes if b.kind == END)

    def successors(self, box_id: int) -> list[int]:
        return [t for f, t in self.edges if f == box_id]

    def calls(self) -> Iterable[tuple[int, str]]:
        for b in self.boxes:
            for alt in b.alternatives:
                for atom in alt:
                    if isinstance(atom, SubgraphCall):
                        yield b.id, atom.name


@dataclass
class GraphSet:
    main: str
    graphs: dict[str, Graph] = field(default_factory=dict)

    def add(self, graph: Graph) -> None:
        if graph.name in self.graphs:
            raise GraphError("graph defined twice", graph.name)
        self.graphs[graph.name] = graph


# -- parsing -----------------------------------------------------------------

def _read_quoted(text: str, pos: int, lineno: int) -> tuple[str, int]:
    """Return (raw content with escapes kept, index after closing quote)."""
    if pos >= len(text) or text[pos] != '"':
        raise GraphError("expected quoted string", line=lineno)
    out = []
    i = pos + 1
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            out.append(text[i:i + 2])
            i += 2
            continue
        if ch == '"':
            return "".join(out), i + 1
        out.append(ch)
        i += 1
    raise GraphError("unterminated string", line=lineno)


def _unescape(raw: str) -> str:
    return re.sub(r"\\(.)", r"\1", raw)


def parse_alternative(raw: str) -> tuple[Atom, ...]:
    atoms: list[Atom] = []
    i, n = 0, len(raw)
    while i < n:
        ch = raw[i]
        if ch == " ":
            i += 1
        elif ch == "<":
            j = raw.find(">", i)
            if j < 0:
                raise GraphError(f"unclosed lexical mask in {raw!r}")
            atoms.append(LexicalMask.parse(raw[i + 1:j]))
            i = j + 1
        elif ch == ":":
            m = _NAME_RE.match(raw, i + 1)
            if not m:
                raise GraphError(f"bad subgraph call in {raw!r}")
            atoms.append(SubgraphCall(m.group()))
            i = m.end()
        elif ch == ">":
            raise GraphError(f"stray '>' in {raw!r}")
        else:
            word = []
            while i < n and raw[i] not in " <:>":
                if raw[i] == "\\" and i + 1 < n:
                    word.append(raw[i + 1])
                    i += 2
                else:
                    word.append(raw[i])
                    i += 1
            atoms.append(Literal("".join(word)))
    return tuple(atoms)


def _split_alternatives(raw: str) -> list[str]:
    alts, cur, i = [], [], 0
    while i < len(raw):
        if raw[i] == "\\" and i + 1 < len(raw):
            cur.append(raw[i:i + 2])
            i += 2
            continue
        if raw[i] == "|":
            alts.append("".join(cur))
            cur = []
        else:
            cur.append(raw[i])
        i += 1
    alts.append("".join(cur))
    return alts


def _parse_box(rest: str, lineno: int, gname: str) -> Box:
    m = re.match(r"(-?\d+)\s+", rest + " ")
    if not m:
        raise GraphError(f"bad box line {rest!r}", gname, lineno)
    box_id = int(m.group(1))
    tail = rest[m.end():].strip() if m.end() <= len(rest) else ""
    if tail in (START, END):
        return Box(box_id, tail)
    try:
        raw, i = _read_quoted(tail, 0, lineno)
        alternatives = []
        for alt in _split_alternatives(raw):
            atoms = parse_alternative(alt)
            if not atoms:
                raise GraphError("empty alternative (use <E>)", gname, lineno)
            alternatives.append(atoms)
        output = None
        tail = tail[i:].strip()
        if tail:
            if not tail.startswith("OUT"):
                raise GraphError(f"unexpected text {tail!r}", gname, lineno)
            out_raw, j = _read_quoted(tail[3:].lstrip(), 0, lineno)
            if tail[3:].lstrip()[j:].strip():
                raise GraphError("trailing text after OUT", gname, lineno)
            output = _unescape(out_raw)
    except GraphError as exc:
        if exc.line is None:
            raise GraphError(str(exc), gname, lineno) from None
        raise
    return Box(box_id, CONTENT, tuple(alternatives), output)


def _check_structure(g: Graph, lineno: int | None) -> None:
    ids = [b.id for b in g.boxes]
    kinds = [b.kind for b in g.boxes]
    if kinds.count(START) != 1:
        raise GraphError("graph needs exactly one start box", g.name, lineno)
    if kinds.count(END) != 1:
        raise GraphError("graph needs exactly one end box", g.name, lineno)
    known = set(ids)
    start, end = g.start.id, g.end.id
    for f, t in g.edges:
        if f not in known or t not in known:
            raise GraphError(f"edge {f}->{t} references an unknown box", g.name, lineno)
        if f == end:
            raise GraphError("edge leaves the end box", g.name, lineno)
        if t == start:
            raise GraphError("edge enters the start box", g.name, lineno)


def parse_graphs(source: str) -> list[Graph]:
    """Parse every ``#GRAPH`` block in ``source``."""
    graphs: list[Graph] = []
    current: Graph | None = None
    begun_at = 0
    for lineno, raw in enumerate(normalize(source).splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        kind, _, rest = line.partition(" ")
        rest = rest.strip()
        if kind == "#GRAPH":
            if current is not None:
                _check_structure(current, begun_at)
            if not _NAME_RE.fullmatch(rest):
                raise GraphError(f"bad graph name {rest!r}", line=lineno)
            current = Graph(rest)
            graphs.append(current)
            begun_at = lineno
            continue
        if current is None:
            raise GraphError("content before #GRAPH", line=lineno)
        if kind == "#BOX":
            box = _parse_box(rest, lineno, current.name)
            if any(b.id == box.id for b in current.boxes):
                raise GraphError(f"duplicate box id {box.id}", current.name, lineno)
            current.boxes.append(box)
        elif kind == "#EDGE":
            parts = rest.split()
            if len(parts) != 2 or not all(re.fullmatch(r"-?\d+", p) for p in parts):
                raise GraphError(f"bad edge {rest!r}", current.name, lineno)
            current.edges.append((int(parts[0]), int(parts[1])))
        else:
            raise GraphError(f"unknown directive {kind!r}", current.name, lineno)
    if current is not None:
        _check_structure(current, begun_at)
    return graphs


def parse_graph(source: str) -> Graph:
    graphs = parse_graphs(source)
    if len(graphs) != 1:
        raise GraphError(f"expected one graph, found {len(graphs)}")
    return graphs[0]


def serialize_graph(g: Graph) -> str:
    lines = [f"#GRAPH {g.name}"]
    for b in g.boxes:
        if b.kind != CONTENT:
            lines.append(f"#BOX {b.id} {b.kind}")
            continue
        line = f'#BOX {b.id} "{b.label()}"'
        if b.output is not None:
            out = b.output.replace("\\", "\\\\").replace('"', '\\"')
            line += f' OUT "{out}"'
        lines.append(line)
    lines.extend(f"#EDGE {f} {t}" for f, t in g.edges)
    return "".join(line + "\n" for line in lines)


# -- validation --------------------------------------------------------------

@dataclass
class ValidationReport:
    dangling: list[tuple[str, int, str]] = field(default_factory=list)
    unreachable: list[tuple[str, int]] = field(default_factory=list)
    dead_ends: list[tuple[str, int]] = field(default_factory=list)
    recursive: dict[str, bool] = field(default_factory=dict)
    missing_main: bool = False

    @property
    def ok(self) -> bool:
        return not self.dangling and not self.missing_main

    def lines(self) -> list[str]:
        out = []
        if self.missing_main:
            out.append("ERROR main graph is not defined")
        for caller, box, name in self.dangling:
            out.append(f"ERROR {caller} box {box}: call to undefined graph {name}")
        for g, box in self.unreachable:
            out.append(f"WARNING {g} box {box}: unreachable from start")
        for g, box in self.dead_ends:
            out.append(f"WARNING {g} box {box}: end not reachable")
        for g, rec in self.recursive.items():
            out.append(f"INFO {g}: {'recursive' if rec else 'non-recursive'}")
        return out


def _reach(start: int, adjacency: dict[int, list[int]]) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        for nxt in adjacency.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def strongly_connected(nodes: list[str], succ: dict[str, list[str]]) -> list[list[str]]:
    """Tarjan's algorithm, iterative."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    comps: list[list[str]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(succ.get(nxt, ()))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                comps.append(comp)
    return comps


def call_graph(gs: GraphSet) -> dict[str, list[str]]:
    return {name: sorted({c for _, c in g.calls() if c in gs.graphs})
            for name, g in gs.graphs.items()}


def validate_graphset(gs: GraphSet) -> ValidationReport:
    report = ValidationReport(missing_main=gs.main not in gs.graphs)
    for name, g in gs.graphs.items():
        for box_id, callee in g.calls():
            if callee not in gs.graphs:
                report.dangling.append((name, box_id, callee))
        fwd: dict[int, list[int]] = {}
        back: dict[int, list[int]] = {}
        for f, t in g.edges:
            fwd.setdefault(f, []).append(t)
            back.setdefault(t, []).append(f)
        reachable = _reach(g.start.id, fwd)
        coreachable = _reach(g.end.id, back)
        for b in g.boxes:
            if b.id not in reachable:
                report.unreachable.append((name, b.id))
            elif b.id not in coreachable:
                report.dead_ends.append((name, b.id))
    calls = call_graph(gs)
    names = list(gs.graphs)
    for comp in strongly_connected(names, calls):
        cyclic = len(comp) > 1 or comp[0] in calls.get(comp[0], ())
        for name in comp:
            report.recursive[name] = cyclic
    report.recursive = {n: report.recursive[n] for n in names}
    return report


# -- visualization -----------------------------------------------------------

def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def emit_dot(g: Graph) -> str:
    lines = [f'digraph "{_dot_escape(g.name)}" {{', "  rankdir=LR;"]
    for b in sorted(g.boxes, key=lambda b: b.id):
        if b.kind == START:
            lines.append(f'  n{b.id} [shape=circle, label="start"];')
        elif b.kind == END:
            lines.append(f'  n{b.id} [shape=doublecircle, label="end"];')
        else:
            label = "\\n".join(_dot_escape(" ".join(a.to_text() for a in alt))
                               for alt in b.alternatives)
            extra = f', xlabel="{_dot_escape(b.output)}"' if b.output is not None else ""
            lines.append(f'  n{b.id} [shape=box, label="{label}"{extra}];')
    for f, t in sorted(g.edges):
        lines.append(f"  n{f} -> n{t};")
    lines.append("}")
    return "\n".join(lines) + "\n"
