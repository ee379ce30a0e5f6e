"""Compile graph sets into recursive transition networks, flatten, count paths.

Every consuming transition carries a ``gap`` flag: when set, the matcher may
skip one whitespace token before testing it.  The first token of each atom
gets the flag; the remaining tokens of a multi-token literal do not, so a
literal word only matches contiguous text while separate atoms and boxes may
be separated by whitespace.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .document import BOUNDARY, TAG_RE, tokenize
from .graph import (CONTENT, END, START, GraphError, GraphSet, LexicalMask, Literal,
                    SubgraphCall, call_graph, validate_graphset)

LIT, MASK, CALL, EPS = "lit", "mask", "call", "eps"
INFINITE = math.inf
FORMAT_VERSION = 1


class CompileError(ValueError):
    pass


class Transition(NamedTuple):
    kind: str
    arg: object  # literal token text, LexicalMask, or callee name
    target: int
    outputs: tuple[str, ...] = ()
    gap: bool = False


@dataclass
class Automaton:
    name: str
    n_states: int = 0
    initial: int = 0
    finals: dict[int, tuple[str, ...]] = field(default_factory=dict)
    transitions: list[list[Transition]] = field(default_factory=list)
    pruned_calls: int = 0
    final_paths: dict[int, int] = field(default_factory=dict)

    def new_state(self) -> int:
        self.transitions.append([])
        self.n_states += 1
        return self.n_states - 1

    def add(self, src: int, t: Transition) -> None:
        self.transitions[src].append(t)

    def has_calls(self) -> bool:
        return any(t.kind == CALL for ts in self.transitions for t in ts)

    def n_transitions(self) -> int:
        return sum(len(ts) for ts in self.transitions)


@dataclass
class Rtn:
    main: str
    automata: dict[str, Automaton] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Automaton:
        return self.automata[name]


def check_output(text: str, where: str) -> None:
    if TAG_RE.sub("", text) != "":
        raise GraphError(f"box output {text!r} must consist of tags only", where)


def _literal_tokens(text: str) -> list[str]:
    toks = [t.text for t in tokenize(text) if t.kind != BOUNDARY]
    if not toks:
        raise CompileError(f"literal {text!r} has no tokens")
    return toks


def _build_raw(graph) -> Automaton:
    """Thompson-style construction with epsilon transitions."""
    a = Automaton(graph.name)
    entry: dict[int, int] = {}
    exit_: dict[int, int] = {}
    for box in graph.boxes:
        if box.kind in (START, END):
            s = a.new_state()
            entry[box.id] = exit_[box.id] = s
            if box.kind == START:
                a.initial = s
            else:
                a.finals[s] = ()
            continue
        s_in, s_out = a.new_state(), a.new_state()
        entry[box.id], exit_[box.id] = s_in, s_out
        src = s_in
        if box.output is not None:
            check_output(box.output, graph.name)
            src = a.new_state()
            a.add(s_in, Transition(EPS, None, src, (box.output,)))
        for alt in box.alternatives:
            cur = src
            for atom in alt:
                if isinstance(atom, Literal):
                    for k, tok in enumerate(_literal_tokens(atom.text)):
                        nxt = a.new_state()
                        a.add(cur, Transition(LIT, tok, nxt, (), k == 0))
                        cur = nxt
                elif isinstance(atom, SubgraphCall):
                    nxt = a.new_state()
                    a.add(cur, Transition(CALL, atom.name, nxt))
                    cur = nxt
                elif atom.is_epsilon:
                    nxt = a.new_state()
                    a.add(cur, Transition(EPS, None, nxt))
                    cur = nxt
                else:
                    nxt = a.new_state()
                    a.add(cur, Transition(MASK, atom, nxt, (), True))
                    cur = nxt
            a.add(cur, Transition(EPS, None, s_out))
    for f, t in graph.edges:
        a.add(exit_[f], Transition(EPS, None, entry[t]))
    return a


def remove_epsilons(a: Automaton) -> Automaton:
    """Epsilon-free equivalent.

    Outputs on epsilon paths move onto the next consuming transition (or the
    final output).  Every simple epsilon path yields its own copy of the
    transitions it leads to, so the number of accepting paths is preserved;
    ``final_paths`` records how many epsilon paths reach a final state.
    Transition order follows the depth-first order of the original paths, so
    the first-declared path stays first.  Epsilon cycles are cut.
    """
    out = Automaton(a.name, a.n_states, a.initial, {}, [[] for _ in range(a.n_states)],
                    a.pruned_calls)
    for s in range(a.n_states):
        on_path = {s}
        stack = [(s, (), iter(a.transitions[s]))]
        if s in a.finals:
            out.finals[s] = a.finals[s]
            out.final_paths[s] = a.final_paths.get(s, 1)
        while stack:
            state, acc, it = stack[-1]
            t = next(it, None)
            if t is None:
                stack.pop()
                on_path.discard(state)
                continue
            if t.kind != EPS:
                out.transitions[s].append(t._replace(outputs=acc + t.outputs))
                continue
            if t.target in on_path:
                continue
            on_path.add(t.target)
            acc2 = acc + t.outputs
            if t.target in a.finals:
                if s not in out.finals:
                    out.finals[s] = acc2 + a.finals[t.target]
                out.final_paths[s] = out.final_paths.get(s, 0) + a.final_paths.get(t.target, 1)
            stack.append((t.target, acc2, iter(a.transitions[t.target])))
    return trim(out)


def trim(a: Automaton) -> Automaton:
    """Drop states not on some initial-to-final path; renumber in BFS order."""
    fwd = _reach_from([a.initial], a.transitions)
    back: list[list[int]] = [[] for _ in range(a.n_states)]
    for s, ts in enumerate(a.transitions):
        for t in ts:
            back[t.target].append(s)
    co = set()
    stack = list(a.finals)
    co.update(stack)
    while stack:
        for p in back[stack.pop()]:
            if p not in co:
                co.add(p)
                stack.append(p)
    useful = fwd & co
    order: list[int] = []
    if a.initial in useful:
        order = [a.initial]
        seen = {a.initial}
        i = 0
        while i < len(order):
            for t in a.transitions[order[i]]:
                if t.target in useful and t.target not in seen:
                    seen.add(t.target)
                    order.append(t.target)
            i += 1
    renum = {old: new for new, old in enumerate(order)}
    out = Automaton(a.name, len(order), 0, {}, [[] for _ in order], a.pruned_calls)
    if not order:
        # empty language: keep a lone non-final initial state
        out.n_states = 1
        out.transitions = [[]]
        return out
    for old in order:
        for t in a.transitions[old]:
            if t.target in renum:
                out.transitions[renum[old]].append(t._replace(target=renum[t.target]))
        if old in a.finals:
            out.finals[renum[old]] = a.finals[old]
            out.final_paths[renum[old]] = a.final_paths.get(old, 1)
    return out


def _reach_from(starts, transitions) -> set[int]:
    seen = set(starts)
    stack = list(starts)
    while stack:
        for t in transitions[stack.pop()]:
            if t.target not in seen:
                seen.add(t.target)
                stack.append(t.target)
    return seen


def compile_graphset(gs: GraphSet) -> Rtn:
    report = validate_graphset(gs)
    if not report.ok:
        raise CompileError("; ".join(l for l in report.lines() if l.startswith("ERROR")))
    return Rtn(gs.main, {name: remove_epsilons(_build_raw(g)) for name, g in gs.graphs.items()})


compile = compile_graphset


def flatten(rtn: Rtn, depth_limit: int | None = None, main: str | None = None) -> Automaton:
    """Inline every call into one automaton.

    With ``depth_limit=None`` the call structure must be non-recursive.  With a
    limit, calls nested deeper than the limit are dropped; the number of
    dropped call sites is recorded in ``pruned_calls`` (the result then accepts
    a subset of the network's language).
    """
    main = main or rtn.main
    if depth_limit is not None and depth_limit < 0:
        raise CompileError("depth_limit must be >= 0")
    if depth_limit is None:
        calls = {n: sorted({t.arg for ts in a.transitions for t in ts if t.kind == CALL})
                 for n, a in rtn.automata.items()}
        _assert_acyclic(main, calls)
    elif depth_limit == 0 and rtn[main].has_calls():
        raise CompileError("depth_limit 0 with subgraph calls present")
    out = Automaton(main)
    pruned = 0

    def inline(name: str, depth: int) -> tuple[int, dict[int, tuple[str, ...]]]:
        nonlocal pruned
        src = rtn[name]
        base = out.n_states
        for _ in range(src.n_states):
            out.new_state()
        for s, ts in enumerate(src.transitions):
            for t in ts:
                if t.kind != CALL:
                    out.add(base + s, t._replace(target=base + t.target))
                    continue
                if depth_limit is not None and depth + 1 > depth_limit:
                    pruned += 1
                    continue
                sub_init, sub_finals = inline(t.arg, depth + 1)
                out.add(base + s, Transition(EPS, None, sub_init, t.outputs))
                for f, (fo, mult) in sub_finals.items():
                    for _ in range(mult):
                        out.add(f, Transition(EPS, None, base + t.target, fo))
        return base + src.initial, {base + f: (o, src.final_paths.get(f, 1))
                                    for f, o in src.finals.items()}

    init, finals = inline(main, 0)
    out.initial = init
    out.finals = {f: o for f, (o, _) in finals.items()}
    out.final_paths = {f: m for f, (_, m) in finals.items()}
    out.pruned_calls = pruned
    return remove_epsilons(out)


def _assert_acyclic(main: str, calls: dict[str, list[str]]) -> None:
    state: dict[str, int] = {}

    def visit(n: str, path: list[str]) -> None:
        if state.get(n) == 2:
            return
        if state.get(n) == 1:
            raise CompileError("recursive call structure: " + " -> ".join(path + [n])
                               + "; pass depth_limit")
        state[n] = 1
        for c in calls.get(n, ()):
            visit(c, path + [n])
        state[n] = 2

    visit(main, [])


def count_paths(fst: Automaton) -> int | float:
    """Number of accepting transition paths, or INFINITE if a useful cycle exists."""
    if fst.has_calls():
        raise CompileError("count_paths needs a flattened automaton")
    a = trim(fst)
    if not a.finals:
        return 0
    color = [0] * a.n_states
    memo: dict[int, int] = {}
    # iterative post-order DFS with cycle detection
    stack = [(a.initial, 0)]
    while stack:
        s, i = stack.pop()
        if i == 0:
            if color[s] == 2:
                continue
            color[s] = 1
        ts = a.transitions[s]
        if i < len(ts):
            stack.append((s, i + 1))
            nxt = ts[i].target
            if color[nxt] == 1:
                return INFINITE
            if color[nxt] == 0:
                stack.append((nxt, 0))
            continue
        color[s] = 2
        memo[s] = (a.final_paths.get(s, 1) if s in a.finals else 0) + sum(memo[t.target] for t in ts)
    return memo[a.initial]


def format_count(n: int | float) -> str:
    return "INFINITE" if n == INFINITE else f"{n:,}"


def family_counts(rtn: Rtn, families: list[str] | None = None,
                  depth_limit: int | None = None) -> dict[str, int | float]:
    """Pattern counts per subgraph family (default: graphs the main graph calls)."""
    if families is None:
        families = []
        for ts in rtn[rtn.main].transitions:
            for t in ts:
                if t.kind == CALL and t.arg not in families:
                    families.append(t.arg)
    return {name: count_paths(flatten(rtn, depth_limit, main=name)) for name in families}


# -- serialization -----------------------------------------------------------

def _arg_to_json(t: Transition):
    if t.kind == MASK:
        m: LexicalMask = t.arg
        return {"lemma": m.lemma, "pos": m.pos, "tags": sorted(m.tags),
                "special": m.special, "bare": m.bare}
    return t.arg


def _arg_from_json(kind: str, value):
    if kind == MASK:
        return LexicalMask(value["lemma"], value["pos"], frozenset(value["tags"]),
                           value["special"], value["bare"])
    return value


def _dumps(value) -> str:
    return json.dumps(value, ensure_ascii=False, separators=(",", ":"))


def serialize_rtn(rtn: Rtn) -> str:
    lines = [f"RTN {FORMAT_VERSION}", f"MAIN {_dumps(rtn.main)}"]
    for name, a in rtn.automata.items():
        lines.append(f"GRAPH {_dumps(name)} {a.n_states} {a.initial} {a.pruned_calls}")
        for s in sorted(a.finals):
            lines.append(f"F {s} {a.final_paths.get(s, 1)} {_dumps(list(a.finals[s]))}")
        for s, ts in enumerate(a.transitions):
            for t in ts:
                lines.append(f"T {s} {t.target} {t.kind} {int(t.gap)} "
                             f"{_dumps(_arg_to_json(t))} {_dumps(list(t.outputs))}")
    lines.append("END")
    return "\n".join(lines) + "\n"


def parse_rtn(source: str) -> Rtn:
    decoder = json.JSONDecoder()
    lines = source.splitlines()
    if not lines or lines[0] != f"RTN {FORMAT_VERSION}":
        raise CompileError("not a compiled automaton (bad header)")
    if not lines[1].startswith("MAIN "):
        raise CompileError("missing MAIN line")
    rtn = Rtn(json.loads(lines[1][5:]))
    cur: Automaton | None = None
    for i, line in enumerate(lines[2:], 3):
        tag, _, rest = line.partition(" ")
        try:
            if tag == "GRAPH":
                name, end = decoder.raw_decode(rest)
                n, init, pruned = map(int, rest[end:].split())
                cur = Automaton(name, n, init, {}, [[] for _ in range(n)], pruned)
                rtn.automata[name] = cur
            elif tag == "F":
                s, mult, outs = rest.split(" ", 2)
                cur.finals[int(s)] = tuple(json.loads(outs))
                cur.final_paths[int(s)] = int(mult)
            elif tag == "T":
                src, dst, kind, gap, payload = rest.split(" ", 4)
                arg, end = decoder.raw_decode(payload)
                outs = json.loads(payload[end:].strip())
                cur.add(int(src), Transition(kind, _arg_from_json(kind, arg), int(dst),
                                             tuple(outs), gap == "1"))
            elif tag == "END":
                break
            else:
                raise CompileError(f"line {i}: unknown record {tag!r}")
        except (ValueError, AttributeError, IndexError, KeyError) as exc:
            if isinstance(exc, CompileError):
                raise
            raise CompileError(f"line {i}: malformed record ({exc})") from None
    else:
        raise CompileError("truncated automaton file (no END)")
    return rtn


def rtn_stats(rtn: Rtn) -> dict[str, tuple[int, int]]:
    return {n: (a.n_states, a.n_transitions()) for n, a in rtn.automata.items()}


def graph_box_count(gs: GraphSet) -> int:
    return sum(1 for g in gs.graphs.values() for b in g.boxes if b.kind == CONTENT)


__all__ = ["Automaton", "Rtn", "Transition", "CompileError", "INFINITE", "compile_graphset",
           "flatten", "count_paths", "format_count", "family_counts", "serialize_rtn",
           "parse_rtn", "remove_epsilons", "trim", "call_graph"]
