import random

import pytest

from localgram import INFINITE, compile_graphset, count_paths, flatten, parse_graphs
from localgram.compiler import (CALL, LIT, CompileError, family_counts, format_count, parse_rtn,
                                serialize_rtn)
from localgram.graph import GraphSet

from oracles import (SYLLABLES, TooLarge, automaton_language, count_atom_paths, dfs_count,
                     language, language_as_tokens, random_acyclic_automaton, random_graphset)


def gs_from(source, main):
    gs = GraphSet(main)
    for g in parse_graphs(source):
        gs.add(g)
    return gs


def one_box(name, label):
    return f'#GRAPH {name}\n#BOX 0 start\n#BOX 1 end\n#BOX 2 "{label}"\n#EDGE 0 2\n#EDGE 2 1\n'


def test_single_literal_is_syllable_chain():
    rtn = compile_graphset(gs_from(one_box("M", "기장"), "M"))
    assert automaton_language(rtn["M"]) == {(("기", True), ("장", False))}


def test_alternatives_are_parallel_chains():
    rtn = compile_graphset(gs_from(one_box("M", "기장|길이"), "M"))
    assert automaton_language(rtn["M"]) == {(("기", True), ("장", False)),
                                            (("길", True), ("이", False))}
    assert count_paths(rtn["M"]) == 2


def test_call_box_is_one_call_transition():
    src = one_box("M", ":SUB") + one_box("SUB", "가")
    rtn = compile_graphset(gs_from(src, "M"))
    calls = [t for ts in rtn["M"].transitions for t in ts if t.kind == CALL]
    assert [t.arg for t in calls] == ["SUB"]
    assert rtn["M"].n_transitions() == 1


def test_dangling_call_is_compile_error():
    with pytest.raises(CompileError):
        compile_graphset(gs_from(one_box("M", ":NOPE"), "M"))


def test_linear_chain_counts_one():
    src = ('#GRAPH M\n#BOX 0 start\n#BOX 1 end\n#BOX 2 "가"\n#BOX 3 "나"\n#BOX 4 "다"\n'
           '#EDGE 0 2\n#EDGE 2 3\n#EDGE 3 4\n#EDGE 4 1\n')
    assert count_paths(flatten(compile_graphset(gs_from(src, "M")))) == 1


def test_sequential_boxes_multiply():
    src = ('#GRAPH M\n#BOX 0 start\n#BOX 1 end\n#BOX 2 "가|나"\n#BOX 3 "다|라|마"\n'
           '#EDGE 0 2\n#EDGE 2 3\n#EDGE 3 1\n')
    assert count_paths(flatten(compile_graphset(gs_from(src, "M")))) == 6


def test_mask_counts_as_one():
    rtn = compile_graphset(gs_from(one_box("M", "<ADJ>|<N+CLO_TY>"), "M"))
    assert count_paths(rtn["M"]) == 2


def test_duplicate_alternatives_each_count():
    rtn = compile_graphset(gs_from(one_box("M", "가|가|<E>|<E>"), "M"))
    assert count_paths(rtn["M"]) == 4


def test_loop_is_infinite():
    src = ('#GRAPH M\n#BOX 0 start\n#BOX 1 end\n#BOX 2 "가"\n'
           '#EDGE 0 2\n#EDGE 2 2\n#EDGE 2 1\n')
    n = count_paths(flatten(compile_graphset(gs_from(src, "M"))))
    assert n == INFINITE
    assert format_count(n) == "INFINITE"


def test_dead_loop_is_not_infinite():
    # the cycle is reachable but can never reach the end box
    src = ('#GRAPH M\n#BOX 0 start\n#BOX 1 end\n#BOX 2 "가"\n#BOX 3 "나"\n'
           '#EDGE 0 2\n#EDGE 2 1\n#EDGE 0 3\n#EDGE 3 3\n')
    assert count_paths(flatten(compile_graphset(gs_from(src, "M")))) == 1


def test_big_counts_are_exact():
    box = "|".join(SYLLABLES)
    boxes = "".join(f'#BOX {i} "{box}"\n' for i in range(2, 12))
    edges = "#EDGE 0 2\n" + "".join(f"#EDGE {i} {i + 1}\n" for i in range(2, 11)) + "#EDGE 11 1\n"
    rtn = compile_graphset(gs_from("#GRAPH M\n#BOX 0 start\n#BOX 1 end\n" + boxes + edges, "M"))
    assert count_paths(rtn["M"]) == 10 ** 10
    assert format_count(10 ** 10) == "10,000,000,000"


def test_outputs_move_to_consuming_transition():
    src = ('#GRAPH M\n#BOX 0 start\n#BOX 1 end\n#BOX 2 "<E>" OUT "<X>"\n#BOX 3 "가"\n'
           '#BOX 4 "<E>" OUT "</X>"\n#EDGE 0 2\n#EDGE 2 3\n#EDGE 3 4\n#EDGE 4 1\n')
    a = compile_graphset(gs_from(src, "M"))["M"]
    first = a.transitions[a.initial][0]
    assert first.kind == LIT and first.outputs == ("<X>",)
    assert list(a.finals.values()) == [("</X>",)]


def test_flatten_without_calls_keeps_language(demo_rtn):
    a = demo_rtn["ENTITY"]
    flat = flatten(demo_rtn, main="ENTITY")
    assert flat.n_states == a.n_states
    assert count_paths(flat) == count_paths(a)


def test_flatten_language_matches_oracle():
    rng = random.Random(7)
    done = 0
    while done < 60:
        alpha = rng.sample(SYLLABLES, rng.randint(2, 10))
        gs = random_graphset(rng, alpha, with_tags=False)
        try:
            lang = language(gs, max_paths=3000)
        except TooLarge:
            continue
        flat = flatten(compile_graphset(gs))
        got = automaton_language(flat, max_len=8)
        want = {s for s in language_as_tokens(lang) if len(s) <= 8}
        assert got == want
        done += 1


def test_random_graph_counts_match_path_enumeration():
    rng = random.Random(11)
    done = 0
    while done < 60:
        gs = random_graphset(rng, SYLLABLES[:4])
        try:
            language(gs, max_paths=5000)
        except TooLarge:
            continue
        assert count_paths(flatten(compile_graphset(gs))) == count_atom_paths(gs)
        done += 1


@pytest.mark.parametrize("seed", range(40))
def test_random_automaton_count_matches_dfs(seed):
    a = random_acyclic_automaton(random.Random(seed))
    assert count_paths(a) == dfs_count(a)


def test_recursive_flatten_needs_limit(recursion_graphs):
    rtn = compile_graphset(recursion_graphs)
    with pytest.raises(CompileError):
        flatten(rtn)
    with pytest.raises(CompileError):
        flatten(rtn, depth_limit=0)


def test_recursive_flatten_depth_two(recursion_graphs):
    flat = flatten(compile_graphset(recursion_graphs), depth_limit=2)
    got = automaton_language(flat)
    word = (("너", True), ("무", False))
    assert got == {word, word * 2, word * 3}
    assert flat.pruned_calls >= 1
    assert not flat.has_calls()


def test_family_counts(demo_rtn):
    counts = family_counts(demo_rtn)
    assert list(counts) == ["ENTITY", "UNARY", "BINARY", "MULTIPLE"]
    # the main graph is a union of its families
    assert count_paths(flatten(demo_rtn)) == sum(counts.values())


def test_artifact_round_trip(demo_rtn):
    text = serialize_rtn(demo_rtn)
    back = parse_rtn(text)
    assert serialize_rtn(back) == text
    assert count_paths(flatten(back)) == count_paths(flatten(demo_rtn))


def test_artifact_bad_header():
    with pytest.raises(CompileError):
        parse_rtn("RTN 99\n")
