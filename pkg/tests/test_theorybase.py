import itertools

import pytest
from hypothesis import given, settings, strategies as st

from microasp.default_logic import DefaultTheory, extensions
from microasp.grounder import ground
from microasp.model import Program, validate
from microasp.oracle import enumerate_bruteforce
from microasp.parser import parse_graph, parse_program
from microasp.solver import solve
from microasp.theorybase import (
    BenchmarkError, BenchmarkSpec, count_solutions_bruteforce, encode, graph_from_id, lcg,
    make_graph, program_text,
)


def test_cycle3_is_triangle():
    g = make_graph("cycle", 3)
    assert g.edges == ((1, 2), (1, 3), (2, 3)) == make_graph("complete", 3).edges
    assert g.id == "cycle(3)"


def test_small_families():
    assert len(make_graph("grid", 2, 2).edges) == 4
    assert make_graph("path", 4).edges == ((1, 2), (2, 3), (3, 4))
    assert len(make_graph("complete", 5, directed=True).edges) == 20
    assert make_graph("cycle", 3, directed=True).edges == ((1, 2), (2, 3), (3, 1))


def test_lcg_sequence():
    # x <- 6364136223846793005 x + 1442695040888963407 (mod 2^64), output x >> 33
    x, expected = 42, []
    for _ in range(3):
        x = (6364136223846793005 * x + 1442695040888963407) % 2 ** 64
        expected.append(x >> 33)
    gen = lcg(42)
    assert [next(gen) for _ in range(3)] == expected


def test_random_family_is_deterministic():
    a, b = make_graph("random", 10, 20, 42), make_graph("random", 10, 20, 42)
    assert a == b and len(a.edges) == 20
    assert make_graph("random", 10, 20, 43).edges != a.edges


@pytest.mark.parametrize("ident", ["cycle(5)", "grid(2,3)", "random(8,10,7)", "cycle(4,directed)",
                                   "complete(3)", "path(1)"])
def test_graph_ids_roundtrip(ident):
    g = graph_from_id(ident)
    assert g.id == ident
    again = parse_graph(g.to_text())
    assert again == g


@pytest.mark.parametrize("ident", ["cycle(2)", "cycle", "random(3,4,1)", "star(4)", "grid(2)", "cycle(x)"])
def test_bad_graph_ids(ident):
    with pytest.raises(BenchmarkError):
        graph_from_id(ident)


def test_bad_specs():
    with pytest.raises(BenchmarkError):
        BenchmarkSpec("coloring", make_graph("cycle", 3))
    with pytest.raises(BenchmarkError):
        BenchmarkSpec("kernel", make_graph("cycle", 3))
    with pytest.raises(BenchmarkError):
        BenchmarkSpec("sudoku", make_graph("cycle", 3))
    with pytest.raises(BenchmarkError):
        encode(BenchmarkSpec("vertexcover", make_graph("cycle", 3), 2, target="default"))


def test_encode_produces_valid_programs():
    for problem, graph, k in [("coloring", make_graph("grid", 2, 2), 2),
                              ("hamiltonian", make_graph("cycle", 4), None),
                              ("kernel", make_graph("cycle", 4, directed=True), None),
                              ("independentset", make_graph("path", 3), 2),
                              ("vertexcover", make_graph("path", 3), 1)]:
        P = encode(BenchmarkSpec(problem, graph, k))
        assert isinstance(P, Program)
        assert validate(P) == []


def test_encode_default_targets():
    T = encode(BenchmarkSpec("coloring", make_graph("cycle", 3), 3, target="default"))
    assert isinstance(T, DefaultTheory) and len(T.D) == 9 + 9


def test_program_text_header_and_bytes():
    spec = BenchmarkSpec("coloring", make_graph("cycle", 3), 3)
    text = program_text(spec)
    assert text.startswith("% coloring on cycle(3) k=3\n")
    assert text == program_text(BenchmarkSpec("coloring", make_graph("cycle", 3), 3))
    assert parse_program(text) == encode(spec)


def test_bruteforce_examples():
    assert count_solutions_bruteforce(BenchmarkSpec("coloring", make_graph("cycle", 4), 2)) == 2
    assert count_solutions_bruteforce(BenchmarkSpec("hamiltonian", make_graph("complete", 4))) == 6
    assert count_solutions_bruteforce(BenchmarkSpec("independentset", make_graph("path", 3), 2)) == 1
    assert count_solutions_bruteforce(BenchmarkSpec("vertexcover", make_graph("path", 3), 1)) == 1
    assert count_solutions_bruteforce(BenchmarkSpec("kernel", make_graph("cycle", 4, directed=True))) == 2


def _stable_count(spec):
    return len(solve(ground(encode(spec))))


@pytest.mark.parametrize("spec", [
    BenchmarkSpec("coloring", make_graph("cycle", 4), 2),
    BenchmarkSpec("coloring", make_graph("grid", 2, 3), 3),
    BenchmarkSpec("hamiltonian", make_graph("complete", 4)),
    BenchmarkSpec("hamiltonian", make_graph("cycle", 5)),
    BenchmarkSpec("hamiltonian", make_graph("cycle", 2, directed=True)),
    BenchmarkSpec("kernel", make_graph("cycle", 6, directed=True)),
    BenchmarkSpec("kernel", make_graph("random", 6, 9, 3, directed=True)),
    BenchmarkSpec("independentset", make_graph("grid", 2, 3), 2),
    BenchmarkSpec("vertexcover", make_graph("random", 6, 7, 1), 3),
], ids=lambda s: f"{s.problem}-{s.graph.id}")
def test_encoding_counts_match_definitions(spec):
    assert _stable_count(spec) == count_solutions_bruteforce(spec)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(1, 3), st.integers(0, 10 ** 6))
def test_coloring_models_are_proper_colourings(n, k, seed):
    m = min(n * (n - 1) // 2, n)
    g = make_graph("random", n, m, seed)
    gp = ground(encode(BenchmarkSpec("coloring", g, k)))
    decoded = set()
    for model in solve(gp):
        colour = {}
        for a in model:
            at = gp.atom(a)
            if at.predicate == "clrd":
                v, c = (t.value for t in at.args)
                assert v not in colour
                colour[v] = c
        assert sorted(colour) == list(range(1, n + 1))
        assert all(colour[u] != colour[v] for u, v in g.edges)
        decoded.add(tuple(colour[v] for v in range(1, n + 1)))
    proper = {c for c in itertools.product(range(1, k + 1), repeat=n)
              if all(c[u - 1] != c[v - 1] for u, v in g.edges)}
    assert decoded == proper


def test_coloring_default_theory_matches_program():
    for ident, k in [("cycle(3)", 3), ("path(3)", 2), ("cycle(4)", 2)]:
        g = graph_from_id(ident)
        T = encode(BenchmarkSpec("coloring", g, k, target="default"))
        P = encode(BenchmarkSpec("coloring", g, k))
        gp = ground(P)
        from_defaults = {frozenset(l.atom for l in e.literals if l.positive and l.atom != "f")
                         for e in extensions(T)}
        from_program = {frozenset(x for x in m if x.startswith("clrd("))
                        for m in enumerate_bruteforce(gp).named(gp)}
        assert from_defaults == from_program
