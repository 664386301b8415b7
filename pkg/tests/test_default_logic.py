import itertools

import pytest
from hypothesis import given, settings, strategies as st

from microasp.default_logic import (
    INCONSISTENT, Default, DefaultTheory, Lit, closure, extensions, is_extension, lit,
    program_to_defaults, query,
)
from microasp.grounder import ground
from microasp.model import UnsupportedFeature, herbrand_instantiation
from microasp.oracle import enumerate_bruteforce
from microasp.parser import parse_default_theory, parse_program
from microasp.theorybase import coloring_default_theory, make_graph

from corpus import random_normal_program


def theory(text):
    return parse_default_theory(text)


def positive_atoms(E, hide=()):
    return frozenset(l.atom for l in E if l.positive and l.atom not in hide)


def test_lit_parsing_and_complement():
    assert lit("-p(1)") == Lit("p(1)", False)
    assert lit("q").complement() == Lit("q", False)
    assert str(Lit("a", False)) == "-a"


def test_closure_chains_prerequisites():
    T = theory("fact: a.\nd: a : / b.\nd: b : / c.\nd: z : / y.")
    assert closure(T.D, T.W, range(3)) == {lit("a"), lit("b"), lit("c")}


def test_closure_detects_inconsistency():
    T = theory("d: true : / a.\nd: true : / -a.")
    assert closure(T.D, T.W, [0, 1]) is INCONSISTENT
    assert closure(T.D, T.W, [0]) == {lit("a")}


def test_inactive_defaults_ignored():
    T = theory("d: true : -b / a.")
    assert closure(T.D, T.W, []) == frozenset()


def test_even_loop_extensions():
    T = theory("d: true : -b / a.\nd: true : -a / b.")
    got = [e.literals for e in extensions(T)]
    assert got == [{lit("a")}, {lit("b")}]
    assert all(is_extension(T, E) for E in got)
    assert not is_extension(T, frozenset())


def test_self_defeating_default_has_no_extension():
    assert len(extensions(theory("d: true : -a / a."))) == 0


def test_inconsistent_base_gives_single_inconsistent_extension():
    exts = extensions(theory("fact: a.\nd: a : / -a."))
    assert len(exts) == 1 and not exts.extensions[0].consistent


def test_coloring_theory_without_killing_defaults():
    # n=2 vertices, k=3 colours, no edge constraints: every colouring is an extension
    T = coloring_default_theory(make_graph("path", 2), 3, killing=False)
    assert len(extensions(T)) == 9 == 3 ** 2


def test_coloring_theory_k3_triangle():
    T = coloring_default_theory(make_graph("cycle", 3), 3)
    exts = extensions(T)
    direct = sum(1 for c in itertools.product(range(3), repeat=3) if len(set(c)) == 3)
    assert len(exts) == direct == 6
    for e in exts:
        colours = {l.atom for l in e.literals if l.positive}
        assert len(colours) == 3 and lit("f") not in e.literals


@pytest.mark.parametrize("n, k", [(n, k) for n in range(1, 5) for k in range(1, 4)])
def test_coloring_theory_counts_without_edges(n, k):
    # without killing defaults the edges impose nothing: k choices per vertex
    T = coloring_default_theory(make_graph("path", n), k, killing=False)
    assert len(extensions(T)) == k ** n


def test_queries():
    T = theory("d: true : -b / a.\nd: true : -a / b.\nd: true : / c.")
    assert query(T, lit("a"), "brave")
    assert not query(T, lit("a"), "skeptical")
    assert query(T, lit("c"), "skeptical")
    assert not query(T, lit("z"), "brave")
    with pytest.raises(ValueError):
        query(T, lit("a"), "cautious")


def test_query_on_theory_without_extensions():
    T = theory("d: true : -a / a.")
    assert query(T, lit("a"), "skeptical") and not query(T, lit("a"), "brave")


def test_program_to_defaults_shapes():
    gp = herbrand_instantiation(parse_program("a :- b, not c.\n:- a, not d."))
    T = program_to_defaults(gp)
    assert str(T.D[0]) == "d: b : -c / a."
    assert str(T.D[1]) == "d: a : -kill1, -d / kill1."
    assert T.W == frozenset()


def test_program_to_defaults_fresh_names():
    gp = herbrand_instantiation(parse_program("kill1 :- not x.\n:- kill1."))
    T = program_to_defaults(gp)
    assert T.D[1].consequent == {lit("kill1_")}


def test_constraint_on_fact_kills_every_extension():
    gp = ground(parse_program("p.\n:- p."))
    assert len(extensions(program_to_defaults(gp))) == 0 == len(enumerate_bruteforce(gp))


def test_program_to_defaults_rejects_choice():
    with pytest.raises(UnsupportedFeature):
        program_to_defaults(herbrand_instantiation(parse_program("{ a }.")))


def _check_correspondence(gp):
    T = program_to_defaults(gp)
    hide = {l.atom for d in T.D for l in d.consequent} - set(gp.ids_by_name())
    exts = extensions(T)
    got = {positive_atoms(e.literals, hide) for e in exts}
    assert all(e.consistent for e in exts)
    assert got == enumerate_bruteforce(gp).named(gp)


def test_correspondence_examples():
    for text in ["a :- not b.\nb :- not a.", "a :- not a.", "a :- b.\nb :- a.", "a.\nb :- a, not c.\n:- b."]:
        _check_correspondence(herbrand_instantiation(parse_program(text)))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 7))
def test_correspondence_random(seed):
    _check_correspondence(random_normal_program(seed))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 7))
def test_every_extension_is_a_fixpoint(seed):
    T = program_to_defaults(random_normal_program(seed))
    for e in extensions(T):
        assert is_extension(T, e.literals)
        assert closure(T.D, T.W, e.generating) == e.literals


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 7), st.integers(1, 10))
def test_skeptical_implies_brave(seed, which):
    gp = random_normal_program(seed)
    T = program_to_defaults(gp)
    l = Lit(f"a{which}")
    if query(T, l, "skeptical") and len(extensions(T)):
        assert query(T, l, "brave")


def test_extension_order_is_deterministic():
    T = coloring_default_theory(make_graph("path", 2), 2, killing=False)
    first = [e.sorted_literals() for e in extensions(T)]
    assert first == sorted(first, key=lambda ls: [str(l) for l in ls])
    assert first == [e.sorted_literals() for e in extensions(T)]


def test_kernel_default_encoding_matches_program():
    from microasp.theorybase import BenchmarkSpec, encode
    g = make_graph("cycle", 4, directed=True)
    T = encode(BenchmarkSpec("kernel", g, target="default"))
    gp = ground(encode(BenchmarkSpec("kernel", g)))
    assert len(extensions(T)) == len(enumerate_bruteforce(gp)) == 2


def test_default_requires_nonempty_consequent():
    with pytest.raises(ValueError):
        Default(frozenset(), (), frozenset())
    assert DefaultTheory((), frozenset()) == theory("")
