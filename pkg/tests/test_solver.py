import random

import pytest
from hypothesis import given, settings, strategies as st

from microasp.grounder import ground
from microasp.model import FALSE, TRUE, UNKNOWN, Assignment, herbrand_instantiation
from microasp.oracle import enumerate_bruteforce, is_stable
from microasp.parser import parse_program
from microasp.solver import (
    Conflict, IncompleteSearch, SearchConfig, Solver, check_model, propagate, solve,
)
from microasp.theorybase import BenchmarkSpec, encode, make_graph

from corpus import random_ground_program


def gp_of(text):
    return herbrand_instantiation(parse_program(text))


def value_of(gp, result, name):
    return result.value[gp.ids_by_name()[name]]


def test_propagate_facts_and_rules():
    gp = gp_of("a.\nb :- a.")
    res = propagate(gp, Assignment(gp.num_atoms))
    assert value_of(gp, res, "a") == TRUE and value_of(gp, res, "b") == TRUE


def test_propagate_positive_loop_is_unfounded():
    gp = gp_of("a :- b.\nb :- a.")
    res = propagate(gp, Assignment(gp.num_atoms))
    assert value_of(gp, res, "a") == FALSE and value_of(gp, res, "b") == FALSE


def test_propagate_constraint_forces_false():
    gp = gp_of("{ a; b }.\n:- a, b.")
    start = Assignment(gp.num_atoms)
    start.assign(gp.ids_by_name()["a"], TRUE, 0)
    res = propagate(gp, start)
    assert value_of(gp, res, "b") == FALSE


def test_propagate_leaves_choice_open():
    gp = gp_of("{ a }.")
    res = propagate(gp, Assignment(gp.num_atoms))
    assert value_of(gp, res, "a") == UNKNOWN


def test_propagate_reports_conflict():
    gp = gp_of("a.\n:- a.")
    assert isinstance(propagate(gp, Assignment(gp.num_atoms)), Conflict)


def test_propagate_cardinality_forcing():
    gp = gp_of("{ a; b; c }.\n:- not ok.\nok :- 2 { a; b; c }.")
    start = Assignment(gp.num_atoms)
    ids = gp.ids_by_name()
    start.assign(ids["a"], FALSE, 0)
    res = propagate(gp, start)
    assert value_of(gp, res, "b") == TRUE and value_of(gp, res, "c") == TRUE


def test_solve_even_loop():
    gp = gp_of("a :- not b.\nb :- not a.")
    assert solve(gp).named(gp) == {frozenset({"a"}), frozenset({"b"})}


def test_solve_odd_loop():
    assert len(solve(gp_of("a :- not a."))) == 0


def test_solve_k3_coloring():
    gp = ground(encode(BenchmarkSpec("coloring", make_graph("cycle", 3), 3)))
    models = solve(gp)
    assert len(models) == 6
    assert models.as_sets() == enumerate_bruteforce(gp).as_sets()


def test_solve_kernel_on_directed_triangle():
    gp = ground(encode(BenchmarkSpec("kernel", make_graph("cycle", 3, directed=True))))
    assert len(solve(gp)) == 0


def test_solve_respects_max_models():
    gp = gp_of("{ a; b; c }.")
    assert len(solve(gp, SearchConfig(max_models=3))) == 3
    assert len(solve(gp)) == 8


def test_solve_order_is_the_search_order():
    # true is tried first, so the first model maximises the first decision
    gp = gp_of("{ a }.\n{ b }.")
    assert [sorted(gp.name(x) for x in m) for m in solve(gp)] == [["a", "b"], ["a"], ["b"], []]
    for seed in range(30):
        gp = random_ground_program(seed)
        assert solve(gp).models == solve(gp).models


def test_check_model():
    gp = gp_of("a :- not b.\nb :- not a.")
    ids = gp.ids_by_name()
    assert check_model(gp, {ids["a"]})
    assert not check_model(gp, {ids["a"], ids["b"]})
    assert not check_model(gp, set())


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 7))
def test_solver_equals_oracle(seed):
    gp = random_ground_program(seed)
    assert solve(gp).as_sets() == enumerate_bruteforce(gp).as_sets()


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 7), st.integers(0, 2 ** 32))
def test_propagation_is_sound(seed, pick):
    # every stable model agreeing with the input must agree with the propagated assignment
    gp = random_ground_program(seed)
    rng = random.Random(pick)
    start = Assignment(gp.num_atoms)
    for a in rng.sample(range(1, gp.num_atoms + 1), rng.randint(0, gp.num_atoms)):
        start.assign(a, rng.choice((TRUE, FALSE)), 0)
    compatible = [m for m in enumerate_bruteforce(gp).as_sets()
                  if all((start.value[a] == TRUE) == (a in m) for a in range(1, gp.num_atoms + 1)
                         if start.value[a] != UNKNOWN)]
    res = propagate(gp, start)
    if isinstance(res, Conflict):
        assert compatible == []
        return
    for m in compatible:
        for a in range(1, gp.num_atoms + 1):
            if res.value[a] != UNKNOWN:
                assert (res.value[a] == TRUE) == (a in m)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 7))
def test_stability_guard_never_fires(seed):
    gp = random_ground_program(seed)
    s = Solver(gp, SearchConfig(debug=True))
    models = s.solve()
    assert s.stats.guard_rejections == 0
    assert all(is_stable(gp, m) for m in models)


def test_conflict_limit_raises_with_partial_models():
    gp = ground(encode(BenchmarkSpec("coloring", make_graph("complete", 6), 5)))
    with pytest.raises(IncompleteSearch) as exc:
        solve(gp, SearchConfig(conflict_limit=1))
    assert exc.value.conflicts >= 1
    assert all(is_stable(gp, m) for m in exc.value.models)


@pytest.mark.parametrize("cfg", [
    SearchConfig(heuristic="first-unassigned"),
    SearchConfig(seed=7),
    SearchConfig(seed=12345, heuristic="first-unassigned"),
    SearchConfig(lookahead=True),
])
def test_search_options_do_not_change_models(cfg):
    for seed in range(60):
        gp = random_ground_program(seed)
        assert solve(gp, cfg).as_sets() == enumerate_bruteforce(gp).as_sets()


def test_bad_config_rejected():
    with pytest.raises(ValueError):
        SearchConfig(heuristic="vsids")
    with pytest.raises(ValueError):
        SearchConfig(max_models=-1)


def test_seed_is_deterministic():
    gp = ground(encode(BenchmarkSpec("coloring", make_graph("grid", 2, 3), 3)))
    a = Solver(gp, SearchConfig(seed=3))
    b = Solver(gp, SearchConfig(seed=3))
    assert a.solve().models == b.solve().models
    assert a.stats.decisions == b.stats.decisions
