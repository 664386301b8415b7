import pytest
from hypothesis import given, settings, strategies as st

from microasp.model import (
    Assignment, Atom, GroundProgram, HeadKind, Program, Term, TermKind, ValidationError,
    atom, const, herbrand_instantiation, integer, validate, var,
)
from microasp.parser import parse_program

from corpus import random_ground_program, random_nonground_program


def rule_set(gp):
    return set(gp.to_text().splitlines())


def test_term_kinds():
    assert str(const("a")) == "a"
    assert str(integer(-3)) == "-3"
    assert var("X").is_variable
    with pytest.raises(ValueError):
        const("Abc")
    with pytest.raises(ValueError):
        var("x")
    with pytest.raises(ValueError):
        Term(TermKind.CONSTANT, "")


def test_rule_head_arity_enforced():
    with pytest.raises(ValueError):
        from microasp.model import Rule
        Rule(HeadKind.NORMAL, ())


def test_herbrand_substitutes_all_constants():
    gp = herbrand_instantiation(parse_program("p(X) :- q(X).\nq(a). q(b)."))
    assert rule_set(gp) == {"p(a) :- q(a).", "p(b) :- q(b).", "q(a).", "q(b)."}


def test_herbrand_evaluates_builtins():
    gp = herbrand_instantiation(parse_program("p(X) :- q(X), X != a.\nq(a). q(b)."))
    assert rule_set(gp) == {"p(b) :- q(b).", "q(a).", "q(b)."}


def test_herbrand_keeps_ground_rule():
    gp = herbrand_instantiation(parse_program("r :- p, not q."))
    assert gp.to_text() == "r :- p, not q.\n"
    assert [str(a) for a in gp.atoms] == ["r", "p", "q"]


def test_herbrand_rejects_unsafe():
    with pytest.raises(ValidationError, match="unsafe variable X"):
        herbrand_instantiation(parse_program("p(X) :- q."))


def test_validate_unsafe_variable():
    diags = validate(parse_program("p(X) :- q."))
    assert [d.reason for d in diags] == ["unsafe variable X"]
    assert diags[0].where == "rule" and diags[0].index == 0


def test_validate_arity_mismatch():
    diags = validate(parse_program("p(a,b). p(a)."))
    assert [d.reason for d in diags] == ["arity mismatch p"]


def test_validate_negative_only_variable_is_unsafe():
    diags = validate(parse_program("p :- q(X), not r(Y)."))
    assert [d.reason for d in diags] == ["unsafe variable Y"]


def test_validate_bounds():
    diags = validate(parse_program(":- 3 { p(a); p(b) }."))
    assert len(diags) == 1 and diags[0].severity == "warning"
    assert "unsatisfiable bound" in diags[0].reason
    diags = validate(parse_program(":- 2 { p(a); p(b) } 1."))
    assert diags[0].severity == "error"
    diags = validate(parse_program(":- { p(a); p(a) }."))
    assert "duplicate" in diags[0].reason


def test_validate_integer_range():
    diags = validate(parse_program("p(99999999999999999999)."))
    assert diags and "out of range" in diags[0].reason


def test_validate_clean_program():
    text = "{ in(V) } :- vtx(V).\n:- edge(U,V), in(U), in(V).\nvtx(1). vtx(2). edge(1,2)."
    assert validate(parse_program(text)) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_printer_fixpoint(seed):
    program = random_nonground_program(seed)
    printed = str(program)
    assert parse_program(printed) == program
    assert str(parse_program(printed)) == printed


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_herbrand_idempotent_on_ground(seed):
    gp = herbrand_instantiation(random_nonground_program(seed))
    again = herbrand_instantiation(gp.to_program())
    assert rule_set(again) == rule_set(gp)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_atom_table_bijection(seed):
    gp = random_ground_program(seed)
    for i in range(1, gp.num_atoms + 1):
        assert gp.id_of(gp.atom(i)) == i
    assert len(set(gp.atoms)) == gp.num_atoms


def test_ground_program_rejects_dangling_ids():
    from microasp.model import GroundRule
    with pytest.raises(ValueError):
        GroundProgram([atom("a")], [GroundRule(HeadKind.NORMAL, (2,))])


def test_assignment_trail_replays():
    a = Assignment(4)
    assert a.assign(1, 1, 0)
    assert a.assign(3, -1, 1)
    assert a.assign(3, -1, 1)  # repeated value is fine, not re-trailed
    assert not a.assign(3, 1, 1)
    assert a.replay() == a.value
    assert [t[0] for t in a.trail] == [1, 3]
    a.undo_to(1)
    assert a.value[3] == 0 and a.replay() == a.value
