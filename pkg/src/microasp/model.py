"""Abstract syntax, ground representation and the canonical printer."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1

COMPARISONS = ("=", "!=", "<", "<=")


class ValidationError(Exception):
    """Raised when a program fails validation before grounding."""

    def __init__(self, diagnostics: Sequence["Diagnostic"]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class UnsupportedFeature(Exception):
    pass


# ---------------------------------------------------------------------------
# Terms and atoms
# ---------------------------------------------------------------------------

class TermKind(Enum):
    CONSTANT = "constant"
    INTEGER = "integer"
    VARIABLE = "variable"


@dataclass(frozen=True)
class Term:
    kind: TermKind
    name: str = ""
    value: int = 0

    def __post_init__(self):
        if self.kind is TermKind.INTEGER:
            if self.name:
                raise ValueError("integer terms carry no name")
        elif not self.name:
            raise ValueError(f"{self.kind.value} term needs a name")
        elif self.kind is TermKind.CONSTANT and not self.name[0].islower():
            raise ValueError(f"constant {self.name!r} must start lowercase")
        elif self.kind is TermKind.VARIABLE and not self.name[0].isupper():
            raise ValueError(f"variable {self.name!r} must start uppercase")

    @property
    def is_variable(self) -> bool:
        return self.kind is TermKind.VARIABLE

    def __str__(self):
        if self.kind is TermKind.INTEGER:
            return str(self.value)
        return self.name


def const(name: str) -> Term:
    return Term(TermKind.CONSTANT, name)


def var(name: str) -> Term:
    return Term(TermKind.VARIABLE, name)


def integer(value: int) -> Term:
    return Term(TermKind.INTEGER, value=value)


def term_of(value) -> Term:
    """Build a ground term from a python int or constant name."""
    if isinstance(value, Term):
        return value
    if isinstance(value, int):
        return integer(value)
    return const(value)


def _ground_value(t: Term):
    # ground values travel as python ints (integers) and strs (constants)
    if t.kind is TermKind.INTEGER:
        return t.value
    return t.name


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> Iterator[str]:
        for t in self.args:
            if t.is_variable:
                yield t.name

    def is_ground(self) -> bool:
        return not any(t.is_variable for t in self.args)

    def __str__(self):
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(str(t) for t in self.args)})"


def atom(predicate: str, *args) -> Atom:
    """Ground-atom shorthand: ``atom("edge", 1, 2)``."""
    return Atom(predicate, tuple(term_of(a) for a in args))


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    def __str__(self):
        return f"not {self.atom}" if self.negated else str(self.atom)


@dataclass(frozen=True)
class CardinalityLiteral:
    lower: int
    upper: Optional[int]
    elements: tuple[Atom, ...]

    def __str__(self):
        inner = "; ".join(str(a) for a in self.elements)
        text = f"{{ {inner} }}"
        if self.lower:
            text = f"{self.lower} {text}"
        if self.upper is not None:
            text = f"{text} {self.upper}"
        return text


@dataclass(frozen=True)
class Comparison:
    lhs: Term
    op: str
    rhs: Term

    def __post_init__(self):
        if self.op not in COMPARISONS:
            raise ValueError(f"unknown comparison {self.op!r}")

    def __str__(self):
        return f"{self.lhs} {self.op} {self.rhs}"


def _order_key(v):
    # integers sort before constants; constants alphabetically
    return (0, v, "") if isinstance(v, int) else (1, 0, v)


def compare(lhs, op: str, rhs) -> bool:
    """Evaluate a comparison between two ground values."""
    if op == "=":
        return lhs == rhs
    if op == "!=":
        return lhs != rhs
    a, b = _order_key(lhs), _order_key(rhs)
    return a < b if op == "<" else a <= b


class HeadKind(Enum):
    NORMAL = "normal"
    CONSTRAINT = "constraint"
    CHOICE = "choice"


@dataclass(frozen=True)
class Rule:
    kind: HeadKind
    head: tuple[Atom, ...] = ()
    body: tuple[Literal, ...] = ()
    cards: tuple[CardinalityLiteral, ...] = ()
    builtins: tuple[Comparison, ...] = ()

    def __post_init__(self):
        n = len(self.head)
        if self.kind is HeadKind.NORMAL and n != 1:
            raise ValueError("normal rules have exactly one head atom")
        if self.kind is HeadKind.CONSTRAINT and n:
            raise ValueError("constraints have no head atoms")
        if self.kind is HeadKind.CHOICE and not n:
            raise ValueError("choice rules need at least one head atom")

    def atoms(self) -> Iterator[Atom]:
        yield from self.head
        for lit in self.body:
            yield lit.atom
        for card in self.cards:
            yield from card.elements

    def variables(self) -> list[str]:
        seen = {}
        for a in self.atoms():
            for v in a.variables():
                seen.setdefault(v)
        for cmp in self.builtins:
            for t in (cmp.lhs, cmp.rhs):
                if t.is_variable:
                    seen.setdefault(t.name)
        return list(seen)

    def bound_variables(self) -> set[str]:
        return {v for lit in self.body if not lit.negated for v in lit.atom.variables()}

    def __str__(self):
        parts = [str(lit) for lit in self.body]
        parts += [str(c) for c in self.cards]
        parts += [str(c) for c in self.builtins]
        if self.kind is HeadKind.NORMAL:
            head = str(self.head[0])
        elif self.kind is HeadKind.CHOICE:
            head = "{ " + "; ".join(str(a) for a in self.head) + " }"
        else:
            head = ""
        if not parts:
            return f"{head}." if head else ":- ."
        body = ", ".join(parts)
        return f"{head} :- {body}." if head else f":- {body}."


def normal(head: Atom, *body: Literal, cards=(), builtins=()) -> Rule:
    return Rule(HeadKind.NORMAL, (head,), tuple(body), tuple(cards), tuple(builtins))


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...] = ()
    facts: tuple[Atom, ...] = ()

    def __str__(self):
        lines = [f"{a}." for a in self.facts] + [str(r) for r in self.rules]
        return "".join(line + "\n" for line in lines)

    def constants(self) -> list:
        """Ground values occurring anywhere, in first-occurrence order."""
        seen = {}
        for a in self.facts:
            for t in a.args:
                seen.setdefault(_ground_value(t))
        for r in self.rules:
            for a in r.atoms():
                for t in a.args:
                    if not t.is_variable:
                        seen.setdefault(_ground_value(t))
            for cmp in r.builtins:
                for t in (cmp.lhs, cmp.rhs):
                    if not t.is_variable:
                        seen.setdefault(_ground_value(t))
        return list(seen)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    where: str  # "rule" or "fact"
    index: int
    reason: str
    severity: str = "error"

    def __str__(self):
        return f"{self.where} {self.index}: {self.reason}"


def validate(program: Program) -> list[Diagnostic]:
    """Check safety, arity consistency, cardinality bounds and integer range.

    Errors block grounding; warnings (bounds that can never be met) do not.
    """
    out: list[Diagnostic] = []
    arities: dict[str, int] = {}
    reported: set[str] = set()

    def check_atom(a: Atom, where: str, idx: int):
        known = arities.setdefault(a.predicate, a.arity)
        if known != a.arity and a.predicate not in reported:
            reported.add(a.predicate)
            out.append(Diagnostic(where, idx, f"arity mismatch {a.predicate}"))
        for t in a.args:
            check_term(t, where, idx)

    def check_term(t: Term, where: str, idx: int):
        if t.kind is TermKind.INTEGER and not INT_MIN <= t.value <= INT_MAX:
            out.append(Diagnostic(where, idx, f"integer out of range {t.value}"))

    for i, a in enumerate(program.facts):
        check_atom(a, "fact", i)
        if not a.is_ground():
            out.append(Diagnostic("fact", i, f"fact {a} is not ground"))

    for i, r in enumerate(program.rules):
        for a in r.atoms():
            check_atom(a, "rule", i)
        for cmp in r.builtins:
            check_term(cmp.lhs, "rule", i)
            check_term(cmp.rhs, "rule", i)
        bound = r.bound_variables()
        for v in r.variables():
            if v not in bound:
                out.append(Diagnostic("rule", i, f"unsafe variable {v}"))
        for card in r.cards:
            if not card.elements:
                out.append(Diagnostic("rule", i, "empty cardinality literal"))
            if len(set(card.elements)) != len(card.elements):
                out.append(Diagnostic("rule", i, "duplicate element in cardinality literal"))
            if card.lower < 0:
                out.append(Diagnostic("rule", i, "negative cardinality bound"))
            if card.upper is not None and card.upper < card.lower:
                out.append(Diagnostic("rule", i, f"cardinality bounds {card.lower} > {card.upper}"))
            elif card.lower > len(card.elements):
                out.append(Diagnostic(
                    "rule", i,
                    f"unsatisfiable bound: lower {card.lower} exceeds {len(card.elements)} elements",
                    severity="warning"))
    return out


def errors_of(diagnostics: Iterable[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diagnostics if d.severity == "error"]


def require_valid(program: Program) -> None:
    errs = errors_of(validate(program))
    if errs:
        raise ValidationError(errs)


# ---------------------------------------------------------------------------
# Ground programs
# ---------------------------------------------------------------------------

def _dedupe(ids: Iterable[int]) -> tuple[int, ...]:
    return tuple(dict.fromkeys(ids))


@dataclass(frozen=True)
class GroundCard:
    lower: int
    upper: Optional[int]
    elements: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", _dedupe(self.elements))

    def holds(self, model) -> bool:
        n = sum(1 for e in self.elements if e in model)
        return n >= self.lower and (self.upper is None or n <= self.upper)


@dataclass(frozen=True)
class GroundRule:
    kind: HeadKind
    head: tuple[int, ...] = ()
    pos: tuple[int, ...] = ()
    neg: tuple[int, ...] = ()
    cards: tuple[GroundCard, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "head", _dedupe(self.head))
        object.__setattr__(self, "pos", _dedupe(self.pos))
        object.__setattr__(self, "neg", _dedupe(self.neg))

    @property
    def is_normal(self) -> bool:
        return self.kind is HeadKind.NORMAL

    @property
    def is_constraint(self) -> bool:
        return self.kind is HeadKind.CONSTRAINT

    @property
    def is_choice(self) -> bool:
        return self.kind is HeadKind.CHOICE

    def body_holds(self, model) -> bool:
        return (all(a in model for a in self.pos)
                and not any(a in model for a in self.neg)
                and all(c.holds(model) for c in self.cards))

    def body_size(self) -> int:
        return len(self.pos) + len(self.neg) + len(self.cards)

    def atoms(self) -> Iterator[int]:
        yield from self.head
        yield from self.pos
        yield from self.neg
        for c in self.cards:
            yield from c.elements


class GroundProgram:
    """Ground rules over dense 1-based atom ids."""

    def __init__(self, atoms: Sequence[Atom] = (), rules: Sequence[GroundRule] = ()):
        self.atoms: tuple[Atom, ...] = tuple(atoms)
        self.rules: tuple[GroundRule, ...] = tuple(rules)
        self._ids = {a: i for i, a in enumerate(self.atoms, 1)}
        if len(self._ids) != len(self.atoms):
            raise ValueError("atom table contains duplicates")
        n = len(self.atoms)
        for r in self.rules:
            for a in r.atoms():
                if not 1 <= a <= n:
                    raise ValueError(f"atom id {a} outside the atom table")

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    def atom(self, atom_id: int) -> Atom:
        return self.atoms[atom_id - 1]

    def name(self, atom_id: int) -> str:
        return str(self.atoms[atom_id - 1])

    def id_of(self, a: Atom) -> int:
        return self._ids[a]

    def get_id(self, a: Atom) -> Optional[int]:
        return self._ids.get(a)

    def ids_by_name(self) -> dict[str, int]:
        return {str(a): i for a, i in self._ids.items()}

    def names(self, atom_ids: Iterable[int]) -> list[str]:
        return [self.name(i) for i in sorted(atom_ids)]

    @property
    def is_normal(self) -> bool:
        """True when only normal rules and constraints occur."""
        return all(not r.is_choice and not r.cards for r in self.rules)

    def rule_text(self, r: GroundRule) -> str:
        return str(self._to_rule(r))

    def _to_rule(self, r: GroundRule) -> Rule:
        body = tuple(Literal(self.atom(a)) for a in r.pos)
        body += tuple(Literal(self.atom(a), True) for a in r.neg)
        cards = tuple(CardinalityLiteral(c.lower, c.upper, tuple(self.atom(e) for e in c.elements))
                      for c in r.cards)
        return Rule(r.kind, tuple(self.atom(a) for a in r.head), body, cards)

    def to_text(self) -> str:
        return "".join(self.rule_text(r) + "\n" for r in self.rules)

    def to_program(self) -> Program:
        """Lift back to a (ground) Program; empty-body normal rules become facts."""
        facts, rules = [], []
        for r in self.rules:
            if r.is_normal and not r.body_size():
                facts.append(self.atom(r.head[0]))
            else:
                rules.append(self._to_rule(r))
        return Program(tuple(rules), tuple(dict.fromkeys(facts)))

    def __eq__(self, other):
        if not isinstance(other, GroundProgram):
            return NotImplemented
        return self.atoms == other.atoms and self.rules == other.rules

    def __hash__(self):
        return hash((self.atoms, self.rules))

    def __repr__(self):
        return f"GroundProgram(atoms={len(self.atoms)}, rules={len(self.rules)})"


class GroundProgramBuilder:
    """Interns atoms in first-occurrence order and deduplicates rules."""

    def __init__(self):
        self._ids: dict[Atom, int] = {}
        self._rules: dict[GroundRule, None] = {}

    def intern(self, a: Atom) -> int:
        i = self._ids.get(a)
        if i is None:
            i = self._ids[a] = len(self._ids) + 1
        return i

    def add(self, kind: HeadKind, head=(), pos=(), neg=(), cards=()) -> None:
        h = tuple(self.intern(a) for a in head)
        p = tuple(self.intern(a) for a in pos)
        n = tuple(self.intern(a) for a in neg)
        cs = tuple(GroundCard(lo, up, tuple(self.intern(a) for a in elems))
                   for lo, up, elems in cards)
        self._rules.setdefault(GroundRule(kind, h, p, n, cs))

    def build(self) -> GroundProgram:
        return GroundProgram(list(self._ids), list(self._rules))


# ---------------------------------------------------------------------------
# Naive instantiation
# ---------------------------------------------------------------------------

def _subst_atom(a: Atom, binding: dict) -> Atom:
    if a.is_ground():
        return a
    return Atom(a.predicate, tuple(term_of(binding[t.name]) if t.is_variable else t
                                   for t in a.args))


def _subst_value(t: Term, binding: dict):
    return binding[t.name] if t.is_variable else _ground_value(t)


def instantiate_rule(rule: Rule, binding: dict):
    """Apply a substitution; returns builder arguments or None if a builtin fails."""
    for cmp in rule.builtins:
        if not compare(_subst_value(cmp.lhs, binding), cmp.op, _subst_value(cmp.rhs, binding)):
            return None
    head = [_subst_atom(a, binding) for a in rule.head]
    pos = [_subst_atom(l.atom, binding) for l in rule.body if not l.negated]
    neg = [_subst_atom(l.atom, binding) for l in rule.body if l.negated]
    cards = [(c.lower, c.upper, [_subst_atom(a, binding) for a in c.elements]) for c in rule.cards]
    return head, pos, neg, cards


def herbrand_instantiation(program: Program) -> GroundProgram:
    """Every instance over all constants of the program; no simplification."""
    require_valid(program)
    universe = program.constants()
    b = GroundProgramBuilder()
    for rule in program.rules:
        names = rule.variables()
        for values in itertools.product(universe, repeat=len(names)):
            inst = instantiate_rule(rule, dict(zip(names, values)))
            if inst is not None:
                head, pos, neg, cards = inst
                b.add(rule.kind, head, pos, neg, cards)
    for a in program.facts:
        b.add(HeadKind.NORMAL, (a,))
    return b.build()


# ---------------------------------------------------------------------------
# Search state
# ---------------------------------------------------------------------------

TRUE, FALSE, UNKNOWN = 1, -1, 0


@dataclass
class Assignment:
    """Three-valued atom state with a replayable trail."""

    size: int
    value: list = field(default_factory=list)
    trail: list = field(default_factory=list)  # (atom, value, level)

    def __post_init__(self):
        if not self.value:
            self.value = [UNKNOWN] * (self.size + 1)

    @property
    def level(self) -> int:
        return self.trail[-1][2] if self.trail else 0

    def assign(self, atom_id: int, val: int, level: int = 0) -> bool:
        """Set a value; returns False if the atom already holds the opposite value."""
        cur = self.value[atom_id]
        if cur == val:
            return True
        if cur != UNKNOWN:
            return False
        self.value[atom_id] = val
        self.trail.append((atom_id, val, level))
        return True

    def undo_to(self, pos: int) -> None:
        while len(self.trail) > pos:
            a, _, _ = self.trail.pop()
            self.value[a] = UNKNOWN

    def true_atoms(self) -> frozenset:
        return frozenset(a for a in range(1, self.size + 1) if self.value[a] == TRUE)

    def is_total(self) -> bool:
        return all(v != UNKNOWN for v in self.value[1:])

    def replay(self) -> list:
        vals = [UNKNOWN] * (self.size + 1)
        for a, v, _ in self.trail:
            vals[a] = v
        return vals

    def copy(self) -> "Assignment":
        return Assignment(self.size, list(self.value), list(self.trail))

    @classmethod
    def from_values(cls, size: int, values: dict) -> "Assignment":
        a = cls(size)
        for atom_id, v in values.items():
            a.assign(atom_id, TRUE if v in (True, TRUE) else FALSE)
        return a
