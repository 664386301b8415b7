"""Domain-driven grounding.

Predicate domains are the least fixpoint of the program read positively
(negation and cardinality literals assumed satisfiable, choice heads
derivable), computed semi-naively. Rules are then instantiated only with
substitutions whose positive body atoms lie in those domains.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from .model import (
    Atom, GroundProgram, GroundProgramBuilder, HeadKind, Program, Rule, Term, TermKind,
    compare, instantiate_rule, require_valid, term_of,
)


@dataclass
class DomainRelation:
    predicate: str
    arity: int

    def __post_init__(self):
        self.tuples: dict[tuple, None] = {}
        self._indexes: dict[tuple[int, ...], dict[tuple, list[tuple]]] = {}

    def add(self, tup: tuple) -> bool:
        if tup in self.tuples:
            return False
        self.tuples[tup] = None
        for positions, index in self._indexes.items():
            index.setdefault(tuple(tup[p] for p in positions), []).append(tup)
        return True

    def __contains__(self, tup):
        return tup in self.tuples

    def __len__(self):
        return len(self.tuples)

    def lookup(self, positions: tuple[int, ...], key: tuple) -> list[tuple]:
        if not positions:
            return list(self.tuples)
        index = self._indexes.get(positions)
        if index is None:
            index = {}
            for tup in self.tuples:
                index.setdefault(tuple(tup[p] for p in positions), []).append(tup)
            self._indexes[positions] = index
        return index.get(key, [])


def _value(t: Term):
    return t.value if t.kind is TermKind.INTEGER else t.name


def _match(lit_atom: Atom, binding: dict, rows: list[tuple]) -> Iterator[dict]:
    for row in rows:
        new = binding
        ok = True
        for t, v in zip(lit_atom.args, row):
            if t.is_variable:
                bound = new.get(t.name, _UNBOUND)
                if bound is _UNBOUND:
                    if new is binding:
                        new = dict(binding)
                    new[t.name] = v
                elif bound != v:
                    ok = False
                    break
            elif _value(t) != v:
                ok = False
                break
        if ok:
            yield new


_UNBOUND = object()


def _key_for(lit_atom: Atom, binding: dict) -> tuple[tuple[int, ...], tuple]:
    positions, key = [], []
    for i, t in enumerate(lit_atom.args):
        if t.is_variable:
            if t.name in binding:
                positions.append(i)
                key.append(binding[t.name])
        else:
            positions.append(i)
            key.append(_value(t))
    return tuple(positions), tuple(key)


class Grounder:
    def __init__(self, program: Program):
        require_valid(program)
        self.program = program
        self.domains: dict[str, DomainRelation] = {}

    def relation(self, a: Atom) -> DomainRelation:
        rel = self.domains.get(a.predicate)
        if rel is None:
            rel = self.domains[a.predicate] = DomainRelation(a.predicate, a.arity)
        return rel

    def in_domain(self, a: Atom) -> bool:
        rel = self.domains.get(a.predicate)
        return rel is not None and tuple(_value(t) for t in a.args) in rel

    # -- joins ---------------------------------------------------------------

    def _join(self, rule: Rule, binding: dict, todo: list[Atom],
              override: Optional[tuple[int, list[tuple]]] = None) -> Iterator[dict]:
        """Enumerate bindings for positive atoms ``todo`` (index 0 may use override rows)."""
        if not self._builtins_ok(rule, binding):
            return
        if not todo:
            yield binding
            return
        first, rest = todo[0], todo[1:]
        if override is not None:
            rows = override[1]
        else:
            positions, key = _key_for(first, binding)
            rows = self.relation(first).lookup(positions, key)
        for b in _match(first, binding, rows):
            yield from self._join(rule, b, rest)

    @staticmethod
    def _builtins_ok(rule: Rule, binding: dict) -> bool:
        for cmp in rule.builtins:
            lhs, rhs = cmp.lhs, cmp.rhs
            if lhs.is_variable and lhs.name not in binding:
                continue
            if rhs.is_variable and rhs.name not in binding:
                continue
            lv = binding[lhs.name] if lhs.is_variable else _value(lhs)
            rv = binding[rhs.name] if rhs.is_variable else _value(rhs)
            if not compare(lv, cmp.op, rv):
                return False
        return True

    @staticmethod
    def _positive(rule: Rule) -> list[Atom]:
        return [lit.atom for lit in rule.body if not lit.negated]

    # -- domains -------------------------------------------------------------

    def compute_domains(self) -> dict[str, DomainRelation]:
        """Semi-naive least fixpoint of the positive reading of the program."""
        delta: dict[str, list[tuple]] = {}

        def emit(atoms, pending):
            for a in atoms:
                tup = tuple(_value(t) for t in a.args)
                rel = self.relation(a)
                if tup not in rel:
                    pending.setdefault(a.predicate, {}).setdefault(tup, None)

        pending: dict[str, dict] = {}
        emit(self.program.facts, pending)
        generators = [r for r in self.program.rules if r.kind is not HeadKind.CONSTRAINT]
        for r in generators:
            if not self._positive(r):
                for b in self._join(r, {}, []):
                    emit(self._heads(r, b), pending)
        while pending:
            delta = {}
            for pred, tups in pending.items():
                for tup in tups:
                    if self.domains[pred].add(tup):
                        delta.setdefault(pred, []).append(tup)
            pending = {}
            for r in generators:
                pos = self._positive(r)
                for i, a in enumerate(pos):
                    rows = delta.get(a.predicate)
                    if not rows:
                        continue
                    order = [a] + pos[:i] + pos[i + 1:]
                    for b in self._join(r, {}, order, override=(0, rows)):
                        emit(self._heads(r, b), pending)
        return self.domains

    @staticmethod
    def _heads(rule: Rule, binding: dict) -> list[Atom]:
        return [Atom(h.predicate, tuple(term_of(binding[t.name]) if t.is_variable else t
                                        for t in h.args)) for h in rule.head]

    # -- instantiation -------------------------------------------------------

    def ground(self) -> GroundProgram:
        self.compute_domains()
        b = GroundProgramBuilder()
        for a in self.program.facts:
            b.add(HeadKind.NORMAL, (a,))
        for rule in self.program.rules:
            for binding in self._join(rule, {}, self._positive(rule)):
                inst = instantiate_rule(rule, binding)
                if inst is None:
                    continue
                simplified = simplify_instance(rule.kind, *inst, in_domain=self.in_domain)
                if simplified is not None:
                    b.add(rule.kind, *simplified)
        return b.build()


def simplify_instance(kind: HeadKind, head, pos, neg, cards,
                      in_domain: Callable[[Atom], bool]):
    """Drop literals that are always true; return None if the instance can never fire.

    ``not a`` with ``a`` outside every domain is deleted. An instance with a
    positive body atom outside the domains is deleted. Cardinality elements
    outside the domains are removed (they are never true); a literal whose
    bound then cannot be met deletes the instance, one that always holds is
    removed.
    """
    if not all(in_domain(a) for a in pos):
        return None
    neg = [a for a in neg if in_domain(a)]
    kept = []
    for lower, upper, elems in cards:
        elems = list(dict.fromkeys(e for e in elems if in_domain(e)))
        if lower > len(elems):
            return None
        if lower == 0 and (upper is None or upper >= len(elems)):
            continue
        kept.append((lower, upper, elems))
    return head, pos, neg, kept


def simplify_ground(gp: GroundProgram, in_domain: Callable[[Atom], bool]) -> GroundProgram:
    """Apply the grounding simplifications to an already ground program."""
    b = GroundProgramBuilder()
    facts, rest = [], []
    for r in gp.rules:
        (facts if r.is_normal and not r.body_size() else rest).append(r)
    for r in facts + rest:
        inst = simplify_instance(
            r.kind,
            [gp.atom(a) for a in r.head], [gp.atom(a) for a in r.pos],
            [gp.atom(a) for a in r.neg],
            [(c.lower, c.upper, [gp.atom(e) for e in c.elements]) for c in r.cards],
            in_domain)
        if inst is not None:
            b.add(r.kind, *inst)
    return b.build()


def ground(program: Program) -> GroundProgram:
    return Grounder(program).ground()


@dataclass(frozen=True)
class GroundStats:
    atoms: int
    rules: int
    body_literals: int

    def __str__(self):
        return f"atoms={self.atoms} rules={self.rules} bodyliterals={self.body_literals}"


def ground_stats(gp: GroundProgram) -> GroundStats:
    return GroundStats(gp.num_atoms, len(gp.rules), sum(r.body_size() for r in gp.rules))
