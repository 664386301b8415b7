"""Reference semantics over ground programs.

Everything here is deliberately direct: the reduct is built literally, the
least model is a counter-driven Horn fixpoint, and enumeration tries every
candidate set. The solver is tested against these functions.
"""

from __future__ import annotations

import itertools
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Union

from .model import GroundProgram, GroundRule, UnsupportedFeature

DEFAULT_ATOM_LIMIT = 20
LIMIT_ENV = "MICROASP_ORACLE_LIMIT"


class OracleLimitExceeded(Exception):
    pass


@dataclass(frozen=True)
class PositiveRule:
    head: int
    body: tuple[int, ...] = ()
    cards: tuple[tuple[int, tuple[int, ...]], ...] = ()  # (lower, elements)


@dataclass
class PositiveProgram:
    rules: list[PositiveRule] = field(default_factory=list)


@dataclass
class ModelSet:
    """Stable models (or extensions) as sorted atom-id tuples, in a fixed order."""

    models: list[tuple[int, ...]] = field(default_factory=list)
    truncated: bool = False

    def __len__(self):
        return len(self.models)

    def __iter__(self):
        return iter(self.models)

    def __getitem__(self, i):
        return self.models[i]

    def as_sets(self) -> set[frozenset]:
        return {frozenset(m) for m in self.models}

    def named(self, gp: GroundProgram) -> set[frozenset]:
        return {frozenset(gp.name(a) for a in m) for m in self.models}


def bitset_key(n: int):
    """Sort key: the model as a bit vector over atoms 1..n, compared lexicographically."""
    def key(model):
        s = set(model)
        return tuple(i in s for i in range(1, n + 1))
    return key


# ---------------------------------------------------------------------------
# Reduct and least model
# ---------------------------------------------------------------------------

def reduct(gp: GroundProgram, candidate: Iterable[int]) -> PositiveProgram:
    m = set(candidate)
    out = []
    for r in gp.rules:
        if r.is_constraint:
            continue
        if any(a in m for a in r.neg):
            continue
        cards = []
        dead = False
        for c in r.cards:
            if c.upper is not None and sum(1 for e in c.elements if e in m) > c.upper:
                dead = True
                break
            cards.append((c.lower, c.elements))
        if dead:
            continue
        if r.is_normal:
            out.append(PositiveRule(r.head[0], r.pos, tuple(cards)))
        else:
            for h in r.head:
                if h in m:
                    out.append(PositiveRule(h, r.pos, tuple(cards)))
    return PositiveProgram(out)


def least_model(pp: PositiveProgram) -> set[int]:
    """Linear-time Horn closure with unsatisfied-premise counters."""
    waiting = []            # per rule: premises still missing
    by_atom: dict[int, list[int]] = {}
    card_left = []          # per (rule, card): elements still needed
    by_elem: dict[int, list[tuple[int, int]]] = {}
    model: set[int] = set()
    queue: deque[int] = deque()

    def derive(a):
        if a not in model:
            model.add(a)
            queue.append(a)

    for ri, r in enumerate(pp.rules):
        missing = 0
        for a in dict.fromkeys(r.body):
            by_atom.setdefault(a, []).append(ri)
            missing += 1
        lefts = []
        for ci, (lower, elems) in enumerate(r.cards):
            lefts.append(lower)
            if lower > 0:
                missing += 1
                for e in dict.fromkeys(elems):
                    by_elem.setdefault(e, []).append((ri, ci))
        card_left.append(lefts)
        waiting.append(missing)
        if missing == 0:
            derive(r.head)

    while queue:
        a = queue.popleft()
        for ri in by_atom.get(a, ()):
            waiting[ri] -= 1
            if waiting[ri] == 0:
                derive(pp.rules[ri].head)
        for ri, ci in by_elem.get(a, ()):
            card_left[ri][ci] -= 1
            if card_left[ri][ci] == 0:
                waiting[ri] -= 1
                if waiting[ri] == 0:
                    derive(pp.rules[ri].head)
    return model


def constraints_hold(gp: GroundProgram, candidate) -> bool:
    m = candidate if isinstance(candidate, (set, frozenset)) else set(candidate)
    return not any(r.is_constraint and r.body_holds(m) for r in gp.rules)


def is_stable(gp: GroundProgram, candidate: Iterable[int]) -> bool:
    m = set(candidate)
    return least_model(reduct(gp, m)) == m and constraints_hold(gp, m)


def is_model(gp: GroundProgram, candidate) -> bool:
    """Classical model test (choice rules are always satisfied)."""
    m = set(candidate)
    for r in gp.rules:
        if r.is_choice or not r.body_holds(m):
            continue
        if r.is_constraint or r.head[0] not in m:
            return False
    return True


# ---------------------------------------------------------------------------
# Brute-force enumeration
# ---------------------------------------------------------------------------

def oracle_limit(default: int = DEFAULT_ATOM_LIMIT) -> int:
    env = os.environ.get(LIMIT_ENV)
    return int(env) if env else default


def _free_atoms(gp: GroundProgram) -> tuple[list[int], list[int]]:
    """Split atoms into those fixed true by facts and those left open.

    Atoms heading no rule are false in every stable model, so only head atoms
    that are not facts need to be enumerated.
    """
    facts, heads = [], {}
    for r in gp.rules:
        if r.is_normal and not r.body_size():
            facts.append(r.head[0])
        for h in r.head:
            heads.setdefault(h)
    fixed = set(facts)
    return sorted(fixed), sorted(h for h in heads if h not in fixed)


def enumerate_bruteforce(gp: GroundProgram, atom_limit: Optional[int] = None) -> ModelSet:
    if atom_limit is None:
        atom_limit = oracle_limit()
    fixed, free = _free_atoms(gp)
    if len(free) > atom_limit:
        raise OracleLimitExceeded(
            f"{len(free)} open atoms exceed the oracle limit {atom_limit} "
            f"(raise it with --limit or {LIMIT_ENV})")
    models = []
    for bits in itertools.product((False, True), repeat=len(free)):
        cand = set(fixed)
        cand.update(a for a, b in zip(free, bits) if b)
        if is_stable(gp, cand):
            models.append(tuple(sorted(cand)))
    models.sort(key=bitset_key(gp.num_atoms))
    return ModelSet(models)


# ---------------------------------------------------------------------------
# Completion and tightness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    atom: int
    positive: bool = True

    def evaluate(self, model) -> bool:
        return (self.atom in model) == self.positive

    def negate(self) -> "Lit":
        return Lit(self.atom, not self.positive)

    def render(self, name) -> str:
        return name(self.atom) if self.positive else "-" + name(self.atom)


@dataclass(frozen=True)
class And:
    parts: tuple = ()

    def evaluate(self, model) -> bool:
        return all(p.evaluate(model) for p in self.parts)

    def negate(self) -> "Or":
        return Or(tuple(p.negate() for p in self.parts))

    def render(self, name) -> str:
        if not self.parts:
            return "true"
        return " & ".join(_wrap(p, name) for p in self.parts)


@dataclass(frozen=True)
class Or:
    parts: tuple = ()

    def evaluate(self, model) -> bool:
        return any(p.evaluate(model) for p in self.parts)

    def negate(self) -> And:
        return And(tuple(p.negate() for p in self.parts))

    def render(self, name) -> str:
        if not self.parts:
            return "false"
        return " | ".join(_wrap(p, name) for p in self.parts)


Formula = Union[Lit, And, Or]


def _wrap(f: Formula, name) -> str:
    if isinstance(f, Lit) or len(f.parts) <= 1:
        return f.render(name)
    return f"({f.render(name)})"


def _body_formula(r: GroundRule) -> And:
    return And(tuple(Lit(a) for a in r.pos) + tuple(Lit(a, False) for a in r.neg))


@dataclass
class CompletionFormula:
    """Completion as a list of NNF formulas; its models are the supported models."""

    num_atoms: int
    clauses: list  # NNF formulas, read conjunctively
    definitions: dict  # atom -> list of body conjunctions (for display)

    def holds(self, model) -> bool:
        return all(c.evaluate(model) for c in self.clauses)

    def models(self) -> list[tuple[int, ...]]:
        """Truth-table enumeration over all atoms."""
        out = []
        atoms = range(1, self.num_atoms + 1)
        for bits in itertools.product((False, True), repeat=self.num_atoms):
            m = {a for a, b in zip(atoms, bits) if b}
            if self.holds(m):
                out.append(tuple(sorted(m)))
        out.sort(key=bitset_key(self.num_atoms))
        return out

    def render(self, gp: GroundProgram) -> list[str]:
        return [c.render(gp.name) for c in self.clauses]


def _require_normal(gp: GroundProgram, what: str):
    if not gp.is_normal:
        raise UnsupportedFeature(f"{what} supports normal rules and constraints only")


def clark_completion(gp: GroundProgram) -> CompletionFormula:
    _require_normal(gp, "completion")
    defs: dict[int, list[And]] = {a: [] for a in range(1, gp.num_atoms + 1)}
    constraints = []
    for r in gp.rules:
        if r.is_constraint:
            constraints.append(_body_formula(r).negate())
        else:
            defs[r.head[0]].append(_body_formula(r))
    clauses: list[Formula] = []
    for a, bodies in defs.items():
        support = Or(tuple(bodies))
        # a <-> support, as (-a | support) & (a | -support)
        clauses.append(Or((Lit(a, False), support)))
        clauses.append(Or((Lit(a), support.negate())))
    clauses.extend(constraints)
    return CompletionFormula(gp.num_atoms, clauses, defs)


def supported_models(gp: GroundProgram) -> list[tuple[int, ...]]:
    """Direct definition: models in which every true atom has a rule with a true body."""
    _require_normal(gp, "supported models")
    out = []
    n = gp.num_atoms
    for bits in itertools.product((False, True), repeat=n):
        m = {a for a, b in zip(range(1, n + 1), bits) if b}
        if not is_model(gp, m):
            continue
        if all(any(not r.is_constraint and r.head[0] == a and r.body_holds(m) for r in gp.rules)
               for a in m):
            out.append(tuple(sorted(m)))
    return out


def positive_dependency_graph(gp: GroundProgram) -> dict[int, list[int]]:
    edges: dict[int, list[int]] = {a: [] for a in range(1, gp.num_atoms + 1)}
    for r in gp.rules:
        targets = list(r.pos)
        for c in r.cards:
            targets.extend(c.elements)
        for h in r.head:
            edges[h].extend(targets)
    return edges


def strongly_connected_components(graph: dict[int, list[int]]) -> list[list[int]]:
    """Iterative Tarjan; components come out in reverse topological order."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in graph:
        if root in index:
            continue
        work = [(root, iter(graph[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(graph[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def cyclic_atoms(gp: GroundProgram) -> set[int]:
    """Atoms on some cycle of the positive dependency graph."""
    graph = positive_dependency_graph(gp)
    out: set[int] = set()
    for comp in strongly_connected_components(graph):
        if len(comp) > 1 or comp[0] in graph[comp[0]]:
            out.update(comp)
    return out


def is_tight(gp: GroundProgram) -> bool:
    _require_normal(gp, "tightness")
    return not cyclic_atoms(gp)
