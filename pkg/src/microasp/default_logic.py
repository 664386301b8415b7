"""Propositional default logic over conjunctions of literals.

Extensions are found by branching on the status of the literals that
justifications depend on (is the complement of a justification literal in
the extension or not), rather than on subsets of defaults. Each branch keeps
a lower closure (defaults certainly applicable) and an upper closure
(defaults possibly applicable); their disagreement with the guessed statuses
prunes the tree. Literals are branched in the order of a relaxed
stratification of the defaults, so lower strata are fixed first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .model import GroundProgram, UnsupportedFeature
from .oracle import strongly_connected_components


@dataclass(frozen=True, order=True)
class Lit:
    atom: str
    positive: bool = True

    def complement(self) -> "Lit":
        return Lit(self.atom, not self.positive)

    def __str__(self):
        return self.atom if self.positive else "-" + self.atom


def lit(text: str) -> Lit:
    return Lit(text[1:], False) if text.startswith("-") else Lit(text)


class _Inconsistent:
    """The set of all literals (the inconsistent extension)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __contains__(self, item):
        return True

    def __repr__(self):
        return "INCONSISTENT"

    def __iter__(self):
        return iter(())


INCONSISTENT = _Inconsistent()

LitSet = Union[frozenset, _Inconsistent]


@dataclass(frozen=True)
class Default:
    prerequisite: frozenset = frozenset()
    justifications: tuple = ()
    consequent: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "prerequisite", frozenset(self.prerequisite))
        object.__setattr__(self, "justifications", tuple(frozenset(j) for j in self.justifications))
        object.__setattr__(self, "consequent", frozenset(self.consequent))
        if not self.consequent:
            raise ValueError("a default needs a nonempty consequent")

    def __str__(self):
        def conj(s, empty="true"):
            return " & ".join(str(l) for l in sorted(s)) if s else empty
        justs = ", ".join(conj(j) for j in self.justifications)
        just_part = f" {justs} " if justs else " "
        return f"d: {conj(self.prerequisite)} :{just_part}/ {conj(self.consequent)}."


@dataclass(frozen=True)
class DefaultTheory:
    D: tuple = ()
    W: frozenset = frozenset()

    def __str__(self):
        lines = []
        if self.W:
            lines.append("fact: " + " & ".join(str(l) for l in sorted(self.W)) + ".")
        lines += [str(d) for d in self.D]
        return "".join(line + "\n" for line in lines)


@dataclass
class Extension:
    literals: LitSet
    generating: frozenset  # indices into D

    @property
    def consistent(self) -> bool:
        return self.literals is not INCONSISTENT

    def sorted_literals(self) -> list[Lit]:
        if not self.consistent:
            return []
        return sorted(self.literals, key=lambda l: (l.atom, not l.positive))


@dataclass
class ExtensionSet:
    extensions: list[Extension] = field(default_factory=list)

    def __len__(self):
        return len(self.extensions)

    def __iter__(self):
        return iter(self.extensions)

    def literal_sets(self) -> list:
        return [e.literals for e in self.extensions]


def _derive(D: Sequence[Default], W: Iterable[Lit], active: Iterable[int]) -> set:
    """Least set containing W closed under the active defaults (no consistency check)."""
    out = set(W)
    pending = list(active)
    changed = True
    while changed:
        changed = False
        rest = []
        for i in pending:
            d = D[i]
            if d.prerequisite <= out:
                if not d.consequent <= out:
                    out |= d.consequent
                    changed = True
            else:
                rest.append(i)
        pending = rest
    return out


def _consistent(s) -> bool:
    return not any(l.complement() in s for l in s)


def closure(D: Sequence[Default], W: Iterable[Lit], active: Iterable[int]) -> LitSet:
    out = _derive(D, W, active)
    return frozenset(out) if _consistent(out) else INCONSISTENT


def _justified(d: Default, E: LitSet) -> bool:
    if E is INCONSISTENT:
        return not d.justifications
    return all(_consistent(j) and not any(l.complement() in E for l in j)
               for j in d.justifications)


def applicable(D: Sequence[Default], E: LitSet) -> list[int]:
    """Defaults whose justifications are all consistent with E."""
    return [i for i, d in enumerate(D) if _justified(d, E)]


def is_extension(T: DefaultTheory, E: LitSet) -> bool:
    """Fixpoint test E == closure(D, W, A(E))."""
    return closure(T.D, T.W, applicable(T.D, E)) == E


def stratification_order(D: Sequence[Default]) -> list[int]:
    """Defaults ordered by a relaxed stratification.

    d1 precedes d2 when a consequent literal of d1 (or its complement) occurs
    in d2's prerequisite or justifications; cycles are collapsed into one
    stratum. Strata come out in dependency order.
    """
    by_lit: dict[str, list[int]] = {}
    for i, d in enumerate(D):
        for l in d.prerequisite:
            by_lit.setdefault(l.atom, []).append(i)
        for j in d.justifications:
            for l in j:
                by_lit.setdefault(l.atom, []).append(i)
    # edge d2 -> d1 when d2 depends on d1; Tarjan yields dependencies first
    deps: dict[int, list[int]] = {i: [] for i in range(len(D))}
    for i, d in enumerate(D):
        for l in d.consequent:
            for k in by_lit.get(l.atom, ()):
                deps[k].append(i)
    order = []
    for comp in strongly_connected_components(deps):
        order.extend(sorted(comp))
    return order


class _Search:
    def __init__(self, T: DefaultTheory):
        self.T = T
        D = T.D
        # literals whose membership decides justification consistency
        relevant: dict[Lit, None] = {}
        for i in stratification_order(D):
            for j in D[i].justifications:
                for l in sorted(j):
                    relevant.setdefault(l.complement())
        self.relevant = list(relevant)
        self.blockers = [[l.complement() for j in d.justifications for l in j] for d in D]
        self.self_blocked = [not all(_consistent(j) for j in d.justifications) for d in D]
        self.results: list[frozenset] = []

    def _bounds(self, status: dict):
        """Lower and upper closures under the current (partial) guesses."""
        D, W = self.T.D, self.T.W
        sure, maybe = [], []
        for i in range(len(D)):
            if self.self_blocked[i]:
                continue
            bs = self.blockers[i]
            if any(status.get(b) is True for b in bs):
                continue
            maybe.append(i)
            if all(status.get(b) is False for b in bs):
                sure.append(i)
        return _derive(D, W, sure), _derive(D, W, maybe)

    def _propagate(self, status: dict) -> bool:
        while True:
            low, high = self._bounds(status)
            if not _consistent(low):
                return False
            changed = False
            for l in self.relevant:
                s = status.get(l)
                if l in low:
                    if s is False:
                        return False
                    if s is None:
                        status[l] = True
                        changed = True
                elif l not in high:
                    if s is True:
                        return False
                    if s is None:
                        status[l] = False
                        changed = True
            if not changed:
                return True

    def run(self, status: Optional[dict] = None):
        status = dict(status or {})
        if not self._propagate(status):
            return
        for l in self.relevant:
            if l not in status:
                for choice in (True, False):
                    branch = dict(status)
                    branch[l] = choice
                    self.run(branch)
                return
        E = closure(self.T.D, self.T.W, [i for i in range(len(self.T.D))
                                          if not self.self_blocked[i]
                                          and not any(status[b] for b in self.blockers[i])])
        if E is INCONSISTENT:
            return
        if all((l in E) == status[l] for l in self.relevant) and is_extension(self.T, E):
            self.results.append(E)


def _ext_key(e: Extension):
    return tuple(str(l) for l in e.sorted_literals())


def extensions(T: DefaultTheory) -> ExtensionSet:
    D, W = T.D, T.W
    # an inconsistent extension exists iff the justification-free defaults already clash
    base = closure(D, W, [i for i, d in enumerate(D) if not d.justifications])
    if base is INCONSISTENT:
        return ExtensionSet([Extension(INCONSISTENT, frozenset(applicable(D, INCONSISTENT)))])
    search = _Search(T)
    search.run()
    out = []
    seen = set()
    for E in search.results:
        if E in seen:
            continue
        seen.add(E)
        gen = frozenset(i for i in applicable(D, E) if D[i].prerequisite <= E)
        out.append(Extension(E, gen))
    out.sort(key=_ext_key)
    return ExtensionSet(out)


def query(T: DefaultTheory, l: Lit, mode: str) -> bool:
    exts = extensions(T)
    if mode == "brave":
        return any(l in e.literals for e in exts)
    if mode == "skeptical":
        return all(l in e.literals for e in exts)
    raise ValueError(f"unknown query mode {mode!r}")


def _fresh(base: str, taken: set) -> str:
    name = base
    while name in taken:
        name += "_"
    taken.add(name)
    return name


def program_to_defaults(gp: GroundProgram) -> DefaultTheory:
    """Rules become defaults; each constraint becomes a killing default on a fresh literal."""
    if not gp.is_normal:
        raise UnsupportedFeature("only normal rules and constraints translate to defaults")
    taken = {gp.name(a) for a in range(1, gp.num_atoms + 1)}
    D = []
    kills = 0
    for r in gp.rules:
        pre = frozenset(Lit(gp.name(a)) for a in r.pos)
        justs = tuple(frozenset([Lit(gp.name(a), False)]) for a in r.neg)
        if r.is_constraint:
            kills += 1
            f = _fresh(f"kill{kills}", taken)
            D.append(Default(pre, (frozenset([Lit(f, False)]),) + justs, frozenset([Lit(f)])))
        else:
            D.append(Default(pre, justs, frozenset([Lit(gp.name(r.head[0]))])))
    return DefaultTheory(tuple(D), frozenset())
