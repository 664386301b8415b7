"""Stable-model search.

DPLL-style branching over atoms with chronological backtracking. After each
assignment the propagator updates per-rule counters (unsatisfied and falsified
body literals) and per-atom support counts, then derives forced values:

* a rule with a true body makes its normal head true (a constraint conflicts);
* an atom without any rule whose body could still hold becomes false;
* a true atom with a single remaining supporting rule forces that body true;
* a false head (or a constraint) with one open body literal forces it false;
* cardinality literals force their elements once a bound becomes critical;
* atoms on positive cycles that cannot be derived from outside the cycle
  (an unfounded set) become false.

Every total assignment is re-checked against the reduct definition before it
is reported.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .model import FALSE, TRUE, UNKNOWN, Assignment, GroundProgram
from .oracle import ModelSet, cyclic_atoms, is_stable

log = logging.getLogger(__name__)

HEURISTICS = ("occurrence", "first-unassigned")


class IncompleteSearch(Exception):
    """Raised when the conflict limit is hit; carries the models found so far."""

    def __init__(self, models: ModelSet, conflicts: int):
        self.models = models
        self.conflicts = conflicts
        super().__init__(f"conflict limit reached after {conflicts} conflicts, "
                         f"{len(models)} model(s) found")


@dataclass
class SearchConfig:
    max_models: int = 0
    heuristic: str = "occurrence"
    seed: int = 0
    conflict_limit: Optional[int] = None
    lookahead: bool = False
    debug: bool = False

    def __post_init__(self):
        if self.max_models < 0:
            raise ValueError("max_models must be >= 0")
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"unknown heuristic {self.heuristic!r}; choose from {', '.join(HEURISTICS)}")


@dataclass
class Conflict:
    atom: Optional[int] = None
    reason: str = ""


@dataclass
class SearchStats:
    decisions: int = 0
    conflicts: int = 0
    models: int = 0
    guard_rejections: int = 0
    unfounded: int = 0


class WatchIndex:
    """Occurrence lists and the counters kept in sync with the assignment."""

    def __init__(self, gp: GroundProgram):
        n = gp.num_atoms
        self.n = n
        rules = gp.rules
        self.rules = rules
        self.pos_occ: list[list[int]] = [[] for _ in range(n + 1)]
        self.neg_occ: list[list[int]] = [[] for _ in range(n + 1)]
        self.head_occ: list[list[int]] = [[] for _ in range(n + 1)]     # normal heads
        self.support_occ: list[list[int]] = [[] for _ in range(n + 1)]  # normal + choice heads
        self.card_occ: list[list[int]] = [[] for _ in range(n + 1)]
        self.card_rule: list[int] = []
        self.card_lower: list[int] = []
        self.card_upper: list[int] = []
        self.card_elems: list[tuple[int, ...]] = []
        self.rule_cards: list[list[int]] = []
        for ri, r in enumerate(rules):
            for a in r.pos:
                self.pos_occ[a].append(ri)
            for a in r.neg:
                self.neg_occ[a].append(ri)
            if r.is_normal:
                self.head_occ[r.head[0]].append(ri)
            if not r.is_constraint:
                for h in r.head:
                    self.support_occ[h].append(ri)
            cs = []
            for c in r.cards:
                ci = len(self.card_rule)
                self.card_rule.append(ri)
                self.card_lower.append(c.lower)
                self.card_upper.append(len(c.elements) if c.upper is None else c.upper)
                self.card_elems.append(c.elements)
                for e in c.elements:
                    self.card_occ[e].append(ci)
                cs.append(ci)
            self.rule_cards.append(cs)
        self.rule_atoms = [tuple(dict.fromkeys(r.atoms())) for r in rules]
        self.reset()

    def reset(self):
        nc = len(self.card_rule)
        self.ctrue = [0] * nc
        self.cfalse = [0] * nc
        self.cstat = [self.card_status(c, 0, 0) for c in range(nc)]
        self.undet = []
        self.nfalse = []
        for ri, r in enumerate(self.rules):
            u = len(r.pos) + len(r.neg)
            f = 0
            for ci in self.rule_cards[ri]:
                s = self.cstat[ci]
                if s == UNKNOWN:
                    u += 1
                elif s == FALSE:
                    f += 1
            self.undet.append(u)
            self.nfalse.append(f)
        self.support = [0] * (self.n + 1)
        for a in range(1, self.n + 1):
            self.support[a] = sum(1 for ri in self.support_occ[a] if self.nfalse[ri] == 0)

    def card_status(self, ci: int, t: int, f: int) -> int:
        lower, upper = self.card_lower[ci], self.card_upper[ci]
        size = len(self.card_elems[ci])
        if t > upper or size - f < lower:
            return FALSE
        if t >= lower and size - f <= upper:
            return TRUE
        return UNKNOWN

    def recount(self, value) -> dict:
        """Counters recomputed from scratch against ``value``."""
        ctrue = [sum(1 for e in els if value[e] == TRUE) for els in self.card_elems]
        cfalse = [sum(1 for e in els if value[e] == FALSE) for els in self.card_elems]
        cstat = [self.card_status(c, ctrue[c], cfalse[c]) for c in range(len(ctrue))]
        undet, nfalse = [], []
        for ri, r in enumerate(self.rules):
            u = sum(1 for a in r.pos if value[a] != TRUE) + sum(1 for a in r.neg if value[a] != FALSE)
            f = sum(1 for a in r.pos if value[a] == FALSE) + sum(1 for a in r.neg if value[a] == TRUE)
            for ci in self.rule_cards[ri]:
                u += cstat[ci] != TRUE
                f += cstat[ci] == FALSE
            undet.append(u)
            nfalse.append(f)
        support = [0] * (self.n + 1)
        for a in range(1, self.n + 1):
            support[a] = sum(1 for ri in self.support_occ[a] if nfalse[ri] == 0)
        return dict(ctrue=ctrue, cfalse=cfalse, cstat=cstat, undet=undet, nfalse=nfalse,
                    support=support)

    def consistent_with(self, value) -> bool:
        ref = self.recount(value)
        return all(getattr(self, k) == v for k, v in ref.items())


class Solver:
    def __init__(self, gp: GroundProgram, config: Optional[SearchConfig] = None):
        self.gp = gp
        self.config = config or SearchConfig()
        self.watch = WatchIndex(gp)
        self.assignment = Assignment(gp.num_atoms)
        self.qhead = 0
        self.level = 0
        self.stats = SearchStats()
        self._setup_unfounded()
        rank = list(range(gp.num_atoms + 1))
        if self.config.seed:
            shuffled = rank[1:]
            random.Random(self.config.seed).shuffle(shuffled)
            rank = [0] + [0] * gp.num_atoms
            for pos, a in enumerate(shuffled, 1):
                rank[a] = pos
        self.rank = rank
        self._initial_done = False

    # -- unfounded-set bookkeeping -------------------------------------------

    def _setup_unfounded(self):
        gp, w = self.gp, self.watch
        cyc = cyclic_atoms(gp)
        self.cyclic = sorted(cyc)
        self.cyc_rules = [ri for ri, r in enumerate(gp.rules)
                          if not r.is_constraint and any(h in cyc for h in r.head)]
        self.cyc_pos: dict[int, list[int]] = {}
        self.cyc_card: dict[int, list[int]] = {}
        self.cyc_need = {}
        for ri in self.cyc_rules:
            r = gp.rules[ri]
            need = [a for a in r.pos if a in cyc]
            self.cyc_need[ri] = len(need)
            for a in need:
                self.cyc_pos.setdefault(a, []).append(ri)
            for ci in w.rule_cards[ri]:
                for e in w.card_elems[ci]:
                    if e in cyc:
                        self.cyc_card.setdefault(e, []).append(ci)
        self.is_cyclic = cyc

    def unfounded_atoms(self) -> list[int]:
        """Cyclic atoms not derivable when every open literal is read optimistically."""
        if not self.cyclic:
            return []
        w, value, rules = self.watch, self.assignment.value, self.gp.rules
        cyc = self.is_cyclic
        derived = set()
        need = {}
        cards_waiting = {}
        avail = {}
        queue = []

        def fire(ri):
            for h in rules[ri].head:
                if h in cyc and h not in derived and value[h] != FALSE:
                    derived.add(h)
                    queue.append(h)

        for ri in self.cyc_rules:
            if w.nfalse[ri]:
                continue
            need[ri] = self.cyc_need[ri]
            waiting = 0
            for ci in w.rule_cards[ri]:
                n = sum(1 for e in w.card_elems[ci] if e not in cyc and value[e] != FALSE)
                avail[ci] = n
                if n < w.card_lower[ci]:
                    waiting += 1
            cards_waiting[ri] = waiting
            if need[ri] == 0 and waiting == 0:
                fire(ri)
        while queue:
            a = queue.pop()
            for ri in self.cyc_pos.get(a, ()):
                if ri in need:
                    need[ri] -= 1
                    if need[ri] == 0 and cards_waiting[ri] == 0:
                        fire(ri)
            for ci in self.cyc_card.get(a, ()):
                ri = w.card_rule[ci]
                if ri in need:
                    avail[ci] += 1
                    if avail[ci] == w.card_lower[ci]:
                        cards_waiting[ri] -= 1
                        if need[ri] == 0 and cards_waiting[ri] == 0:
                            fire(ri)
        return [a for a in self.cyclic if value[a] != FALSE and a not in derived]

    # -- assignment ----------------------------------------------------------

    def _assign(self, a: int, v: int) -> bool:
        return self.assignment.assign(a, v, self.level)

    def _process(self, a: int, v: int, rules_to_check: list, atoms_to_check: list):
        """Counter bookkeeping for one trail entry; never aborts midway."""
        w = self.watch
        undet, nfalse = w.undet, w.nfalse
        falsified = []
        if v == TRUE:
            for ri in w.pos_occ[a]:
                undet[ri] -= 1
                rules_to_check.append(ri)
            for ri in w.neg_occ[a]:
                nfalse[ri] += 1
                if nfalse[ri] == 1:
                    falsified.append(ri)
        else:
            for ri in w.pos_occ[a]:
                nfalse[ri] += 1
                if nfalse[ri] == 1:
                    falsified.append(ri)
            for ri in w.neg_occ[a]:
                undet[ri] -= 1
                rules_to_check.append(ri)
        for ci in w.card_occ[a]:
            if v == TRUE:
                w.ctrue[ci] += 1
            else:
                w.cfalse[ci] += 1
            ri = w.card_rule[ci]
            old = w.cstat[ci]
            new = w.card_status(ci, w.ctrue[ci], w.cfalse[ci])
            if new != old:
                w.cstat[ci] = new
                if new == TRUE:
                    undet[ri] -= 1
                else:
                    nfalse[ri] += 1
                    if nfalse[ri] == 1:
                        falsified.append(ri)
            rules_to_check.append(ri)
            atoms_to_check.extend(self.gp.rules[ri].head)
        for ri in falsified:
            for h in self.gp.rules[ri].head:
                w.support[h] -= 1
                atoms_to_check.append(h)
        rules_to_check.extend(w.head_occ[a])
        atoms_to_check.append(a)

    def _unprocess(self, a: int, v: int):
        w = self.watch
        undet, nfalse = w.undet, w.nfalse
        restored = []
        if v == TRUE:
            for ri in w.pos_occ[a]:
                undet[ri] += 1
            for ri in w.neg_occ[a]:
                nfalse[ri] -= 1
                if nfalse[ri] == 0:
                    restored.append(ri)
        else:
            for ri in w.pos_occ[a]:
                nfalse[ri] -= 1
                if nfalse[ri] == 0:
                    restored.append(ri)
            for ri in w.neg_occ[a]:
                undet[ri] += 1
        for ci in w.card_occ[a]:
            if v == TRUE:
                w.ctrue[ci] -= 1
            else:
                w.cfalse[ci] -= 1
            ri = w.card_rule[ci]
            old = w.cstat[ci]
            new = w.card_status(ci, w.ctrue[ci], w.cfalse[ci])
            if new != old:
                w.cstat[ci] = new
                if old == TRUE:
                    undet[ri] += 1
                else:
                    nfalse[ri] -= 1
                    if nfalse[ri] == 0:
                        restored.append(ri)
        for ri in restored:
            for h in self.gp.rules[ri].head:
                w.support[h] += 1

    def _undo_to(self, pos: int):
        trail = self.assignment.trail
        for i in range(len(trail) - 1, pos - 1, -1):
            if i < self.qhead:
                a, v, _ = trail[i]
                self._unprocess(a, v)
        self.assignment.undo_to(pos)
        self.qhead = min(self.qhead, pos)

    # -- local checks --------------------------------------------------------

    def _force_card(self, ci: int, want: int) -> bool:
        w, value = self.watch, self.assignment.value
        els = w.card_elems[ci]
        t = sum(1 for e in els if value[e] == TRUE)
        u = sum(1 for e in els if value[e] == UNKNOWN)
        lower, upper = w.card_lower[ci], w.card_upper[ci]
        fill = None
        if want == TRUE:
            if t + u < lower or t > upper:
                return False
            if t + u == lower and u:
                fill = TRUE
            elif t == upper and u:
                fill = FALSE
        else:
            if t >= lower and t + u <= upper:
                return False
            if t + u <= upper:
                if t == lower - 1 and u:
                    fill = FALSE
            elif t >= lower:
                if t + u == upper + 1 and u:
                    fill = TRUE
        if fill is not None:
            for e in els:
                if value[e] == UNKNOWN and not self._assign(e, fill):
                    return False
        return True

    def _force_literal_false(self, ri: int) -> bool:
        """Backward step for a rule whose body must not hold."""
        w, value, r = self.watch, self.assignment.value, self.gp.rules[ri]
        open_lit = None
        count = 0
        for a in r.pos:
            v = value[a]
            if v == FALSE:
                return True
            if v == UNKNOWN:
                count += 1
                open_lit = ("pos", a)
        for a in r.neg:
            v = value[a]
            if v == TRUE:
                return True
            if v == UNKNOWN:
                count += 1
                open_lit = ("neg", a)
        for ci in w.rule_cards[ri]:
            s = self._card_now(ci)
            if s == FALSE:
                return True
            if s == UNKNOWN:
                count += 1
                open_lit = ("card", ci)
        if count == 0:
            return False
        if count > 1:
            return True
        kind, x = open_lit
        if kind == "pos":
            return self._assign(x, FALSE)
        if kind == "neg":
            return self._assign(x, TRUE)
        return self._force_card(x, FALSE)

    def _card_now(self, ci: int) -> int:
        w, value = self.watch, self.assignment.value
        els = w.card_elems[ci]
        t = sum(1 for e in els if value[e] == TRUE)
        f = sum(1 for e in els if value[e] == FALSE)
        return w.card_status(ci, t, f)

    def _check_rule(self, ri: int) -> bool:
        w = self.watch
        if w.nfalse[ri]:
            return True
        r = self.gp.rules[ri]
        if w.undet[ri] == 0:
            if r.is_normal:
                return self._assign(r.head[0], TRUE)
            if r.is_constraint:
                return False
            return True
        if w.undet[ri] == 1:
            if r.is_constraint or (r.is_normal and self.assignment.value[r.head[0]] == FALSE):
                return self._force_literal_false(ri)
        return True

    def _check_atom(self, a: int) -> bool:
        w = self.watch
        v = self.assignment.value[a]
        s = w.support[a]
        if s == 0:
            return v != TRUE and self._assign(a, FALSE)
        if s == 1 and v == TRUE:
            for ri in w.support_occ[a]:
                if w.nfalse[ri] == 0:
                    return self._force_body_true(ri)
        return True

    def _force_body_true(self, ri: int) -> bool:
        r = self.gp.rules[ri]
        for a in r.pos:
            if not self._assign(a, TRUE):
                return False
        for a in r.neg:
            if not self._assign(a, FALSE):
                return False
        for ci in self.watch.rule_cards[ri]:
            if not self._force_card(ci, TRUE):
                return False
        return True

    # -- propagation ---------------------------------------------------------

    def _initial(self) -> bool:
        self._initial_done = True
        for ri in range(len(self.gp.rules)):
            if not self._check_rule(ri):
                return False
        for a in range(1, self.gp.num_atoms + 1):
            if not self._check_atom(a):
                return False
        return True

    def propagate(self) -> bool:
        """Run to fixpoint; False on conflict."""
        if not self._initial_done and not self._initial():
            return False
        trail = self.assignment.trail
        while True:
            while self.qhead < len(trail):
                a, v, _ = trail[self.qhead]
                rules_to_check, atoms_to_check = [], []
                self._process(a, v, rules_to_check, atoms_to_check)
                self.qhead += 1
                for ri in rules_to_check:
                    if not self._check_rule(ri):
                        return False
                for b in atoms_to_check:
                    if not self._check_atom(b):
                        return False
            unfounded = self.unfounded_atoms()
            if not unfounded:
                break
            self.stats.unfounded += len(unfounded)
            for a in unfounded:
                if not self._assign(a, FALSE):
                    return False
        if self.config.debug and not self.watch.consistent_with(self.assignment.value):
            raise AssertionError("watch counters diverged from the assignment")
        return True

    def _lookahead(self) -> bool:
        """Failed-literal probing: an atom whose value leads to conflict gets the other."""
        changed = True
        while changed:
            changed = False
            for a in range(1, self.gp.num_atoms + 1):
                if self.assignment.value[a] != UNKNOWN:
                    continue
                for v in (TRUE, FALSE):
                    mark = len(self.assignment.trail)
                    self.level += 1
                    self._assign(a, v)
                    ok = self.propagate()
                    self._undo_to(mark)
                    self.level -= 1
                    if not ok:
                        if not self._assign(a, -v) or not self.propagate():
                            return False
                        changed = True
                        break
        return True

    # -- search --------------------------------------------------------------

    def _choose(self) -> int:
        value = self.assignment.value
        n = self.gp.num_atoms
        rank = self.rank
        if self.config.heuristic == "occurrence":
            w = self.watch
            counts: dict[int, int] = {}
            for ri, atoms in enumerate(w.rule_atoms):
                if w.nfalse[ri]:
                    continue
                for a in atoms:
                    if value[a] == UNKNOWN:
                        counts[a] = counts.get(a, 0) + 1
            if counts:
                return min(counts, key=lambda a: (-counts[a], rank[a]))
        best = 0
        for a in range(1, n + 1):
            if value[a] == UNKNOWN and (best == 0 or rank[a] < rank[best]):
                best = a
        return best

    def _model_ok(self) -> bool:
        model = self.assignment.true_atoms()
        if is_stable(self.gp, model):
            return True
        self.stats.guard_rejections += 1
        log.warning("final check rejected a propagated total assignment: %s",
                    " ".join(self.gp.names(model)))
        return False

    def solve(self, on_model: Optional[Callable[[tuple], None]] = None) -> ModelSet:
        cfg = self.config
        models = ModelSet()
        # each decision: (trail position before it, atom, value, flipped)
        decisions: list[tuple[int, int, int, bool]] = []

        def backtrack() -> bool:
            while decisions:
                mark, a, v, flipped = decisions.pop()
                self._undo_to(mark)
                self.level = len(decisions)
                if not flipped:
                    self.level += 1
                    decisions.append((mark, a, -v, True))
                    self._assign(a, -v)
                    return True
            return False

        ok = self.propagate() and (not cfg.lookahead or self._lookahead())
        while True:
            if not ok:
                self.stats.conflicts += 1
                if cfg.conflict_limit is not None and self.stats.conflicts > cfg.conflict_limit:
                    raise IncompleteSearch(models, self.stats.conflicts)
                if not backtrack():
                    return models
                ok = self.propagate() and (not cfg.lookahead or self._lookahead())
                continue
            a = self._choose()
            if a == 0:
                if self._model_ok():
                    m = tuple(sorted(self.assignment.true_atoms()))
                    models.models.append(m)
                    self.stats.models += 1
                    if on_model is not None:
                        on_model(m)
                    if cfg.max_models and len(models) >= cfg.max_models:
                        models.truncated = True
                        return models
                if not backtrack():
                    return models
                ok = self.propagate() and (not cfg.lookahead or self._lookahead())
                continue
            self.stats.decisions += 1
            decisions.append((len(self.assignment.trail), a, TRUE, False))
            self.level = len(decisions)
            self._assign(a, TRUE)
            ok = self.propagate() and (not cfg.lookahead or self._lookahead())


def solve(gp: GroundProgram, config: Optional[SearchConfig] = None) -> ModelSet:
    return Solver(gp, config).solve()


def propagate(gp: GroundProgram, assignment: Assignment):
    """Propagate a partial assignment; returns the extended Assignment or a Conflict."""
    s = Solver(gp)
    for a, v, _ in assignment.trail:
        if not s._assign(a, v):
            return Conflict(a, "inconsistent input")
    if not s.propagate():
        return Conflict(reason="propagation conflict")
    return s.assignment


def check_model(gp: GroundProgram, atoms) -> bool:
    return is_stable(gp, atoms)
