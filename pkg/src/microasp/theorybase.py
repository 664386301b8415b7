"""Reproducible graph families and their encodings as programs or default theories.

Every generated graph carries an identifier that is exactly its generating
call, e.g. ``cycle(8)`` or ``random(10,20,42)``; an optional trailing
``directed`` argument selects the directed variant (``cycle(5,directed)``).

The ``random`` family draws from a 64-bit linear congruential generator,
``x <- (6364136223846793005 * x + 1442695040888963407) mod 2**64``, seeded
with the given seed; each vertex is ``((x >> 33) mod n) + 1``. Pairs that are
self-loops or repeats are redrawn. Edge lists are stored sorted.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Optional, Union

from .default_logic import Default, DefaultTheory, Lit, program_to_defaults
from .grounder import ground
from .model import Program, atom
from .parser import parse_program

PROBLEMS = ("coloring", "hamiltonian", "kernel", "independentset", "vertexcover")
FAMILIES = ("cycle", "path", "complete", "grid", "random")

LCG_MULTIPLIER = 6364136223846793005
LCG_INCREMENT = 1442695040888963407
LCG_MASK = (1 << 64) - 1

BRUTEFORCE_MAX_N = 12


class BenchmarkError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    id: str
    n: int
    directed: bool
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise ValueError(f"edge ({u},{v}) outside 1..{self.n}")
            if not self.directed and u > v:
                raise ValueError("undirected edges are stored with u < v")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add((u, v))

    @property
    def arcs(self) -> list[tuple[int, int]]:
        """Directed arcs; undirected edges contribute both directions."""
        if self.directed:
            return list(self.edges)
        return sorted(self.edges + tuple((v, u) for u, v in self.edges))

    def to_text(self) -> str:
        kind = "directed" if self.directed else "undirected"
        lines = [f"p graph {self.n} {len(self.edges)} {kind}", f"c id {self.id}"]
        lines += [f"e {u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"


def lcg(seed: int):
    x = seed & LCG_MASK
    while True:
        x = (LCG_MULTIPLIER * x + LCG_INCREMENT) & LCG_MASK
        yield x >> 33


def _graph(ident, n, directed, pairs) -> Graph:
    edges = set()
    for u, v in pairs:
        if not directed and u > v:
            u, v = v, u
        edges.add((u, v))
    return Graph(ident, n, directed, tuple(sorted(edges)))


def make_graph(family: str, *params: int, directed: bool = False) -> Graph:
    args = [str(p) for p in params] + (["directed"] if directed else [])
    ident = f"{family}({','.join(args)})"

    def need(count, minimum=1):
        if len(params) != count or any(not isinstance(p, int) for p in params):
            raise BenchmarkError(f"{family} takes {count} integer parameter(s)")
        if any(p < minimum for p in params[:count]):
            raise BenchmarkError(f"{family} parameters must be >= {minimum}")

    if family == "cycle":
        need(1)
        n = params[0]
        if n < (2 if directed else 3):
            raise BenchmarkError("cycle needs n >= 3 (n >= 2 when directed)")
        return _graph(ident, n, directed, [(i, i % n + 1) for i in range(1, n + 1)])
    if family == "path":
        need(1)
        n = params[0]
        return _graph(ident, n, directed, [(i, i + 1) for i in range(1, n)])
    if family == "complete":
        need(1)
        n = params[0]
        pairs = itertools.permutations(range(1, n + 1), 2) if directed else \
            itertools.combinations(range(1, n + 1), 2)
        return _graph(ident, n, directed, pairs)
    if family == "grid":
        need(2)
        r, c = params
        pairs = []
        for i in range(r):
            for j in range(c):
                v = i * c + j + 1
                if j + 1 < c:
                    pairs.append((v, v + 1))
                if i + 1 < r:
                    pairs.append((v, v + c))
        return _graph(ident, r * c, directed, pairs)
    if family == "random":
        if len(params) != 3:
            raise BenchmarkError("random takes (n, m, seed)")
        n, m, seed = params
        if n < 1 or m < 0:
            raise BenchmarkError("random needs n >= 1 and m >= 0")
        limit = n * (n - 1) if directed else n * (n - 1) // 2
        if m > limit:
            raise BenchmarkError(f"random({n},...) admits at most {limit} edges")
        rng = lcg(seed)
        edges: dict = {}
        while len(edges) < m:
            u = next(rng) % n + 1
            v = next(rng) % n + 1
            if u == v:
                continue
            key = (u, v) if directed else (min(u, v), max(u, v))
            edges.setdefault(key)
        return _graph(ident, n, directed, edges)
    raise BenchmarkError(f"unknown graph family {family!r}; choose from {', '.join(FAMILIES)}")


_FAMILY_CALL = re.compile(r"^\s*([a-z]+)\s*\(([^()]*)\)\s*$")


def graph_from_id(text: str) -> Graph:
    """Rebuild a graph from its identifier, e.g. ``grid(2,3)``."""
    m = _FAMILY_CALL.match(text)
    if not m:
        raise BenchmarkError(f"malformed graph identifier {text!r}, expected FAMILY(PARAMS)")
    family, inner = m.groups()
    parts = [p.strip() for p in inner.split(",")] if inner.strip() else []
    directed = bool(parts) and parts[-1] == "directed"
    if directed:
        parts = parts[:-1]
    try:
        params = [int(p) for p in parts]
    except ValueError:
        raise BenchmarkError(f"graph parameters must be integers in {text!r}") from None
    return make_graph(family, *params, directed=directed)


@dataclass(frozen=True)
class BenchmarkSpec:
    problem: str
    graph: Graph
    k: Optional[int] = None
    target: str = "program"

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise BenchmarkError(f"unknown problem {self.problem!r}; choose from {', '.join(PROBLEMS)}")
        if self.target not in ("program", "default"):
            raise BenchmarkError("target must be 'program' or 'default'")
        if self.problem in ("coloring", "independentset", "vertexcover"):
            if self.k is None or self.k < 1:
                raise BenchmarkError(f"{self.problem} needs k >= 1")
        if self.problem == "kernel" and not self.graph.directed:
            raise BenchmarkError("kernel needs a directed graph")
        if self.problem == "hamiltonian" and self.graph.n < 2:
            raise BenchmarkError("hamiltonian needs n >= 2")


# ---------------------------------------------------------------------------
# Encodings
# ---------------------------------------------------------------------------

_RULES = {
    "coloring": """
{ clrd(V,C) } :- vtx(V), col(C).
colored(V) :- clrd(V,C).
:- vtx(V), not colored(V).
:- clrd(V,C1), clrd(V,C2), C1 < C2.
:- edge(U,V), clrd(U,C), clrd(V,C).
""",
    "hamiltonian": """
{ in(U,V) } :- arc(U,V).
:- in(U,V), in(U,W), V < W.
:- in(U,W), in(V,W), U < V.
hasout(U) :- in(U,V).
hasin(V) :- in(U,V).
:- vtx(V), not hasout(V).
:- vtx(V), not hasin(V).
r(V) :- in(1,V).
r(V) :- r(U), in(U,V).
:- vtx(V), not r(V).
""",
    "kernel": """
in(V) :- vtx(V), not out(V).
out(V) :- vtx(V), not in(V).
:- in(U), in(V), arc(U,V).
dom(V) :- arc(V,U), in(U).
:- out(V), not dom(V).
""",
    "independentset": """
{ in(V) } :- vtx(V).
:- edge(U,V), in(U), in(V).
""",
    "vertexcover": """
{ in(V) } :- vtx(V).
:- edge(U,V), not in(U), not in(V).
""",
}


def _facts(spec: BenchmarkSpec) -> list[str]:
    g = spec.graph
    out = [f"vtx({v})." for v in range(1, g.n + 1)]
    if spec.problem == "coloring":
        out += [f"col({c})." for c in range(1, spec.k + 1)]
    if spec.problem in ("hamiltonian", "kernel"):
        out += [f"arc({u},{v})." for u, v in g.arcs]
    else:
        out += [f"edge({u},{v})." for u, v in g.edges]
    return out


def _ground_cardinality(spec: BenchmarkSpec) -> str:
    elements = "; ".join(f"in({v})" for v in range(1, spec.graph.n + 1))
    if spec.problem == "independentset":
        return f"ok :- {spec.k} {{ {elements} }}.\n:- not ok.\n"
    if spec.problem == "vertexcover":
        return f":- {spec.k + 1} {{ {elements} }}.\n"
    return ""


def program_text(spec: BenchmarkSpec) -> str:
    header = f"% {spec.problem} on {spec.graph.id}" + (f" k={spec.k}" if spec.k is not None else "")
    body = _RULES[spec.problem].lstrip("\n") + _ground_cardinality(spec)
    return header + "\n" + "\n".join(_facts(spec)) + "\n" + body


def coloring_default_theory(graph: Graph, k: int, killing: bool = True) -> DefaultTheory:
    """One default per (vertex, color) and, optionally, one killing default per (edge, color)."""
    def clrd(v, c):
        return Lit(str(atom("clrd", v, c)))

    D = []
    for v in range(1, graph.n + 1):
        for c in range(1, k + 1):
            justs = tuple(frozenset([clrd(v, o).complement()]) for o in range(1, k + 1) if o != c)
            D.append(Default(frozenset(), justs, frozenset([clrd(v, c)])))
    if killing:
        f = Lit("f")
        for x, y in graph.edges:
            for c in range(1, k + 1):
                D.append(Default(frozenset([clrd(x, c), clrd(y, c)]), (frozenset([f.complement()]),),
                                 frozenset([f])))
    return DefaultTheory(tuple(D), frozenset())


def encode(spec: BenchmarkSpec) -> Union[Program, DefaultTheory]:
    if spec.target == "program":
        return parse_program(program_text(spec))
    if spec.problem == "coloring":
        return coloring_default_theory(spec.graph, spec.k)
    if spec.problem == "kernel":
        return program_to_defaults(ground(parse_program(program_text(spec))))
    raise BenchmarkError(f"no default-theory encoding for {spec.problem}")


# ---------------------------------------------------------------------------
# Direct combinatorial counts
# ---------------------------------------------------------------------------

def count_solutions_bruteforce(spec: BenchmarkSpec) -> int:
    """Count solutions straight from the graph-theoretic definitions.

    Hamiltonian cycles are counted as directed traversals (arc sets), so an
    undirected cycle on n >= 3 vertices counts twice.
    """
    g = spec.graph
    n = g.n
    if n > BRUTEFORCE_MAX_N:
        raise BenchmarkError(f"brute force is limited to n <= {BRUTEFORCE_MAX_N}")
    vertices = range(1, n + 1)
    if spec.problem == "coloring":
        return sum(1 for colors in itertools.product(range(spec.k), repeat=n)
                   if all(colors[u - 1] != colors[v - 1] for u, v in g.edges))
    if spec.problem == "hamiltonian":
        succ = {v: [] for v in vertices}
        for u, v in g.arcs:
            succ[u].append(v)

        def walk(v, visited):
            if len(visited) == n:
                return 1 if 1 in succ[v] else 0
            return sum(walk(w, visited | {w}) for w in succ[v] if w not in visited)
        return walk(1, frozenset([1]))
    subsets = (frozenset(s) for r in range(n + 1) for s in itertools.combinations(vertices, r))
    if spec.problem == "kernel":
        arcs = g.arcs
        count = 0
        for K in subsets:
            if any(u in K and v in K for u, v in arcs):
                continue
            if all(any(u == v and w in K for u, w in arcs) for v in vertices if v not in K):
                count += 1
        return count
    if spec.problem == "independentset":
        return sum(1 for S in subsets if len(S) >= spec.k
                   and not any(u in S and v in S for u, v in g.edges))
    if spec.problem == "vertexcover":
        return sum(1 for S in subsets if len(S) <= spec.k
                   and all(u in S or v in S for u, v in g.edges))
    raise BenchmarkError(spec.problem)
