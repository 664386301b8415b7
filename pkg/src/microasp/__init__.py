"""microasp: a small grounder/solver pipeline for answer-set programs."""

from .default_logic import Default, DefaultTheory, Lit, extensions, program_to_defaults, query
from .grounder import ground, ground_stats
from .model import (
    Assignment, Atom, GroundProgram, Program, Rule, ValidationError, herbrand_instantiation,
    validate,
)
from .oracle import clark_completion, enumerate_bruteforce, is_stable, is_tight, least_model, reduct
from .parser import ParseError, parse_default_theory, parse_graph, parse_program
from .solver import SearchConfig, check_model, propagate, solve
from .theorybase import BenchmarkSpec, Graph, count_solutions_bruteforce, encode, make_graph

__version__ = "0.1.0"
