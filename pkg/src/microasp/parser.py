"""Parsers for rule programs, graph files and default-theory files.

All three stop at the first error and report it with a 1-based source span.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Optional

from .model import (
    Atom, CardinalityLiteral, Comparison, HeadKind, Literal, Program, Rule, Term,
    const, integer, var,
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 1:
            raise ValueError("spans are 1-based and non-empty")

    def __str__(self):
        return f"{self.line}:{self.column}"


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        self.message = message
        self.span = span
        super().__init__(f"{span}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, VAR, INT, NOT, PUNCT, EOF
    text: str
    span: SourceSpan


def _end_span(text: str) -> SourceSpan:
    # errors at end of input point at the last character
    lines = text.split("\n")
    while len(lines) > 1 and not lines[-1].strip():
        lines.pop()
    last = lines[-1].rstrip("\r") if lines else ""
    return SourceSpan(len(lines) or 1, max(len(last), 1))


_PROGRAM_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<int>-?[0-9]+)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>:-|!=|<=|[.,;{}()=<])
""", re.VERBOSE)


def _tokenize(text: str, pattern=_PROGRAM_TOKEN) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = pattern.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", SourceSpan(line, col))
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            if kind == "word":
                if lexeme == "not":
                    kind = "NOT"
                elif lexeme[0].isupper():
                    kind = "VAR"
                elif lexeme[0] == "_":
                    raise ParseError("identifiers must start with a letter",
                                     SourceSpan(line, col, len(lexeme)))
                else:
                    kind = "IDENT"
            else:
                kind = {"int": "INT", "punct": "PUNCT"}.get(kind, kind.upper())
            tokens.append(Token(kind, lexeme, SourceSpan(line, col, len(lexeme))))
        for i, ch in enumerate(lexeme):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    tokens.append(Token("EOF", "", _end_span(text)))
    return tokens


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind == "PUNCT" and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"'{text}'")
        return self.advance()

    def fail(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        raise ParseError(f"expected {expected}, found {found}", t.span)


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------

def parse_program(text: str) -> Program:
    cur = _Cursor(_tokenize(text))
    rules: list[Rule] = []
    facts: list[Atom] = []
    while cur.tok.kind != "EOF":
        rule = _statement(cur)
        if (rule.kind is HeadKind.NORMAL and not rule.body and not rule.cards
                and not rule.builtins and rule.head[0].is_ground()):
            facts.append(rule.head[0])
        else:
            rules.append(rule)
    return Program(tuple(rules), tuple(facts))


def _statement(cur: _Cursor) -> Rule:
    if cur.at(":-"):
        cur.advance()
        body = _body(cur)
        return Rule(HeadKind.CONSTRAINT, (), *body)
    if cur.at("{"):
        head = _braced_atoms(cur)
        kind = HeadKind.CHOICE
    elif cur.tok.kind == "IDENT":
        head = (_atom(cur),)
        kind = HeadKind.NORMAL
    else:
        cur.fail("a rule head, '{' or ':-'")
    if cur.at("."):
        cur.advance()
        return Rule(kind, head)
    cur.expect(":-")
    return Rule(kind, head, *_body(cur))


def _body(cur: _Cursor):
    lits, cards, builtins = [], [], []
    if cur.at("."):
        cur.advance()
        return tuple(lits), tuple(cards), tuple(builtins)
    while True:
        _body_element(cur, lits, cards, builtins)
        if cur.at(","):
            cur.advance()
            continue
        cur.expect(".")
        return tuple(lits), tuple(cards), tuple(builtins)


def _body_element(cur, lits, cards, builtins):
    t = cur.tok
    if t.kind == "NOT":
        cur.advance()
        if cur.tok.kind != "IDENT":
            cur.fail("an atom after 'not'")
        lits.append(Literal(_atom(cur), negated=True))
    elif cur.at("{"):
        cards.append(_card(cur, 0))
    elif t.kind == "INT" and cur.peek().kind == "PUNCT" and cur.peek().text == "{":
        cur.advance()
        lower = int(t.text)
        if lower < 0:
            raise ParseError("cardinality bounds must be nonnegative", t.span)
        cards.append(_card(cur, lower))
    elif t.kind == "IDENT" and not _is_comparison_op(cur.peek()):
        lits.append(Literal(_atom(cur)))
    elif t.kind in ("IDENT", "VAR", "INT"):
        lhs = _term(cur)
        if not _is_comparison_op(cur.tok):
            cur.fail("a comparison operator")
        op = cur.advance().text
        builtins.append(Comparison(lhs, op, _term(cur)))
    else:
        cur.fail("a body literal")


def _is_comparison_op(t: Token) -> bool:
    return t.kind == "PUNCT" and t.text in ("=", "!=", "<", "<=")


def _card(cur: _Cursor, lower: int) -> CardinalityLiteral:
    elements = _braced_atoms(cur)
    upper: Optional[int] = None
    if cur.tok.kind == "INT":
        t = cur.advance()
        upper = int(t.text)
        if upper < 0:
            raise ParseError("cardinality bounds must be nonnegative", t.span)
    return CardinalityLiteral(lower, upper, elements)


def _braced_atoms(cur: _Cursor) -> tuple[Atom, ...]:
    cur.expect("{")
    out = []
    while True:
        if cur.tok.kind == "NOT":
            raise ParseError("'not' is not allowed inside braces", cur.tok.span)
        if cur.tok.kind != "IDENT":
            cur.fail("an atom inside braces")
        out.append(_atom(cur))
        if cur.at(";"):
            cur.advance()
            continue
        cur.expect("}")
        return tuple(out)


def _atom(cur: _Cursor) -> Atom:
    name = cur.advance().text
    args: list[Term] = []
    if cur.at("("):
        cur.advance()
        while True:
            args.append(_term(cur))
            if cur.at(","):
                cur.advance()
                continue
            cur.expect(")")
            break
    return Atom(name, tuple(args))


def _term(cur: _Cursor) -> Term:
    t = cur.tok
    if t.kind == "INT":
        cur.advance()
        return integer(int(t.text))
    if t.kind == "VAR":
        cur.advance()
        return var(t.text)
    if t.kind == "IDENT":
        cur.advance()
        return const(t.text)
    cur.fail("a term")


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------

def graph_hash_id(n: int, directed: bool, edges) -> str:
    canon = f"{n} {'d' if directed else 'u'} " + " ".join(f"{u}-{v}" for u, v in sorted(edges))
    return "sha256:" + hashlib.sha256(canon.encode()).hexdigest()[:16]


def parse_graph(text: str):
    from .theorybase import Graph

    header = None
    ident = None
    edges: list[tuple[int, int]] = []
    seen: set = set()
    last_line = 0
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        last_line = lineno
        fields = line.split()
        col = line.index(fields[0]) + 1
        span = SourceSpan(lineno, col, len(line.strip()))
        tag = fields[0]
        if tag == "c":
            if len(fields) >= 2 and fields[1] == "id":
                if len(fields) != 3:
                    raise ParseError("identifier line must be 'c id <identifier>'", span)
                if ident is not None:
                    raise ParseError("duplicate identifier line", span)
                ident = fields[2]
            continue
        if tag == "p":
            if header is not None:
                raise ParseError("duplicate header", span)
            if (len(fields) != 5 or fields[1] != "graph" or not fields[2].isdigit()
                    or not fields[3].isdigit() or fields[4] not in ("directed", "undirected")):
                raise ParseError("malformed header, expected 'p graph <n> <m> directed|undirected'", span)
            header = (int(fields[2]), int(fields[3]), fields[4] == "directed")
            continue
        if tag == "e":
            if header is None:
                raise ParseError("missing header 'p graph <n> <m> directed|undirected' before edges", span)
            n, m, directed = header
            if len(fields) != 3 or not fields[1].isdigit() or not fields[2].isdigit():
                raise ParseError("malformed edge, expected 'e <u> <v>'", span)
            u, v = int(fields[1]), int(fields[2])
            if not (1 <= u <= n and 1 <= v <= n):
                raise ParseError(f"vertex out of range 1..{n}", span)
            if u == v:
                raise ParseError("self-loops are not allowed", span)
            key = (u, v) if directed else (min(u, v), max(u, v))
            if key in seen:
                raise ParseError("duplicate edge", span)
            seen.add(key)
            edges.append(key)
            if len(edges) > m:
                raise ParseError(f"wrong edge count: header declares {m}", span)
            continue
        raise ParseError(f"unknown line type {tag!r}", SourceSpan(lineno, col, len(tag)))
    if header is None:
        raise ParseError("missing header 'p graph <n> <m> directed|undirected'",
                         SourceSpan(last_line or 1, 1))
    n, m, directed = header
    if len(edges) != m:
        raise ParseError(f"wrong edge count: header declares {m}, found {len(edges)}",
                         SourceSpan(last_line, 1))
    edges.sort()
    return Graph(ident or graph_hash_id(n, directed, edges), n, directed, tuple(edges))


# ---------------------------------------------------------------------------
# Default theories
# ---------------------------------------------------------------------------

_DL_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<word>[A-Za-z][A-Za-z0-9_]*)
  | (?P<punct>[-.,:&/()])
  | (?P<bad>\||->|<->|<|>|~|!|=)
""", re.VERBOSE)


def parse_default_theory(text: str):
    from .default_logic import Default, DefaultTheory, Lit

    tokens = []
    for t in _tokenize(text, _DL_TOKEN):
        if t.kind == "BAD":
            raise ParseError(f"connective {t.text!r} is outside the supported fragment "
                             "(conjunctions of literals)", t.span)
        if t.kind in ("VAR", "NOT"):
            t = Token("IDENT", t.text, t.span)
        tokens.append(t)
    cur = _Cursor(tokens)

    def literal() -> Lit:
        positive = True
        if cur.at("-"):
            cur.advance()
            positive = False
        if cur.at("("):
            raise ParseError("nested formulas are outside the supported fragment "
                             "(conjunctions of literals)", cur.tok.span)
        if cur.tok.kind != "IDENT":
            cur.fail("a literal")
        name = cur.advance().text
        if name == "true":
            raise ParseError("'true' cannot be negated or used as an atom here", cur.tokens[cur.i - 1].span)
        if cur.at("("):
            cur.advance()
            args = []
            while True:
                if cur.tok.kind not in ("IDENT", "INT"):
                    cur.fail("a constant argument")
                args.append(cur.advance().text)
                if cur.at(","):
                    cur.advance()
                    continue
                cur.expect(")")
                break
            name = f"{name}({','.join(args)})"
        return Lit(name, positive)

    def conjunction(allow_true: bool) -> frozenset:
        if cur.tok.kind == "IDENT" and cur.tok.text == "true":
            if not allow_true:
                raise ParseError("'true' is not allowed here", cur.tok.span)
            cur.advance()
            return frozenset()
        lits = [literal()]
        while cur.at("&"):
            cur.advance()
            lits.append(literal())
        return frozenset(lits)

    defaults = []
    facts: set = set()
    while cur.tok.kind != "EOF":
        t = cur.tok
        if t.kind != "IDENT" or t.text not in ("fact", "d"):
            cur.fail("'fact:' or 'd:'")
        cur.advance()
        cur.expect(":")
        if t.text == "fact":
            facts |= conjunction(allow_true=False)
            cur.expect(".")
            continue
        pre = conjunction(allow_true=True)
        cur.expect(":")
        justs = []
        if not cur.at("/"):
            justs.append(conjunction(allow_true=True))
            while cur.at(","):
                cur.advance()
                justs.append(conjunction(allow_true=True))
        cur.expect("/")
        cons = conjunction(allow_true=False)
        cur.expect(".")
        defaults.append(Default(pre, tuple(justs), cons))
    return DefaultTheory(tuple(defaults), frozenset(facts))
