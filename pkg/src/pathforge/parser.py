"""Parsers for the textual path-expression and query syntaxes.

Path expression grammar, loosest binding first:

    union    := conj ('|' conj)*
    conj     := concat ('&' concat)*
    concat   := branch (('/' labelset?) branch)*
    branch   := '[' union ']' branch          -- source-side test
              | postfix ('[' union ']')*      -- target-side tests
    postfix  := atom ('+' | '{' INT ',' INT '}')*
    atom     := IDENT | '-' IDENT | '(' union ')'
    labelset := '{' IDENT (',' IDENT)* '}'

Binary operators associate to the left. A `{` directly after `/` always
introduces a junction label set; after a complete operand it is a bounded
repetition. Query text is a head variable list, `<-`, then conjuncts joined
by `||`, each a `&&`-separated mix of relation atoms `(x, expr, y)` and
label atoms `x:{A,B}`. The head `EMPTY` body form denotes the query with no
conjuncts at all (it returns nothing on every database).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    BranchL,
    BranchR,
    Concat,
    AnnConcat,
    Conj,
    Label,
    PathExpr,
    Repeat,
    Reverse,
    TransClos,
    Union,
)
from .query import Conjunct, LabelAtom, Relation, UcqtQuery, validate_query


class QuerySyntaxError(ValueError):
    """Raised on malformed expression or query text; carries a byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str
    text: str
    offset: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<arrow><-)
  | (?P<andand>&&)
  | (?P<oror>\|\|)
  | (?P<op>[/|&+\-()\[\]{},:])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup or ""
        if kind != "ws":
            value = match.group()
            tokens.append(_Token(value if kind == "op" else kind, value, pos))
        pos = match.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind: str) -> _Token:
        token = self.peek()
        if token.kind != kind:
            found = token.text or "end of input"
            raise QuerySyntaxError(f"expected {kind!r}, found {found!r}", token.offset)
        return self.next()

    def fail(self, message: str) -> None:
        raise QuerySyntaxError(message, self.peek().offset)

    # --- path expressions ---

    def parse_union(self) -> PathExpr:
        expr = self.parse_conj()
        while self.peek().kind == "|":
            self.next()
            expr = Union(expr, self.parse_conj())
        return expr

    def parse_conj(self) -> PathExpr:
        expr = self.parse_concat()
        while self.peek().kind == "&":
            self.next()
            expr = Conj(expr, self.parse_concat())
        return expr

    def parse_concat(self) -> PathExpr:
        expr = self.parse_branch()
        while self.peek().kind == "/":
            self.next()
            if self.peek().kind == "{":
                labels = self.parse_label_set()
                expr = AnnConcat(expr, labels, self.parse_branch())
            else:
                expr = Concat(expr, self.parse_branch())
        return expr

    def parse_branch(self) -> PathExpr:
        if self.peek().kind == "[":
            self.next()
            test = self.parse_union()
            self.expect("]")
            return BranchL(test, self.parse_branch())
        expr = self.parse_postfix()
        while self.peek().kind == "[":
            self.next()
            test = self.parse_union()
            self.expect("]")
            expr = BranchR(expr, test)
        return expr

    def parse_postfix(self) -> PathExpr:
        expr = self.parse_atom()
        while True:
            token = self.peek()
            if token.kind == "+":
                self.next()
                expr = TransClos(expr)
            elif token.kind == "{":
                self.next()
                lo = int(self.expect("int").text)
                self.expect(",")
                hi = int(self.expect("int").text)
                self.expect("}")
                if not (1 <= lo <= hi):
                    raise QuerySyntaxError(
                        f"repeat bounds must satisfy 1 <= m <= n, got {{{lo},{hi}}}", token.offset
                    )
                expr = Repeat(expr, lo, hi)
            else:
                return expr

    def parse_atom(self) -> PathExpr:
        token = self.peek()
        if token.kind == "ident":
            self.next()
            return Label(token.text)
        if token.kind == "-":
            self.next()
            if self.peek().kind != "ident":
                self.fail("reverse applies to a single edge label")
            return Reverse(self.next().text)
        if token.kind == "(":
            self.next()
            expr = self.parse_union()
            self.expect(")")
            return expr
        self.fail(f"expected a path expression, found {token.text or 'end of input'!r}")
        raise AssertionError  # unreachable

    def parse_label_set(self) -> frozenset[str]:
        self.expect("{")
        names = [self.expect("ident").text]
        while self.peek().kind == ",":
            self.next()
            names.append(self.expect("ident").text)
        self.expect("}")
        return frozenset(names)

    # --- queries ---

    def parse_query(self) -> UcqtQuery:
        head = [self.expect("ident").text]
        while self.peek().kind == ",":
            self.next()
            head.append(self.expect("ident").text)
        self.expect("arrow")
        if self.peek().kind == "ident" and self.peek().text == "EMPTY":
            self.next()
            return UcqtQuery(head=tuple(head), disjuncts=())
        disjuncts = [self.parse_conjunct()]
        while self.peek().kind == "oror":
            self.next()
            disjuncts.append(self.parse_conjunct())
        return UcqtQuery(head=tuple(head), disjuncts=tuple(disjuncts))

    def parse_conjunct(self) -> Conjunct:
        relations: list[Relation] = []
        labels: dict[str, frozenset[str]] = {}
        while True:
            token = self.peek()
            if token.kind == "(":
                self.next()
                src = self.expect("ident").text
                self.expect(",")
                expr = self.parse_union()
                self.expect(",")
                trg = self.expect("ident").text
                self.expect(")")
                relations.append(Relation(src, expr, trg))
            elif token.kind == "ident":
                self.next()
                self.expect(":")
                names = self.parse_label_set()
                # repeated label atoms on one variable conjoin
                labels[token.text] = labels.get(token.text, names) & names
            else:
                self.fail("expected a relation atom or a label atom")
            if self.peek().kind != "andand":
                break
            self.next()
        if not relations and not labels:
            self.fail("a conjunct needs at least one atom")
        label_atoms = tuple(LabelAtom(var, names) for var, names in sorted(labels.items()))
        return Conjunct(relations=tuple(relations), labels=label_atoms)


def parse_path_expr(text: str) -> PathExpr:
    """Parse one path expression; raises QuerySyntaxError with a byte offset."""
    if not text.strip():
        raise QuerySyntaxError("empty path expression", 0)
    parser = _Parser(text)
    expr = parser.parse_union()
    token = parser.peek()
    if token.kind != "eof":
        raise QuerySyntaxError(f"trailing input {token.text!r}", token.offset)
    return expr


def parse_query(text: str) -> UcqtQuery:
    """Parse one query; raises QuerySyntaxError with a byte offset."""
    if not text.strip():
        raise QuerySyntaxError("empty query", 0)
    parser = _Parser(text)
    query = parser.parse_query()
    token = parser.peek()
    if token.kind != "eof":
        raise QuerySyntaxError(f"trailing input {token.text!r}", token.offset)
    try:
        validate_query(query)
    except ValueError as exc:
        raise QuerySyntaxError(str(exc), 0) from exc
    return query
