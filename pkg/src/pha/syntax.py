"""Reader and printer for the ``.pha`` rule language.

A program is a sequence of statements, each ending in a period::

    % comment to end of line
    smoke(Sm) <- fire(Fi), c_smoke(Sm,Fi).
    false <- smoke(yes), smoke(no).
    assumable( fire(yes), 0.01 ).
    fact(a).

Identifiers start with a lowercase letter or digit, variables with an
uppercase letter or underscore.  A lone ``_`` is an anonymous variable.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterator, List, Optional, Sequence, Union

from .errors import Diagnostic, ParseError
from .terms import FALSE, Atom, Compound, Const, Term, Var

IDENT_RE = re.compile(r"[a-z0-9][A-Za-z0-9_]*\Z")
VAR_RE = re.compile(r"[A-Z_][A-Za-z0-9_]*\Z")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n\f]+)
  | (?P<comment>%[^\n]*)
  | (?P<arrow><-)
  | (?P<number>\d+\.\d+(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<ident>[a-z0-9][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<punct>[(),.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, var, number, arrow, ( ) , . or eof
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: tuple = ()
    line: Optional[int] = field(default=None, compare=False)

    @property
    def is_constraint(self) -> bool:
        return self.head == FALSE

    def __str__(self) -> str:
        return format_clause(self)


@dataclass(frozen=True)
class AssumableDecl:
    template: Atom
    prior: float
    line: Optional[int] = field(default=None, compare=False)
    # The probability as written, reproduced when printing.
    literal: Optional[str] = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return format_decl(self)


Statement = Union[Clause, AssumableDecl]


@dataclass
class Program:
    statements: List[Statement] = field(default_factory=list)

    @property
    def clauses(self) -> list:
        return [s for s in self.statements if isinstance(s, Clause)]

    @property
    def assumables(self) -> list:
        return [s for s in self.statements if isinstance(s, AssumableDecl)]

    def __str__(self) -> str:
        return format_program(self)


def tokenize(text: str, errors: Optional[list] = None) -> List[Token]:
    """Split ``text`` into tokens.

    Bad characters are reported into ``errors`` (when given) and skipped;
    otherwise the first one raises :class:`ParseError`.
    """
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            d = Diagnostic("error", "lex", f"unexpected character {text[pos]!r}",
                           line, pos - line_start + 1)
            if errors is None:
                raise ParseError([d])
            errors.append(d)
            pos += 1
            continue
        kind = m.lastgroup
        value = m.group()
        if kind == "punct":
            kind = value
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Syntax(Exception):
    def __init__(self, token: Token, message: str, code: str = "syntax"):
        self.diagnostic = Diagnostic("error", code, message, token.line, token.column)


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "eof" else repr(tok.text)


class _Parser:
    def __init__(self, tokens: Sequence[Token]):
        self.tokens = tokens
        self.pos = 0
        self.anon = itertools.count(1)

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek
        if tok.kind != kind:
            raise _Syntax(tok, f"expected {what}, found {_describe(tok)}")
        return self.advance()

    def statement(self) -> Statement:
        tok = self.peek
        nxt = self.tokens[self.pos + 1] if tok.kind != "eof" else tok
        if tok.kind == "ident" and tok.text == "assumable" and nxt.kind == "(":
            return self.assumable()
        head = self.atom()
        body: tuple = ()
        if self.peek.kind == "arrow":
            self.advance()
            body = self.body()
        self.expect(".", "'.' at end of clause")
        return Clause(head, body, tok.line)

    def assumable(self) -> AssumableDecl:
        start = self.advance()
        self.expect("(", "'('")
        template = self.atom()
        self.expect(",", "',' after assumable atom")
        literal = self.probability()
        self.expect(")", "')'")
        self.expect(".", "'.' at end of declaration")
        return AssumableDecl(template, float(literal), start.line, literal)

    def probability(self) -> str:
        tok = self.advance()
        if tok.kind == "number" or (tok.kind == "ident" and tok.text.isdigit()):
            return tok.text
        raise _Syntax(tok, f"malformed probability literal {_describe(tok)}", "probability")

    def body(self) -> tuple:
        atoms = [self.atom()]
        while self.peek.kind == ",":
            self.advance()
            atoms.append(self.atom())
        return tuple(atoms)

    def atom(self) -> Atom:
        tok = self.peek
        if tok.kind != "ident":
            raise _Syntax(tok, f"expected an atom, found {_describe(tok)}")
        t = self.term()
        assert not isinstance(t, Var)
        return t

    def term(self) -> Term:
        tok = self.advance()
        if tok.kind == "var":
            if tok.text == "_":
                return Var(f"_G{next(self.anon)}")
            return Var(tok.text)
        if tok.kind == "ident":
            if self.peek.kind != "(":
                return Const(tok.text)
            self.advance()
            args = [self.term()]
            while self.peek.kind == ",":
                self.advance()
                args.append(self.term())
            self.expect(")", "')' or ','")
            return Compound(tok.text, tuple(args))
        if tok.kind == "number":
            raise _Syntax(tok, f"numbers are not terms: {tok.text}")
        raise _Syntax(tok, f"expected a term, found {_describe(tok)}")

    def recover(self) -> None:
        while self.peek.kind not in (".", "eof"):
            self.advance()
        self.advance()


def parse_program(text: str) -> Program:
    """Parse ``.pha`` source; raises :class:`ParseError` listing every error."""
    errors: list = []
    parser = _Parser(tokenize(text, errors))
    program = Program()
    while parser.peek.kind != "eof":
        try:
            program.statements.append(parser.statement())
        except _Syntax as exc:
            errors.append(exc.diagnostic)
            parser.recover()
    if errors:
        errors.sort(key=lambda d: (d.line or 0, d.column or 0))
        raise ParseError(errors)
    return program


def parse_query(text: str) -> tuple:
    """Parse a conjunction such as ``smoke(yes), report(no)``.

    The empty string is the empty conjunction.  A trailing period is allowed.
    """
    parser = _Parser(tokenize(text))
    atoms: tuple = ()
    try:
        if parser.peek.kind != "eof":
            atoms = parser.body()
        if parser.peek.kind == ".":
            parser.advance()
        if parser.peek.kind != "eof":
            raise _Syntax(parser.peek, f"unexpected {_describe(parser.peek)} in query")
    except _Syntax as exc:
        raise ParseError([exc.diagnostic]) from None
    return atoms


def parse_atom(text: str) -> Atom:
    atoms = parse_query(text)
    if len(atoms) != 1:
        raise ParseError([Diagnostic("error", "syntax", f"expected one atom, got {len(atoms)}")])
    return atoms[0]


def format_probability(p) -> str:
    """Plain decimal text for a probability (no exponent notation)."""
    if isinstance(p, Decimal):
        return format(p, "f")
    s = repr(float(p))
    if "e" in s or "E" in s:
        s = format(Decimal(s), "f")
    return s


def format_clause(c: Clause) -> str:
    if not c.body:
        return f"{c.head}."
    return f"{c.head} <- {', '.join(str(b) for b in c.body)}."


def format_decl(d: AssumableDecl) -> str:
    return f"assumable({d.template}, {d.literal or format_probability(d.prior)})."


def format_statement(s: Statement) -> str:
    return format_decl(s) if isinstance(s, AssumableDecl) else format_clause(s)


def format_program(program: Union[Program, Sequence[Statement]]) -> str:
    statements = program.statements if isinstance(program, Program) else program
    return "".join(format_statement(s) + "\n" for s in statements)


def iter_atoms(program: Program) -> Iterator[Atom]:
    for s in program.statements:
        if isinstance(s, Clause):
            yield s.head
            yield from s.body
        else:
            yield s.template
