"""Lexer, parser, validator and pretty-printer for the ``.mini`` language.

The language is deliberately small: integer inputs with inclusive domains,
assignment, ``if``/``else``, ``while`` and ``record``. Every branch predicate
is a single relational comparison ``E1 op E2``; boolean connectives are
rejected at parse time.

    input wd_amt in [0, 32767];
    bal := 25000 - wd_amt;
    if bal < 1000 { record fail bal; } else { record success bal; }
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

__all__ = [
    "Assign", "BinOp", "Compare", "Diagnostic", "If", "InputDecl", "LexError",
    "MiniLangError", "Neg", "Num", "ParseError", "Program", "Record",
    "SourceUnit", "Token", "TokenKind", "ValidationError", "Var", "While", "iter_predicates",
    "bundled", "load_program", "parse", "parse_program", "pretty_print", "tokenize", "validate",
    "REL_OPS", "ARITH_OPS",
]

REL_OPS = ("<", "<=", ">", ">=", "=", "!=")
ARITH_OPS = ("+", "-", "*", "/")


class MiniLangError(Exception):
    """Base class for lexing and parsing failures."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class LexError(MiniLangError):
    pass


class ParseError(MiniLangError):
    def __init__(self, message: str, line: int, col: int, expected: frozenset = frozenset()):
        super().__init__(message, line, col)
        self.expected = expected


@dataclass(frozen=True)
class SourceUnit:
    text: str
    origin: str = "<inline>"

    def __post_init__(self):
        if not self.text:
            raise ValueError("source text must be non-empty")


class TokenKind(enum.Enum):
    IDENT = "identifier"
    INT = "integer"
    ASSIGN = ":="
    SEMI = ";"
    COMMA = ","
    LBRACE = "{"
    RBRACE = "}"
    LBRACK = "["
    RBRACK = "]"
    LPAREN = "("
    RPAREN = ")"
    PLUS = "+"
    MINUS = "-"
    STAR = "*"
    SLASH = "/"
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    EQ = "="
    NE = "!="
    INPUT = "input"
    IN = "in"
    IF = "if"
    ELSE = "else"
    WHILE = "while"
    RECORD = "record"
    AND = "and"
    OR = "or"
    NOT = "not"


KEYWORDS = {k.value: k for k in (
    TokenKind.INPUT, TokenKind.IN, TokenKind.IF, TokenKind.ELSE, TokenKind.WHILE,
    TokenKind.RECORD, TokenKind.AND, TokenKind.OR, TokenKind.NOT,
)}

# longest match first
SYMBOLS = [
    (":=", TokenKind.ASSIGN), ("<=", TokenKind.LE), (">=", TokenKind.GE),
    ("!=", TokenKind.NE), ("≤", TokenKind.LE), ("≥", TokenKind.GE), ("≠", TokenKind.NE),
    ("<", TokenKind.LT), (">", TokenKind.GT), ("=", TokenKind.EQ),
    (";", TokenKind.SEMI), (",", TokenKind.COMMA), ("{", TokenKind.LBRACE),
    ("}", TokenKind.RBRACE), ("[", TokenKind.LBRACK), ("]", TokenKind.RBRACK),
    ("(", TokenKind.LPAREN), (")", TokenKind.RPAREN), ("+", TokenKind.PLUS),
    ("-", TokenKind.MINUS), ("−", TokenKind.MINUS), ("*", TokenKind.STAR),
    ("×", TokenKind.STAR), ("/", TokenKind.SLASH),
]

REL_TOKENS = {
    TokenKind.LT: "<", TokenKind.LE: "<=", TokenKind.GT: ">",
    TokenKind.GE: ">=", TokenKind.EQ: "=", TokenKind.NE: "!=",
}


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    col: int

    def __repr__(self):
        if self.kind in (TokenKind.IDENT, TokenKind.INT):
            return f"{self.kind.name} {self.lexeme!r}"
        return self.kind.name


def tokenize(source: Union[SourceUnit, str]) -> list[Token]:
    """Split source text into tokens, dropping whitespace and ``#`` comments."""
    text = source.text if isinstance(source, SourceUnit) else source
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            j = i + 1
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            tokens.append(Token(KEYWORDS.get(word, TokenKind.IDENT), word, line, col))
            col += j - i
            i = j
            continue
        if ch.isascii() and ch.isdigit():
            j = i + 1
            while j < n and text[j].isascii() and text[j].isdigit():
                j += 1
            tokens.append(Token(TokenKind.INT, text[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym, kind in SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token(kind, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise LexError(f"unexpected character {ch!r}", line, col)
    return tokens


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

Pos = Optional[tuple]


@dataclass(frozen=True)
class Num:
    value: int
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


Expr = Union[Num, Var, Neg, BinOp]


@dataclass(frozen=True)
class Compare:
    """A simple relational predicate ``left op right``."""

    op: str
    left: Expr
    right: Expr
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class If:
    cond: Compare
    then: tuple
    orelse: tuple = ()
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class While:
    cond: Compare
    body: tuple
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Record:
    label: str
    expr: Expr
    pos: Pos = field(default=None, compare=False, repr=False)


Stmt = Union[Assign, If, While, Record]


@dataclass(frozen=True)
class InputDecl:
    name: str
    lo: int
    hi: int
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    inputs: tuple
    body: tuple

    @property
    def input_names(self) -> list[str]:
        return [d.name for d in self.inputs]

    def domain(self, name: str) -> tuple[int, int]:
        for d in self.inputs:
            if d.name == name:
                return d.lo, d.hi
        raise KeyError(name)


def iter_statements(block: Sequence) -> Iterator:
    """Pre-order walk over every statement, nested blocks included."""
    for stmt in block:
        yield stmt
        if isinstance(stmt, If):
            yield from iter_statements(stmt.then)
            yield from iter_statements(stmt.orelse)
        elif isinstance(stmt, While):
            yield from iter_statements(stmt.body)


def iter_predicates(program: Program) -> Iterator[Compare]:
    for stmt in iter_statements(program.body):
        if isinstance(stmt, (If, While)):
            yield stmt.cond


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: Sequence[Token]):
        self.tokens = list(tokens)
        self.i = 0

    def peek(self) -> Optional[Token]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def at(self, *kinds) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind in kinds

    def _end_pos(self):
        if not self.tokens:
            return 1, 1
        last = self.tokens[-1]
        return last.line, last.col

    def error(self, expected) -> ParseError:
        expected = frozenset(k.value for k in expected)
        tok = self.peek()
        want = ", ".join(sorted(expected))
        if tok is None:
            line, col = self._end_pos()
            return ParseError(f"unexpected end of input, expected one of: {want}", line, col, expected)
        if tok.kind in (TokenKind.AND, TokenKind.OR, TokenKind.NOT):
            msg = f"boolean connective {tok.lexeme!r} is not allowed in predicates"
        else:
            msg = f"unexpected {tok.lexeme!r}, expected one of: {want}"
        return ParseError(msg, tok.line, tok.col, expected)

    def expect(self, kind: TokenKind) -> Token:
        if not self.at(kind):
            raise self.error([kind])
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def program(self) -> Program:
        if not self.tokens:
            raise ParseError("empty program", 1, 1, frozenset({"input", "statement"}))
        inputs = []
        while self.at(TokenKind.INPUT):
            inputs.append(self.input_decl())
        body = []
        while self.peek() is not None:
            body.append(self.statement())
        return Program(tuple(inputs), tuple(body))

    def signed_int(self) -> int:
        sign = 1
        if self.at(TokenKind.MINUS):
            self.i += 1
            sign = -1
        return sign * int(self.expect(TokenKind.INT).lexeme)

    def input_decl(self) -> InputDecl:
        kw = self.expect(TokenKind.INPUT)
        name = self.expect(TokenKind.IDENT).lexeme
        self.expect(TokenKind.IN)
        self.expect(TokenKind.LBRACK)
        lo = self.signed_int()
        self.expect(TokenKind.COMMA)
        hi = self.signed_int()
        self.expect(TokenKind.RBRACK)
        self.expect(TokenKind.SEMI)
        return InputDecl(name, lo, hi, pos=(kw.line, kw.col))

    def statement(self) -> Stmt:
        tok = self.peek()
        if self.at(TokenKind.IDENT):
            self.i += 1
            self.expect(TokenKind.ASSIGN)
            expr = self.expr()
            self.expect(TokenKind.SEMI)
            return Assign(tok.lexeme, expr, pos=(tok.line, tok.col))
        if self.at(TokenKind.IF):
            self.i += 1
            cond = self.predicate()
            then = self.block()
            orelse = ()
            if self.at(TokenKind.ELSE):
                self.i += 1
                orelse = self.block()
            return If(cond, then, orelse, pos=(tok.line, tok.col))
        if self.at(TokenKind.WHILE):
            self.i += 1
            cond = self.predicate()
            return While(cond, self.block(), pos=(tok.line, tok.col))
        if self.at(TokenKind.RECORD):
            self.i += 1
            label = self.expect(TokenKind.IDENT).lexeme
            expr = self.expr()
            self.expect(TokenKind.SEMI)
            return Record(label, expr, pos=(tok.line, tok.col))
        raise self.error([TokenKind.IDENT, TokenKind.IF, TokenKind.WHILE, TokenKind.RECORD])

    def block(self) -> tuple:
        self.expect(TokenKind.LBRACE)
        stmts = []
        while not self.at(TokenKind.RBRACE):
            if self.peek() is None:
                raise self.error([TokenKind.RBRACE])
            stmts.append(self.statement())
        self.i += 1
        return tuple(stmts)

    def predicate(self) -> Compare:
        start = self.peek()
        left = self.expr()
        tok = self.peek()
        if tok is None or tok.kind not in REL_TOKENS:
            raise self.error(REL_TOKENS)
        self.i += 1
        right = self.expr()
        if self.at(*REL_TOKENS):
            # chained comparisons are a disguised conjunction
            raise self.error([TokenKind.LBRACE])
        return Compare(REL_TOKENS[tok.kind], left, right, pos=(start.line, start.col))

    def expr(self) -> Expr:
        left = self.term()
        while self.at(TokenKind.PLUS, TokenKind.MINUS):
            tok = self.tokens[self.i]
            self.i += 1
            left = BinOp(tok.kind.value, left, self.term(), pos=(tok.line, tok.col))
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.at(TokenKind.STAR, TokenKind.SLASH):
            tok = self.tokens[self.i]
            self.i += 1
            left = BinOp(tok.kind.value, left, self.unary(), pos=(tok.line, tok.col))
        return left

    def unary(self) -> Expr:
        tok = self.peek()
        if self.at(TokenKind.MINUS):
            self.i += 1
            return Neg(self.unary(), pos=(tok.line, tok.col))
        if self.at(TokenKind.INT):
            self.i += 1
            return Num(int(tok.lexeme), pos=(tok.line, tok.col))
        if self.at(TokenKind.IDENT):
            self.i += 1
            return Var(tok.lexeme, pos=(tok.line, tok.col))
        if self.at(TokenKind.LPAREN):
            self.i += 1
            inner = self.expr()
            self.expect(TokenKind.RPAREN)
            return inner
        raise self.error([TokenKind.INT, TokenKind.IDENT, TokenKind.LPAREN, TokenKind.MINUS])


def parse_program(tokens: Sequence[Token]) -> Program:
    return _Parser(tokens).program()


def parse(source: Union[SourceUnit, str]) -> Program:
    """Tokenize and parse in one step."""
    return parse_program(tokenize(source))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    line: int = 0
    col: int = 0

    def __str__(self):
        return f"{self.line}:{self.col}: {self.kind}: {self.message}"


def _pos_of(node, fallback=(0, 0)):
    return node.pos if node.pos is not None else fallback


def validate(program: Program) -> list[Diagnostic]:
    """Return one diagnostic per broken program invariant; empty when valid.

    Use-before-definition is checked with definite assignment: a variable is
    defined after an ``if`` only when both branches define it, and a ``while``
    body contributes nothing because it may run zero times.
    """
    report = []
    seen = set()
    for decl in program.inputs:
        line, col = _pos_of(decl)
        if decl.name in seen:
            report.append(Diagnostic("duplicate-input", f"input {decl.name!r} declared twice", line, col))
        seen.add(decl.name)
        if decl.lo > decl.hi:
            report.append(Diagnostic(
                "inverted-domain", f"domain [{decl.lo}, {decl.hi}] of {decl.name!r} is empty", line, col))

    def check_expr(expr, defined, fallback):
        if isinstance(expr, Num):
            if not isinstance(expr.value, int):
                line, col = _pos_of(expr, fallback)
                report.append(Diagnostic("non-integer", f"literal {expr.value!r} is not an integer", line, col))
        elif isinstance(expr, Var):
            if expr.name not in defined:
                line, col = _pos_of(expr, fallback)
                report.append(Diagnostic("use-before-definition", f"{expr.name!r} used before assignment", line, col))
        elif isinstance(expr, Neg):
            check_expr(expr.operand, defined, _pos_of(expr, fallback))
        elif isinstance(expr, BinOp):
            here = _pos_of(expr, fallback)
            if expr.op not in ARITH_OPS:
                report.append(Diagnostic("bad-operator", f"arithmetic operator {expr.op!r} not allowed", *here))
            check_expr(expr.left, defined, here)
            check_expr(expr.right, defined, here)
        else:
            line, col = fallback
            report.append(Diagnostic("bad-expression", f"unsupported expression {type(expr).__name__}", line, col))

    def check_pred(pred, defined, fallback):
        here = _pos_of(pred, fallback)
        if not isinstance(pred, Compare):
            report.append(Diagnostic("bad-predicate", "predicate must be a single relational comparison", *here))
            return
        if pred.op not in REL_OPS:
            report.append(Diagnostic("bad-predicate", f"relational operator {pred.op!r} not allowed", *here))
        check_expr(pred.left, defined, here)
        check_expr(pred.right, defined, here)

    def check_block(block, defined) -> set:
        defined = set(defined)
        for stmt in block:
            here = _pos_of(stmt)
            if isinstance(stmt, Assign):
                check_expr(stmt.expr, defined, here)
                defined.add(stmt.target)
            elif isinstance(stmt, Record):
                check_expr(stmt.expr, defined, here)
            elif isinstance(stmt, If):
                check_pred(stmt.cond, defined, here)
                defined = check_block(stmt.then, defined) & check_block(stmt.orelse, defined)
            elif isinstance(stmt, While):
                check_pred(stmt.cond, defined, here)
                check_block(stmt.body, defined)
            else:
                report.append(Diagnostic("bad-statement", f"unsupported statement {type(stmt).__name__}", *here))
        return defined

    check_block(program.body, {d.name for d in program.inputs})
    return report


class ValidationError(MiniLangError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        first = diagnostics[0]
        super().__init__(f"{first.kind}: {first.message}", first.line, first.col)
        self.diagnostics = list(diagnostics)


def load_program(path, strict: bool = True) -> Program:
    """Read, parse and (when ``strict``) validate a ``.mini`` file."""
    with open(path, encoding="utf-8") as fh:
        program = parse(SourceUnit(fh.read(), str(path)))
    if strict:
        report = validate(program)
        if report:
            raise ValidationError(report)
    return program


def bundled(name: str) -> str:
    """Filesystem path of a program shipped in ``pathga/programs``."""
    from importlib import resources

    if not name.endswith(".mini"):
        name += ".mini"
    return str(resources.files("pathga") / "programs" / name)


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def format_expr(expr: Expr, parent: int = 0) -> str:
    if isinstance(expr, Num):
        return str(expr.value) if expr.value >= 0 else f"(-{-expr.value})"
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        return f"-{format_expr(expr.operand, 3)}"
    prec = _PREC[expr.op]
    # left-associative: the right operand needs parens at equal precedence
    text = f"{format_expr(expr.left, prec)} {expr.op} {format_expr(expr.right, prec + 1)}"
    return f"({text})" if prec < parent else text


def format_predicate(pred: Compare) -> str:
    return f"{format_expr(pred.left)} {pred.op} {format_expr(pred.right)}"


def pretty_print(program: Program, indent: str = "    ") -> str:
    lines = [f"input {d.name} in [{d.lo}, {d.hi}];" for d in program.inputs]

    def emit(block, depth):
        pad = indent * depth
        for stmt in block:
            if isinstance(stmt, Assign):
                lines.append(f"{pad}{stmt.target} := {format_expr(stmt.expr)};")
            elif isinstance(stmt, Record):
                lines.append(f"{pad}record {stmt.label} {format_expr(stmt.expr)};")
            elif isinstance(stmt, If):
                lines.append(f"{pad}if {format_predicate(stmt.cond)} {{")
                emit(stmt.then, depth + 1)
                if stmt.orelse:
                    lines.append(f"{pad}}} else {{")
                    emit(stmt.orelse, depth + 1)
                lines.append(f"{pad}}}")
            elif isinstance(stmt, While):
                lines.append(f"{pad}while {format_predicate(stmt.cond)} {{")
                emit(stmt.body, depth + 1)
                lines.append(f"{pad}}}")

    emit(program.body, 0)
    return "\n".join(lines) + "\n"
