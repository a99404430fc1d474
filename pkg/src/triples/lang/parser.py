"""Lexer and recursive-descent parser for the policy language.

The grammar is line-oriented and indentation-free: one statement per line,
blocks opened by a trailing ':' and closed by a line containing 'end'.
String literals are double-quoted with no escapes; numbers are decimal with
an optional exponent. Full-line comments are kept; trailing comments after a
statement are dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .nodes import (
    ATTR_FIELDS,
    Assign,
    Attr,
    Binary,
    Call,
    Comment,
    Diagnostic,
    ExprStmt,
    FuncDef,
    If,
    Literal,
    ParseError,
    Program,
    Var,
)

KEYWORDS = frozenset({"if", "else", "def", "end", "true", "false"})

_TWO_CHAR_OPS = ("==", "!=", "<=", ">=")
_SINGLE_OPS = "=<>+-*/(),:."
_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_]\w*")

_CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")


@dataclass
class Token:
    kind: str  # IDENT NUMBER STRING OP COMMENT NEWLINE EOF or a keyword
    value: object
    line: int
    col: int


def _lex_fail(line: int, col: int, message: str) -> ParseError:
    return ParseError(Diagnostic("lex", line, col, "syntax", message))


def lex(source: str) -> list[Token]:
    tokens: list[Token] = []
    lineno = 0
    for lineno, raw in enumerate(source.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            tokens.append(Token("COMMENT", stripped, lineno, raw.index("#") + 1))
            tokens.append(Token("NEWLINE", None, lineno, len(raw) + 1))
            continue
        i = 0
        emitted = False
        while i < len(raw):
            ch = raw[i]
            if ch in " \t":
                i += 1
                continue
            if ch == "#":
                break  # trailing comment: semantically inert, dropped
            col = i + 1
            pair = raw[i : i + 2]
            if pair in _TWO_CHAR_OPS:
                tokens.append(Token("OP", pair, lineno, col))
                i += 2
            elif ch.isdigit():
                m = _NUMBER_RE.match(raw, i)
                text = m.group()
                value: object = int(text) if text.isdigit() else float(text)
                tokens.append(Token("NUMBER", value, lineno, col))
                i = m.end()
            elif ch == '"':
                end = raw.find('"', i + 1)
                if end < 0:
                    raise _lex_fail(lineno, col, "unterminated string literal")
                tokens.append(Token("STRING", raw[i + 1 : end], lineno, col))
                i = end + 1
            elif ch.isalpha() or ch == "_":
                m = _IDENT_RE.match(raw, i)
                word = m.group()
                kind = word if word in KEYWORDS else "IDENT"
                tokens.append(Token(kind, word, lineno, col))
                i = m.end()
            elif ch in _SINGLE_OPS:
                tokens.append(Token("OP", ch, lineno, col))
                i += 1
            else:
                raise _lex_fail(lineno, col, f"unexpected character {ch!r}")
            emitted = True
        if emitted:
            tokens.append(Token("NEWLINE", None, lineno, len(raw) + 1))
    tokens.append(Token("EOF", None, lineno + 1, 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0
        self.func_depth = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def fail(self, tok: Token, message: str):
        raise ParseError(Diagnostic("parse", tok.line, tok.col, "syntax", message))

    def expect_op(self, value: str) -> Token:
        tok = self.peek()
        if tok.kind != "OP" or tok.value != value:
            self.fail(tok, f"expected {value!r}")
        return self.advance()

    def expect_newline(self) -> None:
        tok = self.peek()
        if tok.kind == "NEWLINE":
            self.advance()
        elif tok.kind != "EOF":
            self.fail(tok, "unexpected input after statement")

    # -- statements ---------------------------------------------------------

    def parse_program(self) -> Program:
        stmts = []
        while self.peek().kind != "EOF":
            stmts.append(self.parse_stmt())
        return Program(tuple(stmts))

    def parse_stmt(self):
        tok = self.peek()
        if tok.kind == "COMMENT":
            self.advance()
            self.expect_newline()
            return Comment(tok.value)
        if tok.kind == "if":
            return self.parse_if()
        if tok.kind == "def":
            return self.parse_def()
        if tok.kind in ("end", "else"):
            self.fail(tok, f"'{tok.kind}' without a matching block")
        if (
            tok.kind == "IDENT"
            and self.peek(1).kind == "OP"
            and self.peek(1).value == "="
        ):
            self.advance()
            self.advance()
            value = self.parse_expr()
            self.expect_newline()
            return Assign(tok.value, value, line=tok.line, col=tok.col)
        expr = self.parse_expr()
        if not isinstance(expr, Call):
            self.fail(tok, "expected a call, assignment, if, def, or comment")
        self.expect_newline()
        return ExprStmt(expr)

    def parse_block(self, stops: tuple[str, ...]) -> tuple:
        stmts = []
        while True:
            tok = self.peek()
            if tok.kind == "EOF":
                self.fail(tok, "missing 'end' to close the block")
            if tok.kind in stops:
                return tuple(stmts)
            stmts.append(self.parse_stmt())

    def parse_if(self) -> If:
        head = self.advance()
        cond = self.parse_expr()
        self.expect_op(":")
        self.expect_newline()
        body = self.parse_block(("else", "end"))
        orelse: tuple = ()
        if self.peek().kind == "else":
            self.advance()
            self.expect_op(":")
            self.expect_newline()
            orelse = self.parse_block(("end",))
        self.advance()  # 'end'
        self.expect_newline()
        return If(cond, body, orelse, line=head.line, col=head.col)

    def parse_def(self) -> FuncDef:
        head = self.peek()
        if self.func_depth > 0:
            self.fail(head, "function definitions cannot nest")
        self.advance()
        name_tok = self.peek()
        if name_tok.kind != "IDENT":
            self.fail(name_tok, "expected a function name")
        self.advance()
        self.expect_op("(")
        params: list[str] = []
        if not (self.peek().kind == "OP" and self.peek().value == ")"):
            while True:
                p = self.peek()
                if p.kind != "IDENT":
                    self.fail(p, "expected a parameter name")
                if p.value in params:
                    self.fail(p, f"duplicate parameter {p.value!r}")
                params.append(p.value)
                self.advance()
                if self.peek().kind == "OP" and self.peek().value == ",":
                    self.advance()
                    continue
                break
        self.expect_op(")")
        self.expect_op(":")
        self.expect_newline()
        self.func_depth += 1
        body = self.parse_block(("end",))
        self.func_depth -= 1
        self.advance()  # 'end'
        self.expect_newline()
        return FuncDef(name_tok.value, tuple(params), body,
                       line=head.line, col=head.col)

    # -- expressions ---------------------------------------------------------

    def parse_expr(self):
        left = self.parse_additive()
        while self.peek().kind == "OP" and self.peek().value in _CMP_OPS:
            op = self.advance().value
            left = Binary(op, left, self.parse_additive())
        return left

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.peek().kind == "OP" and self.peek().value in ("+", "-"):
            op = self.advance().value
            left = Binary(op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self):
        left = self.parse_unary()
        while self.peek().kind == "OP" and self.peek().value in ("*", "/"):
            op = self.advance().value
            left = Binary(op, left, self.parse_unary())
        return left

    def parse_unary(self):
        tok = self.peek()
        if tok.kind == "OP" and tok.value == "-":
            self.advance()
            num = self.peek()
            if num.kind != "NUMBER":
                self.fail(num, "expected a number after unary '-'")
            self.advance()
            return self.parse_postfix(Literal(-num.value))
        return self.parse_postfix(self.parse_primary())

    def parse_postfix(self, expr):
        while self.peek().kind == "OP" and self.peek().value == ".":
            dot = self.advance()
            name_tok = self.peek()
            if name_tok.kind != "IDENT" or name_tok.value not in ATTR_FIELDS:
                self.fail(name_tok, "expected x, y, or z after '.'")
            self.advance()
            expr = Attr(expr, name_tok.value, line=dot.line, col=dot.col)
        return expr

    def parse_primary(self):
        tok = self.advance()
        if tok.kind == "NUMBER" or tok.kind == "STRING":
            return Literal(tok.value)
        if tok.kind == "true":
            return Literal(True)
        if tok.kind == "false":
            return Literal(False)
        if tok.kind == "IDENT":
            if self.peek().kind == "OP" and self.peek().value == "(":
                self.advance()
                args: list = []
                if not (self.peek().kind == "OP" and self.peek().value == ")"):
                    while True:
                        args.append(self.parse_expr())
                        nxt = self.peek()
                        if nxt.kind == "OP" and nxt.value == ",":
                            self.advance()
                            continue
                        if nxt.kind == "OP" and nxt.value == ")":
                            break
                        self.fail(nxt, f"expected ',' or ')' in call to {tok.value!r}")
                self.expect_op(")")
                return Call(tok.value, tuple(args), line=tok.line, col=tok.col)
            return Var(tok.value)
        if tok.kind == "OP" and tok.value == "(":
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        self.fail(tok, "expected an expression")


def parse(source: str) -> Program:
    """Parse source text, raising ParseError with a lex/parse Diagnostic."""
    return _Parser(lex(source)).parse_program()
