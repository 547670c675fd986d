"""Concrete syntax for processes, types and environment files.

Process grammar, with `--` comments to end of line:

    P ::= 0 | P | P | a<v,...> | a(x,...).P | !a(x,...).P
        | new a[:T][ fun].P | (new a[:T][ fun])(P) | (P)
    v ::= * | a | n | v+v | v*v | (v)
    T ::= Unit | Nat | #k[T,...] | ik[T,...] | ok[T,...]

`a` and `a<>` abbreviate a discarded unit input / a unit message; prefixes
and restrictions bind tighter than `|`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError
from .syntax import (
    IN,
    NAT,
    OUT,
    SHARP,
    STAR,
    UNIT,
    Add,
    ChanT,
    In,
    Mul,
    Name,
    NatLit,
    NameRef,
    Nil,
    Out,
    Par,
    Process,
    RepIn,
    Res,
    Type,
    Value,
    fresh,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>--[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<nat>\d+)
  | (?P<op><|>|\(|\)|\[|\]|\.|:|,|\||!|\*|\+|\#)
    """,
    re.VERBOSE,
)

KEYWORDS = {"new", "fun"}

_CAP_NAME = re.compile(r"^([io])(\d+)$")


@dataclass
class Token:
    kind: str  # 'name' | 'nat' | 'op' | 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.free: dict[str, Name] = {}

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return tok

    def fail(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col)

    def at_name(self) -> bool:
        tok = self.peek()
        return tok.kind == "name" and tok.text not in KEYWORDS

    def take_name_text(self) -> str:
        tok = self.next()
        if tok.kind != "name" or tok.text in KEYWORDS:
            raise ParseError(f"expected a name, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return tok.text

    # -- names and scoping -------------------------------------------------

    def resolve(self, spelling: str, scope: dict[str, Name]) -> Name:
        if spelling in scope:
            return scope[spelling]
        if spelling not in self.free:
            self.free[spelling] = fresh(spelling)
        return self.free[spelling]

    # -- types --------------------------------------------------------------

    def parse_type(self) -> Type:
        tok = self.peek()
        if tok.text == "Unit":
            self.next()
            return UNIT
        if tok.text == "Nat":
            self.next()
            return NAT
        if tok.text == "#":
            self.next()
            lvl_tok = self.next()
            if lvl_tok.kind != "nat":
                raise ParseError("expected a level after '#'", lvl_tok.line, lvl_tok.col)
            return self._chan(SHARP, int(lvl_tok.text))
        if tok.kind == "name":
            m = _CAP_NAME.match(tok.text)
            if m:
                self.next()
                cap = IN if m.group(1) == "i" else OUT
                return self._chan(cap, int(m.group(2)))
        raise self.fail(f"expected a type, found {tok.text or 'end of input'!r}")

    def _chan(self, cap: str, level: int) -> Type:
        self.expect("[")
        payload = [self.parse_type()]
        while self.peek().text == ",":
            self.next()
            payload.append(self.parse_type())
        self.expect("]")
        return ChanT(cap, level, tuple(payload))

    # -- values ---------------------------------------------------------------

    def parse_value(self, scope: dict[str, Name]) -> Value:
        left = self._mul(scope)
        while self.peek().text == "+":
            self.next()
            left = Add(left, self._mul(scope))
        return left

    def _mul(self, scope: dict[str, Name]) -> Value:
        left = self._value_atom(scope)
        while self.peek().text == "*":
            self.next()
            left = Mul(left, self._value_atom(scope))
        return left

    def _value_atom(self, scope: dict[str, Name]) -> Value:
        tok = self.peek()
        if tok.text == "*":
            self.next()
            return STAR
        if tok.kind == "nat":
            self.next()
            return NatLit(int(tok.text))
        if tok.text == "(":
            self.next()
            v = self.parse_value(scope)
            self.expect(")")
            return v
        if self.at_name():
            return NameRef(self.resolve(self.take_name_text(), scope))
        raise self.fail(f"expected a value, found {tok.text or 'end of input'!r}")

    # -- processes ------------------------------------------------------------

    def parse_process(self, scope: dict[str, Name]) -> Process:
        left = self.parse_term(scope)
        while self.peek().text == "|":
            self.next()
            left = Par(left, self.parse_term(scope))
        return left

    def parse_term(self, scope: dict[str, Name]) -> Process:
        tok = self.peek()
        if tok.text == "0":
            self.next()
            return Nil()
        if tok.text == "(":
            # `(new a)(P)` notation or a parenthesized process.
            if self.peek(1).text == "new":
                return self._paren_new(scope)
            self.next()
            p = self.parse_process(scope)
            self.expect(")")
            return p
        if tok.text == "new":
            self.next()
            return self._restriction(scope)
        if tok.text == "!":
            self.next()
            subj = self.resolve(self.take_name_text(), scope)
            binders, body = self._input_tail(scope)
            return RepIn(subj, binders, body)
        if self.at_name():
            spelling = self.take_name_text()
            nxt = self.peek()
            if nxt.text == "<":
                subj = self.resolve(spelling, scope)
                return self._output_tail(subj, scope)
            if nxt.text == "(" or nxt.text == ".":
                subj = self.resolve(spelling, scope)
                binders, body = self._input_tail(scope)
                return In(subj, binders, body)
            # bare name: discarded unit input with nil continuation
            return In(self.resolve(spelling, scope), (), Nil())
        raise self.fail(f"expected a process, found {tok.text or 'end of input'!r}")

    def _output_tail(self, subj: Name, scope: dict[str, Name]) -> Process:
        self.expect("<")
        payload: list[Value] = []
        if self.peek().text != ">":
            payload.append(self.parse_value(scope))
            while self.peek().text == ",":
                self.next()
                payload.append(self.parse_value(scope))
        self.expect(">")
        return Out(subj, tuple(payload))

    def _input_tail(self, scope: dict[str, Name]) -> tuple[tuple[Name, ...], Process]:
        binders: list[Name] = []
        spellings: list[str] = []
        if self.peek().text == "(":
            self.next()
            if self.peek().text != ")":
                spellings.append(self.take_name_text())
                while self.peek().text == ",":
                    self.next()
                    spellings.append(self.take_name_text())
            self.expect(")")
        for s in spellings:
            binders.append(fresh(s))
        inner = dict(scope)
        for s, b in zip(spellings, binders):
            inner[s] = b
        if self.peek().text == ".":
            self.next()
            body = self.parse_term(inner)
        else:
            body = Nil()
        return tuple(binders), body

    def _restriction(self, scope: dict[str, Name]) -> Process:
        spelling = self.take_name_text()
        annotation, functional = self._res_modifiers()
        binder = fresh(spelling)
        inner = dict(scope)
        inner[spelling] = binder
        if self.peek().text == ".":
            self.next()
            body = self.parse_term(inner)
        elif self.peek().text == "(":
            self.next()
            body = self.parse_process(inner)
            self.expect(")")
        else:
            raise self.fail("expected '.' or '(' after restriction")
        return Res(binder, annotation, functional, body)

    def _paren_new(self, scope: dict[str, Name]) -> Process:
        self.expect("(")
        self.expect("new")
        spelling = self.take_name_text()
        annotation, functional = self._res_modifiers()
        binder = fresh(spelling)
        inner = dict(scope)
        inner[spelling] = binder
        if self.peek().text == ")":
            # (new a)(P): the body follows the closing parenthesis
            self.next()
            body = self.parse_term(inner)
            return Res(binder, annotation, functional, body)
        if self.peek().text == ".":
            self.next()
            body = self.parse_term(inner)
        elif self.peek().text == "(":
            self.next()
            body = self.parse_process(inner)
            self.expect(")")
        else:
            raise self.fail("expected '.', ')' or '(' in restriction")
        # an ordinary restriction that merely opened inside parentheses
        proc: Process = Res(binder, annotation, functional, body)
        while self.peek().text == "|":
            self.next()
            proc = Par(proc, self.parse_term(scope))
        self.expect(")")
        return proc

    def _res_modifiers(self) -> tuple[Type | None, bool]:
        annotation: Type | None = None
        functional = False
        while True:
            tok = self.peek()
            if tok.text == ":" and annotation is None:
                self.next()
                annotation = self.parse_type()
            elif tok.text == "fun" and not functional:
                self.next()
                functional = True
            else:
                return annotation, functional


def parse_process(text: str) -> Process:
    """Parse a process; all binders come out globally fresh."""
    p = _Parser(text)
    proc = p.parse_process({})
    tok = p.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
    return proc


def parse_type(text: str) -> Type:
    p = _Parser(text)
    t = p.parse_type()
    tok = p.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
    return t


def parse_env_file(text: str) -> list[tuple[str, str, Type]]:
    """Parse `name : type` lines; a leading `fun` or `isolated` sets the role.

    Returns (role, spelling, type) triples with role in {imp, fun, isolated}.
    """
    entries: list[tuple[str, str, Type]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("--", 1)[0].strip()
        if not line:
            continue
        role = "imp"
        for marker in ("isolated", "fun"):
            if line.startswith(marker + " "):
                role = marker
                line = line[len(marker) :].strip()
                break
        if ":" not in line:
            raise ParseError("expected 'name : type'", lineno, 1)
        name_part, type_part = line.split(":", 1)
        spelling = name_part.strip()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", spelling):
            raise ParseError(f"bad name {spelling!r}", lineno, 1)
        entries.append((role, spelling, parse_type(type_part.strip())))
    return entries
