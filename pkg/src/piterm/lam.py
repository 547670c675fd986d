"""Simply-typed lambda-calculus front end and the parallel call-by-value
encoding into the localised pi-calculus.

An abstraction becomes a replicated server on a fresh name, a variable is
returned on its continuation channel, and an application evaluates both
sides in parallel before joining them:

    [x]p      = p<x>
    [\\x.M]p   = new y.(!y(x,q).[M]q | p<y>)
    [M N]p    = new q.new r.([M]q | [N]r | q(f).r(z).f<z,p>)
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import IllTypedLambda, ParseError
from .syntax import In, Name, NameRef, Out, Par, Process, RepIn, Res, fresh


class LambdaTerm:
    pass


@dataclass(frozen=True)
class LVar(LambdaTerm):
    name: str


@dataclass(frozen=True)
class LAbs(LambdaTerm):
    var: str
    body: LambdaTerm


@dataclass(frozen=True)
class LApp(LambdaTerm):
    fn: LambdaTerm
    arg: LambdaTerm


class LambdaType:
    pass


@dataclass(frozen=True)
class LBase(LambdaType):
    name: str


@dataclass(frozen=True)
class LArrow(LambdaType):
    left: LambdaType
    right: LambdaType


@dataclass(frozen=True)
class LTVar(LambdaType):
    id: int


def pretty_lambda_type(t: LambdaType) -> str:
    if isinstance(t, LBase):
        return t.name
    if isinstance(t, LTVar):
        return f"'{t.id}"
    if isinstance(t, LArrow):
        left = pretty_lambda_type(t.left)
        if isinstance(t.left, LArrow):
            left = f"({left})"
        return f"{left} -> {pretty_lambda_type(t.right)}"
    raise TypeError(f"not a lambda type: {t!r}")


def pretty_lambda(m: LambdaTerm) -> str:
    if isinstance(m, LVar):
        return m.name
    if isinstance(m, LAbs):
        return f"\\{m.var}. {pretty_lambda(m.body)}"
    if isinstance(m, LApp):
        fn = pretty_lambda(m.fn)
        if isinstance(m.fn, LAbs):
            fn = f"({fn})"
        arg = pretty_lambda(m.arg)
        if isinstance(m.arg, (LApp, LAbs)):
            arg = f"({arg})"
        return f"{fn} {arg}"
    raise TypeError(f"not a lambda term: {m!r}")


# ---------------------------------------------------------------------------
# Parsing

_LAM_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>--[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<arrow>->)
  | (?P<op>[\\().:])
    """,
    re.VERBOSE,
)


def _lam_tokens(text: str) -> list[tuple[str, str, int, int]]:
    out = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _LAM_TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        if m.lastgroup not in ("ws", "comment"):
            out.append((m.lastgroup, m.group(), line, col))
        chunk = m.group()
        if "\n" in chunk:
            line += chunk.count("\n")
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    out.append(("eof", "", line, col))
    return out


class _LamParser:
    def __init__(self, text: str):
        self.toks = _lam_tokens(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        t = self.toks[self.pos]
        if t[0] != "eof":
            self.pos += 1
        return t

    def expect(self, text: str):
        kind, tok, line, col = self.next()
        if tok != text:
            raise ParseError(f"expected {text!r}, found {tok or 'end of input'!r}", line, col)

    def parse_type(self) -> LambdaType:
        left = self._type_atom()
        if self.peek()[1] == "->":
            self.next()
            return LArrow(left, self.parse_type())
        return left

    def _type_atom(self) -> LambdaType:
        kind, tok, line, col = self.next()
        if tok == "(":
            t = self.parse_type()
            self.expect(")")
            return t
        if kind == "name":
            return LBase(tok)
        raise ParseError(f"expected a type, found {tok or 'end of input'!r}", line, col)

    def parse_term(self) -> LambdaTerm:
        if self.peek()[1] == "\\":
            self.next()
            kind, tok, line, col = self.next()
            if kind != "name":
                raise ParseError("expected a variable after '\\'", line, col)
            self.expect(".")
            return LAbs(tok, self.parse_term())
        out = self._term_atom()
        while self.peek()[1] in ("(", "\\") or self.peek()[0] == "name":
            if self.peek()[1] == "\\":
                out = LApp(out, self.parse_term())
                break
            out = LApp(out, self._term_atom())
        return out

    def _term_atom(self) -> LambdaTerm:
        kind, tok, line, col = self.next()
        if tok == "(":
            t = self.parse_term()
            self.expect(")")
            return t
        if kind == "name":
            return LVar(tok)
        raise ParseError(f"expected a term, found {tok or 'end of input'!r}", line, col)


def parse_lambda_term(text: str) -> LambdaTerm:
    p = _LamParser(text)
    m = p.parse_term()
    kind, tok, line, col = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected trailing input {tok!r}", line, col)
    return m


def parse_lambda_file(text: str) -> tuple[dict[str, LambdaType], LambdaTerm]:
    """Header lines `name : type` declare free variables; the rest is the term."""
    decls: dict[str, LambdaType] = {}
    lines = text.splitlines()
    body_from = 0
    decl_re = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_']*)\s*:(.*)$")
    for i, raw in enumerate(lines):
        stripped = raw.split("--", 1)[0]
        if not stripped.strip():
            body_from = i + 1
            continue
        m = decl_re.match(stripped)
        if m:
            p = _LamParser(m.group(2))
            decls[m.group(1)] = p.parse_type()
            if p.peek()[0] != "eof":
                raise ParseError("trailing input after type", i + 1, 1)
            body_from = i + 1
        else:
            break
    term_text = "\n".join(lines[body_from:])
    if not term_text.strip():
        raise ParseError("missing term", len(lines), 1)
    return decls, parse_lambda_term(term_text)


# ---------------------------------------------------------------------------
# Simple typing


class _LamUnifier:
    def __init__(self) -> None:
        self.sub: dict[int, LambdaType] = {}
        self._next = 0

    def fresh(self) -> LTVar:
        self._next += 1
        return LTVar(self._next)

    def find(self, t: LambdaType) -> LambdaType:
        while isinstance(t, LTVar) and t.id in self.sub:
            t = self.sub[t.id]
        return t

    def occurs(self, vid: int, t: LambdaType) -> bool:
        t = self.find(t)
        if isinstance(t, LTVar):
            return t.id == vid
        if isinstance(t, LArrow):
            return self.occurs(vid, t.left) or self.occurs(vid, t.right)
        return False

    def unify(self, a: LambdaType, b: LambdaType) -> None:
        a, b = self.find(a), self.find(b)
        if isinstance(a, LTVar) and isinstance(b, LTVar) and a.id == b.id:
            return
        if isinstance(a, LTVar):
            if self.occurs(a.id, b):
                raise IllTypedLambda("occurs check failed: recursive type required")
            self.sub[a.id] = b
            return
        if isinstance(b, LTVar):
            self.unify(b, a)
            return
        if isinstance(a, LBase) and isinstance(b, LBase) and a.name == b.name:
            return
        if isinstance(a, LArrow) and isinstance(b, LArrow):
            self.unify(a.left, b.left)
            self.unify(a.right, b.right)
            return
        raise IllTypedLambda(
            f"cannot unify {pretty_lambda_type(self.resolve(a))} with "
            f"{pretty_lambda_type(self.resolve(b))}"
        )

    def resolve(self, t: LambdaType) -> LambdaType:
        t = self.find(t)
        if isinstance(t, LArrow):
            return LArrow(self.resolve(t.left), self.resolve(t.right))
        return t


def check_stlc(delta: dict[str, LambdaType], m: LambdaTerm) -> LambdaType:
    """Principal simple type of `m`; free variables missing from `delta` get
    fresh type variables shared across all their occurrences."""
    uni = _LamUnifier()
    free_ctx: dict[str, LambdaType] = dict(delta)

    def infer(term: LambdaTerm, bound: dict[str, LambdaType]) -> LambdaType:
        if isinstance(term, LVar):
            if term.name in bound:
                return bound[term.name]
            if term.name not in free_ctx:
                free_ctx[term.name] = uni.fresh()
            return free_ctx[term.name]
        if isinstance(term, LAbs):
            a = uni.fresh()
            inner = dict(bound)
            inner[term.var] = a
            r = infer(term.body, inner)
            return LArrow(a, r)
        if isinstance(term, LApp):
            tf = infer(term.fn, bound)
            ta = infer(term.arg, bound)
            res = uni.fresh()
            uni.unify(tf, LArrow(ta, res))
            return res
        raise TypeError(f"not a lambda term: {term!r}")

    return uni.resolve(infer(m, {}))


# ---------------------------------------------------------------------------
# The encoding


def encode(m: LambdaTerm, p: Name, delta: dict[str, LambdaType] | None = None) -> Process:
    """Parallel call-by-value image of `m` with result channel `p`.

    The simple-type gate runs first; fresh channel names are numbered
    deterministically per call so output is stable.
    """
    check_stlc(delta or {}, m)
    counters = {"y": 0, "q": 0, "r": 0, "f": 0, "z": 0}

    def mk(prefix: str) -> Name:
        counters[prefix] += 1
        return fresh(f"{prefix}{counters[prefix]}")

    frees: dict[str, Name] = {}

    def var_name(spelling: str, scope: dict[str, Name]) -> Name:
        if spelling in scope:
            return scope[spelling]
        if spelling not in frees:
            frees[spelling] = fresh(spelling)
        return frees[spelling]

    def go(term: LambdaTerm, dest: Name, scope: dict[str, Name]) -> Process:
        if isinstance(term, LVar):
            return Out(dest, (NameRef(var_name(term.name, scope)),))
        if isinstance(term, LAbs):
            y = mk("y")
            q = mk("q")
            x = fresh(term.var)
            inner = dict(scope)
            inner[term.var] = x
            server = RepIn(y, (x, q), go(term.body, q, inner))
            return Res(y, None, False, Par(server, Out(dest, (NameRef(y),))))
        if isinstance(term, LApp):
            q = mk("q")
            r = mk("r")
            f = mk("f")
            z = mk("z")
            join = In(q, (f,), In(r, (z,), Out(f, (NameRef(z), NameRef(dest)))))
            body = Par(go(term.fn, q, scope), Par(go(term.arg, r, scope), join))
            return Res(q, None, False, Res(r, None, False, body))
        raise TypeError(f"not a lambda term: {term!r}")

    return go(m, p, {})
