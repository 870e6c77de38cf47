"""ASCII reader and printer.

Precedence, loosest first: ``->`` and ``=>`` (right associative), ``+``,
``*`` and ``(.)``, then the prefix operators.  Inside ``Pr_A(...)`` the
event grammar applies: ``~``, ``&``, ``K_A``, ``Kd_A``, ``[a]``, ``<a>``.
Error offsets are 1-based character columns.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .formula import (
    Box, CAnd, CNeg, Const, FNeg, Formula, Half, Knows, LImp, PImp, PrAtom, Prod, Var,
    const, diamond, ediamond, ekdiamond, kdiamond, odot,
)


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass
class Token:
    kind: str
    text: str
    pos: int
    arg: object = None


_TOKEN_RE = [
    ("ODOT", re.compile(r"\(\.\)")),
    ("LIMP", re.compile(r"->")),
    ("PIMP", re.compile(r"=>")),
    ("HALF", re.compile(r"1/2")),
    ("CONST", re.compile(r"c\(\s*(\d+)\s*(?:/\s*(\d+)\s*)?\)")),
    ("PR", re.compile(r"Pr_([A-Za-z0-9]+)\s*\(")),
    ("KD", re.compile(r"Kd_([A-Za-z0-9]+)")),
    ("K", re.compile(r"K_([A-Za-z0-9]+)")),
    ("BOX", re.compile(r"\[\s*([A-Za-z0-9_]+)\s*\]")),
    ("DIA", re.compile(r"<\s*([A-Za-z0-9_]+)\s*>")),
    ("DELTA", re.compile(r"D")),
    ("VAR", re.compile(r"[a-z][a-zA-Z0-9_]*")),
    ("SYM", re.compile(r"[()!~&*+]")),
]


def tokenize(text: str) -> list[Token]:
    out = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        for kind, rx in _TOKEN_RE:
            m = rx.match(text, i)
            if m:
                break
        else:
            raise ParseError(f"unexpected character {text[i]!r}", i + 1)
        arg = None
        if kind == "CONST":
            num, den = int(m.group(1)), int(m.group(2) or 1)
            if den == 0 or num > den:
                raise ParseError("constant outside [0,1]", i + 1)
            arg = Fraction(num, den)
        elif kind in ("PR", "KD", "K", "BOX", "DIA"):
            arg = m.group(1)
        if kind == "SYM":
            kind = m.group(0)
        out.append(Token(kind, m.group(0), i, arg))
        i = m.end()
    out.append(Token("EOF", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, layer: str):
        self.toks = tokenize(text)
        self.i = 0
        self.layer = layer

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        what = "end of input" if tok.kind == "EOF" else repr(tok.text)
        raise ParseError(f"{msg}, found {what}", tok.pos + 1)

    def take(self, kind: str) -> Token:
        if self.tok.kind != kind:
            self.fail(f"expected {kind!r}")
        t = self.tok
        self.i += 1
        return t

    def done(self, f: Formula) -> Formula:
        if self.tok.kind != "EOF":
            self.fail("unexpected token")
        return f

    # fuzzy layer

    def arrow(self) -> Formula:
        left = self.plus()
        if self.tok.kind in ("LIMP", "PIMP"):
            op = self.take(self.tok.kind).kind
            right = self.arrow()
            return LImp(left, right) if op == "LIMP" else PImp(left, right)
        return left

    def plus(self) -> Formula:
        f = self.mult()
        while self.tok.kind == "+":
            self.i += 1
            f = LImp(FNeg(f), self.mult())
        return f

    def mult(self) -> Formula:
        f = self.unary()
        while self.tok.kind in ("*", "ODOT"):
            op = self.take(self.tok.kind).kind
            g = self.unary()
            f = Prod(f, g) if op == "*" else odot(f, g)
        return f

    def unary(self) -> Formula:
        t = self.tok
        if t.kind == "!":
            self.i += 1
            return FNeg(self.unary())
        if t.kind == "DELTA":
            self.i += 1
            from .formula import delta
            return delta(self.unary())
        if t.kind == "K":
            self.i += 1
            return Knows(t.arg, self.unary())
        if t.kind == "KD":
            self.i += 1
            return kdiamond(t.arg, self.unary())
        if t.kind == "BOX":
            self.i += 1
            return Box(t.arg, self.unary())
        if t.kind == "DIA":
            self.i += 1
            return diamond(t.arg, self.unary())
        return self.atom()

    def atom(self) -> Formula:
        t = self.tok
        if t.kind == "(":
            self.i += 1
            f = self.arrow()
            self.take(")")
            return f
        if t.kind == "HALF":
            self.i += 1
            return Half()
        if t.kind == "CONST":
            self.i += 1
            return const(t.arg)
        if t.kind == "PR":
            if self.layer == "mod":
                self.fail("probability atom in a pure modal formula", t)
            self.i += 1
            ev = self.eand()
            self.take(")")
            return PrAtom(t.arg, ev)
        if t.kind == "VAR":
            if self.layer == "prob":
                self.fail("bare variable outside a probability atom", t)
            self.i += 1
            return Var(t.text)
        if t.kind in ("~", "&"):
            self.fail("classical connective outside a probability atom", t)
        self.fail("expected a formula")

    # event layer

    def eand(self) -> Formula:
        f = self.eunary()
        while self.tok.kind == "&":
            self.i += 1
            f = CAnd(f, self.eunary())
        return f

    def eunary(self) -> Formula:
        t = self.tok
        if t.kind == "~":
            self.i += 1
            return CNeg(self.eunary())
        if t.kind == "K":
            self.i += 1
            return Knows(t.arg, self.eunary())
        if t.kind == "KD":
            self.i += 1
            return ekdiamond(t.arg, self.eunary())
        if t.kind == "BOX":
            self.i += 1
            return Box(t.arg, self.eunary())
        if t.kind == "DIA":
            self.i += 1
            return ediamond(t.arg, self.eunary())
        if t.kind == "(":
            self.i += 1
            f = self.eand()
            self.take(")")
            return f
        if t.kind == "VAR":
            self.i += 1
            return Var(t.text)
        if t.kind == "PR":
            self.fail("probability atom inside an event formula", t)
        if t.kind in ("!", "LIMP", "PIMP", "*", "+", "ODOT", "DELTA", "HALF", "CONST"):
            self.fail("fuzzy connective inside an event formula", t)
        self.fail("expected an event formula")


def parse(text: str, layer: str = "auto") -> Formula:
    """Read a formula of the given layer: event, prob, mod, or auto."""
    if layer == "auto":
        layer = "prob" if "Pr_" in text else "mod"
    if layer not in ("event", "prob", "mod"):
        raise ValueError(f"unknown layer {layer!r}")
    p = _Parser(text, layer)
    if layer == "event":
        return p.done(p.eand())
    return p.done(p.arrow())


# printing

_ARROW, _PLUS, _MULT, _UNARY, _ATOM = 1, 2, 3, 4, 5


def _is_zero(f: Formula) -> bool:
    return (
        isinstance(f, FNeg) and isinstance(f.sub, LImp)
        and isinstance(f.sub.left, Half) and isinstance(f.sub.right, Half)
    )


def _fuzzy(f: Formula) -> tuple[str, int]:
    if isinstance(f, Var):
        return f.name, _ATOM
    if isinstance(f, Half):
        return "1/2", _ATOM
    if isinstance(f, Const):
        return f"c({f.value})", _ATOM
    if isinstance(f, PrAtom):
        return f"Pr_{f.agent}({to_text(f.event, 'event')})", _ATOM
    if isinstance(f, PImp) and isinstance(f.left, FNeg) and _is_zero(f.right):
        return "D" + _wrap(f.left.sub, _UNARY), _UNARY
    if isinstance(f, FNeg):
        g = f.sub
        if isinstance(g, Box) and isinstance(g.sub, FNeg):
            return f"<{g.action}>" + _wrap(g.sub.sub, _UNARY), _UNARY
        if isinstance(g, Knows) and isinstance(g.sub, FNeg):
            return f"Kd_{g.agent} " + _wrap(g.sub.sub, _UNARY), _UNARY
        if isinstance(g, LImp) and isinstance(g.right, FNeg):
            return _wrap(g.left, _MULT) + " (.) " + _wrap(g.right.sub, _UNARY), _MULT
        return "!" + _wrap(g, _UNARY), _UNARY
    if isinstance(f, Knows):
        return f"K_{f.agent} " + _wrap(f.sub, _UNARY), _UNARY
    if isinstance(f, Box):
        return f"[{f.action}]" + _wrap(f.sub, _UNARY), _UNARY
    if isinstance(f, Prod):
        return _wrap(f.left, _MULT) + " * " + _wrap(f.right, _UNARY), _MULT
    if isinstance(f, LImp) and isinstance(f.left, FNeg):
        return _wrap(f.left.sub, _PLUS) + " + " + _wrap(f.right, _MULT), _PLUS
    if isinstance(f, LImp):
        return _wrap(f.left, _PLUS) + " -> " + _wrap(f.right, _ARROW), _ARROW
    if isinstance(f, PImp):
        return _wrap(f.left, _PLUS) + " => " + _wrap(f.right, _ARROW), _ARROW
    raise TypeError(f"not a fuzzy-layer node: {f!r}")


def _wrap(f: Formula, need: int) -> str:
    s, lvl = _fuzzy(f)
    return s if lvl >= need else f"({s})"


def _event(f: Formula) -> tuple[str, int]:
    if isinstance(f, Var):
        return f.name, _ATOM
    if isinstance(f, CNeg):
        g = f.sub
        if isinstance(g, Box) and isinstance(g.sub, CNeg):
            return f"<{g.action}>" + _ewrap(g.sub.sub, _UNARY), _UNARY
        if isinstance(g, Knows) and isinstance(g.sub, CNeg):
            return f"Kd_{g.agent} " + _ewrap(g.sub.sub, _UNARY), _UNARY
        return "~" + _ewrap(g, _UNARY), _UNARY
    if isinstance(f, Knows):
        return f"K_{f.agent} " + _ewrap(f.sub, _UNARY), _UNARY
    if isinstance(f, Box):
        return f"[{f.action}]" + _ewrap(f.sub, _UNARY), _UNARY
    if isinstance(f, CAnd):
        return _ewrap(f.left, _MULT) + " & " + _ewrap(f.right, _UNARY), _MULT
    raise TypeError(f"not an event-layer node: {f!r}")


def _ewrap(f: Formula, need: int) -> str:
    s, lvl = _event(f)
    return s if lvl >= need else f"({s})"


def to_text(f: Formula, layer: str = "auto") -> str:
    if layer == "event" or (layer == "auto" and isinstance(f, (CNeg, CAnd))):
        return _event(f)[0]
    if layer == "auto":
        try:
            return _fuzzy(f)[0]
        except TypeError:
            return _event(f)[0]
    return _fuzzy(f)[0]
