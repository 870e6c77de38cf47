"""Abstract syntax shared by the event, probabilistic and pure modal layers."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union


def _node(cls):
    """Frozen dataclass whose hash is computed once; formulas are hashed constantly."""
    cls = dataclass(frozen=True)(cls)
    by_fields = cls.__hash__

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = by_fields(self)
            object.__setattr__(self, "_hash", h)
            return h

    def __getstate__(self):
        # string hashes differ between processes
        return {k: v for k, v in self.__dict__.items() if k != "_hash"}

    cls.__hash__ = __hash__
    cls.__getstate__ = __getstate__
    return cls


@_node
class Var:
    name: str


@_node
class CNeg:
    sub: "Formula"


@_node
class CAnd:
    left: "Formula"
    right: "Formula"


@_node
class Knows:
    agent: str
    sub: "Formula"


@_node
class Box:
    action: str
    sub: "Formula"


@_node
class PrAtom:
    agent: str
    event: "Formula"


@_node
class FNeg:
    sub: "Formula"


@_node
class LImp:
    left: "Formula"
    right: "Formula"


@_node
class Prod:
    left: "Formula"
    right: "Formula"


@_node
class PImp:
    left: "Formula"
    right: "Formula"


@_node
class Half:
    pass


@_node
class Const:
    value: Fraction

    def __post_init__(self):
        v = Fraction(self.value)
        if not 0 <= v <= 1:
            raise ValueError(f"constant {v} outside [0,1]")
        if v == Fraction(1, 2):
            raise ValueError("1/2 is the primitive half; use const()")
        object.__setattr__(self, "value", v)


Formula = Union[Var, CNeg, CAnd, Knows, Box, PrAtom, FNeg, LImp, Prod, PImp, Half, Const]

HALF = Half()
BINARY = (CAnd, LImp, Prod, PImp)
UNARY = (CNeg, FNeg)
MODAL = (Knows, Box)


def const(q) -> Formula:
    """Native constant; 1/2 normalizes to the primitive half."""
    q = Fraction(q)
    return HALF if q == Fraction(1, 2) else Const(q)


def children(f: Formula) -> tuple:
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, UNARY) or isinstance(f, MODAL):
        return (f.sub,)
    if isinstance(f, PrAtom):
        return (f.event,)
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def size(f: Formula) -> int:
    """AST nodes plus one per agent or action annotation."""
    n = 0
    for g in walk(f):
        n += 1
        if isinstance(g, (Knows, Box, PrAtom)):
            n += 1
    return n


def variables(f: Formula) -> set[str]:
    return {g.name for g in walk(f) if isinstance(g, Var)}


def pratoms(f: Formula) -> set[PrAtom]:
    # pratom nodes are never nested, so the walk does not need to stop at them
    return {g for g in walk(f) if isinstance(g, PrAtom)}


def _outer(f: Formula) -> Iterator[Formula]:
    """Nodes of f outside any probability atom."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if not isinstance(g, PrAtom):
            stack.extend(children(g))


def outer_agents(f: Formula) -> set[str]:
    return {g.agent for g in _outer(f) if isinstance(g, Knows)}


def outer_actions(f: Formula) -> set[str]:
    return {g.action for g in _outer(f) if isinstance(g, Box)}


def event_agents(f: Formula) -> set[str]:
    return {g.agent for g in walk(f) if isinstance(g, Knows)}


def event_actions(f: Formula) -> set[str]:
    return {g.action for g in walk(f) if isinstance(g, Box)}


def is_event(f: Formula) -> bool:
    return all(isinstance(g, (Var, CNeg, CAnd, Knows, Box)) for g in walk(f))


def is_mod(f: Formula) -> bool:
    return all(
        isinstance(g, (Var, FNeg, LImp, Prod, PImp, Half, Const, Knows, Box)) for g in walk(f)
    )


def is_prob(f: Formula) -> bool:
    for g in _outer(f):
        if isinstance(g, PrAtom):
            if not is_event(g.event):
                return False
        elif not isinstance(g, (FNeg, LImp, Prod, PImp, Half, Const, Knows, Box)):
            return False
    return True


def is_closed(f: Formula) -> bool:
    """No atoms and no modalities: the value is the same at every world."""
    return all(isinstance(g, (FNeg, LImp, Prod, PImp, Half, Const)) for g in walk(f))


def closed_value(f: Formula) -> Fraction:
    """Value of an atom- and modality-free formula."""
    if isinstance(f, Half):
        return Fraction(1, 2)
    if isinstance(f, Const):
        return f.value
    if isinstance(f, FNeg):
        return 1 - closed_value(f.sub)
    x, y = closed_value(f.left), closed_value(f.right)
    if isinstance(f, LImp):
        return min(Fraction(1), 1 - x + y)
    if isinstance(f, Prod):
        return x * y
    if isinstance(f, PImp):
        return Fraction(1) if x <= y else y / x
    raise TypeError(f"not a closed formula: {f!r}")


def subformulas(f: Formula) -> list[Formula]:
    seen: dict[Formula, None] = {}
    for g in walk(f):
        seen.setdefault(g, None)
    return list(seen)


def closure_neg(alpha: Formula) -> set[Formula]:
    sub = subformulas(alpha)
    return set(sub) | {CNeg(b) for b in sub}


# derived connectives


def one() -> Formula:
    return LImp(HALF, HALF)


def zero() -> Formula:
    return FNeg(one())


def oplus(a: Formula, b: Formula) -> Formula:
    return LImp(FNeg(a), b)


def odot(a: Formula, b: Formula) -> Formula:
    return FNeg(LImp(a, FNeg(b)))


def delta(a: Formula) -> Formula:
    # crisp truth: 1 iff a = 1 (see the notes on the defining formula)
    return PImp(FNeg(a), zero())


def diamond(action: str, a: Formula) -> Formula:
    return FNeg(Box(action, FNeg(a)))


def kdiamond(agent: str, a: Formula) -> Formula:
    return FNeg(Knows(agent, FNeg(a)))


def ediamond(action: str, a: Formula) -> Formula:
    """Event-layer <a>."""
    return CNeg(Box(action, CNeg(a)))


def ekdiamond(agent: str, a: Formula) -> Formula:
    return CNeg(Knows(agent, CNeg(a)))


def iff(a: Formula, b: Formula) -> Formula:
    return odot(LImp(a, b), LImp(b, a))


def rational(q) -> Formula:
    """Dyadic constant k/2^m assembled from half with prod and oplus."""
    q = Fraction(q)
    if not 0 <= q <= 1:
        raise ValueError(f"{q} outside [0,1]")
    d = q.denominator
    if d & (d - 1):
        raise ValueError(f"{q} is not dyadic; use a native constant")
    if q == 0:
        return zero()
    if q == 1:
        return one()
    terms = []
    rest, i = q, 0
    while rest:
        i += 1
        bit = Fraction(1, 2**i)
        if rest >= bit:
            rest -= bit
            t: Formula = HALF
            for _ in range(i - 1):
                t = Prod(HALF, t)
            terms.append(t)
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = oplus(t, out)
    return out


_DESUGAR = {
    "one": one,
    "zero": zero,
    "oplus": oplus,
    "odot": odot,
    "delta": delta,
    "diamond": diamond,
    "kdiamond": kdiamond,
    "rational": rational,
}


def desugar(name: str, *args) -> Formula:
    try:
        fn = _DESUGAR[name]
    except KeyError:
        raise ValueError(f"unknown connective {name!r}") from None
    return fn(*args)


def odot_all(fs: list[Formula]) -> Formula:
    out = fs[0]
    for f in fs[1:]:
        out = odot(out, f)
    return out


def oplus_all(fs: list[Formula]) -> Formula:
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = oplus(f, out)
    return out
