"""Polynomials with rational coefficients and systems of (in)equalities over [0,1]."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

Monomial = tuple  # sorted tuple of variable names, () for the constant


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        self.terms: dict = {}
        if terms:
            for m, c in terms.items():
                c = Fraction(c)
                if c:
                    self.terms[tuple(sorted(m))] = c

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): Fraction(c)})

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls({(name,): Fraction(1)})

    @staticmethod
    def lift(x) -> "Poly":
        if isinstance(x, Poly):
            return x
        if isinstance(x, str):
            return Poly.var(x)
        return Poly.const(x)

    def __add__(self, other) -> "Poly":
        other = Poly.lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-Poly.lift(other))

    def __rsub__(self, other) -> "Poly":
        return Poly.lift(other) - self

    def __mul__(self, other) -> "Poly":
        other = Poly.lift(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(sorted(m1 + m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    @property
    def constant(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def is_linear(self) -> bool:
        return self.degree <= 1

    def is_const(self) -> bool:
        return self.degree == 0

    def variables(self) -> set:
        return {v for m in self.terms for v in m}

    def evaluate(self, env: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for v in m:
                t *= env[v]
            total += t
        return total

    def substitute(self, env: Mapping[str, Fraction]) -> "Poly":
        out: dict = {}
        for m, c in self.terms.items():
            rest = []
            for v in m:
                if v in env:
                    c = c * env[v]
                else:
                    rest.append(v)
            if c:
                key = tuple(rest)
                out[key] = out.get(key, 0) + c
        return Poly(out)

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0])):
            mono = "*".join(m)
            if not m:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts)


RELS = ("<=", "<", "=")


@dataclass(frozen=True)
class Constraint:
    """``expr rel 0`` with rel one of <=, <, =."""

    expr: Poly
    rel: str

    @staticmethod
    def make(lhs, rel: str, rhs) -> "Constraint":
        lhs, rhs = Poly.lift(lhs), Poly.lift(rhs)
        if rel in (">=", ">"):
            lhs, rhs, rel = rhs, lhs, {">=": "<=", ">": "<"}[rel]
        if rel not in RELS:
            raise ValueError(f"unknown relation {rel!r}")
        return Constraint(lhs - rhs, rel)

    def holds(self, env: Mapping[str, Fraction]) -> bool:
        v = self.expr.evaluate(env)
        return v <= 0 if self.rel == "<=" else v < 0 if self.rel == "<" else v == 0

    def __str__(self):
        return f"{self.expr} {self.rel} 0"


@dataclass
class IneqSystem:
    constraints: list = field(default_factory=list)
    extra_vars: set = field(default_factory=set)

    def add(self, lhs, rel: str, rhs) -> None:
        self.constraints.append(Constraint.make(lhs, rel, rhs))

    def extend(self, cs: Iterable[Constraint]) -> None:
        self.constraints.extend(cs)

    def variables(self) -> set:
        out = set(self.extra_vars)
        for c in self.constraints:
            out |= c.expr.variables()
        return out

    def is_linear(self) -> bool:
        return all(c.expr.is_linear() for c in self.constraints)

    def copy(self) -> "IneqSystem":
        return IneqSystem(list(self.constraints), set(self.extra_vars))

    def __len__(self):
        return len(self.constraints)


@dataclass
class FeasibilityResult:
    status: str  # SAT | UNSAT | UNKNOWN
    witness: dict | None = None
    note: str = ""

    @property
    def sat(self) -> bool:
        return self.status == "SAT"


def substitute_check(s: IneqSystem, w: Mapping[str, Fraction]) -> bool:
    missing = s.variables() - set(w)
    if missing:
        raise KeyError(f"witness misses variables {sorted(missing)}")
    if any(not 0 <= w[v] <= 1 for v in s.variables()):
        return False
    return all(c.holds(w) for c in s.constraints)


def to_smtlib(s: IneqSystem) -> str:
    def number(c: Fraction) -> str:
        n = str(abs(c.numerator))
        if c.denominator != 1:
            n = f"(/ {n} {c.denominator})"
        return n if c >= 0 else f"(- {n})"

    def term(p: Poly) -> str:
        parts = [number(c) if not m else f"(* {number(c)} {' '.join(m)})" for m, c in p.terms.items()]
        if not parts:
            return "0"
        return parts[0] if len(parts) == 1 else f"(+ {' '.join(parts)})"

    lines = ["(set-logic QF_NRA)"]
    for v in sorted(s.variables()):
        lines.append(f"(declare-fun {v} () Real)")
        lines.append(f"(assert (and (<= 0 {v}) (<= {v} 1)))")
    for c in s.constraints:
        lines.append(f"(assert ({c.rel} {term(c.expr)} 0))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
