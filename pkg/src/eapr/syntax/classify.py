"""Recognizers for the uniform literal and rule fragments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .formula import (
    Box, CNeg, FNeg, Formula, Knows, LImp, PrAtom, Var,
    closed_value, diamond, is_closed, kdiamond,
)

TAGS = (
    "UML_box", "UML_diamond", "UPL_box", "UPL_diamond",
    "UPR_rule", "EPR_rule", "UPL_set_member", "none",
)


@dataclass(frozen=True)
class FragmentClass:
    tag: str
    proper: bool = False

    def __str__(self):
        return self.tag


# event layer


def _ediamond_body(f: Formula, cls) -> Optional[tuple]:
    if isinstance(f, CNeg) and isinstance(f.sub, cls) and isinstance(f.sub.sub, CNeg):
        return f.sub, f.sub.sub.sub
    return None


def uml_kind(f: Formula, negfree: bool = False) -> Optional[tuple[str, int]]:
    """('box'|'dia'|'prop', depth) for a uniform modal literal, else None."""
    if isinstance(f, Var):
        return "prop", 0
    if not negfree and isinstance(f, CNeg) and isinstance(f.sub, Var):
        return "prop", 0
    if isinstance(f, (Box, Knows)):
        inner = uml_kind(f.sub, negfree)
        if inner and inner[0] in ("prop", "box"):
            return "box", inner[1] + 1
        return None
    for cls in (Box, Knows):
        hit = _ediamond_body(f, cls)
        if hit:
            inner = uml_kind(hit[1], negfree)
            if inner and inner[0] in ("prop", "dia"):
                return "dia", inner[1] + 1
    return None


def is_lambda(f: Formula) -> bool:
    return uml_kind(f, negfree=True) is not None


# probabilistic literals


@dataclass(frozen=True)
class Lit:
    """Uniform probabilistic literal.

    ``chain`` lists the outer modalities outermost first as ("K", agent) or
    ("A", action); ``box`` gives their common polarity (True for an empty
    chain).  ``neg`` marks a negated probability atom.
    """

    chain: tuple
    box: bool
    neg: bool
    agent: str
    event: Formula

    @property
    def proper(self) -> bool:
        return bool(self.chain)

    @property
    def atom(self) -> PrAtom:
        return PrAtom(self.agent, self.event)

    def negate(self) -> "Lit":
        return Lit(self.chain, not self.box if self.chain else True, not self.neg,
                   self.agent, self.event)

    def formula(self) -> Formula:
        f: Formula = self.atom
        if self.neg:
            f = FNeg(f)
        for kind, label in reversed(self.chain):
            if self.box:
                f = Knows(label, f) if kind == "K" else Box(label, f)
            else:
                f = kdiamond(label, f) if kind == "K" else diamond(label, f)
        return f


def lit_of(f: Formula) -> Optional[Lit]:
    if isinstance(f, PrAtom):
        return Lit((), True, False, f.agent, f.event) if is_lambda(f.event) else None
    if isinstance(f, FNeg) and isinstance(f.sub, PrAtom):
        g = lit_of(f.sub)
        return g.negate() if g else None
    if isinstance(f, (Box, Knows)):
        inner = lit_of(f.sub)
        if inner is None or (inner.chain and not inner.box):
            return None
        step = ("A", f.action) if isinstance(f, Box) else ("K", f.agent)
        return Lit((step,) + inner.chain, True, inner.neg, inner.agent, inner.event)
    if isinstance(f, FNeg) and isinstance(f.sub, (Box, Knows)) and isinstance(f.sub.sub, FNeg):
        inner = lit_of(f.sub.sub.sub)
        if inner is None or (inner.chain and inner.box):
            return None
        g = f.sub
        step = ("A", g.action) if isinstance(g, Box) else ("K", g.agent)
        return Lit((step,) + inner.chain, False, inner.neg, inner.agent, inner.event)
    return None


# rules and clauses


def is_zero(f: Formula) -> bool:
    return is_closed(f) and closed_value(f) == 0


def _odot_parts(f: Formula) -> list[Formula]:
    if isinstance(f, FNeg) and isinstance(f.sub, LImp) and isinstance(f.sub.right, FNeg):
        return _odot_parts(f.sub.left) + _odot_parts(f.sub.right.sub)
    return [f]


def _oplus_parts(f: Formula) -> list[Formula]:
    if isinstance(f, LImp) and isinstance(f.left, FNeg):
        return _oplus_parts(f.left.sub) + _oplus_parts(f.right)
    return [f]


def rule_of(f: Formula) -> Optional[tuple[list[Lit], Optional[Lit]]]:
    """Premises and head (None for the 0̄ head) of a rule written with ->."""
    if not isinstance(f, LImp):
        return None
    prem = [lit_of(g) for g in _odot_parts(f.left)]
    if any(p is None for p in prem):
        return None
    if is_zero(f.right):
        return prem, None
    head = lit_of(f.right)
    return (prem, head) if head else None


def clause_of_sum(f: Formula) -> Optional[list[Lit]]:
    parts = _oplus_parts(f)
    if len(parts) < 2:
        return None
    lits = [lit_of(g) for g in parts]
    return None if any(x is None for x in lits) else lits


def _kind(l: Lit) -> str:
    if not l.proper:
        return "prop"
    return "box" if l.box else "dia"


def upr_clause_ok(lits: list[Lit]) -> bool:
    boxes = [l for l in lits if _kind(l) == "box"]
    if len(boxes) > 1:
        return False
    if boxes:
        return all(_kind(l) == "dia" for l in lits if l is not boxes[0])
    return True


def epr_clause_ok(lits: list[Lit]) -> bool:
    dias = []
    for l in lits:
        k = _kind(l)
        if k == "dia":
            if l.neg:
                return False
            dias.append(l)
        elif k == "box" and not l.neg:
            return False
    if len(dias) > 1:
        return False
    return not dias or all(_kind(l) != "prop" for l in lits)


def upr_rule_clause(f: Formula) -> Optional[list[Lit]]:
    r = rule_of(f)
    if r is not None:
        prem, head = r
        if all(p.box for p in prem) and (head is None or head.box):
            lits = [p.negate() for p in prem] + ([head] if head else [])
            if upr_clause_ok(lits):
                return lits
    lits = clause_of_sum(f)
    if lits is not None and upr_clause_ok(lits):
        return lits
    return None


def epr_rule_clause(f: Formula) -> Optional[list[Lit]]:
    r = rule_of(f)
    if r is not None:
        prem, head = r
        if all(not p.proper or not p.box for p in prem) and (
            head is None or (head.proper and not head.box)
        ):
            lits = [p.negate() for p in prem] + ([head] if head else [])
            if epr_clause_ok(lits):
                return lits
    lits = clause_of_sum(f)
    if lits is not None and epr_clause_ok(lits):
        return lits
    return None


def classify(f: Formula) -> FragmentClass:
    k = uml_kind(f)
    if k is not None:
        return FragmentClass("UML_diamond" if k[0] == "dia" else "UML_box", k[1] > 0)
    lit = lit_of(f)
    if lit is not None:
        if not lit.proper:
            return FragmentClass("UPL_set_member", False)
        if lit.box:
            return FragmentClass("UPL_box", True)
        # a negated diamond literal is the empty-head form of a universal rule
        return FragmentClass("UPR_rule" if lit.neg else "UPL_diamond", True)
    lits = upr_rule_clause(f)
    if lits is not None:
        return FragmentClass("UPR_rule", any(l.proper for l in lits))
    lits = epr_rule_clause(f)
    if lits is not None:
        return FragmentClass("EPR_rule", any(l.proper for l in lits))
    return FragmentClass("none", False)


def member_clause(f: Formula, kind: str) -> Optional[list[Lit]]:
    """Clause literals of a theory member under the given fragment kind."""
    lit = lit_of(f)
    if lit is not None:
        return [lit]
    return upr_rule_clause(f) if kind == "UPR" else epr_rule_clause(f)


def classify_theory(fs: list[Formula]) -> Optional[str]:
    for kind in ("UPR", "EPR+"):
        if all(member_clause(f, kind) is not None for f in fs):
            return kind
    return None
