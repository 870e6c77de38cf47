"""Seeded random formulas, theories and models for differential testing."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional, Sequence

from .semantics import EventModel, Frame, ModModel, SIModel
from .syntax.classify import Lit
from .syntax.formula import (
    HALF, Box, CAnd, CNeg, FNeg, Formula, Knows, LImp, PImp, PrAtom, Prod, Var,
    ediamond, ekdiamond, odot_all, oplus_all, zero,
)

VARS = ("p", "q")
AGENTS = ("A", "B")
ACTIONS = ("a", "b")


def random_event(rng: random.Random, depth: int = 2, names: Sequence[str] = VARS,
                 agents: Sequence[str] = AGENTS, actions: Sequence[str] = ACTIONS) -> Formula:
    if depth <= 0 or rng.random() < 0.3:
        return Var(rng.choice(names))
    k = rng.randrange(4)
    if k == 0:
        return CNeg(random_event(rng, depth - 1, names, agents, actions))
    if k == 1:
        return CAnd(random_event(rng, depth - 1, names, agents, actions),
                    random_event(rng, depth - 1, names, agents, actions))
    if k == 2:
        return Knows(rng.choice(agents), random_event(rng, depth - 1, names, agents, actions))
    return Box(rng.choice(actions), random_event(rng, depth - 1, names, agents, actions))


def random_mod(rng: random.Random, size: int = 6, modal_depth: int = 2, names: Sequence[str] = VARS,
               agents: Sequence[str] = ("A",), actions: Sequence[str] = ("a",),
               product: bool = False, atom=None) -> Formula:
    """Random fuzzy formula with at most ``modal_depth`` nested modalities."""
    leaf = atom or (lambda: Var(rng.choice(names)))

    def gen(budget: int, md: int) -> Formula:
        if budget <= 1:
            return HALF if rng.random() < 0.08 else leaf()
        kinds = ["neg", "imp", "imp"]
        if md > 0:
            kinds += ["K", "box"]
        if product:
            kinds += ["prod", "pimp"]
        k = rng.choice(kinds)
        if k == "neg":
            return FNeg(gen(budget - 1, md))
        if k == "K":
            return Knows(rng.choice(agents), gen(budget - 1, md - 1))
        if k == "box":
            return Box(rng.choice(actions), gen(budget - 1, md - 1))
        split = rng.randrange(1, budget)
        a, b = gen(split, md), gen(budget - split, md)
        return {"imp": LImp, "prod": Prod, "pimp": PImp}[k](a, b)

    return gen(size, modal_depth)


def random_prob(rng: random.Random, size: int = 5, modal_depth: int = 1, event_depth: int = 1,
                names: Sequence[str] = VARS, agents: Sequence[str] = ("A",),
                actions: Sequence[str] = ("a",), product: bool = False) -> Formula:
    def atom():
        return PrAtom(rng.choice(agents), random_event(rng, event_depth, names, agents, actions))

    return random_mod(rng, size, modal_depth, names, agents, actions, product, atom)


# fragment theories


def _lambda(rng: random.Random, names, agents, actions) -> Formula:
    """A negation-free uniform modal literal of depth at most 1."""
    p = Var(rng.choice(names))
    k = rng.randrange(5)
    if k == 0:
        return p
    if k == 1:
        return Box(rng.choice(actions), p)
    if k == 2:
        return Knows(rng.choice(agents), p)
    if k == 3:
        return ediamond(rng.choice(actions), p)
    return ekdiamond(rng.choice(agents), p)


def random_lit(rng: random.Random, box: bool, proper: bool, neg: Optional[bool] = None,
               names=VARS, agents=("A",), actions=("a",)) -> Lit:
    chain = ()
    if proper:
        chain = tuple(
            ("A", rng.choice(actions)) if rng.random() < 0.5 else ("K", rng.choice(agents))
            for _ in range(rng.choice((1, 1, 2)))
        )
    neg = rng.random() < 0.5 if neg is None else neg
    return Lit(chain, box if chain else True, neg, rng.choice(agents),
               _lambda(rng, names, agents, actions))


def _as_rule(lits: list[Lit], head_kind: str, rng: random.Random) -> Formula:
    """Write a clause as a rule when its shape allows, else as a sum."""
    heads = [l for l in lits if l.proper and (l.box if head_kind == "box" else not l.box)]
    if rng.random() < 0.3 or len(lits) < 2:
        return oplus_all([l.formula() for l in lits])
    head = heads[0] if heads else None
    prem = [l.negate().formula() for l in lits if l is not head]
    if not prem:
        return oplus_all([l.formula() for l in lits])
    return LImp(odot_all(prem), head.formula() if head else zero())


def random_upr_clause(rng: random.Random, max_lits: int = 2, **kw) -> list[Lit]:
    n = rng.randint(1, max_lits)
    shape = rng.randrange(3)
    if shape == 0:  # one proper box, the rest proper diamonds
        return [random_lit(rng, True, True, **kw)] + [random_lit(rng, False, True, **kw) for _ in range(n - 1)]
    if shape == 1:  # diamonds and propositional literals
        return [random_lit(rng, False, rng.random() < 0.5, **kw) for _ in range(n)]
    return [random_lit(rng, True, False, **kw) for _ in range(n)]


def random_epr_clause(rng: random.Random, max_lits: int = 2, **kw) -> list[Lit]:
    n = rng.randint(1, max_lits)
    shape = rng.randrange(3)
    if shape == 0:  # negated proper boxes plus at most one plain proper diamond
        out = [random_lit(rng, True, True, neg=True, **kw) for _ in range(n - 1)]
        return out + [random_lit(rng, False, True, neg=False, **kw)]
    if shape == 1:  # negated proper boxes and propositional literals
        return [random_lit(rng, True, rng.random() < 0.5, neg=True, **kw) for _ in range(n)]
    return [random_lit(rng, True, False, **kw) for _ in range(n)]


def random_theory(rng: random.Random, kind: str = "UPR", clauses: int = 3, max_lits: int = 2,
                  **kw) -> list[Formula]:
    gen = random_upr_clause if kind == "UPR" else random_epr_clause
    out = []
    for _ in range(clauses):
        c = gen(rng, max_lits, **kw)
        out.append(c[0].formula() if len(c) == 1 else _as_rule(c, "box" if kind == "UPR" else "dia", rng))
    return out


# models


def _partition(rng: random.Random, worlds: list) -> list:
    classes: list = []
    for w in worlds:
        if classes and rng.random() < 0.5:
            rng.choice(classes).add(w)
        else:
            classes.append({w})
    return classes


def random_frame(rng: random.Random, n: int, agents=AGENTS, actions=ACTIONS) -> Frame:
    worlds = list(range(n))
    return Frame(
        worlds,
        {a: _partition(rng, worlds) for a in agents},
        {a: {(u, v) for u in worlds for v in worlds if rng.random() < 0.4} for a in actions},
    )


def random_distribution(rng: random.Random, points: list, g: int = 6) -> dict:
    cuts = sorted(rng.randint(0, g) for _ in range(len(points) - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [g])]
    return {x: Fraction(k, g) for x, k in zip(points, parts) if k}


def random_si_model(rng: random.Random, k: int = 3, m: int = 3, names=VARS, agents=AGENTS,
                    actions=ACTIONS) -> SIModel:
    outer = random_frame(rng, k, agents, actions)
    fr = random_frame(rng, m, agents, actions)
    inner = EventModel(fr.worlds, fr.epistemic, fr.actions,
                       {p: {x for x in fr.worlds if rng.random() < 0.5} for p in names})
    mu = {(w, a): random_distribution(rng, inner.worlds) for w in outer.worlds for a in agents}
    return SIModel(outer, inner, mu)


def random_mod_model(rng: random.Random, k: int = 3, names=VARS, agents=AGENTS, actions=ACTIONS,
                     g: int = 4) -> ModModel:
    fr = random_frame(rng, k, agents, actions)
    return ModModel(fr, {(p, w): Fraction(rng.randint(0, g), g) for p in names for w in fr.worlds})


__all__ = [
    "random_event", "random_mod", "random_prob", "random_lit", "random_theory",
    "random_upr_clause", "random_epr_clause", "random_frame", "random_si_model",
    "random_mod_model", "random_distribution",
]
