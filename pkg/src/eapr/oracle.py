"""Bounded brute-force search for models on rational grids.

Finding nothing is not a proof of unsatisfiability: the search only covers
frames up to the given size and values with the given denominator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from .semantics import EventModel, Frame, ModModel, SIModel, denote, eval_mod, eval_prob, ONE
from .syntax.formula import (
    Box, Const, FNeg, children, Formula, Half, Knows, LImp, PImp, PrAtom, Prod, Var,
    event_actions, event_agents, outer_actions, outer_agents, pratoms, subformulas, variables,
)


@dataclass
class Bounds:
    outer: int = 2  # k
    inner: int = 3  # m
    grid: int = 4  # g


@dataclass
class OracleResult:
    status: str  # SAT | NO_WITNESS_FOUND
    model: object = None
    world: object = 0
    checked: int = 0

    @property
    def sat(self) -> bool:
        return self.status == "SAT"


# combinatorics


def partitions(items: list) -> Iterator[list]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in partitions(rest):
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]
        yield [[first]] + p


def relations(n: int) -> Iterator[frozenset]:
    pairs = [(i, j) for i in range(n) for j in range(n)]
    for bits in itertools.product((False, True), repeat=len(pairs)):
        yield frozenset(p for p, b in zip(pairs, bits) if b)


def frames(n: int, agents: Iterable[str], actions: Iterable[str]) -> Iterator[Frame]:
    agents, actions = sorted(agents), sorted(actions)
    worlds = list(range(n))
    parts = list(partitions(worlds))
    rels = list(relations(n))
    for ps in itertools.product(parts, repeat=len(agents)):
        for rs in itertools.product(rels, repeat=len(actions)):
            yield Frame(worlds, {a: [set(c) for c in p] for a, p in zip(agents, ps)},
                        {a: set(r) for a, r in zip(actions, rs)})


def distributions(n: int, g: int) -> Iterator[tuple]:
    """Mass vectors over n points with every mass a multiple of 1/g."""
    for cuts in itertools.combinations(range(g + n - 1), n - 1):
        prev, parts = -1, []
        for c in cuts + (g + n - 1,):
            parts.append(c - prev - 1)
            prev = c
        yield tuple(Fraction(p, g) for p in parts)


# fast evaluation on a fixed frame


def _postorder(phi: Formula) -> list:
    """Outer-layer subformulas, children first; probability atoms are leaves."""
    out: dict = {}

    def rec(f):
        if f in out:
            return
        if not isinstance(f, (Var, PrAtom, Half, Const)):
            for c in children(f):
                rec(c)
        out[f] = None

    rec(phi)
    return list(out)


def _value_table(phi: Formula, frame: Frame, atom_values) -> dict:
    """Values of every subformula at every world, bottom-up."""
    n = frame.worlds
    table: dict = {}
    for f in _postorder(phi):
        if isinstance(f, (Var, PrAtom)):
            row = {w: atom_values(f, w) for w in n}
        elif isinstance(f, Half):
            row = dict.fromkeys(n, Fraction(1, 2))
        elif isinstance(f, Const):
            row = dict.fromkeys(n, f.value)
        elif isinstance(f, FNeg):
            s = table[f.sub]
            row = {w: 1 - s[w] for w in n}
        elif isinstance(f, Knows):
            s = table[f.sub]
            row = {w: min((s[u] for u in frame.cls(f.agent, w)), default=ONE) for w in n}
        elif isinstance(f, Box):
            s = table[f.sub]
            row = {w: min((s[u] for u in frame.succ(f.action, w)), default=ONE) for w in n}
        else:
            a, b = table[f.left], table[f.right]
            if isinstance(f, LImp):
                row = {w: min(ONE, 1 - a[w] + b[w]) for w in n}
            elif isinstance(f, Prod):
                row = {w: a[w] * b[w] for w in n}
            elif isinstance(f, PImp):
                row = {w: ONE if a[w] <= b[w] else b[w] / a[w] for w in n}
            else:
                raise TypeError(f"unexpected node {f!r}")
        table[f] = row
    return table


def _lukasiewicz_only(phi: Formula) -> bool:
    return not any(isinstance(f, (Prod, PImp)) for f in subformulas(phi))


def _scaled_table(phi: Formula, frame: Frame, vals: dict, g: int) -> Optional[dict]:
    """Integer version of the value table; None if a constant is off the grid."""
    n = frame.worlds
    table: dict = {}
    for f in _postorder(phi):
        if isinstance(f, Var):
            row = {w: vals.get((f.name, w), 0) for w in n}
        elif isinstance(f, (Half, Const)):
            q = Fraction(1, 2) if isinstance(f, Half) else f.value
            if (q * g).denominator != 1:
                return None
            row = dict.fromkeys(n, int(q * g))
        elif isinstance(f, FNeg):
            s = table[f.sub]
            row = {w: g - s[w] for w in n}
        elif isinstance(f, Knows):
            s = table[f.sub]
            row = {w: min((s[u] for u in frame.cls(f.agent, w)), default=g) for w in n}
        elif isinstance(f, Box):
            s = table[f.sub]
            row = {w: min((s[u] for u in frame.succ(f.action, w)), default=g) for w in n}
        else:
            a, b = table[f.left], table[f.right]
            row = {w: min(g, g - a[w] + b[w]) for w in n}
        table[f] = row
    return table


def oracle_sat_mod(phi: Formula, bounds: Bounds = Bounds(), world_limit: Optional[int] = None) -> OracleResult:
    """First grid ModModel (searched by increasing size) where phi takes value 1 at world 0."""
    g = bounds.grid
    names = sorted(variables(phi))
    fast = _lukasiewicz_only(phi)
    checked = 0
    for n in range(1, (world_limit or bounds.outer) + 1):
        cells = [(p, w) for p in names for w in range(n)]
        for fr in frames(n, outer_agents(phi), outer_actions(phi)):
            for combo in itertools.product(range(g + 1), repeat=len(cells)):
                checked += 1
                ivals = dict(zip(cells, combo))
                if fast:
                    t = _scaled_table(phi, fr, ivals, g)
                    if t is not None:
                        if t[phi][0] != g:
                            continue
                        return _mod_hit(phi, fr, ivals, g, checked)
                vals = {k: Fraction(v, g) for k, v in ivals.items()}
                t = _value_table(phi, fr, lambda f, w: vals.get((f.name, w), Fraction(0)))
                if t[phi][0] == ONE:
                    return _mod_hit(phi, fr, ivals, g, checked)
    return OracleResult("NO_WITNESS_FOUND", checked=checked)


def _mod_hit(phi, fr, ivals, g, checked) -> OracleResult:
    m = ModModel(fr, {k: Fraction(v, g) for k, v in ivals.items()})
    assert eval_mod(phi, m, 0) == ONE
    return OracleResult("SAT", m, 0, checked)


# probabilistic models


def _inner_models(n: int, agents, actions, names) -> Iterator[EventModel]:
    cells = [(p, x) for p in names for x in range(n)]
    for fr in frames(n, agents, actions):
        for bits in itertools.product((False, True), repeat=len(cells)):
            val = {p: set() for p in names}
            for (p, x), b in zip(cells, bits):
                if b:
                    val[p].add(x)
            yield EventModel(fr.worlds, dict(fr.epistemic), dict(fr.actions), val)


def _event_parts(phi: Formula):
    events = sorted({a.event for a in pratoms(phi)}, key=repr)
    agents, actions, names = set(), set(), set()
    for e in events:
        agents |= event_agents(e)
        actions |= event_actions(e)
        names |= variables(e)
    return events, sorted(agents), sorted(actions), sorted(names)


def iter_prob_models(phi: Formula, bounds: Bounds = Bounds()) -> Iterator[SIModel]:
    """Every SI model in the bounded space (no deduplication)."""
    events, iag, iact, names = _event_parts(phi)
    pagents = sorted({a.agent for a in pratoms(phi)})
    for m in range(1, bounds.inner + 1):
        dists = list(distributions(m, bounds.grid))
        for inner in _inner_models(m, iag, iact, names):
            for n in range(1, bounds.outer + 1):
                for fr in frames(n, outer_agents(phi), outer_actions(phi)):
                    keys = [(w, a) for w in fr.worlds for a in pagents]
                    for choice in itertools.product(dists, repeat=len(keys)):
                        mu = {k: {x: q for x, q in enumerate(d) if q} for k, d in zip(keys, choice)}
                        yield SIModel(fr, inner, mu)


def model_count_prob(phi: Formula, bounds: Bounds) -> int:
    return sum(1 for _ in iter_prob_models(phi, bounds))


def oracle_sat_prob(phi: Formula, bounds: Bounds = Bounds()) -> OracleResult:
    """Search grouped by the denotations of the events inside phi's probability atoms."""
    events, iag, iact, names = _event_parts(phi)
    pagents = sorted({a.agent for a in pratoms(phi)})
    by_agent = {a: [e for e in events if PrAtom(a, e) in pratoms(phi)] for a in pagents}
    seen: set = set()
    checked = 0
    for m in range(1, bounds.inner + 1):
        dists = list(distributions(m, bounds.grid))
        for inner in _inner_models(m, iag, iact, names):
            memo: dict = {}
            ext = {e: denote(e, inner, memo) for e in events}
            sig = (m, tuple(ext[e] for e in events))
            if sig in seen:
                continue
            seen.add(sig)
            # achievable probability vectors per agent, each with one realizing distribution
            options = {}
            for a in pagents:
                vecs: dict = {}
                for d in dists:
                    v = tuple(sum((d[x] for x in ext[e]), Fraction(0)) for e in by_agent[a])
                    vecs.setdefault(v, d)
                options[a] = list(vecs.items())
            for n in range(1, bounds.outer + 1):
                for fr in frames(n, outer_agents(phi), outer_actions(phi)):
                    keys = [(w, a) for w in fr.worlds for a in pagents]
                    for choice in itertools.product(*(options[a] for _, a in keys)):
                        checked += 1
                        at = {}
                        for (w, a), (vec, _) in zip(keys, choice):
                            for e, q in zip(by_agent[a], vec):
                                at[PrAtom(a, e), w] = q
                        t = _value_table(phi, fr, lambda f, w: at[f, w])
                        if t[phi][0] == ONE:
                            mu = {k: {x: q for x, q in enumerate(d) if q} for k, (_, d) in zip(keys, choice)}
                            model = SIModel(fr, inner, mu)
                            assert eval_prob(phi, model, 0) == ONE
                            return OracleResult("SAT", model, 0, checked)
    return OracleResult("NO_WITNESS_FOUND", checked=checked)


def oracle_sat(phi: Formula, bounds: Bounds = Bounds()) -> OracleResult:
    if pratoms(phi):
        return oracle_sat_prob(phi, bounds)
    return oracle_sat_mod(phi, bounds)
